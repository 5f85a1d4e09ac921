"""Fixed CSV schema for sweep output, plus config hashing.

Floats are written with shortest round-trip repr so identical runs produce
byte-identical value fields; wall_time_s is the one intentionally
nondeterministic column.
"""

import csv
import hashlib
import json

from .analysis import SweepRecord

CSV_SCHEMA = ["model", "P_m", "P_n", "A", "d", "grid_n", "value", "residual",
              "steps", "wall_time_s", "config_hash", "error"]


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(path, rows):
    """rows: iterables of dicts keyed by the schema columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_SCHEMA)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in CSV_SCHEMA})


def read_records(path):
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepRecord(
                model=row["model"],
                P_m=float(row["P_m"] or "nan"),
                P_n=float(row["P_n"] or "nan"),
                A=float(row["A"] or "nan"),
                d=float(row["d"] or "nan"),
                value=float(row["value"] or "nan"),
                grid_n=int(row["grid_n"] or 0),
                residual=float(row["residual"] or "nan"),
                steps=int(row["steps"] or 0),
                wall_time_s=float(row["wall_time_s"] or "nan"),
                config_hash=row.get("config_hash", ""),
                error=row.get("error", "")))
    return out
