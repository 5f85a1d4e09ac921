"""Prescribed periodic flow fields: the cellular flow and shear flows.

The cellular flow is the perpendicular gradient of the stream function
H(x) = sin(2 pi x1) sin(2 pi x2), either raw (amplitude A times grad-perp H)
or scaled by 1/(2 pi) so the amplitude parameter matches the sweep tables.
Shear flows are (A v(y), 0) for a periodic profile v.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelParams
from .grid import RegionMask

TWO_PI = 2.0 * np.pi


def stream_function(x1, x2):
    return np.sin(TWO_PI * x1) * np.sin(TWO_PI * x2)


def stream_values(grid):
    x1, x2 = grid.coords()
    return stream_function(x1, x2)


def grad_perp_stream(x1, x2):
    """grad-perp H = (-dH/dx2, dH/dx1), the unit-amplitude cellular velocity."""
    v1 = -TWO_PI * np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2)
    v2 = TWO_PI * np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2)
    return v1, v2


def eval_cellular(x, A, normalization="raw"):
    """Cellular velocity at a point; 'scaled' divides grad-perp H by 2 pi."""
    v1, v2 = grad_perp_stream(x[0], x[1])
    s = A if normalization == "raw" else A / TWO_PI
    return np.array([s * v1, s * v2])


@dataclass
class ShearProfile:
    """Periodic profile v(y) with analytic derivative and maximizer data."""

    name: str
    fn: callable
    dfn: callable
    mean: float
    vmax: float
    maximizers: tuple
    curvature_at_max: tuple  # |v''| at each maximizer
    params: dict = field(default_factory=dict)

    def __call__(self, y):
        return self.fn(y)

    def sample(self, grid):
        return self.fn(grid.axis_coords(0))


def _numeric_profile_metadata(fn, samples=65536):
    y = np.arange(samples) / samples
    v = fn(y)
    if v.max() - v.min() <= 1e-13:
        raise InvalidModelParams("shear profile is identically constant")
    mean = float(v.mean())
    vmax = float(v.max())
    # local maxima within 1e-9 of the global max, refined second derivative
    near = np.flatnonzero((v >= vmax - 1e-9)
                          & (v >= np.roll(v, 1)) & (v >= np.roll(v, -1)))
    # collapse runs of adjacent indices
    maximizers = []
    for idx in near:
        yy = idx / samples
        if not maximizers or min(abs(yy - m), 1 - abs(yy - m)) > 2.0 / samples:
            maximizers.append(yy)
    eps = 1e-4
    curv = tuple(abs(float((fn(np.array([m - eps])) - 2 * fn(np.array([m]))
                            + fn(np.array([m + eps]))) / eps**2)) for m in maximizers)
    return mean, vmax, tuple(maximizers), curv


def shear_profile(name, **params):
    """Factory for the built-in profiles; 'custom' takes fn (and optional dfn)."""
    if name == "cosine":
        fn = lambda y: np.cos(TWO_PI * y)
        dfn = lambda y: -TWO_PI * np.sin(TWO_PI * y)
        return ShearProfile("cosine", fn, dfn, 0.0, 1.0, (0.0,), (4 * np.pi**2,))
    if name == "cosine_minus_one":
        fn = lambda y: np.cos(TWO_PI * y) - 1.0
        dfn = lambda y: -TWO_PI * np.sin(TWO_PI * y)
        return ShearProfile("cosine_minus_one", fn, dfn, -1.0, 0.0, (0.0,),
                            (4 * np.pi**2,))
    if name == "two_bump":
        c = float(params.get("c", 1.0))
        eps = float(params.get("eps", 0.3))
        if not 0.0 < eps < 1.0:
            raise InvalidModelParams("two_bump needs 0 < eps < 1")

        def fn(y):
            return -c * np.sin(TWO_PI * y) ** 2 * (1.0 + eps * np.cos(TWO_PI * y))

        def dfn(y):
            s, co = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
            return -c * TWO_PI * s * (2 * co * (1 + eps * co) - eps * s**2)

        curv = (8 * np.pi**2 * c * (1 + eps), 8 * np.pi**2 * c * (1 - eps))
        return ShearProfile("two_bump", fn, dfn, -0.5 * c, 0.0, (0.0, 0.5), curv,
                            {"c": c, "eps": eps})
    if name == "custom":
        fn = params["fn"]
        dfn = params.get("dfn")
        if dfn is None:
            fd_eps = 1e-6
            dfn = lambda y: (fn(y + fd_eps) - fn(y - fd_eps)) / (2 * fd_eps)
        mean, vmax, maxima, curv = _numeric_profile_metadata(fn)
        return ShearProfile("custom", fn, dfn, mean, vmax, maxima, curv)
    raise InvalidModelParams(f"unknown shear profile '{name}'")


@dataclass
class FlowField:
    """A velocity field with the intensity folded in.

    kind 'cellular' uses the stream-function flow, 'shear' a 1D profile in y,
    'zero' the zero field.  normalization 'scaled' divides the cellular flow
    by 2 pi (the convention of the sweep tables); shear and zero ignore it.
    """

    kind: str
    amplitude: float = 1.0
    normalization: str = "raw"
    profile: ShearProfile = None

    def __post_init__(self):
        if self.kind not in ("cellular", "shear", "zero"):
            raise InvalidModelParams(f"unknown flow kind '{self.kind}'")
        if self.amplitude < 0:
            raise InvalidModelParams("flow amplitude must be >= 0")
        if self.normalization not in ("raw", "scaled"):
            raise InvalidModelParams("normalization must be 'raw' or 'scaled'")
        if self.kind == "shear":
            if self.profile is None:
                raise InvalidModelParams("shear flow needs a profile")
            if abs(self.profile.mean) > 1e-12:
                warnings.warn(
                    f"shear profile '{self.profile.name}' has nonzero mean "
                    f"{self.profile.mean:g}; the eigenvalue shifts by A*m*mean")

    @property
    def scale(self):
        s = self.amplitude
        if self.kind == "cellular" and self.normalization == "scaled":
            s /= TWO_PI
        return s

    def velocity(self, grid):
        """Node-sampled velocity components (amplitude included)."""
        shape = grid.shape
        if self.kind == "zero" or self.amplitude == 0.0:
            return np.zeros(shape), np.zeros(shape)
        if self.kind == "cellular":
            x1, x2 = grid.coords()
            v1, v2 = grad_perp_stream(x1, x2)
            return self.scale * v1, self.scale * v2
        # shear: v depends on x2 only, pushes along x1
        x1, x2 = grid.coords()
        return self.amplitude * self.profile.fn(x2), np.zeros(shape)

    def unit_velocity(self, grid):
        """The raw unit-amplitude velocity shape (grad-perp H for cellular)."""
        unit = FlowField(self.kind, 1.0, "raw", self.profile)
        return unit.velocity(grid)

    def face_velocities(self, grid):
        """Face-normal velocities with exactly zero discrete divergence.

        v1f[i, j] lives on the face between nodes (i, j) and (i+1, j), v2f on
        the face between (i, j) and (i, j+1).  For the cellular flow they come
        from corner differences of the stream function, so the flux divergence
        telescopes to zero in exact arithmetic.
        """
        n1, n2 = grid.shape
        h1, h2 = grid.h
        if self.kind == "zero" or self.amplitude == 0.0:
            return np.zeros((n1, n2)), np.zeros((n1, n2))
        if self.kind == "cellular":
            xc = grid.axis_coords(0) + 0.5 * h1
            yc = grid.axis_coords(1) + 0.5 * h2
            Hc = stream_function(xc[:, None], yc[None, :])  # corner (i+1/2, j+1/2)
            v1f = -(Hc - np.roll(Hc, 1, axis=1)) / h2
            v2f = (Hc - np.roll(Hc, 1, axis=0)) / h1
            return self.scale * v1f, self.scale * v2f
        x2 = grid.axis_coords(1)
        v1f = np.broadcast_to(self.amplitude * self.profile.fn(x2), (n1, n2)).copy()
        return v1f, np.zeros((n1, n2))

    def max_speed(self, grid):
        v1, v2 = self.velocity(grid)
        return max(float(np.abs(v1).max()), float(np.abs(v2).max()))


def cellular_flow(A, normalization="scaled"):
    return FlowField("cellular", A, normalization)


def shear_flow(A, profile):
    return FlowField("shear", A, profile=profile)


def band_mask(grid, lo, hi):
    """Nodes with lo <= |H| <= hi; an empty mask is returned but flagged."""
    if not 0.0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    absH = np.abs(stream_values(grid))
    m = RegionMask(grid, (absH >= lo) & (absH <= hi))
    if m.flagged_empty:
        warnings.warn(f"band mask [{lo:g}, {hi:g}] is empty on n={grid.shape}")
    return m


def quarter_cells(grid):
    """The four quarter cells of the torus, split by the signs of sin(2 pi x_i).

    C1 and C3 carry H > 0, C2 and C4 carry H < 0; nodes on the zero level set
    belong to none of them.
    """
    x1, x2 = grid.coords()
    s1 = np.sin(TWO_PI * x1)
    s2 = np.sin(TWO_PI * x2)
    c1 = RegionMask(grid, (s1 > 0) & (s2 > 0))
    c2 = RegionMask(grid, (s1 < 0) & (s2 > 0))
    c3 = RegionMask(grid, (s1 < 0) & (s2 < 0))
    c4 = RegionMask(grid, (s1 > 0) & (s2 < 0))
    return c1, c2, c3, c4
