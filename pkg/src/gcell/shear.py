"""1D shear-flow cell problems: viscous, curvature, quadratic, and the
linear-growth limit problem.

All models relax phi_t + N(phi) = 0 on the unit circle with central
differences for phi' and phi''; the second-derivative term is implicit
(periodic tridiagonal solve per step) and the Hamiltonian explicit.  With
d = 0 the Hamiltonian switches to a Godunov upwind flux.  The eigenvalue is
minus the mean of phi_t at convergence (uniform phi_t spread below tol).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateProfile, InvalidModelParams, NonConvergence
from .flows import ShearProfile
from .grid import PeriodicGrid, ScalarField1D

MODELS = ("viscous_g", "curvature_g", "quadratic_jkm", "limit_problem")


@dataclass
class ShearSpec:
    m: float
    n: float
    A: float
    d: float
    model: str
    profile: ShearProfile
    grid_n: int = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidModelParams(f"unknown shear model '{self.model}'")
        if self.model == "curvature_g" and self.m == 0.0:
            raise InvalidModelParams("curvature model needs m != 0")
        if self.model in ("quadratic_jkm", "limit_problem") and self.d <= 0.0:
            raise InvalidModelParams(f"{self.model} requires d > 0")
        if self.d < 0 or self.A < 0:
            raise InvalidModelParams("need d >= 0 and A >= 0")
        if self.grid_n is None:
            self.grid_n = default_grid_n(self.d)


@dataclass
class ShearResult:
    lam: float
    phi: ScalarField1D
    residual: float
    steps: int
    grid_n: int
    model: str
    meta: dict = field(default_factory=dict)


def default_grid_n(d):
    """Interior layers are O(d) wide; resolve them at the sweep's smallest d."""
    return 2048 if d >= 1e-2 or d == 0.0 else 8192


def _cyclic_tridiag_solve(lower, diag, upper, corner_ul, corner_lr, rhs):
    """Solve a periodic tridiagonal system via Sherman-Morrison.

    corner_ul is A[0, n-1], corner_lr is A[n-1, 0].
    """
    n = diag.size
    gamma = -diag[0]
    d2 = diag.copy()
    d2[0] -= gamma
    d2[-1] -= corner_ul * corner_lr / gamma
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = d2
    ab[2, :-1] = lower[1:]
    B = np.column_stack([rhs, np.zeros(n)])
    B[0, 1] = gamma
    B[-1, 1] = corner_lr
    sol = sla.solve_banded((1, 1), ab, B, check_finite=False)
    y, z = sol[:, 0], sol[:, 1]
    fac = (y[0] + corner_ul * y[-1] / gamma) / (1.0 + z[0] + corner_ul * z[-1] / gamma)
    return y - fac * z


def _second_diff(n, h):
    K = sp.diags([np.full(n, -2.0), np.ones(n - 1), np.ones(n - 1)],
                 [0, 1, -1], format="lil")
    K[0, -1] = 1.0
    K[-1, 0] = 1.0
    return (K / h**2).tocsc()


def _hamiltonian(spec, dphi, v):
    if spec.model == "viscous_g" or spec.model == "curvature_g":
        return np.hypot(spec.m, spec.n + dphi) + spec.A * spec.m * v
    if spec.model == "limit_problem":
        return np.abs(dphi) + spec.m * v
    return 0.5 * dphi**2 + v  # quadratic_jkm


def _godunov_hamiltonian(spec, phi, h, v):
    """Upwind flux for the d = 0 models: convex H with minimizer q* = -n."""
    dm = (phi - np.roll(phi, 1)) / h
    dp = (np.roll(phi, -1) - phi) / h
    if spec.model == "limit_problem":
        m_eff, n_eff, src = 0.0, 0.0, spec.m * v
    else:
        m_eff, n_eff, src = spec.m, spec.n, spec.A * spec.m * v
    qstar = -n_eff
    grad = lambda q: np.hypot(m_eff, n_eff + q)
    val = np.where(dm <= dp,
                   grad(np.clip(qstar, dm, dp)),
                   np.maximum(grad(dm), grad(dp)))
    return val + src


def _lipschitz_bound(spec, v):
    if spec.model == "quadratic_jkm":
        return math.sqrt(2.0 * max(float(v.max() - v.min()), 1e-30)) + 1.0
    return 1.0  # |dH/dq| <= 1 for the hypot Hamiltonians


def solve_shear(spec, tol=1e-9, max_steps=2_000_000):
    """Relax the chosen model to its traveling state and report the eigenvalue.

    Returns the mean-zero converged profile; residual is the final sup-inf
    spread of the discrete phi_t.
    """
    t_start = time.perf_counter()
    n = spec.grid_n
    grid = PeriodicGrid((n,))
    h = 1.0 / n
    y = grid.axis_coords(0)
    v = spec.profile.fn(y)

    inviscid = spec.d == 0.0
    lip = _lipschitz_bound(spec, v)
    dt = 0.45 * h / lip if inviscid else 0.5 * h / lip

    lu = None
    a_base = dt * spec.d / h**2
    if not inviscid and spec.model != "curvature_g":
        K = _second_diff(n, h)
        lu = spla.splu((sp.identity(n, format="csc") - dt * spec.d * K).tocsc())

    phi = np.zeros(n)
    steps = 0
    spread = np.inf
    lam = float("nan")
    converged = False
    while steps < max_steps:
        if inviscid:
            ham = _godunov_hamiltonian(spec, phi, h, v)
            phi_new = phi - dt * ham
        else:
            dphi = (np.roll(phi, -1) - np.roll(phi, 1)) / (2.0 * h)
            rhs = phi - dt * _hamiltonian(spec, dphi, v)
            if spec.model != "curvature_g":
                phi_new = lu.solve(rhs)
            else:
                c = spec.m**2 / (spec.m**2 + (spec.n + dphi) ** 2)
                a = a_base * c
                phi_new = _cyclic_tridiag_solve(-a, 1.0 + 2.0 * a, -a,
                                                -a[0], -a[-1], rhs)
        gt = (phi_new - phi) / dt
        spread = float(gt.max() - gt.min())
        lam = -float(gt.mean())
        phi = phi_new - phi_new.mean()
        steps += 1
        if spread <= tol:
            converged = True
            break

    result = ShearResult(
        lam=lam, phi=ScalarField1D(grid, phi), residual=spread, steps=steps,
        grid_n=n, model=spec.model,
        meta={"dt": dt, "tol": tol, "A": spec.A, "d": spec.d,
              "m": spec.m, "n": spec.n, "profile": spec.profile.name,
              "wall_time_s": time.perf_counter() - t_start})
    if not converged:
        raise NonConvergence(
            f"shear relaxation used {steps} steps, spread {spread:.3e} > "
            f"tol {tol:g}", result=result)
    return result


@dataclass
class SlopeEstimate:
    A_list: tuple
    ratios: tuple
    ratio_at_max: float
    extrapolated: float
    results: tuple


def asymptotic_slope(model, m, n, d, profile, A_list, grid_n=None, tol=1e-9):
    """Estimate lim lambda(A)/A from an increasing intensity sweep.

    The extrapolated value is the last difference quotient
    (lambda_max - lambda_prev)/(A_max - A_prev), which removes the O(1)
    offset of the linear growth law.
    """
    A_list = tuple(float(a) for a in A_list)
    if len(A_list) < 3 or any(b <= a for a, b in zip(A_list, A_list[1:])):
        raise InvalidModelParams("need an increasing A_list with >= 3 entries")
    results = []
    for A in A_list:
        spec = ShearSpec(m=m, n=n, A=A, d=d, model=model, profile=profile,
                         grid_n=grid_n)
        results.append(solve_shear(spec, tol=tol))
    lams = [r.lam for r in results]
    ratios = tuple(l / a for l, a in zip(lams, A_list))
    extrap = (lams[-1] - lams[-2]) / (A_list[-1] - A_list[-2])
    return SlopeEstimate(A_list=A_list, ratios=ratios, ratio_at_max=ratios[-1],
                         extrapolated=extrap, results=tuple(results))


def _transition_point(phi, grid_n):
    """Midpoint of the grid interval where phi' flips - to + at the global
    minimum of phi (the profile switches from decreasing to increasing)."""
    h = 1.0 / grid_n
    dphi = (np.roll(phi, -1) - np.roll(phi, 1)) / (2.0 * h)
    nxt = np.roll(dphi, -1)
    flips = np.flatnonzero((dphi < 0.0) & (nxt >= 0.0))
    if flips.size == 0:
        return float("nan")
    depth = np.minimum(phi[flips], phi[(flips + 1) % grid_n])
    j = int(flips[np.argmin(depth)])
    return (j + 0.5) * h


@dataclass
class JkmRow:
    d: float
    lam: float
    ratio: float  # I_d / d
    transition_y: float


def jkm_limit_check(profile, d_list, grid_n=None, tol=1e-10):
    """Vanishing-viscosity check for the quadratic model.

    Requires max v = 0 with nondegenerate maximizers of distinct curvature;
    reports I_d/d per diffusivity together with the selected transition point.
    """
    if abs(profile.vmax) > 1e-10:
        raise InvalidModelParams("quadratic limit check needs max v = 0")
    curv = profile.curvature_at_max
    if any(c < 1e-8 for c in curv):
        raise DegenerateProfile("a maximizer has |v''| below 1e-8")
    if len(curv) > 1:
        pairs = [(a, b) for i, a in enumerate(curv) for b in curv[i + 1:]]
        if any(abs(a - b) <= 1e-6 * max(a, b) for a, b in pairs):
            raise DegenerateProfile("maximizer curvatures |v''| are not distinct")
    rows = []
    for d in d_list:
        spec = ShearSpec(m=1.0, n=0.0, A=1.0, d=float(d), model="quadratic_jkm",
                         profile=profile, grid_n=grid_n)
        res = solve_shear(spec, tol=tol)
        rows.append(JkmRow(d=float(d), lam=res.lam, ratio=res.lam / float(d),
                           transition_y=_transition_point(res.phi.values,
                                                          res.grid_n)))
    return rows


@dataclass
class QuadraticLawRow:
    d: float
    minus_lambda_bar: float
    scaled: float  # -lambda_bar / d^2


def d_sweep_quadratic_law(profile, m, d_list, grid_n=None, tol=1e-10):
    """Limit-problem sweep emitting the d^2-scaled eigenvalue column.

    Valid when max(m v) = 0 so the inviscid value vanishes and the whole
    eigenvalue is the viscous correction.
    """
    y = np.arange(8192) / 8192.0
    if abs(float(np.max(m * profile.fn(y)))) > 1e-9:
        raise InvalidModelParams("quadratic-law sweep needs max(m v) = 0")
    rows = []
    for d in d_list:
        spec = ShearSpec(m=m, n=0.0, A=1.0, d=float(d), model="limit_problem",
                         profile=profile, grid_n=grid_n)
        res = solve_shear(spec, tol=tol)
        rows.append(QuadraticLawRow(d=float(d), minus_lambda_bar=-res.lam,
                                    scaled=-res.lam / float(d) ** 2))
    return rows
