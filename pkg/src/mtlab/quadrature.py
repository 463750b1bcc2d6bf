"""Singular-weight radial integrals and the truncated exponential series.

Every functional in the package reduces to one-dimensional integrals of the
form omega_{N-1} * int f(u(r)) r^{N-1-w} dr over the support of a
piecewise-linear profile.  The innermost cell [0, r_0], where the profile is
constant, is integrated analytically (that removes the only genuine
singularity exactly); the remaining cells use Gauss-Legendre panels, with
bisection refinement for integrands carrying the exponential factor.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NonconvergentError, ParameterError
from .exponents import ExponentConfig, sphere_area
from .profiles import ComposedProfile, RadialProfile

__all__ = [
    "QuadratureSettings",
    "DEFAULT_SETTINGS",
    "phi_series",
    "phi_series_deriv",
    "exp_tail",
    "integrate_cells",
    "profile_integral",
    "weighted_norm",
    "grad_norm",
    "exp_functional",
    "phi_functional",
]


@dataclass
class QuadratureSettings:
    """Tolerances for the cell integrator.

    rel_tol      successive-refinement agreement target (adaptive paths)
    gauss_order  points per Gauss-Legendre panel
    max_depth    bisection levels before giving up
    """

    rel_tol: float = 1e-9
    gauss_order: int = 16
    max_depth: int = 14


DEFAULT_SETTINGS = QuadratureSettings()

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = leggauss(order)
    return _GAUSS_CACHE[order]


# ---------------------------------------------------------------------------
# Truncated exponential series
# ---------------------------------------------------------------------------

def _exp_tail_series(m0: int, x: np.ndarray) -> np.ndarray:
    """sum_{j>=m0} x^j/j! by direct summation; accurate for x < m0 + 1."""
    term = x**m0 / math.factorial(m0)
    acc = term.copy()
    j = m0 + 1
    while True:
        term = term * x / j
        acc += term
        j += 1
        if np.all(term <= 1e-17 * np.maximum(acc, 1e-300)) or j > m0 + 500:
            return acc


def _exp_tail_closed(m0: int, x: np.ndarray) -> np.ndarray:
    """e^x minus the first m0 Taylor terms; safe from cancellation for x >= m0 + 1."""
    partial = np.zeros_like(x)
    term = np.ones_like(x)
    for j in range(m0):
        partial += term
        term = term * x / (j + 1)
    return np.exp(x) - partial


def exp_tail(m0: int, x):
    """sum_{j>=m0} x^j/j! for x >= 0, without catastrophic cancellation.

    Small arguments (x < m0 + 1) use the direct series, where the closed
    form e^x minus a partial sum would lose all digits as x -> 0; larger
    arguments use the closed form, where the partial sum is subdominant.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).copy()
    if np.any(arr < 0.0):
        raise ParameterError("truncated exponential defined for nonnegative arguments")
    out = np.empty_like(arr)
    lo = arr < m0 + 1.0
    if np.any(lo):
        out[lo] = _exp_tail_series(m0, arr[lo])
    if np.any(~lo):
        out[~lo] = _exp_tail_closed(m0, arr[~lo])
    return float(out[0]) if scalar else out


def phi_series(N: int, x):
    """Exponential with its first N-1 Taylor terms removed: sum_{j>=N-1} x^j/j!."""
    if N < 2:
        raise ParameterError(f"dimension too small: N = {N}")
    return exp_tail(N - 1, x)


def phi_series_deriv(N: int, x):
    """Derivative of phi_series in x: sum_{j>=N-2} x^j/j!."""
    if N < 2:
        raise ParameterError(f"dimension too small: N = {N}")
    return exp_tail(N - 2, x)


# ---------------------------------------------------------------------------
# Cell integrator
# ---------------------------------------------------------------------------

def integrate_cells(lo, hi, f, settings: QuadratureSettings | None = None, adaptive: bool = True) -> float:
    """Integrate a vectorized integrand over the union of cells [lo_i, hi_i].

    One Gauss panel per cell; with adaptive=True cells are bisected until the
    refined estimate agrees with the coarse one to settings.rel_tol (relative
    to the cell value, with an absolute floor derived from the global scale).
    Cells are accumulated in index order, so results are deterministic.
    """
    settings = settings or DEFAULT_SETTINGS
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return 0.0
    xg, wg = _gauss_rule(settings.gauss_order)

    def panels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * xg[None, :]
        vals = f(pts.ravel()).reshape(pts.shape)
        return (vals @ wg) * half

    coarse = panels(lo, hi)
    if not adaptive:
        return float(np.sum(coarse))

    scale = max(float(np.sum(np.abs(coarse))), 1e-300)
    floor = scale / max(len(lo), 1)
    total = 0.0
    a, b, est = lo, hi, coarse
    for _depth in range(settings.max_depth):
        mid = 0.5 * (a + b)
        left = panels(a, mid)
        right = panels(mid, b)
        fine = left + right
        ok = np.abs(fine - est) <= settings.rel_tol * np.maximum(np.abs(fine), floor)
        total += float(np.sum(fine[ok]))
        if np.all(ok):
            return total
        bad = ~ok
        a = np.concatenate([a[bad], mid[bad]])
        b = np.concatenate([mid[bad], b[bad]])
        est = np.concatenate([left[bad], right[bad]])
    raise NonconvergentError(
        f"{int(np.sum(~ok))} cells failed to reach rel_tol {settings.rel_tol} "
        f"within {settings.max_depth} bisection levels"
    )


def _edges_and_inner(p):
    """Cell edges in the evaluation variable, plus the constant inner value."""
    if isinstance(p, ComposedProfile):
        edges = p.base.radii ** (1.0 / p.radial_exponent)
        inner_value = p.amplitude * p.base.values[0]
    elif isinstance(p, RadialProfile):
        edges = p.radii
        inner_value = p.values[0]
    else:
        raise ParameterError(f"unsupported profile type {type(p).__name__}")
    return edges, inner_value


def profile_integral(
    p,
    N: int,
    weight: float,
    u_factor,
    settings: QuadratureSettings | None = None,
    adaptive: bool = True,
) -> float:
    """omega_{N-1} * int_0^inf u_factor(u(r)) r^{N-1-weight} dr.

    u_factor must be vectorized and satisfy u_factor(0) = 0 so the integrand
    vanishes beyond the support.  The plateau cell is analytic: the profile
    is constant there, so the radial factor integrates to r_0^{N-w}/(N-w).
    For composed profiles the evaluator is called directly at quadrature
    points of the base grid mapped through the reparameterization, so no
    resampling error enters.
    """
    if weight >= N:
        raise ParameterError(f"weight integrability violated: weight = {weight} must be < N = {N}")
    edges, inner_value = _edges_and_inner(p)
    inner_factor = float(np.asarray(u_factor(np.array([inner_value])))[0])
    inner = inner_factor * edges[0] ** (N - weight) / (N - weight)

    def integrand(r: np.ndarray) -> np.ndarray:
        return u_factor(p(r)) * r ** (N - 1 - weight)

    body = integrate_cells(edges[:-1], edges[1:], integrand, settings, adaptive=adaptive)
    return sphere_area(N) * (inner + body)


# ---------------------------------------------------------------------------
# Named functionals
# ---------------------------------------------------------------------------

def weighted_norm(p, N: int, power: float, weight: float, settings: QuadratureSettings | None = None) -> float:
    """(omega_{N-1} * int |u|^power r^{N-1-weight} dr)^(1/power).

    The integrand has no exponential factor, so fixed-order panels suffice.
    """
    if power < 1.0:
        raise ParameterError(f"power must be >= 1, got {power}")
    val = profile_integral(p, N, weight, lambda u: np.abs(u) ** power, settings, adaptive=False)
    return val ** (1.0 / power)


def _segment_slopes(p: RadialProfile) -> np.ndarray:
    return p.slopes()


def grad_norm(p, N: int, settings: QuadratureSettings | None = None) -> float:
    """Gradient N-norm (omega_{N-1} * int |u'(r)|^N r^{N-1} dr)^(1/N).

    For a piecewise-linear profile the derivative is constant per cell, so
    each cell integral is the exact power-rule value; no quadrature error.
    For composed profiles the chain-rule integrand is evaluated by panels on
    the mapped grid, which keeps the two sides of transform identities
    numerically independent.
    """
    if isinstance(p, RadialProfile):
        m = _segment_slopes(p)
        r = p.radii
        cells = np.abs(m) ** N * (r[1:] ** N - r[:-1] ** N)
        return (sphere_area(N) / N * float(np.sum(cells))) ** (1.0 / N)
    if not isinstance(p, ComposedProfile):
        raise ParameterError(f"unsupported profile type {type(p).__name__}")

    base = p.base
    gamma = p.radial_exponent
    amp = p.amplitude
    slopes = _segment_slopes(base)
    edges = base.radii ** (1.0 / gamma)

    def integrand(rho: np.ndarray) -> np.ndarray:
        r = rho**gamma
        idx = np.clip(np.searchsorted(base.radii, r, side="right") - 1, 0, len(slopes) - 1)
        inside = (r >= base.radii[0]) & (r <= base.radii[-1])
        m = np.where(inside, slopes[idx], 0.0)
        dv = amp * gamma * rho ** (gamma - 1.0) * m
        return np.abs(dv) ** N * rho ** (N - 1)

    body = integrate_cells(edges[:-1], edges[1:], integrand, settings, adaptive=False)
    return (sphere_area(N) * body) ** (1.0 / N)


def exp_functional(
    p,
    cfg: ExponentConfig,
    power: float,
    weight: float,
    settings: QuadratureSettings | None = None,
) -> float:
    """omega_{N-1} * int e^{alpha |u|^{N'}} |u|^power r^{N-1-weight} dr."""
    if power < 1.0:
        raise ParameterError(f"power must be >= 1, got {power}")
    alpha, nprime = cfg.alpha, cfg.nprime

    def factor(u: np.ndarray) -> np.ndarray:
        au = np.abs(u)
        return np.exp(alpha * au**nprime) * au**power

    return profile_integral(p, cfg.N, weight, factor, settings, adaptive=True)


def phi_functional(
    p,
    cfg: ExponentConfig,
    weight: float,
    settings: QuadratureSettings | None = None,
) -> float:
    """omega_{N-1} * int phi_series(N, alpha |u|^{N'}) r^{N-1-weight} dr."""
    alpha, nprime, N = cfg.alpha, cfg.nprime, cfg.N

    def factor(u: np.ndarray) -> np.ndarray:
        return phi_series(N, alpha * np.abs(u) ** nprime)

    return profile_integral(p, N, weight, factor, settings, adaptive=True)
