"""Change-of-variables devices and their numerical verification.

Two substitutions do all the work in this problem family:

* the radial "peel" map, which composes a profile with a power
  reparameterization so that a |x|^{-e} weight is absorbed into an
  unweighted integral, and
* the logarithmic substitution, which turns radial integrals into
  one-dimensional integrals against e^{-t} dt on the line.

Each verification computes both sides of an identity by independent
quadratures and reports relative errors.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .exponents import ExponentConfig, make_config, moser_constant, sphere_area
from .profiles import ComposedProfile, RadialProfile, uniform_stream
from .quadrature import (
    DEFAULT_SETTINGS,
    QuadratureSettings,
    exp_functional,
    grad_norm,
    integrate_cells,
    phi_functional,
    weighted_norm,
)

__all__ = [
    "LogProfile",
    "IdentityRecord",
    "IdentityReport",
    "peel_map",
    "verify_peel_identities",
    "jacobian_det",
    "verify_nonradial_gradient_bound",
    "annulus_points",
    "log_substitution",
    "verify_log_identities",
    "dilate",
    "renormalize",
    "random_admissible_ramp",
    "line_ratio",
    "line_inequality_probe",
    "growth_envelope_fit",
    "ramp_crossing_time",
    "ProbeRecord",
]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityRecord:
    id: str
    lhs: float
    rhs: float
    rel_err: float


@dataclass(frozen=True)
class IdentityReport:
    records: tuple
    passed: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "identities": [
                {"id": r.id, "lhs": r.lhs, "rhs": r.rhs, "rel_err": r.rel_err}
                for r in self.records
            ],
            "pass": self.passed,
            "tol": self.tol,
        }

    def max_rel_err(self) -> float:
        return max((r.rel_err for r in self.records), default=0.0)


def _rel_err(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def _equality_record(name: str, lhs: float, rhs: float) -> IdentityRecord:
    return IdentityRecord(id=name, lhs=lhs, rhs=rhs, rel_err=_rel_err(lhs, rhs))


# ---------------------------------------------------------------------------
# Peel map
# ---------------------------------------------------------------------------

def peel_map(p: RadialProfile, N: int, e: float) -> ComposedProfile:
    """Compose a profile so the |x|^{-e} weight disappears from its integrals.

    Radially: v(rho) = ((N-e)/N)^{(N-1)/N} * u(rho^{N/(N-e)}).  With e = 0
    this is the identity map.  The gradient N-norm is invariant under this
    map for radial inputs.
    """
    if e >= N:
        raise ParameterError(f"weight integrability violated: e = {e} must be < N = {N}")
    amplitude = ((N - e) / N) ** ((N - 1.0) / N)
    return ComposedProfile(base=p, radial_exponent=N / (N - e), amplitude=amplitude)


def verify_peel_identities(
    p: RadialProfile,
    cfg: ExponentConfig,
    settings: QuadratureSettings | None = None,
    tol: float = 1e-6,
) -> IdentityReport:
    """Check the transfer identities between a profile and its peel image.

    Both sides of every identity are computed by quadratures of different
    integrands on different grids (the original profile versus the composed
    evaluator on the mapped grid), so agreement is evidence and not
    tautology.  Checks, with v the peel image at exponent t and A = N/(N-t):

      mass_norm      ||u||^N with weight t   = A^N ||v||^N unweighted
      phi_transfer   truncated-exp integral  = A * same at coefficient A*alpha
      exp_transfer   full-exp N-power        = A^N * same at coefficient A*alpha
      moment_j       (q > N) j-th moment     = A^{-(j/N'+1)} * weighted moment
      exp_moment     (q > N) full-exp q-power = A^{q/N'+1} * unweighted side
      gradient_norm  gradient N-norms agree (power rule vs chain-rule panels)
    """
    N, t = cfg.N, cfg.t
    A = N / (N - t)
    v = peel_map(p, N, t)
    scaled = make_config(N, 0.0, 0.0, alpha=A * cfg.alpha, q=cfg.q)

    records = [
        _equality_record(
            "mass_norm",
            weighted_norm(p, N, N, t, settings) ** N,
            A**N * weighted_norm(v, N, N, 0.0, settings) ** N,
        ),
        _equality_record(
            "phi_transfer",
            phi_functional(p, cfg, t, settings),
            A * phi_functional(v, scaled, 0.0, settings),
        ),
        _equality_record(
            "exp_transfer",
            exp_functional(p, cfg, N, t, settings),
            A**N * exp_functional(v, scaled, N, 0.0, settings),
        ),
    ]
    if cfg.q > N:
        nprime = cfg.nprime
        for j in (cfg.q, cfg.q + 2.0):
            records.append(
                _equality_record(
                    f"moment_j{j:g}",
                    weighted_norm(v, N, j, 0.0, settings) ** j,
                    A ** (-(j / nprime + 1.0)) * weighted_norm(p, N, j, t, settings) ** j,
                )
            )
        records.append(
            _equality_record(
                "exp_moment",
                exp_functional(p, cfg, cfg.q, t, settings),
                A ** (cfg.q / nprime + 1.0) * exp_functional(v, scaled, cfg.q, 0.0, settings),
            )
        )
    records.append(
        _equality_record("gradient_norm", grad_norm(p, N), grad_norm(v, N, settings))
    )
    passed = all(r.rel_err <= tol for r in records)
    return IdentityReport(records=tuple(records), passed=passed, tol=tol)


# ---------------------------------------------------------------------------
# Jacobian of the underlying point map and the pointwise gradient bound,
# checked in actual N-dimensional coordinates by finite differences.
# ---------------------------------------------------------------------------

def jacobian_det(N: int, t: float, x) -> float:
    """Closed-form Jacobian determinant of F(x) = |x|^{t/(N-t)} x."""
    if t >= N:
        raise ParameterError(f"weight integrability violated: t = {t} must be < N = {N}")
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ParameterError("the point map is singular at the origin")
    return N / (N - t) * r ** (N * t / (N - t))


def _fd_jacobian(F, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (F(x + e) - F(x - e)) / (2.0 * h)
    return J


def _fd_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    n = len(x)
    g = np.empty(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def annulus_points(seed: int, count: int, r_lo: float, r_hi: float, N: int) -> np.ndarray:
    """Deterministic sample points in the annulus r_lo < |x| < r_hi."""
    draws = uniform_stream(seed, count * (N + 1))
    dirs = draws[: count * N].reshape(count, N) - 0.5
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0.0] = 1.0
    dirs /= norms[:, None]
    radii = r_lo + (r_hi - r_lo) * draws[count * N :]
    return dirs * radii[:, None]


def verify_nonradial_gradient_bound(
    N: int,
    t: float,
    sample_points,
    bump_center,
    slack: float = 1e-4,
    det_tol: float = 1e-5,
) -> IdentityReport:
    """Finite-difference check of the pointwise gradient bound of the peel map.

    With u a Gaussian bump centered off-origin (so genuinely non-radial),
    v(x) = ((N-t)/N)^{(N-1)/N} u(|x|^{t/(N-t)} x) must satisfy

        |grad v(x)| <= (N/(N-t))^{1/N} |x|^{t/(N-t)} |grad u(|x|^{t/(N-t)} x)|.

    grad v is computed by central differences with relative step 1e-5*|x|;
    grad u is analytic.  Bound records store the one-sided violation in
    rel_err (0 when the bound holds); the same sweep also cross-checks the
    finite-difference Jacobian determinant against the closed form.
    """
    if t >= N:
        raise ParameterError(f"weight integrability violated: t = {t} must be < N = {N}")
    center = np.asarray(bump_center, dtype=float)
    amplitude = ((N - t) / N) ** ((N - 1.0) / N)
    exponent = t / (N - t)

    def u(y: np.ndarray) -> float:
        return math.exp(-float(np.sum((y - center) ** 2)))

    def grad_u(y: np.ndarray) -> np.ndarray:
        return -2.0 * (y - center) * u(y)

    def F(x: np.ndarray) -> np.ndarray:
        return float(np.linalg.norm(x)) ** exponent * x

    def v(x: np.ndarray) -> float:
        return amplitude * u(F(x))

    records = []
    bound_ok = True
    det_ok = True
    for i, pt in enumerate(np.asarray(sample_points, dtype=float)):
        r = float(np.linalg.norm(pt))
        if r == 0.0:
            raise ParameterError("sample points must avoid the origin")
        h = 1e-5 * r
        lhs = float(np.linalg.norm(_fd_gradient(v, pt, h)))
        rhs = (N / (N - t)) ** (1.0 / N) * r**exponent * float(np.linalg.norm(grad_u(F(pt))))
        violation = max(0.0, lhs - rhs)
        bound_ok &= violation <= slack
        records.append(IdentityRecord(id=f"gradient_bound_{i}", lhs=lhs, rhs=rhs, rel_err=violation))

        fd_det = float(np.linalg.det(_fd_jacobian(F, pt, h)))
        closed = jacobian_det(N, t, pt)
        rec = _equality_record(f"jacobian_det_{i}", fd_det, closed)
        det_ok &= rec.rel_err <= det_tol
        records.append(rec)
    return IdentityReport(records=tuple(records), passed=bool(bound_ok and det_ok), tol=slack)


# ---------------------------------------------------------------------------
# Logarithmic substitution
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogProfile:
    """Piecewise-linear function w(t) on the line, the image of a radial
    profile under r = e^{-t/N} with amplitude N^{(N-1)/N} omega^{1/N}.

    w vanishes for t below the support threshold and is constant at its top
    value for t above the innermost node (the plateau of the source)."""

    ts: np.ndarray
    ws: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        ws = np.asarray(self.ws, dtype=float)
        if ts.ndim != 1 or ts.shape != ws.shape or len(ts) < 2:
            raise ParameterError("a line profile needs matching 1-d node arrays, >= 2 nodes")
        if np.any(np.diff(ts) <= 0.0):
            raise ParameterError("line nodes must be strictly increasing")
        ts.flags.writeable = False
        ws.flags.writeable = False
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "ws", ws)

    @property
    def top_value(self) -> float:
        return float(self.ws[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.ts, self.ws, left=self.ws[0], right=self.ws[-1])
        return float(out) if out.ndim == 0 else out

    def slope_norm(self, N: int) -> float:
        """(int |w'(t)|^N dt)^(1/N); exact since w' is piecewise constant."""
        dw = np.diff(self.ws)
        dt = np.diff(self.ts)
        return float(np.sum(np.abs(dw / dt) ** N * dt)) ** (1.0 / N)


#: Largest log-radius step between line nodes.  A radial segment that is
#: linear in r becomes exponential in t = -N log r, so the line image is
#: subsampled until the piecewise-linear-in-t interpolant is within about
#: (step)^2/8 ~ 5e-9 of the exact transform.
LINE_SAMPLE_MAX_LOG_STEP = 2e-4


def log_substitution(p: RadialProfile, N: int, max_log_step: float = LINE_SAMPLE_MAX_LOG_STEP) -> LogProfile:
    """Map a profile to the line: nodes (r, v) go to (-N log r, const * v).

    Every profile node is mapped exactly; in between, cells are subsampled
    geometrically (a segment linear in r is curved in t, so the line image
    needs extra nodes to stay within tolerance of the exact transform).
    """
    if N < 2:
        raise ParameterError(f"dimension too small: N = {N}")
    const = N ** ((N - 1.0) / N) * sphere_area(N) ** (1.0 / N)
    ln_r = np.log(p.radii)
    widths = np.diff(ln_r)
    n_sub = np.maximum(1, np.ceil(widths / max_log_step).astype(int))
    cell = np.repeat(np.arange(len(n_sub)), n_sub)
    offsets = np.arange(len(cell)) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub)
    frac = offsets / n_sub[cell]
    ln_samples = ln_r[:-1][cell] + frac * widths[cell]
    radii = np.exp(ln_samples)
    values = p(radii)
    # map the original nodes exactly (no exp/log round trip)
    first = offsets == 0
    radii[first] = p.radii[:-1][cell[first]]
    values[first] = p.values[:-1][cell[first]]
    ln_samples = np.append(ln_samples, ln_r[-1])
    values = np.append(values, 0.0)
    ts = (-N * ln_samples)[::-1].copy()
    ws = (const * values)[::-1].copy()
    return LogProfile(ts=ts, ws=ws)


def line_exp_integral(w: LogProfile, f_of_w, settings: QuadratureSettings | None = None) -> float:
    """int f(w(t)) e^{-t} dt over the whole line, requiring f(0) = 0.

    The body is integrated per cell; the top plateau (t above the last node,
    where w is constant) contributes the analytic tail f(w_top) e^{-t_max}.
    """

    def integrand(t: np.ndarray) -> np.ndarray:
        return f_of_w(w(t)) * np.exp(-t)

    body = integrate_cells(w.ts[:-1], w.ts[1:], integrand, settings)
    tail = float(np.asarray(f_of_w(np.array([w.top_value])))[0]) * math.exp(-w.ts[-1])
    return body + tail


def verify_log_identities(
    p: RadialProfile,
    N: int,
    alpha: float,
    settings: QuadratureSettings | None = None,
    tol: float = 1e-7,
) -> IdentityReport:
    """Check the three radial-to-line transfer identities.

      gradient_line  int |grad u|^N dx           = int |w'|^N dt
      mass_line      int |u|^N dx               = N^{-N} int |w|^N e^{-t} dt
      exp_line       int e^{alpha|u|^{N'}}|u|^N = N^{-N} int e^{(alpha/a_N)|w|^{N'}}|w|^N e^{-t} dt

    with a_N the unweighted critical coefficient.  Radial sides use the
    radial quadrature; line sides use panels on the t-grid plus the analytic
    plateau tail.
    """
    w = log_substitution(p, N)
    nprime = N / (N - 1.0)
    ratio = alpha / moser_constant(N)
    cfg = make_config(N, 0.0, 0.0, alpha=alpha)

    records = [
        _equality_record("gradient_line", grad_norm(p, N) ** N, w.slope_norm(N) ** N),
        _equality_record(
            "mass_line",
            weighted_norm(p, N, N, 0.0, settings) ** N,
            N ** (-N) * line_exp_integral(w, lambda x: np.abs(x) ** N, settings),
        ),
        _equality_record(
            "exp_line",
            exp_functional(p, cfg, N, 0.0, settings),
            N ** (-N)
            * line_exp_integral(
                w, lambda x: np.exp(ratio * np.abs(x) ** nprime) * np.abs(x) ** N, settings
            ),
        ),
    ]
    passed = all(r.rel_err <= tol for r in records)
    return IdentityReport(records=tuple(records), passed=passed, tol=tol)


# ---------------------------------------------------------------------------
# Dilation
# ---------------------------------------------------------------------------

def dilate(p: RadialProfile, lam: float) -> RadialProfile:
    """u(lam * x): node radii divide by lam, values unchanged.

    The gradient N-norm is invariant (slopes scale by lam, cell measures by
    lam^{-N}), which is why ratio searches may fix the support radius."""
    if lam <= 0.0:
        raise ParameterError(f"dilation factor must be positive, got {lam}")
    return RadialProfile(radii=p.radii / lam, values=p.values.copy())


def renormalize(p: RadialProfile, N: int, s: float, settings: QuadratureSettings | None = None) -> RadialProfile:
    """Dilate so the weighted mass norm with weight s becomes 1."""
    lam = weighted_norm(p, N, N, s, settings) ** (N / (N - s))
    return dilate(p, lam)


# ---------------------------------------------------------------------------
# One-dimensional ramp inequality probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeRecord:
    index: int
    ratio: float
    lhs: float
    rhs: float
    slope_norm: float
    crossing_time: float


def random_admissible_ramp(seed: int, node_count: int = 24, N: int = 2) -> LogProfile:
    """Seeded nondecreasing ramp, zero at its first node, slope N-norm 1.

    Node spacings and increments are uniform draws; the result satisfies all
    admissibility conditions of the one-dimensional reduced inequality."""
    if node_count < 2:
        raise ParameterError(f"node_count must be >= 2, got {node_count}")
    draws = uniform_stream(seed, 2 * node_count)
    t0 = -4.0 + 8.0 * draws[0]
    gaps = 0.05 + draws[1:node_count]
    ts = t0 + np.concatenate([[0.0], np.cumsum(gaps)])
    increments = draws[node_count : 2 * node_count - 1]
    ws = np.concatenate([[0.0], np.cumsum(increments)])
    w = LogProfile(ts=ts, ws=ws)
    scale = w.slope_norm(N)
    if scale == 0.0:
        return w
    return LogProfile(ts=ts, ws=ws / scale)


def ramp_crossing_time(w: LogProfile) -> float:
    """Largest t with w(t) <= 1, by bisection on the piecewise-linear form.

    Returns +inf when w never exceeds 1."""
    if w.top_value <= 1.0:
        return math.inf
    lo, hi = float(w.ts[0]), float(w.ts[-1])
    if w(lo) > 1.0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if w(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _check_admissible(w: LogProfile) -> None:
    if np.any(w.ws < 0.0):
        raise ParameterError("ramp must be nonnegative")
    if np.any(np.diff(w.ws) < 0.0):
        raise ParameterError("ramp must be nondecreasing")
    if w.ws[0] != 0.0:
        raise ParameterError("ramp must vanish at its first node")


def line_ratio(w: LogProfile, beta: float, N: int, settings: QuadratureSettings | None = None) -> tuple[float, float]:
    """(exponential side, mass side) of the reduced one-dimensional inequality."""
    nprime = N / (N - 1.0)
    lhs = line_exp_integral(w, lambda x: np.exp(beta * np.abs(x) ** nprime) * np.abs(x) ** N, settings)
    rhs = line_exp_integral(w, lambda x: np.abs(x) ** N, settings)
    return lhs, rhs


def line_inequality_probe(
    w_family,
    beta: float,
    N: int = 2,
    settings: QuadratureSettings | None = None,
) -> list[ProbeRecord]:
    """Ratio of exponential to mass side for each admissible ramp.

    Members are renormalized to unit slope N-norm if needed (the norm scales
    linearly under w -> c*w).  The empirical supremum of the ratios over the
    family estimates the constant in the reduced inequality at this beta.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    records = []
    for i, w in enumerate(w_family):
        _check_admissible(w)
        norm = w.slope_norm(N)
        if abs(norm - 1.0) > 1e-9:
            if norm == 0.0:
                raise ParameterError("ramp with zero slope norm cannot be normalized")
            w = LogProfile(ts=w.ts, ws=w.ws / norm)
            norm = w.slope_norm(N)
        lhs, rhs = line_ratio(w, beta, N, settings)
        records.append(
            ProbeRecord(
                index=i,
                ratio=lhs / rhs,
                lhs=lhs,
                rhs=rhs,
                slope_norm=norm,
                crossing_time=ramp_crossing_time(w),
            )
        )
    return records


def growth_envelope_fit(w_family, eps: float, N: int = 2) -> tuple[float, int]:
    """Smallest constant c such that w(t)^{N'} <= (1+eps)(t - T0) + c on t >= T0.

    T0 is each member's crossing time.  On every cell w is linear, so
    w^{N'} is convex there and the maximum of the defect is attained at
    nodes; checking node points is therefore exact.  Returns (c, violations)
    where violations counts node points exceeding the fitted envelope
    (zero by construction, reported for auditability).
    """
    nprime = N / (N - 1.0)
    c = 0.0
    checks = []
    for w in w_family:
        t0 = ramp_crossing_time(w)
        if not math.isfinite(t0):
            continue
        pts = np.concatenate([[t0], w.ts[w.ts > t0]])
        defect = w(pts) ** nprime - (1.0 + eps) * (pts - t0)
        c = max(c, float(np.max(defect)))
        checks.append((pts, defect))
    violations = 0
    for pts, defect in checks:
        violations += int(np.sum(defect > c + 1e-12))
    return c, violations
