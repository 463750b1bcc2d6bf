"""Parameter regime, dimensional constants and critical coefficients.

Every computation in the package starts from a validated exponent
configuration; the admissibility rules live here so no downstream routine
has to re-check its inputs.  All operations are pure functions.
"""

import math
from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "ExponentConfig",
    "make_config",
    "sphere_area",
    "ball_volume",
    "critical_alpha",
    "moser_constant",
    "config_to_text",
    "config_from_text",
]


def _gamma_half_integer(x: float) -> float:
    """Gamma(x) for positive integer or half-integer x, by exact recurrence.

    These are the only arguments that occur (x = N/2 with integer N >= 2);
    the recurrence keeps the constant chain free of approximation error.
    """
    two_x = round(2 * x)
    if two_x < 1 or abs(2 * x - two_x) > 1e-12:
        raise ParameterError(f"gamma recurrence defined for half-integers only, got {x}")
    if two_x % 2 == 0:
        return float(math.factorial(two_x // 2 - 1))
    g = math.sqrt(math.pi)
    z = 0.5
    while z < x - 0.25:
        g *= z
        z += 1.0
    return g


def sphere_area(N: int) -> float:
    """Surface measure of the unit (N-1)-sphere, 2*pi^(N/2)/Gamma(N/2)."""
    _check_dimension(N)
    return 2.0 * math.pi ** (N / 2.0) / _gamma_half_integer(N / 2.0)


def ball_volume(N: int) -> float:
    """Volume of the unit ball, pi^(N/2)/Gamma(N/2 + 1) = sphere_area(N)/N."""
    _check_dimension(N)
    return math.pi ** (N / 2.0) / _gamma_half_integer(N / 2.0 + 1.0)


def critical_alpha(N: int, t: float) -> float:
    """Critical exponential coefficient (N - t) * sphere_area(N)^(1/(N-1)).

    At or above this value the weighted exponential-integral bound fails
    uniformly; below it the subcritical inequalities hold.
    """
    _check_dimension(N)
    if t >= N:
        raise ParameterError(f"weight integrability violated: t = {t} must be < N = {N}")
    return (N - t) * sphere_area(N) ** (1.0 / (N - 1))


def moser_constant(N: int) -> float:
    """Unweighted critical coefficient N * sphere_area(N)^(1/(N-1))."""
    return critical_alpha(N, 0.0)


def _check_dimension(N) -> None:
    if not isinstance(N, (int,)) or isinstance(N, bool):
        raise ParameterError(f"dimension must be an integer, got {N!r}")
    if N < 2:
        raise ParameterError(f"dimension too small: N = {N} < 2")


@dataclass(frozen=True)
class ExponentConfig:
    """Validated parameter tuple (N, s, t, q, alpha).

    Derived constants are recomputed on access and never stored, so a
    deserialized config can never carry stale values.
    """

    N: int
    s: float
    t: float
    q: float
    alpha: float

    @property
    def nprime(self) -> float:
        return self.N / (self.N - 1.0)

    @property
    def omega(self) -> float:
        return sphere_area(self.N)

    @property
    def alpha_crit(self) -> float:
        return critical_alpha(self.N, self.t)

    @property
    def subcritical(self) -> bool:
        # The borderline alpha == alpha_crit counts as supercritical: the
        # explicit concentration sequences diverge there already.
        return self.alpha < self.alpha_crit

    def snapshot(self) -> dict:
        return {"N": self.N, "s": self.s, "t": self.t, "q": self.q, "alpha": self.alpha}


def make_config(N: int, s: float, t: float, alpha: float, q: float | None = None) -> ExponentConfig:
    """Validate and build an ExponentConfig.

    q defaults to N (the base case of the inequalities).  Supercritical
    alpha is accepted but flagged, because the sharpness experiments
    deliberately evaluate at and above the critical coefficient.
    """
    _check_dimension(N)
    s = float(s)
    t = float(t)
    if s > t:
        raise ParameterError(f"weight order violated: s = {s} must be <= t = {t}")
    if t >= N:
        raise ParameterError(f"weight integrability violated: t = {t} must be < N = {N}")
    q = float(N) if q is None else float(q)
    if q < N:
        raise ParameterError(f"integrand power violated: q = {q} must be >= N = {N}")
    alpha = float(alpha)
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return ExponentConfig(N=N, s=s, t=t, q=q, alpha=alpha)


_CONFIG_KEYS = ("N", "s", "t", "q", "alpha")


def config_to_text(cfg: ExponentConfig) -> str:
    """Flat key=value record.  Derived fields are intentionally omitted."""
    return "".join(f"{k}={cfg.snapshot()[k]!r}\n".replace("'", "") for k in _CONFIG_KEYS)


def config_from_text(text: str) -> ExponentConfig:
    """Parse the flat key=value record written by config_to_text."""
    found: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ParameterError(f"line {lineno}: unknown config key {key!r}")
        found[key] = value.strip()
    missing = [k for k in ("N", "s", "t", "alpha") if k not in found]
    if missing:
        raise ParameterError(f"config record missing keys: {missing}")
    return make_config(
        N=int(found["N"]),
        s=float(found["s"]),
        t=float(found["t"]),
        alpha=float(found["alpha"]),
        q=float(found["q"]) if "q" in found else None,
    )
