"""The named ratio functionals assembled from quadrature primitives.

Each ratio is a pure function of the profile: no renormalization happens
here.  The constraint on the gradient norm is the caller's responsibility;
the report records the gradient norm that was actually in force so audits
can tell whether it held.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ZeroDenominatorError
from .exponents import ExponentConfig, make_config, moser_constant
from .quadrature import (
    QuadratureSettings,
    exp_functional,
    grad_norm,
    phi_functional,
    weighted_norm,
)

__all__ = [
    "FunctionalReport",
    "phi_ratio",
    "exp_ratio",
    "exp_power_ratio",
    "adachi_tanaka_ratio",
    "ckn_ratio",
    "ratio_by_kind",
    "RATIO_KINDS",
]

RATIO_KINDS = ("F", "G", "Q", "AT", "CKN")


@dataclass(frozen=True)
class FunctionalReport:
    """Value of one ratio functional together with its audit trail."""

    kind: str
    value: float
    numerator: float
    denominator: float
    config: dict
    grad_norm_used: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "grad_norm_used": self.grad_norm_used,
            **{f"config_{k}": v for k, v in sorted(self.config.items())},
        }


def _mass_denominator(p, cfg: ExponentConfig, settings) -> float:
    """||u||_{L^N(|x|^{-s})} raised to N(N-t)/(N-s)."""
    base = weighted_norm(p, cfg.N, cfg.N, cfg.s, settings)
    if base == 0.0:
        raise ZeroDenominatorError("zero profile: the denominator norm vanishes")
    return base ** (cfg.N * (cfg.N - cfg.t) / (cfg.N - cfg.s))


def phi_ratio(p, cfg: ExponentConfig, settings: QuadratureSettings | None = None) -> FunctionalReport:
    """Truncated-exponential ratio (kind F)."""
    num = phi_functional(p, cfg, cfg.t, settings)
    den = _mass_denominator(p, cfg, settings)
    return FunctionalReport(
        kind="F",
        value=num / den,
        numerator=num,
        denominator=den,
        config=cfg.snapshot(),
        grad_norm_used=grad_norm(p, cfg.N),
    )


def exp_ratio(p, cfg: ExponentConfig, settings: QuadratureSettings | None = None) -> FunctionalReport:
    """Full-exponential ratio (kind G); dominates the truncated one pointwise."""
    num = exp_functional(p, cfg, cfg.N, cfg.t, settings)
    den = _mass_denominator(p, cfg, settings)
    return FunctionalReport(
        kind="G",
        value=num / den,
        numerator=num,
        denominator=den,
        config=cfg.snapshot(),
        grad_norm_used=grad_norm(p, cfg.N),
    )


def exp_power_ratio(p, cfg: ExponentConfig, settings: QuadratureSettings | None = None) -> FunctionalReport:
    """q-power exponential ratio (kind Q), defined for q > N."""
    if cfg.q <= cfg.N:
        raise ParameterError(f"integrand power violated: q = {cfg.q} must be > N = {cfg.N}")
    num = exp_functional(p, cfg, cfg.q, cfg.t, settings)
    base = weighted_norm(p, cfg.N, cfg.q, cfg.s, settings)
    if base == 0.0:
        raise ZeroDenominatorError("zero profile: the denominator norm vanishes")
    den = base ** (cfg.q * (cfg.N - cfg.t) / (cfg.N - cfg.s))
    return FunctionalReport(
        kind="Q",
        value=num / den,
        numerator=num,
        denominator=den,
        config=cfg.snapshot(),
        grad_norm_used=grad_norm(p, cfg.N),
    )


def adachi_tanaka_ratio(
    p,
    N: int,
    alpha: float,
    beta: float,
    settings: QuadratureSettings | None = None,
) -> FunctionalReport:
    """Scaling-invariant subcritical ratio (kind AT).

    Numerator: truncated exponential at coefficient alpha*(1 - beta/N) with
    weight |x|^{-beta}; denominator: plain L^N norm to the power N - beta.
    """
    if not 0.0 <= beta < N:
        raise ParameterError(f"beta must lie in [0, N), got {beta}")
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    scaled = make_config(N, 0.0, float(beta), alpha=alpha * (1.0 - beta / N))
    num = phi_functional(p, scaled, float(beta), settings)
    base = weighted_norm(p, N, N, 0.0, settings)
    if base == 0.0:
        raise ZeroDenominatorError("zero profile: the denominator norm vanishes")
    den = base ** (N - beta)
    return FunctionalReport(
        kind="AT",
        value=num / den,
        numerator=num,
        denominator=den,
        config={"N": N, "alpha": alpha, "beta": beta},
        grad_norm_used=grad_norm(p, N),
    )


def _ckn_parts(p, cfg: ExponentConfig, q: float, settings) -> tuple[float, float]:
    if q < cfg.N:
        raise ParameterError(f"integrand power violated: q = {q} must be >= N = {cfg.N}")
    kappa = (cfg.N - cfg.t) / (cfg.N - cfg.s)
    num = weighted_norm(p, cfg.N, q, cfg.t, settings)
    mass = weighted_norm(p, cfg.N, q, cfg.s, settings)
    grad = grad_norm(p, cfg.N)
    den = mass**kappa * grad ** (1.0 - kappa)
    if den == 0.0:
        raise ZeroDenominatorError("zero profile or zero gradient: the denominator vanishes")
    return num, den


def ckn_ratio(p, cfg: ExponentConfig, q: float, settings: QuadratureSettings | None = None) -> float:
    """Weighted interpolation ratio (kind CKN): t-norm over the s-norm/gradient product.

    The universal constant is unknown, so the ratio is reported raw; family
    sweeps estimate an empirical supremum.  For s = t the exponents collapse
    and the ratio is identically 1.
    """
    num, den = _ckn_parts(p, cfg, q, settings)
    return num / den


def ckn_report(p, cfg: ExponentConfig, q: float, settings: QuadratureSettings | None = None) -> FunctionalReport:
    num, den = _ckn_parts(p, cfg, q, settings)
    return FunctionalReport(
        kind="CKN",
        value=num / den,
        numerator=num,
        denominator=den,
        config={**cfg.snapshot(), "q": q},
        grad_norm_used=grad_norm(p, cfg.N),
    )


def critical_phi_functional(p, N: int, beta: float, settings: QuadratureSettings | None = None) -> float:
    """Truncated-exponential integral at the critical coefficient with weight beta.

    This is the objective maximized under the combined norm constraint in the
    critical/subcritical equivalence experiments.
    """
    if not 0.0 <= beta < N:
        raise ParameterError(f"beta must lie in [0, N), got {beta}")
    cfg = make_config(N, 0.0, float(beta), alpha=moser_constant(N) * (1.0 - beta / N))
    return phi_functional(p, cfg, float(beta), settings)


def ratio_by_kind(kind: str, p, cfg: ExponentConfig, settings: QuadratureSettings | None = None) -> FunctionalReport:
    """Dispatch on the serialized kind tags F/G/Q."""
    if kind == "F":
        return phi_ratio(p, cfg, settings)
    if kind == "G":
        return exp_ratio(p, cfg, settings)
    if kind == "Q":
        return exp_power_ratio(p, cfg, settings)
    raise ParameterError(f"unknown ratio kind {kind!r} (expected F, G or Q)")


def series_terms_equal_weights(p, cfg: ExponentConfig, terms: int, settings: QuadratureSettings | None = None) -> np.ndarray:
    """Series expansion of the full-exponential numerator for s = t.

    Term j (j = N-1, N, ...) equals alpha^{j-(N-1)}/(j-(N-1))! times the
    N'j-th power of the N'j-norm with weight s; the sum reproduces the
    numerator of the full-exponential ratio.  Used by tests as an
    independent cross-check of the quadrature path.
    """
    if cfg.s != cfg.t:
        raise ParameterError("series identity requires s = t")
    import math as _math

    out = np.empty(terms)
    for i in range(terms):
        j = cfg.N - 1 + i
        power = cfg.nprime * j
        coef = cfg.alpha**i / _math.factorial(i)
        out[i] = coef * weighted_norm(p, cfg.N, power, cfg.s, settings) ** power
    return out
