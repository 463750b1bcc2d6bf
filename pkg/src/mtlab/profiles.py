"""Compactly supported piecewise-linear radial profiles and test sequences.

A profile stores sorted nodes (r_i, v_i) with r_i > 0.  Evaluation is
constant v_0 on [0, r_0] (the inner plateau, which keeps the singular-weight
integral over the innermost cell analytic), linear between nodes, and zero
beyond the last node, whose value is required to be exactly 0.
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .exponents import sphere_area

__all__ = [
    "RadialProfile",
    "ComposedProfile",
    "make_profile",
    "evaluate",
    "moser_sequence",
    "moser_sequence_q",
    "random_profile",
    "uniform_stream",
    "profile_to_dict",
    "profile_from_dict",
    "save_profile_json",
    "load_profile_json",
    "save_profile_csv",
    "LOG_SAMPLES_PER_DECADE",
]

#: Geometric sampling density (nodes per decade of radius) used when the
#: logarithmic branch of a concentration profile is converted to piecewise
#: linear form.  The linear chord of log(1/r) over one geometric step
#: h = ln(10)/G carries a relative gradient N-norm excess of about
#: (N-1) h^2 / 24, so G = 16384 keeps the sampled gradient norm within
#: 1e-8 of the exact value 1 for N <= 4.
LOG_SAMPLES_PER_DECADE = 16384


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Piecewise-linear radial function with inner plateau and compact support."""

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape:
            raise ParameterError("radii and values must be 1-d arrays of equal length")
        if len(radii) < 2:
            raise ParameterError("a profile needs at least 2 nodes")
        if radii[0] <= 0.0:
            raise ParameterError(f"radii must be positive, got r_0 = {radii[0]}")
        if np.any(np.diff(radii) <= 0.0):
            raise ParameterError("radii must be strictly increasing")
        if values[-1] != 0.0:
            raise ParameterError("the final node value must be exactly 0 (compact support)")
        radii.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @property
    def plateau_radius(self) -> float:
        return float(self.radii[0])

    @property
    def plateau_value(self) -> float:
        return float(self.values[0])

    @property
    def support_radius(self) -> float:
        return float(self.radii[-1])

    def slopes(self) -> np.ndarray:
        """Per-segment derivative; constant on each cell, 0 on plateau and tail."""
        return np.diff(self.values) / np.diff(self.radii)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise ParameterError("radius must be nonnegative")
        out = np.interp(r, self.radii, self.values, left=self.values[0], right=0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ComposedProfile:
    """base profile composed with a power reparameterization and an amplitude:
    evaluate(r) = amplitude * base(r**radial_exponent)."""

    base: RadialProfile
    radial_exponent: float
    amplitude: float

    def __post_init__(self):
        if self.radial_exponent <= 0.0:
            raise ParameterError("radial exponent must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise ParameterError("radius must be nonnegative")
        out = self.amplitude * self.base(r ** self.radial_exponent)
        return float(out) if np.ndim(out) == 0 else out


def evaluate(p, r):
    """Evaluate a RadialProfile or ComposedProfile at radius r >= 0."""
    return p(r)


def make_profile(nodes) -> RadialProfile:
    """Validate a node list and build a profile.

    If the last value is nonzero, or a single node was given, a terminal
    zero node is appended at twice the last radius; this is reported as a
    warning so silent domain extensions do not go unnoticed.
    """
    arr = np.asarray(list(nodes), dtype=float)
    if arr.size == 0:
        raise ParameterError("a profile needs at least one node")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParameterError("nodes must be (radius, value) pairs")
    radii = arr[:, 0].copy()
    values = arr[:, 1].copy()
    if len(radii) == 1 or values[-1] != 0.0:
        radii = np.append(radii, 2.0 * radii[-1])
        values = np.append(values, 0.0)
        warnings.warn(
            f"appended terminal zero node at r = {radii[-1]} to enforce compact support",
            stacklevel=2,
        )
    return RadialProfile(radii=radii, values=values)


def _check_moser_args(N: int, t: float, k) -> None:
    if not isinstance(N, int) or isinstance(N, bool) or N < 2:
        raise ParameterError(f"dimension too small or not an integer: N = {N!r}")
    if t >= N:
        raise ParameterError(f"weight integrability violated: t = {t} must be < N = {N}")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")


def _sampled_log_branch(rho: float, samples_per_decade: int) -> np.ndarray:
    decades = math.log10(1.0 / rho)
    n_cells = max(8, int(math.ceil(decades * samples_per_decade)))
    return np.geomspace(rho, 1.0, n_cells + 1)


def moser_sequence(N: int, t: float, k: int, samples_per_decade: int | None = None) -> RadialProfile:
    """Concentration profile: c_k*log(1/r) on (e^{-k/(N-t)}, 1), constant inside.

    The logarithmic branch is linear in log r, so it is sampled on a
    geometric grid and linearly interpolated; see LOG_SAMPLES_PER_DECADE for
    the induced gradient-norm error.  The exact profile has gradient N-norm
    exactly 1 for every k.
    """
    _check_moser_args(N, t, k)
    G = LOG_SAMPLES_PER_DECADE if samples_per_decade is None else int(samples_per_decade)
    omega = sphere_area(N)
    rho = math.exp(-k / (N - t))
    coef = ((N - t) / (omega * k)) ** (1.0 / N)
    plateau = (1.0 / omega) ** (1.0 / N) * (k / (N - t)) ** ((N - 1.0) / N)
    radii = _sampled_log_branch(rho, G)
    values = -coef * np.log(radii)
    values[0] = plateau  # closed form; equals coef*k/(N-t) up to rounding
    values[-1] = 0.0
    return RadialProfile(radii=radii, values=values)


def moser_sequence_q(
    N: int,
    t: float,
    q: float,
    k: int,
    unit_gradient: bool = True,
    samples_per_decade: int | None = None,
) -> RadialProfile:
    """Concentration profile for the q-power functional, q > N.

    The raw family has slope coefficient ((N-t)/(omega*k))^{1/N}*(q-t)/(N-t)
    on (e^{-k/(q-t)}, 1); it is continuous at the plateau junction because
    the slope factor (q-t)/(N-t) cancels against the shorter log branch, but
    its gradient N-norm is ((q-t)/(N-t))^{(N-1)/N}, not 1.  With
    unit_gradient=True (default) the profile is globally rescaled so the
    gradient N-norm is exactly 1, which is the normalization the sharpness
    statements quantify over; unit_gradient=False returns the raw family,
    for which the closed-form plateau lower bounds hold verbatim.
    """
    _check_moser_args(N, t, k)
    q = float(q)
    if q <= N:
        raise ParameterError(f"integrand power violated: q = {q} must be > N = {N}")
    G = LOG_SAMPLES_PER_DECADE if samples_per_decade is None else int(samples_per_decade)
    omega = sphere_area(N)
    rho = math.exp(-k / (q - t))
    coef = ((N - t) / (omega * k)) ** (1.0 / N) * (q - t) / (N - t)
    plateau = (1.0 / omega) ** (1.0 / N) * (k / (N - t)) ** ((N - 1.0) / N)
    scale = ((N - t) / (q - t)) ** ((N - 1.0) / N) if unit_gradient else 1.0
    radii = _sampled_log_branch(rho, G)
    values = -(scale * coef) * np.log(radii)
    values[0] = scale * plateau
    values[-1] = 0.0
    return RadialProfile(radii=radii, values=values)


# ---------------------------------------------------------------------------
# Seeded generation.  A fixed, documented 64-bit mixing generator (splitmix64)
# is used instead of a library RNG so that test families are reproducible
# bit-for-bit across platforms and implementations.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """count uniforms in [0, 1) from the splitmix64 sequence started at seed."""
    out = np.empty(count, dtype=float)
    state = seed & _MASK64
    for i in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B91D) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        out[i] = z / 2.0**64
    return out


def random_profile(seed: int, node_count: int, support_radius: float) -> RadialProfile:
    """Seeded nonnegative test profile on a geometric grid.

    Nodes span [support_radius * 1e-4, support_radius]; values are uniform
    draws with the last forced to zero.  Deterministic in seed.
    """
    if node_count < 2:
        raise ParameterError(f"node_count must be >= 2, got {node_count}")
    if support_radius <= 0.0:
        raise ParameterError(f"support_radius must be positive, got {support_radius}")
    radii = np.geomspace(support_radius * 1e-4, support_radius, node_count)
    values = uniform_stream(seed, node_count)
    values[-1] = 0.0
    return RadialProfile(radii=radii, values=values)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def profile_to_dict(p: RadialProfile) -> dict:
    return {"nodes": [[float(r), float(v)] for r, v in zip(p.radii, p.values)]}


def profile_from_dict(d: dict) -> RadialProfile:
    if "nodes" not in d:
        raise ParameterError("profile record must contain a 'nodes' key")
    nodes = d["nodes"]
    arr = np.asarray(nodes, dtype=float)
    return RadialProfile(radii=arr[:, 0], values=arr[:, 1])


def save_profile_json(p: RadialProfile, path) -> None:
    with open(path, "w") as fh:
        json.dump(profile_to_dict(p), fh)
        fh.write("\n")


def load_profile_json(path) -> RadialProfile:
    with open(path) as fh:
        return profile_from_dict(json.load(fh))


def save_profile_csv(p: RadialProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write("r,value\n")
        for r, v in zip(p.radii, p.values):
            fh.write(f"{r!r},{v!r}\n")
