"""Noise channels as order-parameter rescalings.

Detection loss with efficiency eta and the thermal beam-splitter channel
(reflectivity r, environment occupation nbar) both act on the
quasiprobability family as a change of the order parameter; the thermal
channel additionally rescales amplitudes by 1/t.  Each loss evaluation
is carried out along two independent routes (thinned-distribution series
versus rescaled closed form) and their agreement is enforced, never
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import binom

from .qp_core import (
    COMPLEX_D_OUTCOME,
    ConsistencyError,
    OrderParam,
    PhotonDistribution,
    _point_value,
    as_order_param,
    w_from_distribution,
)

__all__ = [
    "DetectionNoise",
    "ThermalNoise",
    "rescale_detection",
    "rescale_thermal",
    "bernoulli_detect",
    "lossy_w",
    "lossy_w_d",
    "evolve_thermal_w",
]


@dataclass(frozen=True)
class DetectionNoise:
    """Per-mode detection efficiency, identical on both modes."""

    eta: float

    def __post_init__(self) -> None:
        eta = float(self.eta)
        object.__setattr__(self, "eta", eta)
        if not math.isfinite(eta) or not 0.0 < eta <= 1.0:
            raise ValueError("detection efficiency eta must lie in (0, 1]")


@dataclass(frozen=True)
class ThermalNoise:
    """Thermal channel at dimensionless time r, identical and independent
    on both modes.

    r = sqrt(1 - exp(-gamma*tau)) runs from 0 (no decoherence) towards 1;
    t = sqrt(1 - r^2) is the surviving amplitude fraction.
    """

    r: float
    nbar: float = 0.0

    def __post_init__(self) -> None:
        r = float(self.r)
        nbar = float(self.nbar)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "nbar", nbar)
        if not math.isfinite(r) or not 0.0 <= r < 1.0:
            raise ValueError("reflectivity r must lie in [0, 1)")
        if not math.isfinite(nbar) or nbar < 0.0:
            raise ValueError("mean photon number nbar must be finite and non-negative")

    @property
    def t(self) -> float:
        return math.sqrt(1.0 - self.r * self.r)


def rescale_detection(s, noise: DetectionNoise) -> OrderParam:
    """Order parameter seen through detectors of efficiency eta.

    Implements 1 - s' = (1 - s)/eta on both the real and the d-outcome
    branch; the result is tagged rescaled and may lie below -1.
    """
    s = as_order_param(s)
    value = 1.0 - (1.0 - s.value) / noise.eta
    if s.is_real:
        return OrderParam.from_real(value.real, rescaled=True)
    return OrderParam(value, COMPLEX_D_OUTCOME, rescaled=True, d=s.d)


def rescale_thermal(s, noise: ThermalNoise) -> OrderParam:
    """Order parameter after thermal evolution to dimensionless time r."""
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("thermal rescaling is defined on the real branch only")
    t_sq = 1.0 - noise.r * noise.r
    value = (s.real - noise.r * noise.r * (1.0 + 2.0 * noise.nbar)) / t_sq
    return OrderParam.from_real(value, rescaled=True)


def bernoulli_detect(p: PhotonDistribution, noise: DetectionNoise) -> PhotonDistribution:
    """Thin a photon-number distribution by per-photon survival eta.

    Every input count n scatters binomially over m <= n, so the retained
    mass is unchanged and the new tail bound is exactly the old one.
    """
    eta = noise.eta
    if eta == 1.0:
        return p
    size = p.probs.size
    m = np.arange(size)
    out = np.zeros(size)
    # Chunk over input counts to bound the pmf matrix size.
    chunk = 512
    for start in range(0, size, chunk):
        n = np.arange(start, min(start + chunk, size))
        out += binom.pmf(m[:, None], n[None, :], eta) @ p.probs[n]
    tail = max(0.0, 1.0 - float(out.sum()))
    return PhotonDistribution(out, tail_bound=tail)


def lossy_w(p: PhotonDistribution, s, noise: DetectionNoise, tol: float = 1e-8) -> float:
    """Quasiprobability value reconstructed by inefficient detectors.

    Computed along two routes that must agree within tol: the series
    over the Bernoulli-thinned distribution at order s, and the closed
    route (1/eta) * series at the rescaled order.  Returns the series
    route's value.
    """
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("lossy_w is defined on the real branch; see lossy_w_d")
    if s.real > 0.0:
        raise ValueError("order parameter must be non-positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    series_route = w_from_distribution(bernoulli_detect(p, noise), s, tol=0.25 * tol)
    s_prime = rescale_detection(s, noise)
    closed_route = w_from_distribution(p, s_prime, tol=0.25 * tol * noise.eta) / noise.eta
    if abs(series_route - closed_route) > tol:
        raise ConsistencyError(
            f"loss routes disagree: series {series_route!r} vs closed {closed_route!r} "
            f"beyond tol {tol:.2e}"
        )
    return series_route


def lossy_w_d(p: PhotonDistribution, d: int, noise: DetectionNoise, tol: float = 1e-8) -> complex:
    """d-outcome quasiprobability value under detection loss.

    The direct series weights each count n by (1 - eta + eta*omega)^n;
    the closed route divides the series at the rescaled complex order by
    eta.  The two must agree within tol; the direct value is returned.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    s_d = OrderParam.d_outcome(d)
    base = 1.0 - noise.eta + noise.eta * s_d.omega
    prefactor = 2.0 / (math.pi * (1.0 - s_d.value))
    damp = min(abs(base), 1.0) ** p.probs.size
    if abs(prefactor) * damp * p.tail_bound > 0.25 * tol:
        raise ConsistencyError(
            f"tail mass {p.tail_bound:.3e} too heavy for the d-outcome series at tol {tol:.2e}"
        )
    powers = base ** np.arange(p.probs.size)
    direct = prefactor * complex(np.dot(powers, p.probs))
    s_prime = rescale_detection(s_d, noise)
    closed = w_from_distribution(p, s_prime, tol=0.25 * tol * noise.eta) / noise.eta
    if abs(direct - closed) > tol:
        raise ConsistencyError(
            f"d-outcome loss routes disagree: direct {direct!r} vs closed {closed!r}"
        )
    return direct


def evolve_thermal_w(
    base_w: Callable[..., float],
    s,
    noise: ThermalNoise,
    alpha,
    beta=None,
) -> float:
    """Quasiprobability after thermal evolution, from the time-zero field.

    ``base_w`` is a family evaluator called as ``base_w(point, order)``
    for one mode or ``base_w(point_a, point_b, order)`` for two modes;
    the order passed in is the rescaled one.  Amplitudes contract by t
    per mode, with prefactor 1/t^2 per mode.
    """
    s_prime = rescale_thermal(s, noise)
    t = noise.t
    a = _point_value(alpha) / t
    if beta is None:
        return float(base_w(a, s_prime)) / (t * t)
    b = _point_value(beta) / t
    return float(base_w(a, b, s_prime)) / t**4
