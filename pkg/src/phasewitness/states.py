"""Closed-form quasiprobability functions and photon distributions.

Covers the validation corpus: the two-mode squeezed vacuum (TMSV) with
its exact two-mode and marginal Gaussians, and the single-mode test
states (vacuum, coherent, thermal, Fock) both as analytic fields and as
displaced photon-number distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, eval_laguerre, gammaln

from .qp_core import (
    OrderParam,
    PhotonDistribution,
    _point_value,
    as_order_param,
)

__all__ = [
    "TmsvSpec",
    "SingleModeTestState",
    "tmsv_w2",
    "tmsv_w1",
    "thermal_w",
    "state_w",
    "photon_distribution",
]


def _real_nonpositive(s) -> OrderParam:
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("closed-form states are defined on the real branch only")
    if s.real > 0.0:
        raise ValueError(f"order parameter {s.real} must be non-positive")
    return s


def _as_field(alpha) -> tuple[np.ndarray, bool]:
    scalar = np.isscalar(alpha) or hasattr(alpha, "alpha")
    arr = np.asarray(_point_value(alpha) if scalar else alpha, dtype=complex)
    return arr, scalar


@dataclass(frozen=True)
class TmsvSpec:
    """Two-mode squeezed vacuum with squeezing parameter xi >= 0.

    Caches cosh/sinh of 2*xi; xi = 0 degenerates to the two-mode vacuum.
    """

    xi: float
    cosh2xi: float = field(init=False, repr=False, compare=False)
    sinh2xi: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        xi = float(self.xi)
        if not math.isfinite(xi) or xi < 0.0:
            raise ValueError("squeezing parameter xi must be finite and non-negative")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "cosh2xi", math.cosh(2.0 * xi))
        object.__setattr__(self, "sinh2xi", math.sinh(2.0 * xi))

    def marginal_width(self, s: float) -> float:
        """Width cosh(2 xi) - s of the reduced single-mode Gaussian."""
        return self.cosh2xi - float(s)

    def joint_det(self, s: float) -> float:
        """Determinant s^2 - 2 s cosh(2 xi) + 1 of the two-mode quadratic form."""
        s = float(s)
        return s * s - 2.0 * s * self.cosh2xi + 1.0


def tmsv_w2(spec: TmsvSpec, alpha, beta, s) -> float | np.ndarray:
    """Two-mode quasiprobability of the TMSV at (alpha, beta)."""
    s = _real_nonpositive(s)
    det = spec.joint_det(s.real)
    if det <= 0.0:
        raise ValueError(f"quadratic form is not positive definite (det {det})")
    width = spec.marginal_width(s.real)
    a, scalar_a = _as_field(alpha)
    b, scalar_b = _as_field(beta)
    quad = width * (np.abs(a) ** 2 + np.abs(b) ** 2) + 2.0 * spec.sinh2xi * np.real(a * b)
    vals = (4.0 / (math.pi**2 * det)) * np.exp(-2.0 * quad / det)
    if scalar_a and scalar_b:
        return float(vals)
    return vals


def tmsv_w1(spec: TmsvSpec, alpha, s) -> float | np.ndarray:
    """Reduced single-mode quasiprobability of the TMSV."""
    s = _real_nonpositive(s)
    width = spec.marginal_width(s.real)
    a, scalar = _as_field(alpha)
    vals = (2.0 / (math.pi * width)) * np.exp(-2.0 * np.abs(a) ** 2 / width)
    return float(vals) if scalar else vals


def thermal_w(nbar: float, beta, s) -> float | np.ndarray:
    """Quasiprobability of a thermal state with mean photon number nbar."""
    nbar = float(nbar)
    if not math.isfinite(nbar) or nbar < 0.0:
        raise ValueError("mean photon number nbar must be finite and non-negative")
    s = _real_nonpositive(s)
    width = 1.0 + 2.0 * nbar - s.real
    if width <= 0.0:
        raise ValueError("thermal width 1 + 2 nbar - s must be positive")
    b, scalar = _as_field(beta)
    vals = (2.0 / (math.pi * width)) * np.exp(-2.0 * np.abs(b) ** 2 / width)
    return float(vals) if scalar else vals


VACUUM = "vacuum"
COHERENT = "coherent"
THERMAL = "thermal"
FOCK = "fock"


@dataclass(frozen=True)
class SingleModeTestState:
    """One of the single-mode validation states.

    Use the factory classmethods; the parameter fields not used by a
    kind stay at their defaults.
    """

    kind: str
    z: complex = 0j
    nbar: float = 0.0
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (VACUUM, COHERENT, THERMAL, FOCK):
            raise ValueError(f"unknown state kind {self.kind!r}")
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("coherent amplitude must be finite")
        if not math.isfinite(self.nbar) or self.nbar < 0.0:
            raise ValueError("nbar must be finite and non-negative")
        if self.n < 0:
            raise ValueError("photon number must be non-negative")

    @classmethod
    def vacuum(cls) -> "SingleModeTestState":
        return cls(VACUUM)

    @classmethod
    def coherent(cls, z: complex) -> "SingleModeTestState":
        return cls(COHERENT, z=complex(z))

    @classmethod
    def thermal(cls, nbar: float) -> "SingleModeTestState":
        return cls(THERMAL, nbar=float(nbar))

    @classmethod
    def fock(cls, n: int) -> "SingleModeTestState":
        return cls(FOCK, n=int(n))


def state_w(state: SingleModeTestState, alpha, s) -> float | np.ndarray:
    """Analytic quasiprobability of a test state, scalar or array points."""
    s = _real_nonpositive(s)
    sv = s.real
    if state.kind == VACUUM:
        return thermal_w(0.0, alpha, s)
    if state.kind == THERMAL:
        return thermal_w(state.nbar, alpha, s)
    a, scalar = _as_field(alpha)
    if state.kind == COHERENT:
        vals = thermal_w(0.0, a - state.z, s)
        return float(vals) if scalar else vals
    # Fock state: Laguerre closed form, with the ratio -> 0 limit at s = -1.
    b = np.abs(a) ** 2
    n = state.n
    if sv == -1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.exp(-b + n * np.log(b) - gammaln(n + 1)) / math.pi
        vals = np.where(
            b > 0.0, vals, (1.0 / math.pi) if n == 0 else 0.0
        )
    else:
        ratio = (sv + 1.0) / (sv - 1.0)
        arg = 4.0 * b / (1.0 - sv * sv)
        vals = (
            (2.0 / (math.pi * (1.0 - sv)))
            * ratio**n
            * eval_laguerre(n, arg)
            * np.exp(-2.0 * b / (1.0 - sv))
        )
    return float(vals) if scalar else np.asarray(vals, dtype=float)


def _poisson_probs(mean: float, n_max: int) -> np.ndarray:
    if mean == 0.0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    n = np.arange(n_max + 1)
    return np.exp(-mean + n * math.log(mean) - gammaln(n + 1))


def _displaced_thermal_probs(nbar: float, b: float, n_max: int) -> np.ndarray:
    if nbar == 0.0:
        return _poisson_probs(b, n_max)
    g = nbar / (1.0 + nbar)
    x = -b / (nbar * (1.0 + nbar))
    # t_n = g^n L_n(x); upward recurrence is stable because x <= 0 makes
    # every term positive.
    t = np.empty(n_max + 1)
    t[0] = 1.0
    if n_max >= 1:
        t[1] = g * (1.0 - x)
    for n in range(1, n_max):
        t[n + 1] = (g * (2 * n + 1 - x) * t[n] - g * g * n * t[n - 1]) / (n + 1)
    return (math.exp(-b / (1.0 + nbar)) / (1.0 + nbar)) * t


def _displaced_fock_probs(m: int, b: float, n_max: int) -> np.ndarray:
    if b == 0.0:
        p = np.zeros(n_max + 1)
        if m <= n_max:
            p[m] = 1.0
        return p
    n = np.arange(n_max + 1)
    lo = np.minimum(n, m)
    delta = np.abs(n - m)
    lag = np.array([float(eval_genlaguerre(k, d, b)) for k, d in zip(lo, delta)])
    logw = gammaln(lo + 1) - gammaln(lo + delta + 1) + delta * math.log(b) - b
    return np.exp(logw) * lag**2


def photon_distribution(
    state: SingleModeTestState,
    displacement,
    n_max: int,
) -> PhotonDistribution:
    """Photon-number distribution of the state displaced by -displacement.

    The tail bound is exact: all omitted probabilities are non-negative
    and the full distribution is normalized, so the bound is one minus
    the retained mass.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    a = _point_value(displacement)
    b = abs(a) ** 2
    if state.kind == VACUUM:
        probs = _poisson_probs(b, n_max)
    elif state.kind == COHERENT:
        probs = _poisson_probs(abs(state.z - a) ** 2, n_max)
    elif state.kind == THERMAL:
        probs = _displaced_thermal_probs(state.nbar, b, n_max)
    else:
        probs = _displaced_fock_probs(state.n, b, n_max)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return PhotonDistribution(probs, tail_bound=tail)
