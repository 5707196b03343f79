"""Bounded phase-space observable and the CHSH-shaped witness.

The observable at order s has eigenvalues in [-1, 1] for s in [-1, 0],
so separable states obey |B| <= 2 and any strictly larger magnitude
certifies entanglement (this is an entanglement witness, not a
nonlocality test).

Noise variants evaluate the functional along two algebraically equal
routes, the rescaled form and the measured form with noise-power
coefficients, and enforce their agreement at every point.

When the rescaled order parameter falls below -1 the plain functional
stops being a witness, because the observable spectrum leaves [-1, 1].
Three clamping rules are provided:

* ``bounded_continuation`` (default): keep the on-off structure of the
  order -1 observable, O = 2(1-s')Pi(s') - 1.  Its eigenvalues
  2 ((s'+1)/(s'-1))^n - 1 stay in (-1, 1] for any s' <= -1, so the
  separable bound |B| <= 2 survives, and the functional is continuous
  at the onset s' = -1.
* ``frozen_coefficients``: freeze the coefficient set at -1 while the
  distributions keep the true rescaled order.
* ``loss_channel``: evaluate the order -1 witness on the noisy state
  itself (noise channel applied to the state, not to the observable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import exp, pi
from typing import Callable, Mapping

from .noise import DetectionNoise, ThermalNoise
from .qp_core import (
    ConsistencyError,
    OrderParam,
    _point_value,
    as_order_param,
    parity_coefficient,
)
from .states import TmsvSpec

__all__ = [
    "CLAMP_BOUNDED",
    "CLAMP_FROZEN",
    "CLAMP_LOSS_CHANNEL",
    "CLAMP_MODES",
    "FORM_TOL",
    "BellSettings",
    "WitnessReport",
    "observable_eigenvalue",
    "effective_eigenvalue",
    "bounded_eigenvalue",
    "bell_value",
    "bell_value_detection",
    "bell_value_thermal",
    "detection_objective",
    "thermal_objective",
]

#: Default clamping rule: keep the on-off observable structure
#: 2(1-s')Pi(s') - 1, which is bounded for every s' <= -1.
CLAMP_BOUNDED = "bounded_continuation"

#: Diagnostic clamping rule: freeze the coefficient set at -1, keep the
#: distributions at the true rescaled order.
CLAMP_FROZEN = "frozen_coefficients"

#: Diagnostic clamping rule: evaluate the witness at order -1 on the
#: noisy state itself (noise channel applied to the state).
CLAMP_LOSS_CHANNEL = "loss_channel"

#: All recognised clamping rules.
CLAMP_MODES = (CLAMP_BOUNDED, CLAMP_FROZEN, CLAMP_LOSS_CHANNEL)

#: Tolerance on the rescaled-form versus measured-form agreement.
FORM_TOL = 1e-10


@dataclass(frozen=True)
class BellSettings:
    """The four displacement settings (a1, a2 on mode A; b1, b2 on mode B)."""

    a1: complex
    a2: complex
    b1: complex
    b2: complex

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "b1", "b2"):
            v = complex(_point_value(getattr(self, name)))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"setting {name} must be finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_vector(cls, x) -> "BellSettings":
        """Build from 8 reals ordered (a1_re, a1_im, a2_re, a2_im, b1_re, b1_im, b2_re, b2_im)."""
        x0, x1, x2, x3, x4, x5, x6, x7 = (float(v) for v in x)
        return cls(
            complex(x0, x1), complex(x2, x3), complex(x4, x5), complex(x6, x7)
        )

    def to_vector(self) -> tuple[float, ...]:
        return (
            self.a1.real, self.a1.imag, self.a2.real, self.a2.imag,
            self.b1.real, self.b1.imag, self.b2.real, self.b2.imag,
        )


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of one witness evaluation.

    ``s_effective`` is the order parameter at which the distributions
    were evaluated (the true rescaled value, possibly below -1);
    ``clamped`` records that the coefficient set was frozen at -1.
    """

    settings: BellSettings
    s_effective: OrderParam
    bell_value: float
    bell_abs: float
    violated: bool
    clamped: bool
    meta: Mapping[str, object] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.bell_abs != abs(self.bell_value):
            raise ValueError("bell_abs must equal |bell_value|")
        if self.violated != (self.bell_abs > 2.0):
            raise ValueError("violated must mean bell_abs > 2")


def observable_eigenvalue(n: int, s) -> float:
    """Eigenvalue (1-s)*((s+1)/(s-1))^n + s of the bounded observable."""
    n = int(n)
    if n < 0:
        raise ValueError("photon number n must be non-negative")
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("the eigenvalue spectrum is defined on the real branch")
    sv = s.real
    # n = 0 and n = 1 are the identities 1 and -(s+1)+s; return them
    # exactly rather than through one rounding step.
    if n == 0:
        return 1.0
    if n == 1:
        return -1.0
    ratio = (sv + 1.0) / (sv - 1.0)
    return (1.0 - sv) * ratio**n + sv


def effective_eigenvalue(n: int, s_prime, s_eff: float = -1.0) -> float:
    """Eigenvalue (1-s_eff)^2 * coeff(n, s') + s_eff of the frozen-rule observable."""
    s_eff = float(s_eff)
    return (1.0 - s_eff) ** 2 * float(parity_coefficient(n, s_prime)) + s_eff


def bounded_eigenvalue(n: int, s_prime) -> float:
    """Eigenvalue 2 ((s'+1)/(s'-1))^n - 1 of the bounded-continuation observable.

    Equals 2 (1-s') coeff(n, s') - 1; the ratio lies in [0, 1) for
    s' <= -1, so the spectrum stays in (-1, 1].
    """
    return 2.0 * (1.0 - _point_order(s_prime)) * float(
        parity_coefficient(n, s_prime)
    ) - 1.0


def _point_order(s_prime) -> float:
    s_prime = as_order_param(s_prime)
    if not s_prime.is_real:
        raise ValueError("the eigenvalue spectrum is defined on the real branch")
    return s_prime.real


def _coefficients(s: float) -> tuple[float, float, float]:
    one_minus = 1.0 - s
    return (
        pi * pi * one_minus**4 / 4.0,
        pi * s * one_minus * one_minus,
        2.0 * s * s,
    )


def _bounded_coefficients(s_prime: float) -> tuple[float, float, float]:
    # Expansion of sum +/- <O x O> for O = 2(1-s')Pi(s') - 1, using
    # <Pi> = (pi/2) W1 and <Pi x Pi> = (pi^2/4) W2.
    one_minus = 1.0 - s_prime
    return (
        pi * pi * one_minus * one_minus,
        -2.0 * pi * one_minus,
        2.0,
    )


def bell_value(
    w2: Callable[[complex, complex], float],
    w1a: Callable[[complex], float],
    w1b: Callable[[complex], float],
    settings: BellSettings,
    s,
    *,
    allow_out_of_range: bool = False,
) -> float:
    """CHSH-shaped functional from fixed-order quasiprobability evaluators.

    The evaluators must already be at order s; the separable bound
    |result| <= 2 holds for s in [-1, 0] only, so other orders are
    rejected unless explicitly allowed for diagnostics.
    """
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("the witness is defined on the real branch")
    sv = s.real
    if not allow_out_of_range and not -1.0 <= sv <= 0.0:
        raise ValueError(f"order parameter {sv} outside [-1, 0]; the bound does not apply")
    c2, c1, c0 = _coefficients(sv)
    a1, a2, b1, b2 = settings.a1, settings.a2, settings.b1, settings.b2
    corr = w2(a1, b1) + w2(a1, b2) + w2(a2, b1) - w2(a2, b2)
    return c2 * corr + c1 * (w1a(a1) + w1b(b1)) + c0


def _base_order(s) -> float:
    s = as_order_param(s)
    if not s.is_real:
        raise ValueError("the witness is defined on the real branch")
    if not -1.0 <= s.real <= 0.0:
        raise ValueError(f"base order parameter {s.real} outside [-1, 0]")
    return s.real


def _tmsv_report_factory(
    spec: TmsvSpec,
    s_dist: float,
    coefficients: tuple[float, float, float],
    point_scale: float,
    state_prefactor2: float,
    state_prefactor1: float,
    measured_power2: float,
    measured_power1: float,
    s_effective: OrderParam,
    clamped: bool,
) -> Callable[[BellSettings], WitnessReport]:
    """Build the per-settings evaluator shared by both noise variants.

    State values carry ``state_prefactor*``; the measured form divides
    them by ``measured_power*`` and compensates in the coefficients,
    which must reproduce the rescaled form to FORM_TOL.
    """
    det = spec.joint_det(s_dist)
    if det <= 0.0:
        raise ValueError(f"quadratic form is not positive definite (det {det})")
    width = spec.marginal_width(s_dist)
    k2 = state_prefactor2 * 4.0 / (pi * pi * det)
    e2 = 2.0 / det
    k1 = state_prefactor1 * 2.0 / (pi * width)
    e1 = 2.0 / width
    sh2 = 2.0 * spec.sinh2xi
    c2, c1, c0 = coefficients
    c2m = c2 * measured_power2
    c1m = c1 * measured_power1

    def evaluate(settings: BellSettings) -> WitnessReport:
        a1 = settings.a1 * point_scale
        a2 = settings.a2 * point_scale
        b1 = settings.b1 * point_scale
        b2 = settings.b2 * point_scale
        a1r, a1i = a1.real, a1.imag
        a2r, a2i = a2.real, a2.imag
        b1r, b1i = b1.real, b1.imag
        b2r, b2i = b2.real, b2.imag
        na1 = a1r * a1r + a1i * a1i
        na2 = a2r * a2r + a2i * a2i
        nb1 = b1r * b1r + b1i * b1i
        nb2 = b2r * b2r + b2i * b2i
        w11 = k2 * exp(-e2 * (width * (na1 + nb1) + sh2 * (a1r * b1r - a1i * b1i)))
        w12 = k2 * exp(-e2 * (width * (na1 + nb2) + sh2 * (a1r * b2r - a1i * b2i)))
        w21 = k2 * exp(-e2 * (width * (na2 + nb1) + sh2 * (a2r * b1r - a2i * b1i)))
        w22 = k2 * exp(-e2 * (width * (na2 + nb2) + sh2 * (a2r * b2r - a2i * b2i)))
        w1a = k1 * exp(-e1 * na1)
        w1b = k1 * exp(-e1 * nb1)
        value = c2 * (w11 + w12 + w21 - w22) + c1 * (w1a + w1b) + c0
        measured = (
            c2m
            * (
                w11 / measured_power2
                + w12 / measured_power2
                + w21 / measured_power2
                - w22 / measured_power2
            )
            + c1m * (w1a / measured_power1 + w1b / measured_power1)
            + c0
        )
        residual = abs(value - measured)
        if residual > FORM_TOL:
            raise ConsistencyError(
                f"witness forms disagree: rescaled {value!r} vs measured {measured!r}"
            )
        bell_abs = abs(value)
        return WitnessReport(
            settings=settings,
            s_effective=s_effective,
            bell_value=value,
            bell_abs=bell_abs,
            violated=bell_abs > 2.0,
            clamped=clamped,
            meta={"form_residual": residual},
        )

    return evaluate


def _clamp_plan(
    clamp_mode: str,
    s_prime: float,
    channel_scale: float,
) -> tuple[tuple[float, float, float], float, float, float, float]:
    """Coefficients, distribution order, point scale, state prefactors.

    ``channel_scale`` is the intensity transmission of the noise channel
    (eta for detection loss, t^2 for the thermal interaction); the
    loss-channel rule evaluates the order -1 witness on the state after
    that channel.
    """
    if clamp_mode not in CLAMP_MODES:
        raise ValueError(f"unknown clamp mode {clamp_mode!r}")
    if s_prime >= -1.0:
        return _coefficients(s_prime), s_prime, 1.0, 1.0, 1.0
    if clamp_mode == CLAMP_BOUNDED:
        return _bounded_coefficients(s_prime), s_prime, 1.0, 1.0, 1.0
    if clamp_mode == CLAMP_FROZEN:
        return _coefficients(-1.0), s_prime, 1.0, 1.0, 1.0
    # Loss channel: per mode W_noisy(alpha; -1) equals
    # (1/g) W(alpha/sqrt(g); 1 - 2/g) with g the channel transmission.
    g = channel_scale
    return (
        _coefficients(-1.0),
        1.0 - 2.0 / g,
        1.0 / math.sqrt(g),
        1.0 / (g * g),
        1.0 / g,
    )


def detection_objective(
    spec: TmsvSpec,
    s,
    noise: DetectionNoise,
    clamp_mode: str = CLAMP_BOUNDED,
) -> Callable[[BellSettings], WitnessReport]:
    """Per-settings witness evaluator for the TMSV under detection loss."""
    sv = _base_order(s)
    eta = noise.eta
    s_prime = 1.0 - (1.0 - sv) / eta
    coeffs, s_dist, point_scale, pref2, pref1 = _clamp_plan(
        clamp_mode, s_prime, eta
    )
    return _tmsv_report_factory(
        spec,
        s_dist,
        coeffs,
        point_scale,
        pref2,
        pref1,
        measured_power2=eta * eta,
        measured_power1=eta,
        s_effective=OrderParam.from_real(s_prime, rescaled=True),
        clamped=s_prime < -1.0,
    )


def thermal_objective(
    spec: TmsvSpec,
    s,
    noise: ThermalNoise,
    clamp_mode: str = CLAMP_BOUNDED,
) -> Callable[[BellSettings], WitnessReport]:
    """Per-settings witness evaluator for the TMSV under thermal noise.

    Settings are interpreted in the measured (unprimed) frame; the
    amplitude rescale to alpha/t happens inside.  The clamping rule is
    applied uniformly when the rescaled order falls below -1.
    """
    sv = _base_order(s)
    t_sq = 1.0 - noise.r * noise.r
    s_prime = (sv - noise.r * noise.r * (1.0 + 2.0 * noise.nbar)) / t_sq
    coeffs, s_dist, channel_scale, pref2, pref1 = _clamp_plan(
        clamp_mode, s_prime, t_sq
    )
    if s_dist != s_prime:
        # Loss-channel reading of the thermal interaction: the order -1
        # distribution of the evolved state, expressed through the input
        # at the doubly rescaled order (valid for nbar = 0 only, where
        # the interaction is pure loss at transmission t^2).  Settings
        # stay in the measured frame; the 1/t of the channel formula is
        # the whole rescale.
        if noise.nbar > 0.0:
            raise ValueError(
                "loss-channel clamping applies to the thermal interaction "
                "only for nbar = 0"
            )
        point_scale = channel_scale
    else:
        point_scale = 1.0 / math.sqrt(t_sq)
    return _tmsv_report_factory(
        spec,
        s_dist,
        coeffs,
        point_scale=point_scale,
        state_prefactor2=pref2,
        state_prefactor1=pref1,
        measured_power2=t_sq * t_sq,
        measured_power1=t_sq,
        s_effective=OrderParam.from_real(s_prime, rescaled=True),
        clamped=s_prime < -1.0,
    )


def bell_value_detection(
    spec: TmsvSpec,
    settings: BellSettings,
    s,
    noise: DetectionNoise,
    clamp_mode: str = CLAMP_BOUNDED,
) -> WitnessReport:
    """Single witness evaluation under detection loss."""
    return detection_objective(spec, s, noise, clamp_mode)(settings)


def bell_value_thermal(
    spec: TmsvSpec,
    settings: BellSettings,
    s,
    noise: ThermalNoise,
    clamp_mode: str = CLAMP_BOUNDED,
) -> WitnessReport:
    """Single witness evaluation under thermal noise."""
    return thermal_objective(spec, s, noise, clamp_mode)(settings)
