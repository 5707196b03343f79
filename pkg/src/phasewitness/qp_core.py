"""Order parameters, parity-series evaluation and convolution laws.

The phase-space distributions handled here form a one-parameter family
indexed by an order parameter ``s``: ``s = 0`` is the Wigner function,
``s = -1`` the Husimi Q function, and noise maps push ``s`` below -1.
A second, complex branch of the parameter (one value per outcome count
``d``) covers number-resolved measurements binned into ``d`` complex
phases.

States enter either as photon-number distributions (series evaluation)
or as callables ``point -> value`` (closed-form evaluation), so no grid
discretization error is introduced anywhere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

__all__ = [
    "REAL_WITNESS",
    "COMPLEX_D_OUTCOME",
    "NORM_TOL",
    "ConvergenceError",
    "ConsistencyError",
    "OrderParam",
    "PhaseSpacePoint",
    "PhotonDistribution",
    "as_order_param",
    "as_point",
    "parity_coefficient",
    "w_from_distribution",
    "gaussian_smooth",
    "beamsplitter_convolve",
    "plane_integral",
]

REAL_WITNESS = "real_witness"
COMPLEX_D_OUTCOME = "complex_d_outcome"

#: Tolerance on probability normalization (sum of probs plus tail bound).
NORM_TOL = 1e-10

#: Photon distributions beyond this tail mass are flagged as unreliable.
TAIL_WARN = 1e-6

#: Hard cap on series length; anything needing more is reported as failure.
N_MAX_CAP = 4096


class ConvergenceError(RuntimeError):
    """A series or quadrature could not reach the requested tolerance."""


class ConsistencyError(RuntimeError):
    """Two supposedly equivalent evaluation routes disagreed."""


@dataclass(frozen=True)
class OrderParam:
    """Order parameter of the quasiprobability family.

    ``real_witness`` values live in [-1, 0]; values produced by a noise
    rescaling carry ``rescaled=True`` and may lie below -1.  The
    ``complex_d_outcome`` branch stores the one admissible value per
    outcome count ``d``, namely ``-i*cot(pi/d)`` (0 for d = 2).
    """

    value: complex
    kind: str = REAL_WITNESS
    rescaled: bool = False
    d: int | None = None

    def __post_init__(self) -> None:
        v = complex(self.value)
        object.__setattr__(self, "value", v)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError("order parameter must be finite")
        if self.kind == REAL_WITNESS:
            if v.imag != 0.0:
                raise ValueError("real_witness order parameter must have zero imaginary part")
            if self.rescaled:
                if v.real > 0.0:
                    raise ValueError("rescaled order parameter cannot be positive")
            elif not -1.0 <= v.real <= 0.0:
                raise ValueError(
                    f"order parameter {v.real} outside [-1, 0]; "
                    "values below -1 must be tagged as rescaled"
                )
        elif self.kind == COMPLEX_D_OUTCOME:
            if self.d is None or int(self.d) < 2:
                raise ValueError("complex_d_outcome requires an outcome count d >= 2")
            if not self.rescaled:
                expected = -1j / math.tan(math.pi / self.d) if self.d > 2 else 0j
                if abs(v - expected) > 1e-12:
                    raise ValueError(f"d-outcome order parameter must equal {expected}")
        else:
            raise ValueError(f"unknown order-parameter kind {self.kind!r}")

    @classmethod
    def from_real(cls, s: float, *, rescaled: bool = False) -> "OrderParam":
        return cls(complex(float(s)), REAL_WITNESS, rescaled=rescaled)

    @classmethod
    def d_outcome(cls, d: int) -> "OrderParam":
        d = int(d)
        if d < 2:
            raise ValueError("outcome count d must be >= 2")
        value = -1j / math.tan(math.pi / d) if d > 2 else 0j
        return cls(value, COMPLEX_D_OUTCOME, d=d)

    @property
    def is_real(self) -> bool:
        return self.kind == REAL_WITNESS

    @property
    def real(self) -> float:
        if not self.is_real:
            raise TypeError("order parameter is not on the real branch")
        return self.value.real

    @property
    def ratio(self) -> complex | float:
        """Weight ratio (s+1)/(s-1) between successive number states."""
        v = self.value
        if abs(v - 1.0) < 1e-300:
            raise ValueError("order parameter s = 1 is singular")
        r = (v + 1.0) / (v - 1.0)
        return r.real if self.is_real else r

    @property
    def omega(self) -> complex:
        """Outcome phase exp(2*pi*i/d); equals the weight ratio."""
        if self.kind != COMPLEX_D_OUTCOME:
            raise TypeError("omega is only defined on the d-outcome branch")
        return cmath.exp(2j * math.pi / self.d)


def as_order_param(s: Union["OrderParam", float, int]) -> OrderParam:
    """Coerce a real number to an OrderParam.

    Explicit numeric values below -1 are treated as deliberately
    rescaled; all other validation is delegated to the constructor.
    """
    if isinstance(s, OrderParam):
        return s
    if isinstance(s, (bool, complex)) and not isinstance(s, (int, float)):
        raise TypeError("complex order parameters must be built with OrderParam.d_outcome")
    if isinstance(s, (int, float, np.integer, np.floating)):
        s = float(s)
        return OrderParam.from_real(s, rescaled=s < -1.0)
    raise TypeError(f"cannot interpret {s!r} as an order parameter")


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A complex displacement amplitude for one mode."""

    alpha: complex

    def __post_init__(self) -> None:
        a = complex(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValueError("phase-space point must be finite")


def as_point(alpha: Union[PhaseSpacePoint, complex, float]) -> PhaseSpacePoint:
    if isinstance(alpha, PhaseSpacePoint):
        return alpha
    return PhaseSpacePoint(complex(alpha))


def _point_value(alpha) -> complex:
    return alpha.alpha if isinstance(alpha, PhaseSpacePoint) else complex(alpha)


@dataclass(frozen=True)
class PhotonDistribution:
    """Photon-number probabilities p(0..n_max) with a rigorous tail bound."""

    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        p = np.atleast_1d(np.asarray(self.probs, dtype=float)).copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tail_bound", float(self.tail_bound))
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite")
        if np.any(p < 0.0):
            raise ValueError("probs must be non-negative")
        if self.tail_bound < 0.0:
            raise ValueError("tail_bound must be non-negative")
        total = float(p.sum()) + self.tail_bound
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"distribution mass {total} deviates from 1 beyond {NORM_TOL}")

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def tail_warning(self) -> bool:
        return self.tail_bound > TAIL_WARN


def parity_coefficient(n: int, s: Union[OrderParam, float]) -> float | complex:
    """Series weight ((s+1)/(s-1))^n / (1-s) of the n-th number state.

    This is the expectation value of the bounded parity-like observable
    in the displaced number state |alpha, n> (independent of alpha).
    """
    n = int(n)
    if n < 0:
        raise ValueError("photon number n must be non-negative")
    s = as_order_param(s)
    ratio = s.ratio
    coeff = ratio**n / (1.0 - s.value)
    return coeff.real if s.is_real else coeff


def w_from_distribution(
    p: PhotonDistribution,
    s: Union[OrderParam, float],
    tol: float = 1e-10,
) -> float | complex:
    """Quasiprobability value (2/pi) * sum_n coeff(n, s) p(n).

    The distribution must make the series summable: for |ratio| < 1 any
    tail is damped geometrically, while on the unit circle (s = 0 and
    every d-outcome value) the tail bound itself must be below ``tol``.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    s = as_order_param(s)
    ratio = s.ratio
    r_abs = abs(ratio)
    prefactor = 2.0 / (math.pi * (1.0 - (s.real if s.is_real else s.value)))
    if r_abs > 1.0 + 1e-12:
        if p.tail_bound > 0.0:
            raise ValueError(
                f"series diverges for |ratio| = {r_abs} > 1 with non-zero tail mass"
            )
    if p.n_max + 1 > N_MAX_CAP:
        raise ConvergenceError(f"distribution longer than the n_max cap {N_MAX_CAP}")
    # Tail error: every omitted term is bounded by |ratio|^(n_max+1) times its mass,
    # and independently by the pure geometric sum.
    damp = min(r_abs, 1.0) ** (p.n_max + 1)
    tail_err = abs(prefactor) * damp * p.tail_bound
    if r_abs < 1.0:
        geometric = abs(prefactor) * r_abs ** (p.n_max + 1) / (1.0 - r_abs)
        tail_err = min(tail_err, geometric)
    if tail_err > tol:
        raise ConvergenceError(
            f"series tail bound {tail_err:.3e} exceeds tol {tol:.3e} at n_max {p.n_max}"
        )
    n = np.arange(p.probs.size)
    powers = np.asarray(ratio, dtype=complex) ** n if not s.is_real else np.asarray(ratio) ** n
    total = float(np.dot(powers, p.probs)) if s.is_real else complex(np.dot(powers, p.probs))
    return prefactor * total


# ---------------------------------------------------------------------------
# Adaptive plane quadrature
# ---------------------------------------------------------------------------

_ORDERS = (17, 31, 61, 121, 241)
_RADIUS_GROWTH = 1.5
_MAX_RADIUS_STEPS = 6

FieldEvaluator = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def _gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _square_nodes(center: complex, radius: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gauss_nodes(order)
    re = center.real + radius * x
    im = center.imag + radius * x
    pts = re[:, None] + 1j * im[None, :]
    wts = (radius * w)[:, None] * (radius * w)[None, :]
    return pts.ravel(), wts.ravel()


def _integrate_at(f: FieldEvaluator, center: complex, radius: float, tol: float):
    prev = None
    for order in _ORDERS:
        pts, wts = _square_nodes(center, radius, order)
        vals = np.asarray(f(pts), dtype=float).reshape(-1, pts.size)
        est = vals @ wts
        if prev is not None and np.max(np.abs(est - prev)) <= 0.5 * tol:
            return est, order
        prev = est
    raise ConvergenceError(
        f"quadrature did not converge to {tol:.2e} at order {_ORDERS[-1]} (radius {radius})"
    )


def plane_integral(
    f: FieldEvaluator,
    *,
    center: complex = 0j,
    radius: float = 5.0,
    tol: float = 1e-8,
) -> np.ndarray:
    """Integral of a decaying field over the plane.

    ``f`` receives a flat complex array of nodes; it may return one row
    per integrand (shape ``(k, n_nodes)``) so several integrals sharing
    the same nodes are computed together.  The domain is a square that
    grows until the result is radius-stable within ``tol``.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    est, order = _integrate_at(f, center, radius, tol)
    for _ in range(_MAX_RADIUS_STEPS):
        bigger, order = _integrate_at(f, center, radius * _RADIUS_GROWTH, tol)
        if np.max(np.abs(bigger - est)) <= 0.5 * tol:
            return bigger
        radius *= _RADIUS_GROWTH
        est = bigger
    raise ConvergenceError(f"quadrature domain did not stabilize within {tol:.2e}")


def gaussian_smooth(
    w: FieldEvaluator,
    s: Union[OrderParam, float],
    s_prime: Union[OrderParam, float],
    alpha,
    quad_tol: float = 1e-8,
):
    """Lower the order parameter by Gaussian convolution.

    Evaluates (2/(pi*(s-s'))) * integral d^2 beta W(beta; s)
    exp(-2|alpha-beta|^2/(s-s')) at one point or an array of points.
    Requires strictly s > s'.
    """
    s = as_order_param(s)
    s_prime = as_order_param(s_prime)
    if not (s.is_real and s_prime.is_real):
        raise ValueError("gaussian smoothing is defined on the real branch only")
    delta = s.real - s_prime.real
    if delta <= 0.0:
        raise ValueError("smoothing requires s > s_prime")
    if quad_tol <= 0.0:
        raise ValueError("quad_tol must be positive")

    scalar = np.isscalar(alpha) or isinstance(alpha, PhaseSpacePoint)
    targets = np.atleast_1d(
        np.asarray(_point_value(alpha) if scalar else alpha, dtype=complex)
    ).ravel()

    prefactor = 2.0 / (math.pi * delta)
    # Kernel mass outside radius rho is exp(-2 rho^2 / delta); keep it
    # below quad_tol/10 and let the growing-domain check cover the state.
    kernel_radius = math.sqrt(0.5 * delta * math.log(10.0 / quad_tol))

    def smooth_chunk(chunk: np.ndarray) -> np.ndarray:
        center = complex(np.mean(chunk))
        spread = float(np.max(np.abs(chunk - center)))
        radius = 1.3 * kernel_radius + spread

        def integrand(pts: np.ndarray) -> np.ndarray:
            base = np.asarray(w(pts), dtype=float)
            diff2 = np.abs(chunk[:, None] - pts[None, :]) ** 2
            return base[None, :] * np.exp(-2.0 * diff2 / delta)

        return prefactor * plane_integral(
            integrand, center=center, radius=radius, tol=quad_tol
        )

    # Group targets into square tiles of kernel size: the integration
    # domain then stays within a couple of kernel radii of every target,
    # so the fixed order ladder always has enough resolution, and the
    # size cap keeps the targets-by-nodes kernel matrix small.
    tile = max(kernel_radius, 1e-6)
    chunk_size = 256
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, z in enumerate(targets):
        key = (math.floor(z.real / tile), math.floor(z.imag / tile))
        groups.setdefault(key, []).append(idx)
    vals = np.empty(targets.size)
    for members in groups.values():
        idxs = np.asarray(members)
        for start in range(0, idxs.size, chunk_size):
            sub = idxs[start : start + chunk_size]
            vals[sub] = smooth_chunk(targets[sub])
    if scalar:
        return float(vals[0])
    return vals.reshape(np.shape(alpha))


def beamsplitter_convolve(
    w_a: FieldEvaluator,
    w_b: FieldEvaluator,
    r: float,
    t: float,
    s: Union[OrderParam, float],
    alpha,
    quad_tol: float = 1e-8,
) -> float:
    """Output-mode quasiprobability after mixing two fields on a beam splitter.

    Evaluates (1/t^2) * integral d^2 beta W_a(beta) W_b((alpha - r beta)/t)
    for reflectivity/transmissivity with r^2 + t^2 = 1.  Both fields must
    be supplied at the same order parameter ``s``; that order does not
    enter the formula itself.
    """
    r = float(r)
    t = float(t)
    if not (0.0 <= r <= 1.0 and 0.0 <= t <= 1.0):
        raise ValueError("r and t must lie in [0, 1]")
    if abs(r * r + t * t - 1.0) > 1e-12:
        raise ValueError("beam splitter must satisfy r^2 + t^2 = 1")
    if t <= 0.0:
        raise ValueError("transmissivity t must be positive")
    as_order_param(s)  # validated for caller sanity; the law is order-independent
    a = _point_value(alpha)

    def integrand(pts: np.ndarray) -> np.ndarray:
        return np.asarray(w_a(pts), dtype=float) * np.asarray(
            w_b((a - r * pts) / t), dtype=float
        )

    vals = plane_integral(integrand, center=0j, radius=5.0, tol=quad_tol * t * t)
    return float(vals[0]) / (t * t)
