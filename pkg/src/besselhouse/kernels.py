"""Transition kernels of the Bessel process, bridge-maximum laws, and the
q1/q2 kernels of the house-moving construction.

Every series here is a Fourier-Bessel expansion over the positive zeros
j_n of J_nu.  Terms carry exp(-j_n^2 * scale) with scale = tau/(2 c^2), so
truncation is controlled by a geometric-style tail envelope

    C * sum_{n > N} n^kappa * exp(-(n pi)^2 * scale / 4)

whose constant C is calibrated from the computed terms and re-certified
whenever the partial sum grows.  All kernels are evaluated in scaled/log
space: the modified Bessel factor only ever appears as the reduced form
z^-nu e^-z I_nu(z), which neither overflows nor loses the x -> 0 limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.special as _sp

from .errors import DomainError, PositivityViolation, SeriesNotConverged
from .specfun import (
    bessel_i_scaled_reduced,
    bessel_j,
    bessel_j_scaled,
    bessel_j_zeros,
    check_order,
    gamma_fn,
)

__all__ = [
    "ProcessParams",
    "SeriesPolicy",
    "KernelValue",
    "DEFAULT_POLICY",
    "gauss_kernel",
    "bes_transition",
    "bridge_transition",
    "max_dist_bridge",
    "max_dist_eta_derivative",
    "q1",
    "q1_grid",
    "q2",
    "q2_grid",
    "hitting_density",
    "hitting_density_kent",
    "hitting_cdf",
    "hitting_survival",
    "truncation_bound",
    "theta_q1_half",
    "theta_q2_half",
    "theta_max_dist_half",
    "theta_hitting_half",
]

_EPS = float(np.finfo(float).eps)
_LOG_FLOOR = -700.0  # below this a log-space denominator is treated as underflow


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _finite(*vals: float) -> bool:
    return all(math.isfinite(v) for v in vals)


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class ProcessParams:
    """Dimension and endpoints of the house-moving problem.

    delta is the Bessel dimension, a the start point, b the target level
    the process must reach at time 1; nu = delta/2 - 1 is the order every
    series runs over.
    """

    delta: float
    a: float
    b: float

    def __post_init__(self) -> None:
        _require(_finite(self.delta, self.a, self.b), "parameters must be finite")
        _require(self.delta > 0, f"delta must be positive, got {self.delta}")
        _require(0 <= self.a < self.b, f"need 0 <= a < b, got a={self.a}, b={self.b}")

    @property
    def nu(self) -> float:
        return self.delta / 2.0 - 1.0


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation and conditioning policy for all series evaluations.

    tau_floor is the minimum admissible decay scale tau/(2 c^2); below it
    the series would need far more than n_max terms and the evaluation
    fails loudly instead of returning something quietly wrong.
    """

    rel_tol: float = 1e-12
    n_min: int = 8
    n_max: int = 20000
    tau_floor: float = 1e-6

    def __post_init__(self) -> None:
        _require(0 < self.rel_tol < 1, "rel_tol must lie in (0, 1)")
        _require(1 <= self.n_min <= self.n_max, "need 1 <= n_min <= n_max")
        _require(self.tau_floor > 0, "tau_floor must be positive")


DEFAULT_POLICY = SeriesPolicy()


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation carrying its log form and any clamp applied.

    kind is "probability" (clamped into [0,1]) or "density" (clamped into
    [0, inf)); clamp records the magnitude removed by clamping, which the
    policy bounds by 10 * rel_tol.
    """

    value: float
    kind: str
    log_value: float
    clamp: float = 0.0

    def __float__(self) -> float:
        return self.value


def _finish(raw: float, log_abs: float, kind: str, policy: SeriesPolicy,
            noise: float = 0.0) -> KernelValue:
    """Clamp a raw kernel value per its kind and package it.

    noise is the absolute roundoff scale of the computation; negative
    densities within max(1e-12, noise) are treated as zero.
    """
    if kind == "probability":
        slack = 10.0 * policy.rel_tol
        if raw < -slack or raw > 1.0 + slack:
            raise PositivityViolation(
                f"probability evaluated to {raw}, outside [0,1] by more than {slack:g}"
            )
        clamped = min(1.0, max(0.0, raw))
        logv = 0.0 if clamped == 1.0 else (math.log(clamped) if clamped > 0 else -math.inf)
        if 0.0 < clamped < 1.0:
            logv = log_abs
        return KernelValue(clamped, kind, logv, abs(raw - clamped))
    # density
    slack = max(1e-12, noise)
    if raw < -slack:
        raise PositivityViolation(f"density evaluated to {raw}, beyond -{slack:g} slack")
    if raw < 0.0:
        return KernelValue(0.0, kind, -math.inf, abs(raw))
    if raw == 0.0:
        # a finite log_abs here means the value underflowed, not vanished
        return KernelValue(0.0, kind, log_abs if log_abs < 0 else -math.inf, 0.0)
    return KernelValue(raw, kind, log_abs, 0.0)


# --------------------------------------------------------------------------
# certified series machinery


class _SeriesResult(NamedTuple):
    value: np.ndarray  # shape (K,), partial sums per evaluation point
    abs_sum: np.ndarray  # shape (K,), sums of |terms| (roundoff scale)
    err: float  # certified absolute error bound (tail + roundoff), worst point
    n_terms: int


def _tail_envelope(kappa: float, alpha: float, n_from: int) -> float:
    """Upper bound on sum_{n >= n_from} n^kappa exp(-alpha n^2).

    Sums explicitly while the summand may still be increasing, then uses
    f(n) + integral via the upper incomplete gamma once it is decreasing.
    """
    if alpha <= 0 or not math.isfinite(alpha):
        return math.inf
    peak = math.sqrt(max(kappa, 0.0) / (2.0 * alpha))
    acc = 0.0
    n = n_from
    while n < peak:
        acc += n**kappa * math.exp(-alpha * n * n)
        n += 1
    s = (kappa + 1.0) / 2.0
    z = alpha * n * n
    if z > 745.0:  # exp underflows; the whole tail is below ~1e-320
        return acc
    integral = float(_sp.gammaincc(s, z)) * gamma_fn(s) / (2.0 * alpha**s)
    return acc + n**kappa * math.exp(-z) + integral


def _envelope_constant(terms: np.ndarray, kappa: float, alpha: float) -> float:
    """Calibrate C so |term_n| <= C n^kappa exp(-alpha n^2) on computed terms.

    A 2x headroom covers oscillation of the Bessel factors between the
    computed indices and the tail.
    """
    flat = terms if terms.ndim == 1 else np.abs(terms).max(axis=1)
    n = np.arange(1, len(flat) + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(np.abs(flat)) - (kappa * np.log(n) - alpha * n * n)
    finite = np.isfinite(log_ratio)
    if not finite.any():
        return 0.0
    return 2.0 * float(np.exp(np.clip(log_ratio[finite].max(), None, 700.0)))


def truncation_bound(
    policy: SeriesPolicy,
    nu: float,
    scale: float,
    partial_state: tuple[float, float] | None = None,
    *,
    kappa: float = 0.0,
) -> int:
    """Term count N sufficient for the given decay scale.

    Guarantees C * sum_{n > N} n^kappa exp(-(n pi)^2 scale/4) <= rel_tol * |partial|,
    where (C, partial) come from partial_state (defaults to (1, 1)), and is
    nonincreasing in scale.  Raises SeriesNotConverged when the scale sits
    below tau_floor or when no N <= n_max can meet the target.
    """
    check_order(nu)
    if not (scale > 0) or not math.isfinite(scale):
        raise DomainError(f"scale must be positive and finite, got {scale}")
    if scale < policy.tau_floor:
        raise SeriesNotConverged(
            f"decay scale {scale:.3g} below tau_floor {policy.tau_floor:.3g}",
            scale=scale,
            terms=0,
        )
    c_hat, partial = partial_state if partial_state is not None else (1.0, 1.0)
    alpha = math.pi**2 * scale / 4.0
    target = policy.rel_tol * abs(partial)
    if c_hat == 0.0:
        return policy.n_min
    n = 1
    while n <= policy.n_max:
        if c_hat * _tail_envelope(kappa, alpha, n + 1) <= target:
            return max(n, policy.n_min)
        n = max(n + 1, int(n * 1.4))
    raise SeriesNotConverged(
        f"tail bound cannot reach rel_tol {policy.rel_tol:g} within "
        f"n_max={policy.n_max} terms at scale {scale:.3g}",
        scale=scale,
        terms=policy.n_max,
    )


def _certified_series(
    term_fn: Callable[[np.ndarray], np.ndarray],
    kappa: float,
    scale: float,
    policy: SeriesPolicy,
) -> _SeriesResult:
    """Sum term_fn over n = 1, 2, ... with a certified truncation error.

    term_fn(idx) returns the signed terms (including the exponential decay
    factor) for 1-based indices idx, shaped (len(idx),) or (len(idx), K)
    for grid evaluation.  Stops once the tail envelope drops below
    rel_tol * |partial| or below the roundoff floor of the partial sums.
    """
    if not (scale > 0) or not math.isfinite(scale):
        raise DomainError(f"series scale must be positive and finite, got {scale}")
    if scale < policy.tau_floor:
        raise SeriesNotConverged(
            f"decay scale {scale:.3g} below tau_floor {policy.tau_floor:.3g}",
            scale=scale,
            terms=0,
        )
    alpha = math.pi**2 * scale / 4.0
    n = policy.n_min
    terms = np.atleast_1d(term_fn(np.arange(1, n + 1)))
    if terms.ndim == 1:
        terms = terms[:, None]
    while True:
        partial = terms.sum(axis=0)
        abs_sum = np.abs(terms).sum(axis=0)
        ref = float(np.max(np.abs(partial)))
        c_hat = _envelope_constant(terms, kappa, alpha)
        tail = c_hat * _tail_envelope(kappa, alpha, n + 1)
        roundoff = _EPS * float(abs_sum.max())
        target = max(policy.rel_tol * ref, 0.5 * roundoff)
        if tail <= target or c_hat == 0.0:
            return _SeriesResult(partial, abs_sum, tail + roundoff, n)
        if n >= policy.n_max:
            raise SeriesNotConverged(
                f"series tail {tail:.3g} above target {target:.3g} after "
                f"n_max={policy.n_max} terms",
                scale=scale,
                terms=n,
            )
        n_new = min(
            policy.n_max,
            max(
                2 * n,
                truncation_bound(
                    policy, 0.0, scale, (c_hat, ref if ref > 0 else 1.0), kappa=kappa
                ),
            ),
        )
        fresh = np.atleast_1d(term_fn(np.arange(n + 1, n_new + 1)))
        if fresh.ndim == 1:
            fresh = fresh[:, None]
        terms = np.vstack([terms, fresh])
        n = n_new


def _kappa_sym(nu: float, x: float, y: float) -> float:
    # envelope exponent of the symmetric q1/max-dist series family
    if x == 0.0 and y == 0.0:
        return max(0.0, 2 * nu + 1.0)
    if x == 0.0 or y == 0.0:
        return max(0.0, nu + 0.5)
    return 0.0


def _zeros_weights(nu: float, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    table = bessel_j_zeros(nu, int(idx[-1]))
    sl = idx - 1
    return table.zeros[sl], table.weights[sl]


def _sym_core(
    nu: float, c: float, scale: float, x: float, y: float, policy: SeriesPolicy
) -> _SeriesResult:
    """S = sum_n (j_n/c)^(2 nu) jsc(nu, x j_n/c) jsc(nu, y j_n/c) / J_{nu+1}(j_n)^2
    * exp(-j_n^2 scale), with jsc(nu, z) = z^-nu J_nu(z).

    This single form covers x = 0 and/or y = 0 (jsc is finite at 0), and the
    power factor is fused into the exponential so it cannot overflow.
    """

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp(2.0 * nu * np.log(j / c) - j * j * scale)
        return g * bessel_j_scaled(nu, x * j / c) * bessel_j_scaled(nu, y * j / c) / (w * w)

    return _certified_series(term, _kappa_sym(nu, x, y), scale, policy)


# --------------------------------------------------------------------------
# elementary kernels


def gauss_kernel(t: float, x: float) -> KernelValue:
    """Gaussian heat kernel n_t(x) = exp(-x^2/(2t)) / sqrt(2 pi t)."""
    _require(_finite(t, x) and t > 0, f"need finite t > 0, got t={t}")
    log_value = -x * x / (2.0 * t) - 0.5 * math.log(2.0 * math.pi * t)
    return KernelValue(math.exp(log_value), "density", log_value)


def bes_transition(p: ProcessParams, t: float, x: float, y: float) -> KernelValue:
    """Bessel transition density p(t; x, y), uniformly valid down to x = 0.

    Evaluated as y^(2 nu + 1) t^-(nu+1) exp(-(x-y)^2/(2t)) * r(nu, x y / t)
    with the reduced kernel r(nu, z) = z^-nu e^-z I_nu(z); at x = 0 the
    reduced kernel degenerates to 1/(2^nu Gamma(nu+1)) and the classical
    limit branch is recovered exactly.
    """
    nu = check_order(p.nu)
    _require(_finite(t, x, y) and t > 0 and y > 0 and x >= 0,
             f"need t > 0, y > 0, x >= 0, got t={t}, x={x}, y={y}")
    red = float(bessel_i_scaled_reduced(nu, x * y / t))
    log_value = (
        (2.0 * nu + 1.0) * math.log(y)
        - (nu + 1.0) * math.log(t)
        - (x - y) ** 2 / (2.0 * t)
        + math.log(red)
    )
    return KernelValue(math.exp(log_value), "density", log_value)


def _log_bes_transition(nu: float, t: float, x: float, y: float) -> float:
    red = float(bessel_i_scaled_reduced(nu, x * y / t))
    return (
        (2.0 * nu + 1.0) * math.log(y)
        - (nu + 1.0) * math.log(t)
        - (x - y) ** 2 / (2.0 * t)
        + math.log(red)
    )


def bridge_transition(
    p: ProcessParams,
    s: float,
    x: float,
    t: float,
    y: float,
    horizon_end: float,
    endpoint: float,
) -> KernelValue:
    """Transition density of the Bessel bridge pinned at endpoint.

    p(t-s; x, y) p(T-t; y, w) / p(T-s; x, w) in log space; the w = 0 pin
    uses the reduced-kernel ratio so the vanishing endpoint density cancels
    analytically instead of numerically.  x = 0 is allowed (the bridge
    started at the origin); y stays strictly positive since the result is
    a density in y.
    """
    nu = check_order(p.nu)
    _require(
        _finite(s, x, t, y, horizon_end, endpoint)
        and s < t < horizon_end
        and x >= 0
        and y > 0
        and endpoint >= 0,
        f"need s < t < horizon_end and x >= 0, y > 0, got s={s}, t={t}, end={horizon_end}",
    )
    log_num = _log_bes_transition(nu, t - s, x, y)
    w = endpoint
    if w == 0.0:
        # ratio p(T-t; y, w)/p(T-s; x, w) as w -> 0: the w^(2nu+1) factor and
        # the reduced kernels (both -> 1/(2^nu Gamma(nu+1))) cancel
        dt1, dt0 = horizon_end - t, horizon_end - s
        log_ratio = (
            (nu + 1.0) * math.log(dt0 / dt1)
            - y * y / (2.0 * dt1)
            + x * x / (2.0 * dt0)
        )
        log_value = log_num + log_ratio
    else:
        log_den = _log_bes_transition(nu, horizon_end - s, x, w)
        if log_den < _LOG_FLOOR:
            raise SeriesNotConverged(
                f"bridge denominator underflows (log {log_den:.1f}); "
                "the pinning event is numerically impossible at these parameters"
            )
        log_value = log_num + _log_bes_transition(nu, horizon_end - t, y, w) - log_den
    return KernelValue(math.exp(log_value), "density", log_value)


# --------------------------------------------------------------------------
# bridge maximum law and its barrier derivative


def _saturated(c: float, tau: float, x: float, y: float, delta: float) -> bool:
    # barrier so far above the path scale that P(M > c) is far below 1e-200;
    # the exponent threshold tosses in delta to cover the outward drift
    m = max(x, y)
    return (c - m) ** 2 / (2.0 * tau) >= 500.0 + 10.0 * delta


def max_dist_bridge(
    p: ProcessParams,
    c: float,
    tau: float,
    x: float,
    y: float,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> KernelValue:
    """P(max of the Bessel bridge x -> y over elapsed time tau is <= c).

    One series covers all endpoint cases:

        P = 2 tau^(nu+1) e^((x-y)^2/(2 tau)) / (c^2 r(nu, x y/tau)) * S,

    with S the symmetric core of _sym_core and r the reduced I-kernel.
    Assembled in log space; the certified roundoff of S must stay below
    1e-6 relative or the evaluation refuses to answer.
    """
    nu = check_order(p.nu)
    _require(_finite(c, tau, x, y) and tau > 0, f"need finite tau > 0, got {tau}")
    _require(0 <= x < c and 0 <= y < c, f"need 0 <= x, y < c, got x={x}, y={y}, c={c}")
    if _saturated(c, tau, x, y, p.delta):
        return KernelValue(1.0, "probability", 0.0)
    scale = tau / (2.0 * c * c)
    if scale < policy.tau_floor and abs(p.delta - 3.0) < 1e-12:
        # reflection series converges the faster the smaller tau is
        return theta_max_dist_half(c, tau, x, y, policy)
    core = _sym_core(nu, c, scale, x, y, policy)
    s_val = float(core.value[0])
    if core.err > 1e-6 * max(abs(s_val), 1e-300):
        raise SeriesNotConverged(
            "bridge-maximum series lost too many digits to cancellation "
            f"(certified error {core.err:.2g} vs value {s_val:.2g})",
            scale=scale,
            terms=core.n_terms,
        )
    red = float(bessel_i_scaled_reduced(nu, x * y / tau))
    log_pref = (
        math.log(2.0)
        + (nu + 1.0) * math.log(tau)
        + (x - y) ** 2 / (2.0 * tau)
        - 2.0 * math.log(c)
        - math.log(red)
    )
    if s_val == 0.0:
        return _finish(0.0, -math.inf, "probability", policy)
    log_abs = min(log_pref + math.log(abs(s_val)), 700.0)
    return _finish(math.copysign(math.exp(log_abs), s_val), log_abs, "probability", policy)


def max_dist_eta_derivative(
    p: ProcessParams,
    eta: float,
    tau: float,
    x: float,
    y: float,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """d/d eta of max_dist_bridge at barrier eta, by term-wise differentiation.

    Differentiating the scaled series of max_dist_bridge in the barrier
    gives, with u_n = j_n/eta,

        dP/d eta = pref / eta^3 * sum_n u_n^(2 nu) [ (tau u_n^2 - (2 nu + 2))
                   jsc(nu, x u_n) jsc(nu, y u_n)
                   + u_n^2 x^2 jsc(nu+1, x u_n) jsc(nu, y u_n)
                   + u_n^2 y^2 jsc(nu, x u_n) jsc(nu+1, y u_n) ]
                   / J_{nu+1}(j_n)^2 * exp(-j_n^2 tau/(2 eta^2)),

    pref = 2 tau^(nu+1) e^((x-y)^2/(2 tau)) / r(nu, x y/tau), valid for all
    x, y >= 0 including the endpoint-at-origin cases.
    """
    nu = check_order(p.nu)
    _require(_finite(eta, tau, x, y) and tau > 0, f"need finite tau > 0, got {tau}")
    _require(0 <= x < eta and 0 <= y < eta,
             f"need 0 <= x, y < eta, got x={x}, y={y}, eta={eta}")
    scale = tau / (2.0 * eta * eta)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        u = j / eta
        g = np.exp(2.0 * nu * np.log(u) - j * j * scale)
        jx = bessel_j_scaled(nu, x * u)
        jy = bessel_j_scaled(nu, y * u)
        jx1 = bessel_j_scaled(nu + 1.0, x * u)
        jy1 = bessel_j_scaled(nu + 1.0, y * u)
        u2 = u * u
        brace = (tau * u2 - (2.0 * nu + 2.0)) * jx * jy
        brace += u2 * (x * x * jx1 * jy + y * y * jx * jy1)
        return g * brace / (w * w)

    core = _certified_series(term, max(2.0, nu + 2.5), scale, policy)
    s_val = float(core.value[0])
    red = float(bessel_i_scaled_reduced(nu, x * y / tau))
    log_pref = (
        math.log(2.0)
        + (nu + 1.0) * math.log(tau)
        + (x - y) ** 2 / (2.0 * tau)
        - math.log(red)
        - 3.0 * math.log(eta)
    )
    if s_val == 0.0:
        return 0.0
    return math.copysign(math.exp(log_pref + math.log(abs(s_val))), s_val)


# --------------------------------------------------------------------------
# q1 / q2


def q1(
    p: ProcessParams,
    c: float,
    s: float,
    x: float,
    t: float,
    y: float,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> KernelValue:
    """Sub-probability transition density q1^(c)(s, x, t, y) of the bridge
    killed when it exceeds c.

    Evaluated as the single series 2 y^(2 nu + 1)/c^2 * S (S from _sym_core),
    never as density times conditional probability, so no cancellation is
    introduced where the conditioning is nearly certain.  y = c returns an
    exact 0 (every term vanishes there); y = 0 is the natural boundary limit.
    """
    nu = check_order(p.nu)
    _require(_finite(c, s, x, t, y) and s < t, f"need s < t, got s={s}, t={t}")
    _require(0 <= x < c, f"need 0 <= x < c, got x={x}, c={c}")
    _require(0 <= y <= c, f"need 0 <= y <= c, got y={y}, c={c}")
    pw_exp = 2.0 * nu + 1.0  # y-power; equals delta - 1
    if y == 0.0 and pw_exp < 0.0:
        raise DomainError("q1 density diverges at y = 0 for delta < 1")
    tau = t - s
    scale = tau / (2.0 * c * c)
    core = _sym_core(nu, c, scale, x, y, policy)
    s_val = float(core.value[0])
    pref = 2.0 * y**pw_exp / (c * c)  # 0**0 == 1 covers delta = 1 at y = 0
    if y > 0.0:
        log_pref = math.log(2.0) + pw_exp * math.log(y) - 2.0 * math.log(c)
    else:
        log_pref = math.log(2.0) - 2.0 * math.log(c) if pw_exp == 0.0 else -math.inf
    if s_val <= 0.0:
        return _finish(pref * s_val, -math.inf, "density", policy, core.err * pref)
    log_value = log_pref + math.log(s_val)
    raw = math.exp(log_value) if log_value < 700.0 else pref * s_val
    return _finish(raw, log_value, "density", policy, core.err * pref)


def q1_grid(
    p: ProcessParams,
    c: float,
    s: float,
    x: float,
    t: float,
    y: np.ndarray,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Vectorized q1 over a grid of terminal points y.

    One truncation level serves the whole grid: the tail target is relative
    to the largest |partial sum| across the grid, so points near density
    zeros carry absolute (not relative) accuracy.  Used by the quadrature
    and table builders, where that is the right notion of error.
    """
    nu = check_order(p.nu)
    y = np.asarray(y, dtype=float)
    _require(_finite(c, s, x, t) and s < t, f"need s < t, got s={s}, t={t}")
    _require(0 <= x < c, f"need 0 <= x < c, got x={x}, c={c}")
    _require(bool(np.all((y >= 0) & (y <= c))), "grid points must lie in [0, c]")
    _require(y.size > 0, "grid must be nonempty")
    if np.any(y == 0.0) and 2.0 * nu + 1.0 < 0.0:
        raise DomainError("q1 density diverges at y = 0 for delta < 1")
    tau = t - s
    scale = tau / (2.0 * c * c)
    kappa = _kappa_sym(nu, x, 0.0 if np.any(y == 0.0) else 1.0)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp(2.0 * nu * np.log(j / c) - j * j * scale)
        fx = bessel_j_scaled(nu, x * j / c)
        fy = bessel_j_scaled(nu, y[None, :] * j[:, None] / c)
        return (g * fx / (w * w))[:, None] * fy

    core = _certified_series(term, kappa, scale, policy)
    vals = 2.0 * y ** (2.0 * nu + 1.0) * core.value / (c * c)
    return np.maximum(vals, 0.0)


def q2(
    p: ProcessParams,
    b: float,
    tau: float,
    y: float,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> float:
    """Barrier-contact kernel q2^(b)(tau, y): the density rate at which the
    path started from y first reaches the level b after elapsed time tau.

    Series form 2/b^2 * sum_n j_n^(nu+1) jsc(nu, y j_n/b) / J_{nu+1}(j_n)
    * exp(-j_n^2 tau/(2 b^2)); the jsc factor makes y = 0 the same code
    path as y > 0.  Strictly positive; a non-positive converged value
    signals a series bug and raises PositivityViolation.
    """
    nu = check_order(p.nu)
    _require(_finite(b, tau, y) and b > 0 and tau > 0, f"need b, tau > 0, got b={b}, tau={tau}")
    _require(0 <= y < b, f"need 0 <= y < b, got y={y}, b={b}")
    scale = tau / (2.0 * b * b)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp((nu + 1.0) * np.log(j) - j * j * scale)
        return g * bessel_j_scaled(nu, y * j / b) / w

    core = _certified_series(term, max(1.0, nu + 1.5), scale, policy)
    val = 2.0 * float(core.value[0]) / (b * b)
    if val <= 0.0:
        raise PositivityViolation(
            f"q2 evaluated to {val} at (b={b}, tau={tau}, y={y}); "
            "the kernel is strictly positive, so the series went wrong"
        )
    return val


def q2_grid(
    p: ProcessParams,
    b: float,
    tau: float,
    y: np.ndarray,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Vectorized q2 over a grid of y; same truncation policy as q1_grid."""
    nu = check_order(p.nu)
    y = np.asarray(y, dtype=float)
    _require(_finite(b, tau) and b > 0 and tau > 0, f"need b, tau > 0, got b={b}, tau={tau}")
    _require(bool(np.all((y >= 0) & (y < b))), "grid points must lie in [0, b)")
    scale = tau / (2.0 * b * b)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp((nu + 1.0) * np.log(j) - j * j * scale)
        return (g / w)[:, None] * bessel_j_scaled(nu, y[None, :] * j[:, None] / b)

    core = _certified_series(term, max(1.0, nu + 1.5), scale, policy)
    vals = 2.0 * core.value / (b * b)
    if np.any(vals <= 0.0):
        k = int(np.argmin(vals))
        raise PositivityViolation(
            f"q2 evaluated to {vals[k]} at y={y[k]} (b={b}, tau={tau})"
        )
    return vals


# --------------------------------------------------------------------------
# first-hitting-time laws


def hitting_density(
    p: ProcessParams, t: float, policy: SeriesPolicy = DEFAULT_POLICY
) -> KernelValue:
    """Density of the first time the Bessel process from a reaches b.

    Identically q2^(b)(t, a)/2; hitting_density_kent evaluates the same law
    through an independently transcribed series as a guard against
    transcription slips.
    """
    val = 0.5 * q2(p, p.b, t, p.a, policy)
    return KernelValue(val, "density", math.log(val))


def hitting_density_kent(
    p: ProcessParams, t: float, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """First-hitting density in the classical eigenfunction form.

    Deliberately written from the plain-power representation (b/a)^nu and
    raw J_nu calls rather than the scaled forms used by q2.
    """
    nu = check_order(p.nu)
    _require(_finite(t) and t > 0, f"need t > 0, got {t}")
    a, b = p.a, p.b
    scale = t / (2.0 * b * b)

    if a > 0:
        pref = (b / a) ** nu / (b * b)

        def term(idx: np.ndarray) -> np.ndarray:
            j, w = _zeros_weights(nu, idx)
            return j * bessel_j(nu, a * j / b) / w * np.exp(-j * j * scale)

    else:
        pref = 1.0 / (2.0**nu * gamma_fn(nu + 1.0) * b * b)

        def term(idx: np.ndarray) -> np.ndarray:
            j, w = _zeros_weights(nu, idx)
            return np.exp((nu + 1.0) * np.log(j) - j * j * scale) / w

    core = _certified_series(term, max(1.0, nu + 1.5), scale, policy)
    return pref * float(core.value[0])


def hitting_survival(
    p: ProcessParams, t: float, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """P(first hitting time of b from a exceeds t)."""
    nu = check_order(p.nu)
    _require(_finite(t) and t > 0, f"need t > 0, got {t}")
    a, b = p.a, p.b
    scale = t / (2.0 * b * b)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp((nu - 1.0) * np.log(j) - j * j * scale)
        return g * bessel_j_scaled(nu, a * j / b) / w

    core = _certified_series(term, max(0.5, nu), scale, policy)
    val = 2.0 * float(core.value[0])
    return min(1.0, max(0.0, val))


def hitting_cdf(
    p: ProcessParams, t: float, policy: SeriesPolicy = DEFAULT_POLICY
) -> float:
    """P(first hitting time of b from a is <= t)."""
    return 1.0 - hitting_survival(p, t, policy)


# --------------------------------------------------------------------------
# delta = 3 reflection (theta) closed forms: exact only at nu = 1/2


def _reflection_indices(c: float, tau: float) -> np.ndarray:
    # image charges with |z| up to ~sqrt(130 tau) contribute above 1e-25
    k_max = 2 + int(math.sqrt(130.0 * tau) / (2.0 * c))
    return np.arange(-k_max, k_max + 1, dtype=float)


def theta_q1_half(c: float, tau: float, x: float, y: float) -> float:
    """q1^(c) for delta = 3 via the reflection series.

    (y/x) sum_k [n_tau(y - x + 2kc) - n_tau(y + x + 2kc)]; the x = 0 limit
    is y sum_k 2 (y + 2kc)/tau * n_tau(y + 2kc).
    """
    _require(_finite(c, tau, x, y) and c > 0 and tau > 0, "need c, tau > 0")
    _require(0 <= x < c and 0 <= y <= c, "need 0 <= x < c and 0 <= y <= c")
    k = _reflection_indices(c, tau)
    if x == 0.0:
        z = y + 2.0 * k * c
        dens = np.exp(-z * z / (2.0 * tau)) / math.sqrt(2.0 * math.pi * tau)
        return float(y * np.sum(2.0 * z / tau * dens))
    zm = y - x + 2.0 * k * c
    zp = y + x + 2.0 * k * c
    norm = math.sqrt(2.0 * math.pi * tau)
    return float(
        y / x * np.sum(np.exp(-zm * zm / (2.0 * tau)) - np.exp(-zp * zp / (2.0 * tau))) / norm
    )


def theta_max_dist_half(
    c: float,
    tau: float,
    x: float,
    y: float,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> KernelValue:
    """P(bridge max <= c) for delta = 3 via reflection, in ratio form.

    Each image term is exponentiated relative to the direct path, so the
    k = 0 cancellation of numerator and denominator divides out exactly;
    converges fastest exactly where the Fourier-Bessel series is slowest
    (small tau/c^2).
    """
    _require(_finite(c, tau, x, y) and c > 0 and tau > 0, "need c, tau > 0")
    _require(0 <= x < c and 0 <= y < c, "need 0 <= x, y < c")
    k = _reflection_indices(c, tau)
    if x == 0.0 and y == 0.0:
        kk = k[k >= 1]
        e = np.exp(-2.0 * kk * kk * c * c / tau)
        raw = 1.0 + float(np.sum((2.0 - 8.0 * kk * kk * c * c / tau) * e))
        return _finish(raw, math.log(max(raw, 1e-300)), "probability", policy)
    if x == 0.0 or y == 0.0:
        m = max(x, y)  # q1 origin form over p(tau; 0, m), image-by-image
        z = m + 2.0 * k * c
        rel = np.exp(-(z * z - m * m) / (2.0 * tau))
        raw = float(np.sum(z / m * rel))
        return _finish(raw, math.log(max(raw, 1e-300)), "probability", policy)
    base = (y - x) ** 2
    zm = y - x + 2.0 * k * c
    zp = y + x + 2.0 * k * c
    num = np.exp(-(zm * zm - base) / (2.0 * tau)) - np.exp(-(zp * zp - base) / (2.0 * tau))
    den = 1.0 - math.exp(-2.0 * x * y / tau)
    raw = float(np.sum(num)) / den
    return _finish(raw, math.log(max(raw, 1e-300)), "probability", policy)


def theta_q2_half(b: float, tau: float, y: float) -> float:
    """q2^(b) for delta = 3.

    For y > 0 through the reflected-origin identity
    q2^(b)(tau, y) = b/(y (b-y)) * q1_theta(b, tau, 0, b - y).  At y = 0 the
    alternating form 2 pi^2/b^2 sum (-1)^(n+1) n^2 exp(-n^2 pi^2 tau/(2 b^2))
    is used at moderate scale, and its Poisson-summation dual
    sqrt(2/pi) b tau^(-3/2) sum_{k>=0} 2((2k+1)^2 b^2/tau - 1)
    exp(-(2k+1)^2 b^2/(2 tau)) below scale 0.1, where the alternating form
    would cancel catastrophically.
    """
    _require(_finite(b, tau, y) and b > 0 and tau > 0, "need b, tau > 0")
    _require(0 <= y < b, f"need 0 <= y < b, got y={y}")
    if y == 0.0:
        if tau / (2.0 * b * b) < 0.1:
            k = np.arange(0.0, 3 + int(math.sqrt(130.0 * tau) / (2.0 * b)))
            m = (2.0 * k + 1.0) ** 2 * b * b / tau
            e = np.exp(-m / 2.0)
            return float(math.sqrt(2.0 / math.pi) * b * tau**-1.5 * np.sum(2.0 * (m - 1.0) * e))
        n = np.arange(1, 2 + int(math.sqrt(130.0 * tau) / b) + 40, dtype=float)
        e = np.exp(-n * n * math.pi**2 * tau / (2.0 * b * b))
        return float(2.0 * math.pi**2 / (b * b) * np.sum((-1.0) ** (n + 1) * n * n * e))
    return b / (y * (b - y)) * theta_q1_half(b, tau, 0.0, b - y)


def theta_hitting_half(b: float, t: float, a: float) -> float:
    """First-hitting density of b from a for delta = 3: theta_q2_half / 2."""
    return 0.5 * theta_q2_half(b, t, a)
