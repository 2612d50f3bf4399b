"""Real-order Bessel functions, their positive zeros, and the gamma function.

Everything downstream expands in the eigenfunctions J_nu(. j_{nu,n}/c), so this
module owns the order validation, the scaled evaluations that stay finite at
z=0 and for huge arguments, and the zero tables with cached J_{nu+1} weights.

Evaluation backends: scipy.special for J_nu / e^{-z} I_nu (real order,
including nu in (-1,0)), math.gamma for the gamma function.  The zero finder
is local: McMahon-type initial guesses refined by Newton steps using
J_nu' = -J_{nu+1} + (nu/z) J_nu, with a sign-scan bracket plus bisection as
the safety net for the leading zeros, where the asymptotic guess is poor
(nu near -1 pushes the first zero toward 0).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.special as _sp

from .errors import DomainError, SeriesNotConverged

__all__ = [
    "ZeroTable",
    "check_order",
    "gamma_fn",
    "bessel_j",
    "bessel_j_scaled",
    "bessel_i_scaled",
    "bessel_i_scaled_reduced",
    "bessel_j_zeros",
]

# z below this uses the ascending power series for the scaled forms; above it
# the direct quotient jv(nu,z)/z^nu is well conditioned.
_SMALL_Z = 0.5
# residual acceptance for stored zeros: |J(j)| <= _ZERO_TOL * max(1, |J'(j)|)
_ZERO_TOL = 1e-12


def check_order(nu: float) -> float:
    """Validate nu > -1 (delta > 0) and return it as a float."""
    nu = float(nu)
    if not math.isfinite(nu) or nu <= -1.0:
        raise DomainError(f"order must be finite and > -1, got {nu}")
    return nu


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0."""
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def _as_array(z) -> tuple[np.ndarray, bool]:
    a = np.asarray(z, dtype=float)
    return a, (a.ndim == 0)


def bessel_j(nu: float, z):
    """J_nu(z) for z >= 0; scalar or array.

    At z=0: 0 for nu>0, 1 for nu=0; nu<0 diverges there, use bessel_j_scaled.
    """
    nu = float(nu)
    a, scalar = _as_array(z)
    if np.any(a < 0.0):
        raise DomainError("bessel_j requires z >= 0")
    zero = a == 0.0
    if nu < 0.0 and np.any(zero):
        raise DomainError("J_nu(0) diverges for nu < 0; use bessel_j_scaled")
    with np.errstate(invalid="ignore"):
        out = _sp.jv(nu, a)
    if np.any(zero):
        out = np.where(zero, 1.0 if nu == 0.0 else 0.0, out)
    if not np.all(np.isfinite(out)):
        raise SeriesNotConverged(f"J_{nu} evaluation failed (non-finite result)")
    return float(out) if scalar else out


def _scaled_series(nu: float, a: np.ndarray, sign: float) -> np.ndarray:
    # z^-nu J_nu(z) = 2^-nu sum_k (-z^2/4)^k / (k! Gamma(nu+k+1)); sign=+1
    # gives the I_nu analogue.  Converges in <= 16 terms for z <= _SMALL_Z.
    q = sign * a * a / 4.0
    acc = np.zeros_like(a)
    term = np.full_like(a, 1.0 / (2.0**nu * gamma_fn(nu + 1.0)))
    for k in range(16):
        acc += term
        term = term * q / ((k + 1.0) * (nu + k + 1.0))
    return acc


def bessel_j_scaled(nu: float, z):
    """z^-nu J_nu(z) for z >= 0; finite at z=0 with value 1/(2^nu Gamma(nu+1))."""
    nu = float(nu)
    a, scalar = _as_array(z)
    if np.any(a < 0.0):
        raise DomainError("bessel_j_scaled requires z >= 0")
    small = a < _SMALL_Z
    out = np.empty_like(a)
    if np.any(small):
        out[small] = _scaled_series(nu, a[small], -1.0)
    big = ~small
    if np.any(big):
        zb = a[big]
        with np.errstate(invalid="ignore", over="ignore"):
            out[big] = _sp.jv(nu, zb) / zb**nu
    if not np.all(np.isfinite(out)):
        raise SeriesNotConverged(f"scaled J_{nu} evaluation failed")
    return float(out) if scalar else out


def bessel_i_scaled(nu: float, z):
    """e^-z I_nu(z) for z >= 0 (exponentially scaled; never overflows).

    At z=0: 0 for nu>0, 1 for nu=0; diverges for nu<0 (the reduced variant
    below covers that limit).
    """
    nu = float(nu)
    a, scalar = _as_array(z)
    if np.any(a < 0.0):
        raise DomainError("bessel_i_scaled requires z >= 0")
    if nu < 0.0 and np.any(a == 0.0):
        raise DomainError("I_nu(0) diverges for nu < 0; use bessel_i_scaled_reduced")
    out = _sp.ive(nu, a)
    if not np.all(np.isfinite(out)):
        raise SeriesNotConverged(f"scaled I_{nu} evaluation failed")
    return float(out) if scalar else out


def bessel_i_scaled_reduced(nu: float, z):
    """z^-nu e^-z I_nu(z); finite at z=0 with value 1/(2^nu Gamma(nu+1))."""
    nu = float(nu)
    a, scalar = _as_array(z)
    if np.any(a < 0.0):
        raise DomainError("bessel_i_scaled_reduced requires z >= 0")
    small = a < _SMALL_Z
    out = np.empty_like(a)
    if np.any(small):
        out[small] = _scaled_series(nu, a[small], 1.0) * np.exp(-a[small])
    big = ~small
    if np.any(big):
        zb = a[big]
        out[big] = _sp.ive(nu, zb) / zb**nu
    if not np.all(np.isfinite(out)):
        raise SeriesNotConverged(f"reduced scaled I_{nu} evaluation failed")
    return float(out) if scalar else out


# --------------------------------------------------------------------- zeros


@dataclass(frozen=True)
class ZeroTable:
    """Ascending positive zeros of J_nu with cached J_{nu+1} weights."""

    nu: float
    zeros: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.zeros)

    def __post_init__(self):
        self.zeros.setflags(write=False)
        self.weights.setflags(write=False)


def _jprime(nu: float, z: np.ndarray, jz: np.ndarray) -> np.ndarray:
    return -_sp.jv(nu + 1.0, z) + (nu / z) * jz


def _refine_newton(nu: float, guess: np.ndarray) -> np.ndarray:
    z = guess.copy()
    for _ in range(8):
        jz = _sp.jv(nu, z)
        step = jz / _jprime(nu, z, jz)
        z = z - step
        if np.all(np.abs(step) <= 1e-14 * z):
            break
    return z


def _bracket_scan(nu: float, lo: float, hi_cap: float, step: float) -> tuple[float, float]:
    """First sign change of J_nu past lo; zeros are simple so this is exact."""
    grid = np.arange(lo, hi_cap, step)
    vals = _sp.jv(nu, grid)
    sgn = np.sign(vals)
    flips = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(flips) == 0:
        raise SeriesNotConverged(
            f"no sign change of J_{nu} in ({lo}, {hi_cap}); zero bracket failed"
        )
    i = flips[0]
    return float(grid[i]), float(grid[i + 1])


def _bisect(nu: float, lo: float, hi: float) -> float:
    flo = _sp.jv(nu, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = _sp.jv(nu, mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def _residual_ok(nu: float, z: np.ndarray) -> np.ndarray:
    jz = _sp.jv(nu, z)
    return np.abs(jz) <= _ZERO_TOL * np.maximum(1.0, np.abs(_jprime(nu, z, jz)))


# Leading zeros where the McMahon guess is not trusted; found by scan+bisection.
_SCAN_PREFIX = 8


class _ZeroCache:
    """Append-only per-order zero store, safe for concurrent readers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._store: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def get(self, nu: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
        with self._lock:
            have = self._store.get(nu)
            if have is not None and len(have[0]) >= n_max:
                return have[0][:n_max], have[1][:n_max]
            zeros = self._compute(nu, n_max, have[0] if have is not None else None)
            weights = _sp.jv(nu + 1.0, zeros)
            pair = (zeros, weights)
            for arr in pair:
                arr.setflags(write=False)
            self._store[nu] = pair
            return zeros[:n_max], weights[:n_max]

    @staticmethod
    def _compute(nu: float, n_max: int, prev: np.ndarray | None) -> np.ndarray:
        known = list(prev) if prev is not None else []
        # scanned prefix: walk sign changes upward from just above 0; the
        # first zero can sit arbitrarily close to 0 as nu -> -1
        # first zero sits near nu + 1.86 nu^(1/3) for large nu, so the scan
        # window has to stretch with the order
        span = 16.0 + 1.2 * max(nu, 0.0)
        while len(known) < min(n_max, _SCAN_PREFIX):
            lo = known[-1] + 0.05 if known else 1e-3
            step = 0.02 if not known else 0.05
            a, b = _bracket_scan(nu, lo, lo + span, step)
            z = _refine_newton(nu, np.array([0.5 * (a + b)]))[0]
            if not (a - 0.05 < z < b + 0.05) or not _residual_ok(nu, np.array([z]))[0]:
                z = _bisect(nu, a, b)
            known.append(float(z))
        if n_max > len(known):
            ns = np.arange(len(known) + 1, n_max + 1, dtype=float)
            beta = (ns + nu / 2.0 - 0.25) * np.pi
            guess = beta - (4.0 * nu * nu - 1.0) / (8.0 * beta)
            z = _refine_newton(nu, guess)
            bad = ~_residual_ok(nu, z)
            if np.any(bad):
                # Newton wandered; redo those entries from a scan bracket
                zl = list(z)
                prev_z = known[-1]
                for i in np.nonzero(bad)[0]:
                    lo = (zl[i - 1] if i > 0 else prev_z) + 0.05
                    a, b = _bracket_scan(nu, lo, lo + span, 0.05)
                    zl[i] = _bisect(nu, a, b)
                z = np.asarray(zl)
            known.extend(float(v) for v in z)
        zeros = np.asarray(known, dtype=float)
        if np.any(np.diff(zeros) <= 0):
            raise SeriesNotConverged(f"zero table for nu={nu} is not increasing")
        if not np.all(_residual_ok(nu, zeros)):
            raise SeriesNotConverged(f"zero refinement for nu={nu} missed the residual target")
        return zeros


_CACHE = _ZeroCache()


def bessel_j_zeros(nu: float, n_max: int) -> ZeroTable:
    """Table of the first n_max positive zeros of J_nu with J_{nu+1} weights."""
    nu = check_order(nu)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    zeros, weights = _CACHE.get(nu, int(n_max))
    return ZeroTable(nu=nu, zeros=zeros, weights=weights)
