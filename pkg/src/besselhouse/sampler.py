"""Path samplers for the house-moving process and its building blocks.

Everything here is exact at the grid points: squared-Bessel steps use the
noncentral chi-square transition (a Poisson-mixed gamma, valid for any real
delta > 0), bridges and house paths are drawn sequentially from their exact
transition densities by inverse CDF, and the conditioned-bridge sampler
rejects on the grid maximum.  No Euler discretization anywhere.

Randomness is counter-based: an RngStream is an immutable (seed, stream)
address into the Philox generator, so a sampler invoked twice with the same
address reproduces its output bit for bit, no matter how many other paths
run, in what order, or on how many workers.

The ensemble samplers share per-step CDF tables across paths.  For the
house process the transition factorizes through a single Fourier-Bessel
series, so the whole (x-grid) x (y-grid) density matrix is two matrix
products per step; paths then read their own row by cubic interpolation
across the x-grid.  The interpolation error is fourth order in the node
spacing measured against the transition's own sqrt(dt) width, far below
every stated KS budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    PositivityViolation,
    QuadratureError,
    RejectionExhausted,
)
from .housemoving import HouseMovingModel
from .kernels import (
    DEFAULT_POLICY,
    ProcessParams,
    SeriesPolicy,
    _certified_series,
    _envelope_constant,
    _kappa_sym,
    _zeros_weights,
    q2_grid,
    truncation_bound,
)
from .specfun import bessel_i_scaled_reduced, bessel_j_scaled, bessel_j_zeros

__all__ = [
    "RngStream",
    "SamplePath",
    "CdfTable",
    "tabulate_cdf",
    "inverse_cdf",
    "sample_bessel_path",
    "sample_bessel_ensemble",
    "sample_bessel_bridge",
    "sample_bridge_ensemble",
    "sample_conditioned_bridge",
    "sample_conditioned_ensemble",
    "sample_conditioned_ensemble_exact",
    "sample_house_path",
    "sample_house_ensemble",
    "sample_first_passage_times",
    "ensemble_paths",
    "write_ensemble_csv",
    "write_ensemble_jsonl",
]

_TWO64 = 1 << 64


@dataclass(frozen=True)
class RngStream:
    """Address of one Philox substream: (seed, stream) -> generator.

    generator() returns a fresh generator positioned at the start of the
    substream every time, so the same address always reproduces the same
    draws.  spawn(k) is the address k slots later; ensemble samplers use
    it to give each path (or each step) its own deterministic slot.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.seed < _TWO64 and 0 <= self.stream < _TWO64):
            raise DomainError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, offset: int) -> "RngStream":
        return RngStream(self.seed, (self.stream + offset) % _TWO64)


@dataclass(frozen=True)
class SamplePath:
    """One sampled trajectory: time grid, values, and provenance.

    meta records at least the sampler kind, seed, stream, and step so an
    ensemble written to disk can be regenerated exactly.
    """

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or v.shape != t.shape or t.size < 2:
            raise DomainError("times and values must be equal-length 1-D arrays")
        if not (np.all(np.diff(t) > 0) and t[0] >= 0):
            raise DomainError("times must be strictly ascending and nonnegative")
        if not (np.all(np.isfinite(v)) and np.all(v >= 0)):
            raise DomainError("values must be finite and nonnegative")


# --------------------------------------------------------------------------
# tabulated CDFs and their inversion


# tanh-sinh parameter: the extreme abscissae sit ~4e-14 of the span inside
# the endpoints, still strictly interior in double precision
_TS_SPAN = 2.98

# 4-point Gauss-Legendre on [-1, 1]
_GL_X = np.array([-0.8611363115940526, -0.3399810435848563,
                  0.3399810435848563, 0.8611363115940526])
_GL_W = np.array([0.34785484513745385, 0.6521451548625461,
                  0.6521451548625461, 0.34785484513745385])


def _ts_map(lo: float, hi: float, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map u in [-_TS_SPAN, _TS_SPAN] to abscissae in (lo, hi) plus dy/du."""
    s = 0.5 * math.pi * np.sinh(u)
    half = 0.5 * (hi - lo)
    y = 0.5 * (lo + hi) + half * np.tanh(s)
    w = half * 0.5 * math.pi * np.cosh(u) / np.cosh(s) ** 2
    return y, w


@dataclass(frozen=True)
class CdfTable:
    """Density tabulated on (lo, hi) with its normalized CDF at the nodes.

    mass is the raw integral before normalization; cdf runs from 0 at y[0]
    to exactly 1 at y[-1].
    """

    lo: float
    hi: float
    y: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    mass: float


def tabulate_cdf(
    density: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n: int = 1024,
    *,
    expected_mass: float | None = None,
    mass_tol: float = 1e-6,
    max_nodes: int = 16384,
) -> CdfTable:
    """Build a CDF table for a density on (lo, hi).

    Abscissae are tanh-sinh spaced (clustered at both ends, so integrable
    endpoint blow-ups and vanishing tails are both resolved); per-cell
    increments use 4-point Gauss-Legendre in the transformed variable, so
    the node CDF values are exact to roundoff for smooth densities.  If
    expected_mass is given and the raw mass misses it by more than
    mass_tol, the resolution doubles; running out of doublings raises
    QuadratureError rather than renormalizing a suspect table.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if n < 16:
        raise DomainError("need at least 16 abscissae")
    while True:
        u = np.linspace(-_TS_SPAN, _TS_SPAN, n)
        du = u[1] - u[0]
        y, _ = _ts_map(lo, hi, u)
        f = np.asarray(density(y), dtype=float)
        if f.shape != y.shape:
            raise DomainError("density must map the abscissa array to same-shape values")
        if np.any(~np.isfinite(f)) or np.any(f < 0):
            raise PositivityViolation("tabulated density must be finite and nonnegative")
        # Gauss-Legendre points interior to each u-cell
        mid = 0.5 * (u[:-1] + u[1:])
        ug = (mid[:, None] + 0.5 * du * _GL_X[None, :]).ravel()
        yg, wg = _ts_map(lo, hi, ug)
        fg = np.asarray(density(yg), dtype=float)
        if np.any(~np.isfinite(fg)) or np.any(fg < 0):
            raise PositivityViolation("tabulated density must be finite and nonnegative")
        inc = ((fg * wg).reshape(n - 1, 4) @ _GL_W) * (0.5 * du)
        cdf_raw = np.concatenate([[0.0], np.cumsum(inc)])
        mass = float(cdf_raw[-1])
        if mass <= 0:
            raise PositivityViolation("density integrates to zero mass")
        ok = expected_mass is None or abs(mass - expected_mass) <= mass_tol * max(
            1.0, abs(expected_mass)
        )
        if ok:
            return CdfTable(float(lo), float(hi), y, f, cdf_raw / mass, mass)
        if n >= max_nodes:
            raise QuadratureError(
                f"table mass {mass!r} still misses {expected_mass!r} at {n} nodes"
            )
        n *= 2


def inverse_cdf(table: CdfTable, u):
    """Quantile of a tabulated density: x with CDF(x) = u.

    Monotone cubic (PCHIP) interpolation of the tabulated CDF, then one
    Newton polish against the table's density so forward and inverse reads
    of the same table agree to ~1e-9.  u = 0 maps to lo and u = 1 to hi
    exactly.  A non-monotone table (a negative density slipped through)
    raises PositivityViolation: that is a density bug upstream.
    """
    from scipy.interpolate import PchipInterpolator

    uu = np.asarray(u, dtype=float)
    scalar = uu.ndim == 0
    uu = np.atleast_1d(uu)
    if np.any((uu < 0) | (uu > 1) | ~np.isfinite(uu)):
        raise DomainError("u must lie in [0, 1]")
    dif = np.diff(table.cdf)
    if np.any(dif < 0):
        raise PositivityViolation("CDF table is not monotone; the density is broken")
    # strictly increasing node subset (flat stretches carry zero mass)
    keep = np.concatenate([[True], dif > 0])
    cs, ys = table.cdf[keep], table.y[keep]
    if cs.size < 2:
        raise PositivityViolation("CDF table is degenerate")
    inv = PchipInterpolator(cs, ys)
    fwd = PchipInterpolator(ys, cs)
    dfwd = fwd.derivative()
    x = np.asarray(inv(np.clip(uu, cs[0], cs[-1])), dtype=float)
    resid = np.asarray(fwd(x), dtype=float) - uu
    x_new = np.clip(x - resid / np.maximum(dfwd(x), 1e-300), ys[0], ys[-1])
    r_new = np.abs(np.asarray(fwd(x_new), dtype=float) - uu)
    x = np.where(r_new < np.abs(resid), x_new, x)
    # below the lowest increasing node (possible only for externally built
    # tables whose cdf[0] > 0): map linearly down to lo
    if cs[0] > 0:
        low = uu < cs[0]
        x = np.where(low, table.lo + (ys[0] - table.lo) * (uu / cs[0]), x)
    x = np.where(uu == 0.0, table.lo, x)
    x = np.where(uu == 1.0, table.hi, x)
    return float(x[0]) if scalar else x


def _blended_draw(
    x_grid: np.ndarray,
    y: np.ndarray,
    cdf: np.ndarray,
    pdf: np.ndarray,
    xs: np.ndarray,
    us: np.ndarray,
) -> np.ndarray:
    """Vectorized inverse-CDF draw from row tables, cubic in x across rows.

    cdf/pdf have one row per x_grid node; each path's CDF is the 4-point
    Lagrange blend of the rows around its x, collapsing to the exact row
    when x sits on a node.  Values come back inside [y[0], y[-1]], hence
    strictly inside the open support.
    """
    dx = x_grid[1] - x_grid[0]
    pos = np.clip((xs - x_grid[0]) / dx, 0.0, x_grid.size - 1.000001)
    i1 = np.clip(np.floor(pos).astype(np.int64), 1, x_grid.size - 3)
    tl = pos - i1
    wgt = np.empty((xs.size, 4))
    wgt[:, 0] = -tl * (tl - 1.0) * (tl - 2.0) / 6.0
    wgt[:, 1] = (tl + 1.0) * (tl - 1.0) * (tl - 2.0) / 2.0
    wgt[:, 2] = -(tl + 1.0) * tl * (tl - 2.0) / 2.0
    wgt[:, 3] = (tl + 1.0) * tl * (tl - 1.0) / 6.0
    rows = i1[:, None] + np.array([-1, 0, 1, 2])
    ny = y.size
    lo = np.zeros(xs.size, dtype=np.int64)
    hi = np.full(xs.size, ny - 1, dtype=np.int64)
    for _ in range(int(math.ceil(math.log2(ny)))):
        mid = (lo + hi) // 2
        f_mid = np.einsum("ij,ij->i", wgt, cdf[rows, mid[:, None]])
        take = f_mid <= us
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
        lo = np.minimum(lo, hi - 1)
    f0 = np.einsum("ij,ij->i", wgt, cdf[rows, lo[:, None]])
    f1 = np.einsum("ij,ij->i", wgt, cdf[rows, hi[:, None]])
    p0 = np.maximum(np.einsum("ij,ij->i", wgt, pdf[rows, lo[:, None]]), 0.0)
    p1 = np.maximum(np.einsum("ij,ij->i", wgt, pdf[rows, hi[:, None]]), 0.0)
    y0 = y[lo]
    dy = y[hi] - y0
    # the blended CDF is locally F0 + p0 z + (p1 - p0) z^2/(2 dy); the
    # citardauq root form stays stable when p0 ~ 0
    need = np.clip(us - f0, 0.0, None)
    a_q = (p1 - p0) / (2.0 * dy)
    disc = np.maximum(p0 * p0 + 4.0 * a_q * need, 0.0)
    denom = p0 + np.sqrt(disc)
    lin = np.where(f1 > f0, need / np.maximum((f1 - f0) / dy, 1e-300), 0.0)
    z = np.where(denom > 0, 2.0 * need / np.maximum(denom, 1e-300), lin)
    return y0 + np.clip(z, 0.0, dy)


def _row_cdf(dens: np.ndarray, wy: np.ndarray, du: float) -> np.ndarray:
    # trapezoid in the tanh-sinh variable; superconvergent for these rows
    gw = dens * wy[None, :]
    inc = 0.5 * du * (gw[:, 1:] + gw[:, :-1])
    return np.concatenate([np.zeros((dens.shape[0], 1)), np.cumsum(inc, axis=1)], axis=1)


# --------------------------------------------------------------------------
# exact squared-Bessel stepping


def _besq_step(gen: np.random.Generator, x_sq, h: float, delta: float):
    # BESQ(delta) over time h: x -> h * noncentral-chi-square(delta, x/h),
    # realized as 2h * Gamma(delta/2 + Poisson(x/(2h))), exact for real delta
    n = gen.poisson(x_sq / (2.0 * h))
    return 2.0 * h * gen.standard_gamma(0.5 * delta + n)


def _check_grid(grid, *, unit_horizon: bool) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise DomainError("grid must be a 1-D array with at least two points")
    if not (np.all(np.diff(g) > 0) and g[0] == 0.0):
        raise DomainError("grid must be strictly ascending and start at 0")
    if unit_horizon and g[-1] != 1.0:
        raise DomainError("bridge grids must end exactly at time 1")
    return g


def sample_bessel_path(p: ProcessParams, grid, rng: RngStream) -> SamplePath:
    """Exact skeleton of BES(delta) started from a, on an arbitrary grid.

    Squared values follow the squared-Bessel transition sampled exactly,
    then square-rooted; there is no discretization bias at grid points,
    so marginal tests pass on arbitrarily coarse grids.
    """
    g = _check_grid(grid, unit_horizon=False)
    gen = rng.generator()
    x_sq = p.a * p.a
    vals = np.empty(g.size)
    vals[0] = p.a
    for k, h in enumerate(np.diff(g)):
        x_sq = float(_besq_step(gen, x_sq, float(h), p.delta))
        vals[k + 1] = math.sqrt(x_sq)
    meta = {
        "kind": "bessel-exact",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": float(np.max(np.diff(g))),
        "delta": p.delta,
        "a": p.a,
        "b": p.b,
    }
    return SamplePath(g, vals, meta)


def sample_bessel_ensemble(
    p: ProcessParams, grid, n_paths: int, rng: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    """n_paths exact BES(delta) skeletons at once; returns (times, values).

    values has shape (n_paths, len(grid)).  Step k draws its Poisson and
    gamma vectors from substream rng.spawn(k+1): path p's step-k noise is
    slot p of that stream, deterministic for fixed (seed, stream, n_paths,
    grid) and independent of scheduling.
    """
    g = _check_grid(grid, unit_horizon=False)
    if n_paths < 1:
        raise DomainError("need n_paths >= 1")
    vals = np.empty((n_paths, g.size))
    vals[:, 0] = p.a
    x_sq = np.full(n_paths, p.a * p.a)
    for k, h in enumerate(np.diff(g)):
        gen = rng.spawn(k + 1).generator()
        x_sq = _besq_step(gen, x_sq, float(h), p.delta)
        vals[:, k + 1] = np.sqrt(x_sq)
    return g, vals


def sample_first_passage_times(
    p: ProcessParams,
    step: float,
    n_paths: int,
    rng: RngStream,
    *,
    t_max: float | None = None,
    bridge_correction: bool = True,
) -> np.ndarray:
    """First times the exact BES(delta) skeleton from a reaches b.

    Discrete monitoring alone overshoots the continuous hitting time by
    O(sqrt(step)), more than the validation budgets tolerate; with
    bridge_correction a crossing between grid points is declared with the
    Brownian-bridge probability exp(-2(b-x)(b-x')/step), which removes
    the leading bias (the curvature term left over is O(step)).  Paths
    still alive at t_max come back as +inf.
    """
    if not (step > 0 and math.isfinite(step)):
        raise DomainError(f"need step > 0, got {step}")
    if n_paths < 1:
        raise DomainError("need n_paths >= 1")
    b2 = p.b * p.b
    if t_max is None:
        # survival decays like exp(-j1^2 t/(2 b^2)); run to the ~1e-8 quantile
        j1 = float(bessel_j_zeros(p.nu, 1).zeros[0])
        t_max = 2.0 * b2 * 36.9 / (j1 * j1)
    hit = np.full(n_paths, np.inf)
    alive = np.arange(n_paths)
    x_sq = np.full(n_paths, p.a * p.a)
    k = 0
    t = 0.0
    while alive.size and t < t_max:
        gen = rng.spawn(k + 1).generator()
        x_new = _besq_step(gen, x_sq, step, p.delta)
        t += step
        crossed = x_new >= b2
        if bridge_correction:
            sub = ~crossed
            if np.any(sub):
                ga = p.b - np.sqrt(x_sq[sub])
                gb = p.b - np.sqrt(x_new[sub])
                p_cross = np.exp(-2.0 * ga * gb / step)
                crossed[sub] = gen.random(int(sub.sum())) < p_cross
        hit[alive[crossed]] = t
        alive = alive[~crossed]
        x_sq = x_new[~crossed]
        k += 1
    return hit


# --------------------------------------------------------------------------
# Bessel bridge samplers


def _log_bes_vec(nu: float, t: float, x, y):
    # log BES(delta) transition density, broadcasting over x and y; x >= 0
    red = bessel_i_scaled_reduced(nu, np.asarray(x) * np.asarray(y) / t)
    return (
        (2.0 * nu + 1.0) * np.log(y)
        - (nu + 1.0) * math.log(t)
        - (np.asarray(x) - np.asarray(y)) ** 2 / (2.0 * t)
        + np.log(red)
    )


def _bridge_pdf_grid(
    p: ProcessParams, s: float, x: float, t: float, y: np.ndarray, w: float
) -> np.ndarray:
    """Density of the bridge (pinned at w at time 1) at time t given x at s."""
    nu = p.nu
    log_num = _log_bes_vec(nu, t - s, x, y)
    if w == 0.0:
        dt1, dt0 = 1.0 - t, 1.0 - s
        log_ratio = (nu + 1.0) * math.log(dt0 / dt1) - y * y / (2.0 * dt1) + x * x / (2.0 * dt0)
        return np.exp(log_num + log_ratio)
    log_den = float(_log_bes_vec(nu, 1.0 - s, x, w))
    return np.exp(log_num + _log_bes_vec(nu, 1.0 - t, y, w) - log_den)


def _bridge_table(p: ProcessParams, s: float, x: float, t: float, w: float) -> CdfTable:
    # support guess: the bridge drifts x -> w with spread at most sqrt(t-s)
    spread = math.sqrt(t - s)
    hi = max(x, w) + (8.0 + 2.0 * math.sqrt(p.delta)) * spread
    for _ in range(40):
        table = tabulate_cdf(
            lambda yy: _bridge_pdf_grid(p, s, x, t, yy, w), 0.0, hi, n=1024
        )
        if table.mass >= 1.0 - 1e-6:
            break
        hi *= 1.4
    else:
        raise QuadratureError("bridge density mass never reached 1; support runaway")
    if table.mass > 1.0 + 1e-6:
        raise QuadratureError(f"bridge density mass {table.mass!r} exceeds 1")
    return table


def _gaussian_norm_values(
    delta_int: int, a: float, endpoint: float, grid: np.ndarray, gen: np.random.Generator
) -> np.ndarray:
    # norm of delta_int independent Brownian bridges from (a,0,..) to (endpoint,0,..)
    comp = np.zeros(delta_int)
    comp[0] = a
    target = np.zeros(delta_int)
    target[0] = endpoint
    vals = np.empty(grid.size)
    vals[0] = a
    for k in range(1, grid.size):
        s, t = grid[k - 1], grid[k]
        if t == 1.0:
            comp = target.copy()
        else:
            pull = (t - s) / (1.0 - s)
            sd = math.sqrt((t - s) * (1.0 - t) / (1.0 - s))
            comp = comp + pull * (target - comp) + sd * gen.standard_normal(delta_int)
        vals[k] = float(np.linalg.norm(comp))
    return vals


def sample_bessel_bridge(
    p: ProcessParams,
    grid,
    rng: RngStream,
    *,
    method: str = "inverse-cdf",
    endpoint: float | None = None,
) -> SamplePath:
    """Exact BES(delta) bridge from a at time 0 to `endpoint` at time 1.

    method "inverse-cdf" samples each step from the bridge transition via
    a tabulated CDF (any real delta); "gaussian-norm" takes the norm of
    delta independent Brownian bridges and needs integer delta.  endpoint
    defaults to p.b; 0 is allowed (the bridge back to the origin).
    """
    g = _check_grid(grid, unit_horizon=True)
    w = p.b if endpoint is None else float(endpoint)
    if not (w >= 0 and math.isfinite(w)):
        raise DomainError(f"endpoint must be finite and nonnegative, got {w}")
    gen = rng.generator()
    meta = {
        "kind": f"bessel-bridge-{method}",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": float(np.max(np.diff(g))),
        "delta": p.delta,
        "a": p.a,
        "b": p.b,
        "endpoint": w,
    }
    if method == "gaussian-norm":
        delta_int = round(p.delta)
        if abs(p.delta - delta_int) > 1e-12 or delta_int < 1:
            raise DomainError("gaussian-norm needs a positive integer delta")
        return SamplePath(g, _gaussian_norm_values(delta_int, p.a, w, g, gen), meta)
    if method != "inverse-cdf":
        raise DomainError(f"unknown bridge method {method!r}")
    vals = np.empty(g.size)
    vals[0] = p.a
    x = p.a
    for k in range(1, g.size - 1):
        table = _bridge_table(p, float(g[k - 1]), x, float(g[k]), w)
        x = float(inverse_cdf(table, float(gen.random())))
        vals[k] = x
    vals[-1] = w
    return SamplePath(g, vals, meta)


class _BridgeRowTables:
    """Per-step CDF tables for the bridge ensemble, one row per x node.

    The state space is truncated at `span`; paths reach the cap with
    probability ~exp(-2 (span - max(a, w))^2), far below one draw in any
    ensemble we run, and row normalization conditions the unreachable top
    rows to stay inside.  Rows more than 5 step-widths below the cap must
    carry full mass; a miss doubles the y resolution.
    """

    def __init__(self, p: ProcessParams, s: float, t: float, w: float,
                 span: float, x_nodes: int, y_nodes: int):
        nu = p.nu
        tau = t - s
        self.x_grid = np.linspace(0.0, span, x_nodes)
        x_col = self.x_grid[:, None]
        ny = y_nodes
        while True:
            u = np.linspace(-_TS_SPAN, _TS_SPAN, ny)
            du = u[1] - u[0]
            self.y, wy = _ts_map(0.0, span, u)
            log_num = _log_bes_vec(nu, tau, x_col, self.y[None, :])
            if w == 0.0:
                dt1, dt0 = 1.0 - t, 1.0 - s
                log_w = (
                    (nu + 1.0) * math.log(dt0 / dt1)
                    - self.y[None, :] ** 2 / (2.0 * dt1)
                    + x_col**2 / (2.0 * dt0)
                )
            else:
                log_up = _log_bes_vec(nu, 1.0 - t, self.y, w)[None, :]
                log_den = _log_bes_vec(nu, 1.0 - s, self.x_grid, w)
                log_w = log_up - log_den[:, None]
            dens = np.exp(log_num + log_w)
            cdf = _row_cdf(dens, wy, du)
            mass = cdf[:, -1]
            core = self.x_grid <= span - 5.0 * math.sqrt(tau)
            if np.all(np.abs(mass[core] - 1.0) <= 1e-4) and np.all(mass > 0):
                break
            if ny >= 8192:
                raise QuadratureError(
                    f"bridge row mass off by {np.max(np.abs(mass[core] - 1.0)):.2e} "
                    f"at {ny} nodes"
                )
            ny *= 2
        self.cdf = cdf / mass[:, None]
        self.pdf = dens / mass[:, None]

    def draw(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return _blended_draw(self.x_grid, self.y, self.cdf, self.pdf, xs, us)


def sample_bridge_ensemble(
    p: ProcessParams,
    grid,
    n_paths: int,
    rng: RngStream,
    *,
    method: str = "inverse-cdf",
    endpoint: float | None = None,
    x_nodes: int = 320,
    y_nodes: int = 1024,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Ensemble of exact bridges; returns (times, values, meta).

    Path p consumes one uniform (inverse-cdf) or one Gaussian block
    (gaussian-norm) per step from substream rng.spawn(p).  The first
    inverse-cdf step starts from the common point a, so all paths share
    one exact table; later steps use row tables blended across an x-grid.
    """
    g = _check_grid(grid, unit_horizon=True)
    if n_paths < 1:
        raise DomainError("need n_paths >= 1")
    w = p.b if endpoint is None else float(endpoint)
    if not (w >= 0 and math.isfinite(w)):
        raise DomainError(f"endpoint must be finite and nonnegative, got {w}")
    meta = {
        "kind": f"bridge-ensemble-{method}",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": float(np.max(np.diff(g))),
        "delta": p.delta,
        "a": p.a,
        "b": p.b,
        "endpoint": w,
        "paths": int(n_paths),
    }
    vals = np.empty((n_paths, g.size))
    vals[:, 0] = p.a
    if method == "gaussian-norm":
        delta_int = round(p.delta)
        if abs(p.delta - delta_int) > 1e-12 or delta_int < 1:
            raise DomainError("gaussian-norm needs a positive integer delta")
        target = np.zeros(delta_int)
        target[0] = w
        for pth in range(n_paths):
            gen = rng.spawn(pth).generator()
            comp = np.zeros(delta_int)
            comp[0] = p.a
            for k in range(1, g.size):
                s, t = g[k - 1], g[k]
                if t == 1.0:
                    comp = target.copy()
                else:
                    pull = (t - s) / (1.0 - s)
                    sd = math.sqrt((t - s) * (1.0 - t) / (1.0 - s))
                    comp = comp + pull * (target - comp) + sd * gen.standard_normal(delta_int)
                vals[pth, k] = np.linalg.norm(comp)
        return g, vals, meta
    if method != "inverse-cdf":
        raise DomainError(f"unknown bridge method {method!r}")
    u_draws = np.empty((n_paths, g.size - 2))
    for pth in range(n_paths):
        u_draws[pth] = rng.spawn(pth).generator().random(g.size - 2)
    if g.size > 2:
        first = _bridge_table(p, float(g[0]), p.a, float(g[1]), w)
        x = np.asarray(inverse_cdf(first, u_draws[:, 0]), dtype=float)
        vals[:, 1] = x
        span = max(p.a, w) + 6.0 + 2.0 * math.sqrt(p.delta)
        for k in range(2, g.size - 1):
            tables = _BridgeRowTables(
                p, float(g[k - 1]), float(g[k]), w, span, x_nodes, y_nodes
            )
            x = tables.draw(x, u_draws[:, k - 1])
            vals[:, k] = x
    vals[:, -1] = w
    return g, vals, meta


def sample_conditioned_bridge(
    p: ProcessParams,
    eta: float,
    grid,
    rng: RngStream,
    max_attempts: int = 1000,
    *,
    method: str = "auto",
    continuous_correction: bool = False,
) -> SamplePath:
    """Bridge a -> b conditioned (by rejection) to stay at or below b + eta.

    Acceptance tests the grid maximum; the continuous path can still peek
    above between grid points, a positive bias that shrinks with the grid.
    For delta = 3 the reflection law of the between-point maximum is exact:
    continuous_correction thins acceptances by the product of per-segment
    survival probabilities, removing that bias entirely.
    meta["attempts"] records how many candidate bridges were drawn.
    """
    if not (eta > 0 and math.isfinite(eta)):
        raise DomainError(f"need eta > 0, got {eta}")
    if max_attempts < 1:
        raise DomainError("need max_attempts >= 1")
    g = _check_grid(grid, unit_horizon=True)
    if method == "auto":
        method = "gaussian-norm" if abs(p.delta - round(p.delta)) < 1e-12 else "inverse-cdf"
    if continuous_correction and abs(p.delta - 3.0) > 1e-12:
        raise DomainError("the continuous-maximum correction is exact only for delta = 3")
    c = p.b + eta
    gen = rng.generator()
    for attempt in range(1, max_attempts + 1):
        if method == "gaussian-norm":
            vals = _gaussian_norm_values(round(p.delta), p.a, p.b, g, gen)
        else:
            vals = np.empty(g.size)
            vals[0] = p.a
            x = p.a
            for k in range(1, g.size - 1):
                table = _bridge_table(p, float(g[k - 1]), x, float(g[k]), p.b)
                x = float(inverse_cdf(table, float(gen.random())))
                vals[k] = x
            vals[-1] = p.b
        if float(np.max(vals)) > c:
            continue
        if continuous_correction:
            surv = _delta3_segment_survival(c, g, vals[None, :])[0]
            if gen.random() >= surv:
                continue
        meta = {
            "kind": f"conditioned-bridge-{method}",
            "seed": rng.seed,
            "stream": rng.stream,
            "step": float(np.max(np.diff(g))),
            "delta": p.delta,
            "a": p.a,
            "b": p.b,
            "eta": eta,
            "attempts": attempt,
            "continuous_correction": continuous_correction,
        }
        return SamplePath(g, vals, meta)
    raise RejectionExhausted(
        f"no bridge stayed below b + eta = {c} in {max_attempts} attempts",
        attempts=max_attempts,
    )


def _delta3_segment_survival(c: float, grid: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """P(continuous BES(3) path stays <= c | skeleton), one value per row.

    The BES(3) bridge between consecutive skeleton points is a Brownian
    bridge conditioned positive, so the band probability is the classical
    double-reflection image sum over (0, c); images beyond |k| = 2 are far
    below roundoff at any usable step size.
    """
    h = np.diff(grid)[None, :]
    x, y = vals[:, :-1], vals[:, 1:]
    base = (y - x) ** 2
    den = -np.expm1(-2.0 * x * y / h)
    num = np.zeros(np.broadcast_shapes(x.shape, h.shape))
    for k in (-2, -1, 1, 2):
        zm = y - x + 2.0 * k * c
        zp = y + x + 2.0 * k * c
        num += np.exp(-(zm * zm - base) / (2.0 * h)) - np.exp(-(zp * zp - base) / (2.0 * h))
    zp0 = y + x
    num += -np.expm1(-(zp0 * zp0 - base) / (2.0 * h))
    # an x = 0 left endpoint (start of a path from a = 0) needs the limit form
    at0 = np.broadcast_to(x == 0.0, num.shape)
    if np.any(at0):
        m = np.where(y > 0, y, 1.0)
        ratio = np.ones(num.shape)
        for k in (-2, -1, 1, 2):
            z = m + 2.0 * k * c
            ratio = ratio + z / m * np.exp(-(z * z - m * m) / (2.0 * h))
        num = np.where(at0, ratio, num)
        den = np.where(at0, 1.0, den)
    seg = np.clip(num / den, 0.0, 1.0)
    return np.prod(seg, axis=1)


def sample_conditioned_ensemble(
    p: ProcessParams,
    eta: float,
    grid,
    n_accept: int,
    rng: RngStream,
    *,
    batch: int = 4096,
    max_batches: int = 20000,
    continuous_correction: bool = False,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Vectorized rejection sampler for integer delta: (times, values, meta).

    Candidate batches come from the Gaussian-norm construction, batch r on
    substream rng.spawn(r+1); values has n_accept rows.  meta counts every
    candidate and every acceptance in the consumed batches (acceptances can
    exceed the rows kept), so accepted/candidates is an unbiased binomial
    estimator of P(grid max <= b + eta) — or of the continuous-maximum
    probability when continuous_correction is on.
    """
    if not (eta > 0 and math.isfinite(eta)):
        raise DomainError(f"need eta > 0, got {eta}")
    if n_accept < 1:
        raise DomainError("need n_accept >= 1")
    delta_int = round(p.delta)
    if abs(p.delta - delta_int) > 1e-12 or delta_int < 1:
        raise DomainError("the ensemble sampler needs a positive integer delta")
    if continuous_correction and delta_int != 3:
        raise DomainError("the continuous-maximum correction is exact only for delta = 3")
    g = _check_grid(grid, unit_horizon=True)
    c = p.b + eta
    target = np.zeros(delta_int)
    target[0] = p.b
    kept: list[np.ndarray] = []
    n_kept = 0
    n_candidates = 0
    for r in range(max_batches):
        gen = rng.spawn(r + 1).generator()
        comp = np.zeros((batch, delta_int))
        comp[:, 0] = p.a
        vals = np.empty((batch, g.size))
        vals[:, 0] = p.a
        for k in range(1, g.size):
            s, t = g[k - 1], g[k]
            if t == 1.0:
                comp = np.broadcast_to(target, comp.shape).copy()
            else:
                pull = (t - s) / (1.0 - s)
                sd = math.sqrt((t - s) * (1.0 - t) / (1.0 - s))
                comp = comp + pull * (target - comp) + sd * gen.standard_normal(comp.shape)
            vals[:, k] = np.linalg.norm(comp, axis=1)
        n_candidates += batch
        ok = np.max(vals, axis=1) <= c
        cand = vals[ok]
        if continuous_correction and cand.size:
            surv = _delta3_segment_survival(c, g, cand)
            cand = cand[gen.random(cand.shape[0]) < surv]
        if cand.size:
            kept.append(cand)
            n_kept += cand.shape[0]
        if n_kept >= n_accept:
            break
    else:
        raise RejectionExhausted(
            f"only {n_kept} of {n_accept} acceptances after {n_candidates} candidates",
            attempts=n_candidates,
        )
    values = np.vstack(kept)[:n_accept]
    meta = {
        "kind": "conditioned-ensemble-gaussian-norm",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": float(np.max(np.diff(g))),
        "delta": p.delta,
        "a": p.a,
        "b": p.b,
        "eta": eta,
        "candidates": n_candidates,
        "accepted": int(n_kept),
        "kept": int(n_accept),
        "continuous_correction": continuous_correction,
    }
    return g, values, meta


# --------------------------------------------------------------------------
# house-moving path samplers


def sample_house_path(m: HouseMovingModel, steps: int, rng: RngStream) -> SamplePath:
    """One house-moving path on the uniform grid k/steps by inverse CDF.

    Each step tabulates the exact transition CDF on a window around the
    current state and inverts it at one uniform draw; the final value is
    pinned to b, where the limit law degenerates.  Interior values stay
    strictly inside (0, b).  The result is bit-identical to row 0 of
    sample_house_ensemble(m, 1, steps, rng).
    """
    times, vals, _ = sample_house_ensemble(m, 1, steps, rng)
    meta = {
        "kind": "house-icdf",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": 1.0 / steps,
        "steps": int(steps),
        "delta": m.delta,
        "a": m.a,
        "b": m.b,
    }
    return SamplePath(times, vals[0], meta)


def _q2_grid_clipped(
    p: ProcessParams, b: float, tau: float, y: np.ndarray, policy: SeriesPolicy
) -> np.ndarray:
    """Barrier-survival factor q2 over a grid, with sub-roundoff values
    clipped to zero.

    Far below the barrier at small tau the true q2 is double-exponentially
    small while the terms of its Fourier-Bessel series stay O(1), so the
    value drowns in cancellation noise and can round to a tiny negative.
    The strict kernel evaluator refuses such points; inside the step tables
    they only ever multiply transition factors that vanish even faster, so
    flooring them to zero is harmless and keeps the table build total.
    """
    nu = p.nu
    y = np.asarray(y, dtype=float)
    scale = tau / (2.0 * b * b)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp((nu + 1.0) * np.log(j) - j * j * scale)
        return (g / w)[:, None] * bessel_j_scaled(nu, y[None, :] * j[:, None] / b)

    core = _certified_series(term, max(1.0, nu + 1.5), scale, policy)
    vals = 2.0 * core.value / (b * b)
    floor = 32.0 * np.finfo(float).eps * 2.0 * core.abs_sum / (b * b)
    return np.where(vals > floor, vals, 0.0)


def _endpoint_weight_clipped(
    p: ProcessParams,
    c: float,
    tau: float,
    end: float,
    y: np.ndarray,
    policy: SeriesPolicy,
) -> np.ndarray:
    """q1 under barrier c from each grid point y to the fixed state end,
    over elapsed time tau, with sub-roundoff values clipped to zero.

    Start-varying values follow from the terminal-varying series through
    the symmetry q1(tau, y, end) = q1(tau, end, y) (end/y)^(2 nu + 1); the
    power factor cancels the terminal kernel's y-prefactor, leaving a
    bounded series.  The clipping mirrors _q2_grid_clipped: far from end
    at small tau the true value is double-exponentially small while the
    series terms stay O(1), so anything below the cancellation floor is
    indistinguishable from zero and treated as such.
    """
    nu = p.nu
    y = np.asarray(y, dtype=float)
    scale = tau / (2.0 * c * c)

    def term(idx: np.ndarray) -> np.ndarray:
        j, w = _zeros_weights(nu, idx)
        g = np.exp(2.0 * nu * np.log(j / c) - j * j * scale)
        fe = bessel_j_scaled(nu, j * end / c)
        return ((g * fe) / (w * w))[:, None] * bessel_j_scaled(
            nu, y[None, :] * j[:, None] / c
        )

    core = _certified_series(term, _kappa_sym(nu, 0.0, 0.0), scale, policy)
    pref = 2.0 * end ** (2.0 * nu + 1.0) / (c * c)
    vals = pref * core.value
    floor = 32.0 * np.finfo(float).eps * pref * core.abs_sum
    return np.where(vals > floor, vals, 0.0)


def _conditioned_tables(
    p: ProcessParams,
    c: float,
    s: float,
    t: float,
    x_grid: np.ndarray,
    wx: np.ndarray,
    wy_fn,
    y_nodes: int,
    n_terms: int,
    policy: SeriesPolicy,
    what: str,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row CDF/PDF tables for one step of a barrier-conditioned law.

    The transition density q1_c(s, x, t, y) w(t, y) / w(s, x) factorizes
    through one Fourier-Bessel series under barrier c, so the density
    matrix over (x-grid) x (y-grid) is a single matrix product dressed
    with the terminal-weight row and column.  Truncation is certified the
    same way the scalar kernels do it.  Every row whose weight w(s, x) is
    solidly representable must integrate to 1 before normalization (a miss
    doubles the y resolution and deepens the series); rows drowned in
    cancellation noise are replaced by their nearest solid neighbour,
    which changes nothing visible because paths reach them with
    probability below the noise floor itself.  Returns (y, cdf, pdf).
    """
    nu = p.nu
    scale = (t - s) / (2.0 * c * c)
    wx_safe = np.where(wx > 0.0, wx, 1.0)
    ny = y_nodes
    while True:
        zt = bessel_j_zeros(nu, n_terms)
        j, w = zt.zeros[:n_terms], zt.weights[:n_terms]
        g = np.exp(2.0 * nu * np.log(j / c) - j * j * scale)
        u = np.linspace(-_TS_SPAN, _TS_SPAN, ny)
        du = u[1] - u[0]
        y, wy = _ts_map(0.0, c, u)
        fy = bessel_j_scaled(nu, np.outer(j, y) / c)
        fx = bessel_j_scaled(nu, np.outer(j, x_grid) / c)
        core = fx.T @ (fy * (g / (w * w))[:, None])
        q1_mat = np.maximum(2.0 * y ** (2.0 * nu + 1.0) * core / (c * c), 0.0)
        wy_vec = wy_fn(y)
        dens = q1_mat * wy_vec[None, :] / wx_safe[:, None]
        cdf = _row_cdf(dens, wy, du)
        mass = cdf[:, -1]
        solid = wx >= 1e-6 * float(wx.max())
        worst = float(np.max(np.abs(mass[solid] - 1.0)))
        if worst <= 2e-5:
            break
        if ny >= 8192:
            raise QuadratureError(
                f"{what} mass off by {worst:.2e} "
                f"at {ny} nodes and {n_terms} terms"
            )
        ny *= 2
        n_terms = min(2 * n_terms, policy.n_max)
    good = np.flatnonzero(solid & (mass > 0.0))
    bad = np.flatnonzero(~(solid & (mass > 0.0)))
    if bad.size:
        nearest = good[
            np.clip(np.searchsorted(good, bad), 0, good.size - 1)
        ]
        stepped = np.clip(np.searchsorted(good, bad) - 1, 0, good.size - 1)
        closer = np.abs(good[stepped] - bad) < np.abs(nearest - bad)
        nearest = np.where(closer, good[stepped], nearest)
        dens[bad] = dens[nearest]
        cdf[bad] = cdf[nearest]
    mass = cdf[:, -1].copy()
    return y, cdf / mass[:, None], dens / mass[:, None]


def _certified_step_terms(
    p: ProcessParams, c: float, scale: float, policy: SeriesPolicy
) -> int:
    """Term budget for the step-table series under barrier c.

    Calibrates the tail envelope on a probe containing the slowest
    decaying case (x = 0 with the y -> 0 cluster); the per-row mass check
    in _conditioned_tables independently catches any residual optimism.
    """
    nu = p.nu
    kappa = _kappa_sym(nu, 0.0, 0.0)
    alpha = math.pi**2 * scale / 4.0
    probe = np.concatenate([[0.0, 1e-3 * c], np.linspace(0.05 * c, 0.95 * c, 5)])
    zt = bessel_j_zeros(nu, 24)
    j, w = zt.zeros[:24], zt.weights[:24]
    g = np.exp(2.0 * nu * np.log(j / c) - j * j * scale)
    f = bessel_j_scaled(nu, np.outer(j, probe) / c)
    terms = (g / (w * w))[:, None, None] * f[:, :, None] * f[:, None, :]
    flat = terms.reshape(terms.shape[0], -1)
    c_hat = _envelope_constant(flat, kappa, alpha)
    ref = float(np.abs(flat.sum(axis=0)).max())
    return truncation_bound(policy, nu, scale, (c_hat, max(ref, 1e-300)), kappa=kappa)


def _state_window(xs: np.ndarray, c: float, x_nodes: int) -> np.ndarray:
    """Padded x grid around the current ensemble positions, inside (0, c).

    Late in a conditioned move the surviving paths cluster, and for states
    far outside the cluster the terminal weights underflow the roundoff
    floor of their own series, so tabulating the full state space would
    poison the normalization of rows no path can reach.
    """
    mn, mx = float(np.min(xs)), float(np.max(xs))
    pad = 0.02 * (mx - mn) + 1e-3 * c
    lo = max(0.0, mn - pad)
    hi = min(c * (1.0 - 1e-9), mx + pad)
    return np.linspace(lo, hi, x_nodes)


class _StepTables:
    """Per-step CDF tables for the house ensemble.

    The transition h(s, x, t, y) = q1(s, x, t, y) q2(1-t, y) / q2(1-s, x)
    is the barrier-b case of _conditioned_tables with the hitting-time
    factor q2 as terminal weight.
    """

    def __init__(
        self,
        m: HouseMovingModel,
        s: float,
        t: float,
        xs: np.ndarray,
        x_nodes: int,
        y_nodes: int,
        policy: SeriesPolicy,
    ):
        p, b = m.params, m.b
        scale = (t - s) / (2.0 * b * b)
        self.x_grid = _state_window(xs, b, x_nodes)
        n_terms = _certified_step_terms(p, b, scale, policy)
        wx = q2_grid(p, b, 1.0 - s, self.x_grid, policy)
        self.y, self.cdf, self.pdf = _conditioned_tables(
            p, b, s, t, self.x_grid, wx,
            lambda yy: _q2_grid_clipped(p, b, 1.0 - t, yy, policy),
            y_nodes, n_terms, policy, "house step table",
        )

    def draw(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return _blended_draw(self.x_grid, self.y, self.cdf, self.pdf, xs, us)


class _BelowBarrierStepTables:
    """Per-step CDF tables for the bridge conditioned to stay below b + eta.

    Conditioning the whole bridge a -> b on max <= c factorizes segment by
    segment into absorbed kernels under barrier c, so the step transition
    is q1_c(s, x, t, y) w(t, y) / w(s, x) with terminal weight
    w(t, y) = q1_c(1 - t; y -> b): the same table assembly as the house
    ensemble with q2 replaced by the endpoint kernel.
    """

    def __init__(
        self,
        p: ProcessParams,
        eta: float,
        s: float,
        t: float,
        xs: np.ndarray,
        x_nodes: int,
        y_nodes: int,
        policy: SeriesPolicy,
    ):
        c = p.b + eta
        scale = (t - s) / (2.0 * c * c)
        self.x_grid = _state_window(xs, c, x_nodes)
        n_terms = _certified_step_terms(p, c, scale, policy)
        wx = _endpoint_weight_clipped(p, c, 1.0 - s, p.b, self.x_grid, policy)
        self.y, self.cdf, self.pdf = _conditioned_tables(
            p, c, s, t, self.x_grid, wx,
            lambda yy: _endpoint_weight_clipped(p, c, 1.0 - t, p.b, yy, policy),
            y_nodes, n_terms, policy, "conditioned step table",
        )

    def draw(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return _blended_draw(self.x_grid, self.y, self.cdf, self.pdf, xs, us)


def sample_house_ensemble(
    m: HouseMovingModel,
    n_paths: int,
    steps: int,
    rng: RngStream,
    *,
    x_nodes: int = 320,
    y_nodes: int = 1024,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Ensemble of house-moving paths; returns (times, values, meta).

    values has shape (n_paths, steps+1).  Path p consumes exactly one
    uniform per step from substream rng.spawn(p), so any slice of the
    ensemble is bit-identical to the same streams sampled alone against
    the same tables, independent of worker scheduling.
    """
    if steps < 2:
        raise DomainError("need steps >= 2")
    if n_paths < 1:
        raise DomainError("need n_paths >= 1")
    if x_nodes < 8:
        raise DomainError("need x_nodes >= 8")
    times = np.arange(steps + 1) / steps
    u_draws = np.empty((n_paths, steps - 1))
    for pth in range(n_paths):
        u_draws[pth] = rng.spawn(pth).generator().random(steps - 1)
    vals = np.empty((n_paths, steps + 1))
    vals[:, 0] = m.a
    x = np.full(n_paths, m.a)
    for k in range(steps - 1):
        tables = _StepTables(m, times[k], times[k + 1], x, x_nodes, y_nodes, policy)
        x = tables.draw(x, u_draws[:, k])
        vals[:, k + 1] = x
    vals[:, steps] = m.b
    meta = {
        "kind": "house-ensemble",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": 1.0 / steps,
        "steps": int(steps),
        "delta": m.delta,
        "a": m.a,
        "b": m.b,
        "paths": int(n_paths),
    }
    return times, vals, meta


def sample_conditioned_ensemble_exact(
    p: ProcessParams,
    eta: float,
    n_paths: int,
    steps: int,
    rng: RngStream,
    *,
    x_nodes: int = 320,
    y_nodes: int = 1024,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Ensemble of bridges conditioned on max <= b + eta, with no rejection.

    Returns (times, values, meta) with values of shape (n_paths, steps+1).
    Each step is drawn by inverse CDF from the exact transition of the
    conditioned law (absorbed kernel under barrier b + eta, weighted by the
    endpoint kernel), so the sampled skeleton follows the conditioning on
    the continuous maximum — the law the rejection route only reaches with
    continuous_correction, and at any delta rather than integer delta only.
    Cost is flat in eta where rejection degrades as the conditioning
    sharpens.  Path p consumes one uniform per step from rng.spawn(p), so
    repeating a call reproduces the ensemble bit for bit (the shared step
    tables adapt their state window to the whole ensemble, so bit-level
    identity is per call shape, not per path slice).  Works at any real
    delta > 0.
    """
    if not (eta > 0 and math.isfinite(eta)):
        raise DomainError(f"need eta > 0, got {eta}")
    if steps < 2:
        raise DomainError("need steps >= 2")
    if n_paths < 1:
        raise DomainError("need n_paths >= 1")
    if x_nodes < 8:
        raise DomainError("need x_nodes >= 8")
    times = np.arange(steps + 1) / steps
    u_draws = np.empty((n_paths, steps - 1))
    for pth in range(n_paths):
        u_draws[pth] = rng.spawn(pth).generator().random(steps - 1)
    vals = np.empty((n_paths, steps + 1))
    vals[:, 0] = p.a
    x = np.full(n_paths, p.a)
    for k in range(steps - 1):
        tables = _BelowBarrierStepTables(
            p, eta, times[k], times[k + 1], x, x_nodes, y_nodes, policy
        )
        x = tables.draw(x, u_draws[:, k])
        vals[:, k + 1] = x
    vals[:, steps] = p.b
    meta = {
        "kind": "conditioned-ensemble-exact",
        "seed": rng.seed,
        "stream": rng.stream,
        "step": 1.0 / steps,
        "steps": int(steps),
        "delta": p.delta,
        "a": p.a,
        "b": p.b,
        "eta": float(eta),
        "paths": int(n_paths),
    }
    return times, vals, meta


# --------------------------------------------------------------------------
# serialization


def ensemble_paths(times: np.ndarray, values: np.ndarray, meta: dict) -> list[SamplePath]:
    """Wrap an ensemble matrix as SamplePath objects sharing one time grid."""
    out = []
    for i in range(values.shape[0]):
        pm = dict(meta)
        pm["stream"] = (meta.get("stream", 0) + i) % _TWO64
        out.append(SamplePath(times, values[i], pm))
    return out


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {key} = {meta[key]}" for key in sorted(meta)]


def write_ensemble_csv(paths: Sequence[SamplePath], fh) -> None:
    """CSV with one row per (path, grid point): path_id, t, value.

    Shared meta goes first as `# key = value` comment lines; numbers are
    written with shortest-roundtrip precision so reading back is lossless.
    """
    if not paths:
        raise DomainError("nothing to write")
    for line in _meta_lines(paths[0].meta):
        fh.write(line + "\n")
    fh.write("path_id,t,value\n")
    for i, sp in enumerate(paths):
        for t, v in zip(sp.times, sp.values):
            fh.write(f"{i},{t:.17g},{v:.17g}\n")


def write_ensemble_jsonl(paths: Sequence[SamplePath], fh) -> None:
    """JSON-lines: one self-contained path object per line."""
    if not paths:
        raise DomainError("nothing to write")
    for i, sp in enumerate(paths):
        rec = {
            "path_id": i,
            "meta": sp.meta,
            "times": [float(t) for t in sp.times],
            "values": [float(v) for v in sp.values],
        }
        fh.write(json.dumps(rec) + "\n")
