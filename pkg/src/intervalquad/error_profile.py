"""Error kernel ``M(q, u)``, its certified extrema and the worst-case class error.

For ``h > 0`` the kernel average over a window is a difference of the
periodic primitive, so

    M(q, u) = a0 (2pi - sum c) - sum_k c_k [K1(x_k - u + h) - K1(x_k - u - h)] / (2h)

with ``K1`` the primitive kernel.  For ``h = 0`` it is ``2pi a0 - sum_k c_k K(x_k - u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .kernels import TWO_PI, FourierKernel, eval_kernel, kernel_plan, plan_value, plan_values
from .quadrature import ConvolutionFunction, IntervalQuadrature, check_quadrature

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
XTOL = 1e-12
MAX_REFINED = 64
NORMALIZATION_TOL = 1e-9


def grid_floor(n: int) -> int:
    return max(4096, 512 * n)


@dataclass(frozen=True)
class ErrorProfile:
    """Sampled error kernel with refined extrema and the resulting error bound."""

    grid_size: int
    max_point: float
    max_value: float
    min_point: float
    min_value: float
    mu: int
    samples: np.ndarray | None = None
    value: float = float("nan")
    lambda_q: float = float("nan")

    def __post_init__(self):
        lam = 0.5 * (self.max_value + self.min_value)
        if self.mu == 1:
            val = 0.5 * (self.max_value - self.min_value)
        else:
            val = max(abs(self.max_value), abs(self.min_value))
        object.__setattr__(self, "lambda_q", lam)
        if math.isnan(self.value):
            object.__setattr__(self, "value", val)

    @property
    def grid(self) -> np.ndarray:
        return TWO_PI * np.arange(self.grid_size) / self.grid_size

    @property
    def equioscillation_residual(self) -> float:
        """``|max + min|`` of ``M - lambda_q`` for zero-mean kernels, of ``M`` otherwise."""
        if self.mu == 1:
            return abs((self.max_value - self.lambda_q) + (self.min_value - self.lambda_q))
        return abs(self.max_value + self.min_value)

    def to_dict(self) -> dict:
        return {
            "value": "inf" if math.isinf(self.value) else self.value,
            "lambda": self.lambda_q,
            "max_point": self.max_point,
            "min_point": self.min_point,
            "max": self.max_value,
            "min": self.min_value,
            "grid_size": self.grid_size,
        }


# --- compiled core -------------------------------------------------------------


@njit(cache=True)
def _m_value(u, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    acc = 0.0
    if h > 0.0:
        for k in range(knots.shape[0]):
            y = knots[k] - u
            hi = plan_value(y + h, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            lo = plan_value(y - h, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            acc += weights[k] * (hi - lo)
        return base - acc / (2.0 * h)
    for k in range(knots.shape[0]):
        acc += weights[k] * plan_value(knots[k] - u, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    return base - acc


@njit(cache=True)
def _m_values(us, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    nu = us.shape[0]
    out = np.full(nu, base)
    ys = np.empty(nu)
    for k in range(knots.shape[0]):
        if h > 0.0:
            ck = weights[k] / (2.0 * h)
            for i in range(nu):
                ys[i] = knots[k] - us[i] + h
            hi = plan_values(ys, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            for i in range(nu):
                ys[i] = knots[k] - us[i] - h
            lo = plan_values(ys, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            for i in range(nu):
                out[i] -= ck * (hi[i] - lo[i])
        else:
            ck = weights[k]
            for i in range(nu):
                ys[i] = knots[k] - us[i]
            vals = plan_values(ys, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            for i in range(nu):
                out[i] -= ck * vals[i]
    return out


@njit(cache=True)
def _golden_max(a, b, sign, xtol, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1 = sign * _m_value(x1, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    f2 = sign * _m_value(x2, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    best_x, best_f = x1, f1
    if f2 > best_f:
        best_x, best_f = x2, f2
    while b - a > xtol:
        if f1 < f2:
            a = x1
            x1, f1 = x2, f2
            x2 = a + phi * (b - a)
            f2 = sign * _m_value(x2, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            if f2 > best_f:
                best_x, best_f = x2, f2
        else:
            b = x2
            x2, f2 = x1, f1
            x1 = b - phi * (b - a)
            f1 = sign * _m_value(x1, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
            if f1 > best_f:
                best_x, best_f = x1, f1
    return best_x, best_f


@njit(cache=True)
def _extremum(samples, sign, xtol, cap, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    G = samples.shape[0]
    du = 2.0 * np.pi / G
    f = sign * samples
    jbest = np.argmax(f)
    gmax = f[jbest]
    maxdiff = 0.0
    for j in range(G):
        d = abs(f[(j + 1) % G] - f[j])
        if d > maxdiff:
            maxdiff = d
    margin = 2.0 * maxdiff
    cand = []
    for j in range(G):
        fj = f[j]
        if fj >= f[(j - 1) % G] and fj >= f[(j + 1) % G] and fj >= gmax - margin:
            cand.append(j)
    cand_arr = np.array(cand, dtype=np.int64)
    if cand_arr.shape[0] > cap:
        order = np.argsort(-f[cand_arr])
        cand_arr = cand_arr[order[:cap]]
    best_u = jbest * du
    best_f = gmax
    for j in cand_arr:
        u, fu = _golden_max((j - 1) * du, (j + 1) * du, sign, xtol, knots, weights, h, base,
                            const, bdeg, bw, bcoef, erate, eshift, ew, corr)
        if fu > best_f:
            best_u, best_f = u, fu
    best_u = best_u % (2.0 * np.pi)
    return best_u, sign * best_f


@njit(cache=True)
def _profile_core(G, xtol, cap, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    us = 2.0 * np.pi * np.arange(G) / G
    samples = _m_values(us, knots, weights, h, base, const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    umax, vmax = _extremum(samples, 1.0, xtol, cap, knots, weights, h, base,
                           const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    umin, vmin = _extremum(samples, -1.0, xtol, cap, knots, weights, h, base,
                           const, bdeg, bw, bcoef, erate, eshift, ew, corr)
    return samples, umax, vmax, umin, vmin


def _m_setup(K: FourierKernel, q: IntervalQuadrature, tol: float):
    """Arguments for the compiled evaluator: knots, weights, h, base, *plan."""
    a0 = K.a0.real
    c_abs = max(1.0, float(np.sum(np.abs(q.weight_array))))
    if q.h > 0:
        plan = kernel_plan(K.antiderivative(), tol * min(1.0, 2 * q.h) / c_abs)
        base = a0 * (TWO_PI - q.weight_sum())
    else:
        plan = kernel_plan(K, tol / c_abs)
        base = TWO_PI * a0
    return (q.knot_array, q.weight_array, q.h, base) + tuple(plan)


def error_kernel(K: FourierKernel, q: IntervalQuadrature, u, tol: float = 1e-10):
    """``M(q, u) = integral_0^{2pi} K(t - u) [1 - H(q; t)] dt``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    check_quadrature(q)
    u = np.asarray(u, dtype=float)
    out = _m_values(np.ascontiguousarray(u.ravel()), *_m_setup(K, q, tol)).reshape(u.shape)
    return float(out) if out.ndim == 0 else out


def error_kernel_series(K: FourierKernel, q: IntervalQuadrature, u, N: int) -> np.ndarray:
    """Fourier form of ``M`` truncated at ``|m| <= N``; reference for tests."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    a0 = K.a0.real
    x, c = q.knot_array, q.weight_array
    m = np.arange(1, N + 1)
    S = np.exp(1j * np.outer(m, x)) @ c
    sinc = np.sinc(m * q.h / math.pi)
    am = K.coefficients(m)
    terms = (am * S * sinc)[None, :] * np.exp(-1j * np.outer(u, m))
    total = 2 * terms.real.sum(axis=1)
    return TWO_PI * a0 - total - a0 * q.weight_sum()


def profile(K: FourierKernel, q: IntervalQuadrature, grid_size: int | None = None,
            tol: float = 1e-10) -> ErrorProfile:
    """Sample ``M`` on a uniform grid, refine every competitive local extremum by
    golden-section search and report the best constant and error bound."""
    check_quadrature(q)
    return _profile(K, q, grid_size, tol)


def _profile(K, q, grid_size, tol):
    floor = grid_floor(q.n)
    if grid_size is None:
        grid_size = floor
    if grid_size < floor:
        raise ValueError(f"grid_size must be at least max(4096, 512 n) = {floor}")
    samples, umax, vmax, umin, vmin = _profile_core(grid_size, XTOL, MAX_REFINED, *_m_setup(K, q, tol))
    return ErrorProfile(grid_size, float(umax), float(vmax), float(umin), float(vmin), K.mu, samples)


def _gated(K: FourierKernel, q: IntervalQuadrature) -> bool:
    return K.mu == 1 and abs(q.weight_sum() - TWO_PI) > NORMALIZATION_TOL


def worst_case_profile(K: FourierKernel, q: IntervalQuadrature, grid_size: int | None = None,
                       tol: float = 1e-10) -> ErrorProfile:
    """Profile whose ``value`` is the worst-case error; ``inf`` when a zero-mean
    kernel meets weights that do not sum to ``2 pi``."""
    prof = profile(K, q, grid_size, tol)
    if _gated(K, q):
        return replace(prof, value=math.inf)
    return prof


def worst_case_error(K: FourierKernel, q: IntervalQuadrature, tol: float = 1e-10,
                     grid_size: int | None = None) -> float:
    check_quadrature(q)
    if _gated(K, q):
        return math.inf
    return _profile(K, q, grid_size, tol).value


def integrate_error_kernel(K: FourierKernel, q: IntervalQuadrature, lo: float, hi: float,
                           tol: float = 1e-12) -> float:
    """``integral_lo^hi M(q, u) du`` from the second primitive of the kernel."""
    a0 = K.a0.real
    x, c = q.knot_array, q.weight_array
    width = hi - lo
    K1 = K.antiderivative()
    if q.h > 0:
        K2 = K1.antiderivative()
        h = q.h
        pts = np.concatenate([x - lo + h, x - hi + h, x - lo - h, x - hi - h])
        F = eval_kernel(K2, pts, tol).reshape(4, -1)
        inner = F[0] - F[1] - F[2] + F[3]
        return a0 * (TWO_PI - q.weight_sum()) * width - float(c @ inner) / (2 * h)
    F = eval_kernel(K1, np.concatenate([x - lo, x - hi]), tol).reshape(2, -1)
    return TWO_PI * a0 * width - float(c @ (a0 * width + F[0] - F[1]))


def residual(K: FourierKernel, q: IntervalQuadrature, f: ConvolutionFunction,
             tol: float = 1e-12) -> float:
    """``a mu (2pi - sum c) + integral phi(u) M(q, u) du``, i.e. ``integral f - q(f)``."""
    check_quadrature(q)
    if f.kernel != K:
        raise ValueError("f is built on a different kernel")
    total = f.a * K.mu * (TWO_PI - q.weight_sum())
    for (lo, hi), v in zip(f.phi.intervals, f.phi.values):
        total += v * integrate_error_kernel(K, q, lo, hi, tol)
    return total


# --- generic path ---------------------------------------------------------------


def profile_function(func, mu: int, grid_size: int = 4096, xtol: float = XTOL,
                     period: float = TWO_PI) -> ErrorProfile:
    """Same extremum machinery for an arbitrary vectorised periodic ``func``."""
    u = period * np.arange(grid_size) / grid_size
    du = period / grid_size
    samples = np.asarray(func(u), dtype=float)
    found = []
    for sign in (1.0, -1.0):
        f = sign * samples
        gmax = f.max()
        margin = 2.0 * np.max(np.abs(np.roll(f, -1) - f))
        is_peak = (f >= np.roll(f, 1)) & (f >= np.roll(f, -1)) & (f >= gmax - margin)
        idx = np.flatnonzero(is_peak)
        idx = idx[np.argsort(-f[idx], kind="stable")][:MAX_REFINED]
        best_u, best_f = np.argmax(f) * du, gmax
        if idx.size:
            a, b = (idx - 1) * du, (idx + 1) * du
            x1, x2 = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
            f1, f2 = sign * func(x1), sign * func(x2)
            bx = np.where(f2 > f1, x2, x1)
            bf = np.maximum(f1, f2)
            while np.max(b - a) > xtol:
                right = f1 < f2
                a = np.where(right, x1, a)
                b = np.where(right, b, x2)
                new_x = np.where(right, a + GOLDEN * (b - a), b - GOLDEN * (b - a))
                new_f = sign * func(new_x)
                x1, f1, x2, f2 = (
                    np.where(right, x2, new_x), np.where(right, f2, new_f),
                    np.where(right, new_x, x1), np.where(right, new_f, f1),
                )
                better = new_f > bf
                bx, bf = np.where(better, new_x, bx), np.where(better, new_f, bf)
            k = np.argmax(bf)
            if bf[k] > best_f:
                best_u, best_f = bx[k], bf[k]
        found.append((float(best_u % period), float(sign * best_f)))
    (umax, vmax), (umin, vmin) = found
    return ErrorProfile(grid_size, umax, vmax, umin, vmin, mu, samples)
