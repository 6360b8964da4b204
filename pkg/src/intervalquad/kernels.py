"""Periodic convolution kernels given by their Fourier symbol.

A kernel is stored as the root list of the polynomial ``P`` in its symbol
``a_k = scale / (2 pi P(ik))``.  Bernoulli kernels are the special case
``P(x) = x**r``.  Values are produced from exact closed forms: periodic
Bernoulli polynomials for the pole at zero and exponential Green's functions
for simple nonzero roots.  Kernels whose nonzero roots repeat or cluster fall
back to a Bernoulli-subtracted Fourier series with a rigorous tail bound.
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# Bernoulli subtraction order used by the series fallback.
_SUBTRACTION_ORDER = 8
# Below this separation partial fractions lose accuracy and the series path is used.
_MIN_ROOT_SEPARATION = 1e-2
_MAX_TERMS = 1_000_000

_SPEC_RE = re.compile(
    r"^(?:bernoulli:(?P<r>[1-9][0-9]*)"
    r"|poly:(?P<roots>[-+0-9.eE]+(?:,[-+0-9.eE]+)*))$"
)


@dataclass(frozen=True)
class FourierKernel:
    """Convolution kernel ``K(x) = sum' a_k e^{ikx}``.

    Parameters
    ----------
    roots : tuple of float
        Real zeros of the symbol polynomial ``P``, with multiplicity.
    kind : {"bernoulli", "poly"}
        Tag kept for reporting; ``bernoulli`` means all roots are zero.
    scale : float
        Overall factor applied to every coefficient.
    """

    roots: tuple[float, ...]
    kind: str = "poly"
    scale: float = 1.0

    def __post_init__(self):
        if not self.roots:
            raise ValueError("kernel needs at least one root")
        roots = tuple(float(r) + 0.0 for r in self.roots)  # folds -0.0
        if not all(math.isfinite(r) for r in roots):
            raise ValueError("kernel roots must be finite")
        if self.kind not in ("bernoulli", "poly"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "bernoulli" and any(roots):
            raise ValueError("bernoulli kernels have all roots at zero")
        if not (math.isfinite(self.scale) and self.scale != 0.0):
            raise ValueError("scale must be finite and nonzero")
        object.__setattr__(self, "roots", roots)

    @property
    def order(self) -> int:
        return len(self.roots)

    @property
    def decay_order(self) -> int:
        return len(self.roots)

    @property
    def decay_constant(self) -> float:
        # |P(ik)| = prod sqrt(k^2 + r^2) >= |k|^m for every real root set
        return abs(self.scale) / TWO_PI

    @property
    def zero_multiplicity(self) -> int:
        return sum(1 for r in self.roots if r == 0.0)

    @property
    def a0(self) -> complex:
        if self.zero_multiplicity:
            return 0j
        return complex(self.scale / (TWO_PI * _poly_at(self.roots, 0.0).real))

    @property
    def mu(self) -> int:
        return 1 if self.zero_multiplicity else 0

    @property
    def spec(self) -> str:
        if self.kind == "bernoulli":
            return f"bernoulli:{self.order}"
        return "poly:" + ",".join(repr(r) for r in self.roots)

    def coefficient(self, k: int) -> complex:
        """Fourier coefficient ``a_k``; zero where the primed sum skips ``k``."""
        p = _poly_at(self.roots, 1j * k)
        if p == 0:
            return 0j
        return self.scale / (TWO_PI * p)

    def coefficients(self, ks) -> np.ndarray:
        ks = np.asarray(ks)
        p = np.ones(ks.shape, dtype=complex)
        for r in self.roots:
            p = p * (1j * ks - r)
        out = np.zeros(ks.shape, dtype=complex)
        nz = p != 0
        out[nz] = self.scale / (TWO_PI * p[nz])
        return out

    def scaled(self, factor: float) -> "FourierKernel":
        return FourierKernel(self.roots, self.kind, self.scale * factor)

    def antiderivative(self) -> "FourierKernel":
        """Periodic part of the primitive: symbol ``a_k / (ik)``, one extra zero root."""
        return FourierKernel(self.roots + (0.0,), self.kind, self.scale)

    def __str__(self) -> str:
        return self.spec


def _poly_at(roots, z) -> complex:
    p = 1.0 + 0j
    for r in roots:
        p *= z - r
    return p


def make_bernoulli(r: int) -> FourierKernel:
    """Bernoulli kernel with ``a_k = 1 / (2 pi (ik)^r)``."""
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValueError(f"bernoulli order must be a positive integer, got {r!r}")
    return FourierKernel((0.0,) * int(r), kind="bernoulli")


def make_rational(roots) -> FourierKernel:
    roots = tuple(float(r) for r in roots)
    if not roots:
        raise ValueError("root list must be non-empty")
    return FourierKernel(roots, kind="poly")


def parse_kernel(spec: str) -> FourierKernel:
    """Parse ``bernoulli:<r>`` or ``poly:<root>,<root>,...``."""
    m = _SPEC_RE.match(spec)
    if m is None:
        raise ValueError(
            f"bad kernel spec {spec!r}; expected 'bernoulli:<r>' or 'poly:<r1>,<r2>,...'"
        )
    if m.group("r") is not None:
        return make_bernoulli(int(m.group("r")))
    try:
        roots = [float(tok) for tok in m.group("roots").split(",")]
    except ValueError:
        raise ValueError(f"bad root in kernel spec {spec!r}") from None
    return make_rational(roots)


def kernel_mean(K: FourierKernel) -> float:
    """Integral of the kernel over one period, ``2 pi a_0``."""
    return TWO_PI * K.a0.real


# --- closed forms -----------------------------------------------------------


@functools.lru_cache(maxsize=None)
def bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return tuple(b)


@functools.lru_cache(maxsize=None)
def bernoulli_polynomial(n: int) -> tuple[Fraction, ...]:
    """Coefficients of ``B_n(t)``, highest degree first."""
    b = bernoulli_numbers(n)
    return tuple(math.comb(n, k) * b[k] for k in range(n + 1))


def bernoulli_kernel_closed_form(r: int, x) -> np.ndarray:
    """``(1/2pi) sum' e^{ikx}/(ik)^r = -(2pi)^(r-1)/r! * B_r(frac(x/2pi))``.

    For ``r = 1`` the value at the jump ``x = 0 mod 2pi`` is 0.
    """
    x = np.asarray(x, dtype=float)
    t = np.mod(x / TWO_PI, 1.0)
    t = np.where(t >= 1.0, 0.0, t)
    s = np.where(t > 0.5, 1.0 - t, t)
    sign = np.where((t > 0.5) & (r % 2 == 1), -1.0, 1.0)
    coeffs = [float(c) for c in bernoulli_polynomial(r)]
    val = -(TWO_PI ** (r - 1)) / math.factorial(r) * sign * np.polyval(coeffs, s)
    if r == 1:
        val = np.where(t == 0.0, 0.0, val)
    return val


class KernelPlan(NamedTuple):
    """Flat arrays consumed by the compiled evaluator.

    ``K(x) = const + sum_j bw_j B~_{bdeg_j}(x) + sum_j ew_j exp(erate_j (theta + eshift_j))
    + sum_k Re(corr_k e^{ikx})`` with ``theta = x mod 2pi``.
    """

    const: float
    bdeg: np.ndarray
    bw: np.ndarray
    bcoef: np.ndarray
    erate: np.ndarray
    eshift: np.ndarray
    ew: np.ndarray
    corr: np.ndarray


def _bernoulli_rows(degrees, weights):
    kept = [(d, w) for d, w in zip(degrees, weights) if w != 0.0]
    degrees = [d for d, _ in kept]
    weights = [w for _, w in kept]
    dmax = max(degrees, default=1)
    bcoef = np.zeros((len(degrees), dmax + 1))
    for row, d in enumerate(degrees):
        bcoef[row, dmax - d :] = [float(c) for c in bernoulli_polynomial(d)]
    bw = np.array(
        [-w * TWO_PI ** (d - 1) / math.factorial(d) for d, w in zip(degrees, weights)],
        dtype=float,
    )
    return np.array(degrees, dtype=np.int64), bw, bcoef


def _needs_series(nonzero) -> bool:
    if any(abs(r) < _MIN_ROOT_SEPARATION for r in nonzero):
        return True
    srt = sorted(nonzero)
    return any(b - a < _MIN_ROOT_SEPARATION for a, b in zip(srt, srt[1:]))


def _partial_fraction_plan(K: FourierKernel) -> KernelPlan:
    z0 = K.zero_multiplicity
    rho = [r for r in K.roots if r != 0.0]
    s = K.scale

    # Taylor coefficients of 1/Q at 0, Q = prod (z - rho_j); principal part at 0
    q = np.zeros(max(z0, 1))
    q[0] = 1.0
    for r in rho:
        factor = np.array([-(r ** -(l + 1)) for l in range(len(q))])
        q = np.convolve(q, factor)[: len(q)]
    degrees = list(range(1, z0 + 1))
    weights = [s * q[z0 - p] for p in degrees]

    const = 0.0
    erate, eshift, ew = [], [], []
    for j, r in enumerate(rho):
        denom = r**z0
        for i, ri in enumerate(rho):
            if i != j:
                denom *= r - ri
        amp = s / denom
        if z0:
            const += amp / (TWO_PI * r)  # drop the k = 0 term of the Green's function
        # e^{r theta}/(1 - e^{2 pi r}) on (0, 2pi), written without overflow
        if r > 0:
            erate.append(r)
            eshift.append(-TWO_PI)
            ew.append(amp / math.expm1(-TWO_PI * r))
        else:
            erate.append(r)
            eshift.append(0.0)
            ew.append(-amp / math.expm1(TWO_PI * r))

    bdeg, bw, bcoef = _bernoulli_rows(degrees, weights)
    return KernelPlan(
        const,
        bdeg,
        bw,
        bcoef,
        np.array(erate, dtype=float),
        np.array(eshift, dtype=float),
        np.array(ew, dtype=float),
        np.zeros(0, dtype=complex),
    )


def _complete_homogeneous(roots, order):
    h = np.zeros(order + 1)
    h[0] = 1.0
    for r in roots:
        for j in range(1, order + 1):
            h[j] += r * h[j - 1]
    return h


def _series_plan(K: FourierKernel, tol: float) -> KernelPlan:
    """Subtract the Bernoulli asymptotics of ``1/P(ik)`` and sum the remainder."""
    m = K.order
    rho = max(abs(r) for r in K.roots)
    J = max(_SUBTRACTION_ORDER - m, 3 - m, 0)
    if rho > 10.0:
        # large roots make the subtracted terms cancel badly
        J = max(min(J, int(4.0 / math.log10(rho))), 3 - m, 0)
    h = _complete_homogeneous(K.roots, J)
    degrees = [m + j for j in range(J + 1)]
    bdeg, bw, bcoef = _bernoulli_rows(degrees, [K.scale * hj for hj in h])

    D = m + J
    N = max(math.ceil(2 * rho), 8)
    while True:
        w0 = rho / (N + 1)
        g, i = 0.0, 0
        while True:
            term = math.comb(i + J + m, m - 1) * w0**i
            g += term
            if term < 1e-18 * g or i > 10_000:
                break
            i += 1
        bound = abs(K.scale) / math.pi * g * rho ** (J + 1) * N ** (-D) / D
        if bound <= tol:
            break
        N *= 2
        if N > _MAX_TERMS:
            raise ValueError(f"kernel {K} needs more than {_MAX_TERMS} terms at tol={tol}")

    k = np.arange(1, N + 1)
    z = 1j * k
    inv_p = 1.0 / np.prod(z[:, None] - np.array(K.roots)[None, :], axis=1)
    asym = sum(h[j] * z ** (-(m + j)) for j in range(J + 1))
    corr = 2.0 * K.scale / TWO_PI * (inv_p - asym)
    const = 0.0 if K.zero_multiplicity else K.a0.real
    empty = np.zeros(0)
    return KernelPlan(const, bdeg, bw, bcoef, empty, empty, empty, corr.astype(complex))


def _quantize_tol(tol: float) -> float:
    return 10.0 ** math.floor(math.log10(tol))


@functools.lru_cache(maxsize=256)
def _cached_plan(K: FourierKernel, tol: float) -> KernelPlan:
    nonzero = [r for r in K.roots if r != 0.0]
    if not nonzero or (len(set(nonzero)) == len(nonzero) and not _needs_series(nonzero)):
        return _partial_fraction_plan(K)
    return _series_plan(K, tol)


def kernel_plan(K: FourierKernel, tol: float = 1e-14) -> KernelPlan:
    return _cached_plan(K, _quantize_tol(min(tol, 1e-12)))


@njit(cache=True)
def plan_value(x, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    two_pi = 2.0 * np.pi
    t = x / two_pi
    t -= np.floor(t)
    if t >= 1.0:
        t = 0.0
    v = const
    for j in range(bdeg.shape[0]):
        d = bdeg[j]
        if d == 1 and t == 0.0:
            continue
        acc = 0.0
        for c in bcoef[j]:
            acc = acc * t + c
        v += bw[j] * acc
    theta = t * two_pi
    for j in range(erate.shape[0]):
        if t == 0.0:
            lo = np.exp(erate[j] * eshift[j])
            hi = np.exp(erate[j] * (two_pi + eshift[j]))
            v += ew[j] * 0.5 * (lo + hi)
        else:
            v += ew[j] * np.exp(erate[j] * (theta + eshift[j]))
    n = corr.shape[0]
    if n:
        step = np.cos(theta) + 1j * np.sin(theta)
        w = step
        for k in range(n):
            v += (corr[k] * w).real
            w *= step
    return v


@njit(cache=True)
def plan_values(xs, const, bdeg, bw, bcoef, erate, eshift, ew, corr):
    # coefficient-outer Horner so the per-point loops vectorise
    two_pi = 2.0 * np.pi
    n = xs.shape[0]
    t = np.empty(n)
    for i in range(n):
        ti = xs[i] / two_pi
        t[i] = ti - np.floor(ti)
    for i in range(n):
        if t[i] >= 1.0:
            t[i] = 0.0
    out = np.full(n, const)
    acc = np.empty(n)
    for j in range(bdeg.shape[0]):
        row = bcoef[j]
        acc[:] = row[0]
        for m in range(1, row.shape[0]):
            c = row[m]
            for i in range(n):
                acc[i] = acc[i] * t[i] + c
        w = bw[j]
        for i in range(n):
            out[i] += w * acc[i]
        if bdeg[j] == 1:
            for i in range(n):
                if t[i] == 0.0:
                    out[i] -= w * row[row.shape[0] - 1]
    for j in range(erate.shape[0]):
        lo = np.exp(erate[j] * eshift[j])
        hi = np.exp(erate[j] * (two_pi + eshift[j]))
        r = erate[j]
        sh = eshift[j]
        a = ew[j]
        for i in range(n):
            out[i] += a * np.exp(r * (t[i] * two_pi + sh))
        for i in range(n):
            if t[i] == 0.0:
                out[i] += a * (0.5 * (lo + hi) - lo)
    if corr.shape[0]:
        for i in range(n):
            theta = t[i] * two_pi
            step = np.cos(theta) + 1j * np.sin(theta)
            w = step
            s = 0.0
            for k in range(corr.shape[0]):
                s += (corr[k] * w).real
                w *= step
            out[i] += s
    return out


def eval_kernel(K: FourierKernel, x, tol: float = 1e-10):
    """Kernel value(s) at ``x`` to absolute accuracy ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    plan = kernel_plan(K, tol)
    out = plan_values(np.ascontiguousarray(arr.ravel()), *plan).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# --- truncated-series reference ----------------------------------------------


def truncation_index(K: FourierKernel, tol: float) -> int:
    """Smallest ``N`` with ``2 C sum_{k>N} k^-d <= tol`` via the integral bound."""
    d = K.decay_order
    if d < 2:
        raise ValueError("series of decay order 1 converges only conditionally")
    if not tol > 0:
        raise ValueError("tol must be positive")
    C = K.decay_constant
    return max(1, math.ceil((2 * C / ((d - 1) * tol)) ** (1.0 / (d - 1))))


def kernel_series(K: FourierKernel, x, N: int) -> np.ndarray:
    """Complex partial sum ``sum'_{|k|<=N} a_k e^{ikx}`` (no symmetrisation)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    chunk = max(1, (1 << 21) // x.size)
    total = np.zeros(x.shape, dtype=complex)
    a0 = K.coefficient(0)
    total += a0
    for start in range(1, N + 1, chunk):
        k = np.arange(start, min(start + chunk, N + 1))
        ak = K.coefficients(k)
        amk = K.coefficients(-k)
        ph = np.exp(1j * np.outer(x, k))
        total += ph @ ak + np.conj(ph) @ amk
    return total
