"""Interval quadrature functionals and the class members they act on."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .kernels import TWO_PI, FourierKernel, eval_kernel


class InfeasibleQuadratureError(ValueError):
    """Raised when knots, weights and half-width violate the separation constraints."""


@dataclass(frozen=True)
class IntervalQuadrature:
    """``q(f) = sum_k c_k * mean of f over (x_k - h, x_k + h)``.

    Knots are reduced to ``[0, 2pi)`` and sorted on construction, with the
    weights permuted alongside.  ``h = 0`` denotes the point rule
    ``sum_k c_k f(x_k)``.  Construction does not check feasibility; use
    :func:`validate` or :func:`check_quadrature`.
    """

    knots: tuple[float, ...]
    weights: tuple[float, ...]
    h: float = 0.0

    def __post_init__(self):
        x = np.mod(np.asarray(self.knots, dtype=float).ravel(), TWO_PI)
        x[x >= TWO_PI] = 0.0
        c = np.asarray(self.weights, dtype=float).ravel()
        if x.shape != c.shape:
            raise ValueError(f"{x.size} knots but {c.size} weights")
        order = np.argsort(x, kind="stable")
        object.__setattr__(self, "knots", tuple(float(v) for v in x[order]))
        object.__setattr__(self, "weights", tuple(float(v) for v in c[order]))
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self) -> int:
        return len(self.knots)

    @property
    def knot_array(self) -> np.ndarray:
        return np.array(self.knots)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.weights)

    def weight_sum(self) -> float:
        return math.fsum(self.weights)

    def shifted(self, tau: float) -> "IntervalQuadrature":
        return IntervalQuadrature(tuple(x + tau for x in self.knots), self.weights, self.h)

    def with_weights(self, weights) -> "IntervalQuadrature":
        return IntervalQuadrature(self.knots, tuple(weights), self.h)

    def gaps(self) -> np.ndarray:
        """Cyclic knot spacings ``x_{k+1} - x_k``, last one wrapping around."""
        x = self.knot_array
        return np.diff(np.append(x, x[0] + TWO_PI))

    def to_dict(self) -> dict:
        return {"n": self.n, "h": self.h, "knots": list(self.knots), "weights": list(self.weights)}

    def to_json(self) -> str:
        # repr of a float is its shortest exact round-trip form
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "IntervalQuadrature":
        if not isinstance(data, dict):
            raise ValueError("quadrature JSON must be an object")
        missing = {"n", "h", "knots", "weights"} - set(data)
        if missing:
            raise ValueError(f"quadrature JSON missing keys: {sorted(missing)}")
        n, h, knots, weights = data["n"], data["h"], data["knots"], data["weights"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError("'n' must be a positive integer")
        if isinstance(h, bool) or not isinstance(h, (int, float)):
            raise ValueError("'h' must be a number")
        for name, arr in (("knots", knots), ("weights", weights)):
            if not isinstance(arr, list) or len(arr) != n:
                raise ValueError(f"'{name}' must be a list of length n={n}")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in arr):
                raise ValueError(f"'{name}' entries must be numbers")
        return cls(tuple(knots), tuple(weights), float(h))

    @classmethod
    def from_json(cls, text: str) -> "IntervalQuadrature":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(q: IntervalQuadrature) -> ValidationReport:
    """Check the feasibility constraints, naming the first one that fails."""
    n, h = q.n, q.h
    if n < 1:
        return ValidationReport(False, "n must be at least 1")
    if not math.isfinite(h) or h < 0:
        return ValidationReport(False, "h must satisfy 0 <= h < pi/n")
    if not h < math.pi / n:
        return ValidationReport(False, f"h must satisfy 0 <= h < pi/n (h={h!r}, pi/n={math.pi / n!r})")
    if not all(math.isfinite(c) for c in q.weights):
        return ValidationReport(False, "weights must be finite")
    try:
        total = q.weight_sum()
    except OverflowError:
        total = math.inf
    if not math.isfinite(total):
        return ValidationReport(False, "weight sum must be finite")
    x = q.knots
    for k in range(n - 1):
        if not x[k] + h < x[k + 1] - h:
            return ValidationReport(
                False, f"x_{k + 1} + h < x_{k + 2} - h fails ({x[k]!r} + {h!r} >= {x[k + 1]!r} - {h!r})"
            )
    if not x[-1] + h < x[0] + TWO_PI - h:
        return ValidationReport(False, f"x_{n} + h < x_1 + 2pi - h fails")
    return ValidationReport(True)


def check_quadrature(q: IntervalQuadrature) -> IntervalQuadrature:
    report = validate(q)
    if not report:
        raise InfeasibleQuadratureError(report.violation)
    return q


def check_half_width(n: int, h: float) -> None:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not (math.isfinite(h) and 0 <= h < math.pi / n):
        raise ValueError(f"h must satisfy 0 <= h < pi/n (got h={h!r}, n={n})")


def equidistant(n: int, h: float, lam: float) -> IntervalQuadrature:
    """Knots ``2 pi k / n`` for ``k = 1..n``, every weight equal to ``lam``."""
    check_half_width(n, h)
    knots = tuple(TWO_PI * k / n for k in range(1, n + 1))
    return IntervalQuadrature(knots, (float(lam),) * n, h)


def step_function(q: IntervalQuadrature, t):
    """``H(q; t) = (1/2h) sum_k c_k chi_(x_k - h, x_k + h)(t)``, midpoint value on edges."""
    if q.h <= 0:
        raise ValueError("step function needs h > 0")
    t = np.asarray(t, dtype=float)
    d = np.abs(np.mod(t[..., None] - q.knot_array + math.pi, TWO_PI) - math.pi)
    c = q.weight_array / (2 * q.h)
    val = np.where(d < q.h, c, np.where(d == q.h, 0.5 * c, 0.0)).sum(axis=-1)
    return float(val) if val.ndim == 0 else val


def apply(q: IntervalQuadrature, f, tol: float = 1e-10, points=None) -> float:
    """Evaluate ``q(f)`` with adaptive quadrature on each window.

    ``points`` lists places (taken modulo ``2 pi``) where ``f`` is not smooth;
    each window is split there.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if q.h == 0:
        vals = [c * float(f(x)) for x, c in zip(q.knots, q.weights)]
    else:
        scale = max(1.0, max(abs(c) for c in q.weights))
        epsabs = tol / (q.n * scale)
        marks = np.mod(np.asarray(points if points is not None else [], dtype=float), TWO_PI)
        vals = []
        for x, c in zip(q.knots, q.weights):
            a, b = x - q.h, x + q.h
            inner = np.concatenate([marks - TWO_PI, marks, marks + TWO_PI])
            inner = np.unique(inner[(inner > a) & (inner < b)])
            avg, _ = integrate.quad(f, a, b, points=inner if inner.size else None,
                                    epsabs=epsabs, epsrel=0, limit=200 + 50 * inner.size)
            vals.append(c * avg / (2 * q.h))
    if not all(math.isfinite(v) for v in vals):
        raise FloatingPointError("f produced a non-finite value")
    return math.fsum(vals)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Periodic function equal to ``values[i]`` on ``(lo_i, hi_i)`` and zero elsewhere.

    Intervals must be disjoint modulo ``2 pi`` and each no longer than a period.
    """

    intervals: tuple[tuple[float, float], ...]
    values: tuple[float, ...]

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        vals = tuple(float(v) for v in self.values)
        if len(iv) != len(vals):
            raise ValueError("need one value per interval")
        if any(not (b > a) for a, b in iv):
            raise ValueError("intervals must have hi > lo")
        if sum(b - a for a, b in iv) > TWO_PI * (1 + 1e-12):
            raise ValueError("intervals cover more than one period")
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls(((0.0, TWO_PI),), (value,))

    def l1_norm(self) -> float:
        return math.fsum(abs(v) * (b - a) for (a, b), v in zip(self.intervals, self.values))

    def integral(self) -> float:
        return math.fsum(v * (b - a) for (a, b), v in zip(self.intervals, self.values))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for (a, b), v in zip(self.intervals, self.values):
            s = np.mod(t - a, TWO_PI)
            out = out + np.where(s < b - a, v, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConvolutionFunction:
    """Class member ``f = a*mu(K) + K * phi`` with ``||phi||_1 <= 1``."""

    kernel: FourierKernel
    phi: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant((), ()))
    a: float = 0.0

    def __post_init__(self):
        if self.phi.l1_norm() > 1 + 1e-12:
            raise ValueError(f"phi has L1 norm {self.phi.l1_norm()} > 1")
        if self.kernel.mu == 1 and abs(self.phi.integral()) > 1e-12:
            raise ValueError("phi must have zero mean when the kernel has zero mean")

    def __call__(self, x, tol: float = 1e-12):
        return eval_convolution(self, x, tol)


def convolve(K: FourierKernel, phi: PiecewiseConstant, x, tol: float = 1e-12):
    """``(K * phi)(x) = integral K(x - t) phi(t) dt`` for any piecewise-constant ``phi``.

    Each piece contributes ``a0 (beta - alpha) + K1(x - alpha) - K1(x - beta)``
    with ``K1`` the periodic primitive, so no class constraint is needed here.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    prim = K.antiderivative()
    a0 = K.a0.real
    out = np.zeros(x.shape)
    for (lo, hi), v in zip(phi.intervals, phi.values):
        out = out + v * (a0 * (hi - lo) + eval_kernel(prim, x - lo, tol) - eval_kernel(prim, x - hi, tol))
    return float(out) if out.ndim == 0 else out


def eval_convolution(f: ConvolutionFunction, x, tol: float = 1e-12):
    """``a mu + (K * phi)(x)`` for a class member."""
    out = f.a * f.kernel.mu + convolve(f.kernel, f.phi, x, tol)
    return float(out) if np.ndim(out) == 0 else out
