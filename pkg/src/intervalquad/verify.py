"""Numerical checks of optimality: random and searched competitors, near-extremal
class members, and the sign-change counter."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .error_profile import profile, residual, worst_case_error
from .kernels import TWO_PI, FourierKernel
from .optimal import optimal_error
from .quadrature import (
    ConvolutionFunction,
    IntervalQuadrature,
    PiecewiseConstant,
    check_half_width,
    eval_convolution,
)

RATIO_TOL = 1e-9
GAP_TOL = 1e-6
# keeps every decoded gap strictly wider than 2h
_SLACK_FLOOR = 1e-9


def _fold(z):
    """Triangle wave mapping the real line onto [0, 1]; identity on [0, 1]."""
    return 1.0 - np.abs(np.mod(z, 2.0) - 1.0)


@dataclass(frozen=True)
class FeasibleParametrization:
    """Unconstrained coordinates for formulas with ``n`` windows of half-width ``h``.

    Coordinates are ``n`` gap slacks followed by the free weights: all ``n`` when
    ``mu = 0``, the first ``n - 1`` when ``mu = 1`` (the last one closes the sum
    to ``2 pi``).  Gap ``k`` is ``2h + w_k (2 pi - 2 n h)`` with ``w`` the
    normalised slacks.
    """

    n: int
    h: float
    mu: int

    def __post_init__(self):
        check_half_width(self.n, self.h)

    @property
    def n_weights(self) -> int:
        return self.n - self.mu

    @property
    def dim(self) -> int:
        return self.n + self.n_weights

    def decode(self, z, offset: float = 0.0) -> IntervalQuadrature:
        z = np.asarray(z, dtype=float)
        s = _fold(z[: self.n]) + _SLACK_FLOOR
        gaps = 2 * self.h + s / s.sum() * (TWO_PI - 2 * self.n * self.h)
        knots = offset + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
        free = z[self.n :]
        if self.mu == 1:
            weights = np.append(free, TWO_PI - math.fsum(free))
        else:
            weights = free
        return IntervalQuadrature(tuple(knots), tuple(weights), self.h)

    def equidistant_point(self, lam: float) -> np.ndarray:
        return np.concatenate([np.full(self.n, 0.5), np.full(self.n_weights, lam)])

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        slacks = rng.uniform(0.0, 1.0, self.n)
        bound = 4 * math.pi / self.n
        return np.concatenate([slacks, rng.uniform(-bound, bound, self.n_weights)])


def random_feasible(n: int, h: float, mu: int, seed: int) -> IntervalQuadrature:
    """Random formula from ``Q_{n,h}``, normalised to ``sum c = 2 pi`` when ``mu = 1``."""
    rng = np.random.default_rng(seed)
    par = FeasibleParametrization(n, h, mu)
    z = par.random_point(rng)
    return par.decode(z, offset=rng.uniform(0.0, TWO_PI))


def anchored(q: IntervalQuadrature) -> IntervalQuadrature:
    """Rotate so the first knot sits at zero."""
    return q.shifted(-q.knots[0])


@dataclass
class PerturbationReport:
    optimal_value: float
    min_ratio: float
    trials: int
    seed: int
    failures: list[IntervalQuadrature] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": "perturb",
            "optimal_value": self.optimal_value,
            "min_ratio": self.min_ratio,
            "trials": self.trials,
            "seed": self.seed,
            "failures": [q.to_dict() for q in self.failures],
        }


def perturbation_test(K: FourierKernel, n: int, h: float, trials: int, seed: int = 0,
                      tol: float = 1e-10, grid_size: int | None = None,
                      quadratures=None) -> PerturbationReport:
    """Compare random feasible formulas against the optimum.

    Trial ``i`` draws from a generator seeded with ``seed + i``.  Passing
    ``quadratures`` replaces the random draws.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    opt = optimal_error(K, n, h, tol, grid_size).value
    if quadratures is None:
        quadratures = [random_feasible(n, h, K.mu, seed + i) for i in range(trials)]
    ratios = [worst_case_error(K, q, tol, grid_size) / opt for q in quadratures]
    failures = [q for q, r in zip(quadratures, ratios) if r < 1 - RATIO_TOL]
    return PerturbationReport(opt, min(ratios), len(quadratures), seed, failures, ratios)


@dataclass
class SearchReport:
    optimal_value: float
    best_value: float
    best_q: IntervalQuadrature
    starts: int
    seed: int
    start_values: list[float] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.best_value - self.optimal_value

    def to_dict(self) -> dict:
        return {
            "mode": "search",
            "optimal_value": self.optimal_value,
            "gap": self.gap,
            "best_value": self.best_value,
            "best_quadrature": self.best_q.to_dict(),
            "starts": self.starts,
            "seed": self.seed,
            "failures": [self.best_q.to_dict()] if self.gap < -GAP_TOL else [],
        }


def local_search(K: FourierKernel, n: int, h: float, starts: int, seed: int = 0,
                 tol: float = 1e-10, grid_size: int | None = None,
                 maxiter: int = 2000, include_equidistant: bool = True) -> SearchReport:
    """Nelder-Mead descent on the worst-case error from random feasible starts.

    Start ``i`` uses a generator seeded with ``seed + i``; the equidistant
    optimum is added as one more start unless ``include_equidistant`` is false.
    """
    if starts < 1:
        raise ValueError("starts must be at least 1")
    opt = optimal_error(K, n, h, tol, grid_size)
    par = FeasibleParametrization(n, h, K.mu)

    def objective(z):
        return worst_case_error(K, par.decode(z), tol, grid_size)

    points = [par.random_point(np.random.default_rng(seed + i)) for i in range(starts)]
    if include_equidistant:
        points.insert(0, par.equidistant_point(opt.lambda_star))

    best_value, best_z, values = math.inf, None, []
    for z0 in points:
        res = optimize.minimize(
            objective, z0, method="Nelder-Mead",
            options={"maxiter": maxiter, "xatol": 1e-12, "fatol": math.inf},
        )
        # the simplex keeps its start vertex, so res.fun never exceeds objective(z0)
        values.append(float(res.fun))
        if res.fun < best_value:
            best_value, best_z = float(res.fun), res.x
    return SearchReport(opt.value, best_value, anchored(par.decode(best_z)), starts, seed, values)


def _box(u: float, delta: float) -> tuple[float, float]:
    u = math.remainder(u, TWO_PI)
    return u - delta, u + delta


def near_extremal(K: FourierKernel, q: IntervalQuadrature, delta: float,
                  tol: float = 1e-10, grid_size: int | None = None) -> ConvolutionFunction:
    """Class member whose error nearly attains the worst case for ``q``.

    Zero-mean kernels get a pair of opposite boxes at the extrema of ``M``;
    otherwise a single signed box sits at the extremum of ``|M|``.
    """
    if not 0 < delta < 0.1:
        raise ValueError("delta must lie in (0, 0.1)")
    prof = profile(K, q, grid_size, tol)
    if K.mu == 1:
        up, down = prof.max_point, prof.min_point
        sep = abs(math.remainder(up - down, TWO_PI))
        if sep < 2 * delta:
            raise ValueError(f"extrema {sep:.3g} apart; boxes of half-width {delta} would overlap")
        boxes = (_box(up, delta), _box(down, delta))
        # heights from the rounded widths keep each box area at exactly 1/2
        values = (0.5 / (boxes[0][1] - boxes[0][0]), -0.5 / (boxes[1][1] - boxes[1][0]))
        phi = PiecewiseConstant(boxes, values)
    else:
        if abs(prof.max_value) >= abs(prof.min_value):
            u, sign = prof.max_point, 1.0
        else:
            u, sign = prof.min_point, -1.0
        lo, hi = _box(u, delta)
        phi = PiecewiseConstant(((lo, hi),), (sign / (hi - lo),))
    return ConvolutionFunction(K, phi, 0.0)


def saturation(K: FourierKernel, q: IntervalQuadrature, delta: float = 1e-3,
               tol: float = 1e-10, grid_size: int | None = None) -> float:
    """``R(f, q) / R(K*F_1, q)`` for the near-extremal ``f``."""
    f = near_extremal(K, q, delta, tol, grid_size)
    return residual(K, q, f) / worst_case_error(K, q, tol, grid_size)


@dataclass
class ExtremalReport:
    optimal_value: float
    saturation: float
    residual: float
    delta: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "mode": "extremal",
            "optimal_value": self.optimal_value,
            "saturation": self.saturation,
            "residual": self.residual,
            "delta": self.delta,
            "seed": self.seed,
            "failures": [],
        }


def extremal_check(K: FourierKernel, n: int, h: float, delta: float = 1e-3, seed: int = 0,
                   tol: float = 1e-10, grid_size: int | None = None) -> ExtremalReport:
    """Saturation ratio of the near-extremal function at the optimal formula."""
    opt = optimal_error(K, n, h, tol, grid_size)
    f = near_extremal(K, opt.quadrature, delta, tol, grid_size)
    r = residual(K, opt.quadrature, f)
    return ExtremalReport(opt.value, r / opt.value, r, delta, seed)


def count_sign_changes(f, grid_size: int = 4096) -> int:
    """Sign changes of a periodic function over one period, sampled on a cyclic grid.

    Samples with ``|f| < 1e-12`` are skipped.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    vals = np.asarray(f(TWO_PI * np.arange(grid_size) / grid_size), dtype=float)
    signs = np.sign(vals[np.abs(vals) >= 1e-12])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs != np.roll(signs, 1)))


def sign_pattern(roots, positive_first: bool = True) -> PiecewiseConstant:
    """Unit-L1 step function alternating sign at the given cyclic roots.

    ``roots`` must be sorted, even in number, inside one period.  The two levels
    are chosen so the mean is zero and the sign pattern is kept.
    """
    roots = np.asarray(roots, dtype=float)
    if roots.size < 2 or roots.size % 2:
        raise ValueError("need an even number (>= 2) of sign changes")
    bounds = np.append(roots, roots[0] + TWO_PI)
    lengths = np.diff(bounds)
    signs = np.where(np.arange(roots.size) % 2 == 0, 1.0, -1.0)
    if not positive_first:
        signs = -signs
    pos = lengths[signs > 0].sum()
    neg = lengths[signs < 0].sum()
    # levels p on positive pieces, -m on negative: p*pos = m*neg, p*pos + m*neg = 1
    p, m = 0.5 / pos, 0.5 / neg
    values = np.where(signs > 0, p, -m)
    return PiecewiseConstant(tuple(zip(bounds[:-1], bounds[1:])), tuple(values))


def random_sign_pattern(changes: int, rng: np.random.Generator) -> PiecewiseConstant:
    """Sign pattern of the trigonometric polynomial ``prod_i sin((t - r_i) / 2)``.

    The ``r_i`` are ``changes`` uniform random roots; the product has degree
    ``changes / 2`` and changes sign exactly at the roots.  Roots closer than
    ``1e-2`` are redrawn so every piece is resolvable on a fine grid.
    """
    if changes < 2 or changes % 2:
        raise ValueError("changes must be even and at least 2")
    while True:
        roots = np.sort(rng.uniform(0.0, TWO_PI, changes))
        spacing = np.diff(np.append(roots, roots[0] + TWO_PI))
        if spacing.min() > 1e-2:
            break
    return sign_pattern(roots, positive_first=bool(rng.integers(2)))


@dataclass
class NuRow:
    label: str
    nu_phi: int
    nu_f: int

    @property
    def ok(self) -> bool:
        return self.nu_f <= self.nu_phi


def nu_table(K: FourierKernel, grid_size: int = 8192) -> list[NuRow]:
    """Sign changes of ``K * phi`` against those of ``phi`` for square waves of 1..4 periods."""
    rows = []
    for j in range(1, 5):
        roots = np.arange(2 * j) * math.pi / j + 0.1
        phi = sign_pattern(roots)
        f = ConvolutionFunction(K, phi, 0.0)
        nu_phi = count_sign_changes(phi, grid_size)
        nu_f = count_sign_changes(lambda x: eval_convolution(f, x), grid_size)
        rows.append(NuRow(f"square wave, {j} period(s)", nu_phi, nu_f))
    return rows
