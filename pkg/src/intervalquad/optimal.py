"""The optimal interval formula: equidistant knots with one common weight."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .error_profile import ErrorProfile, grid_floor, profile, worst_case_profile
from .kernels import TWO_PI, FourierKernel, eval_kernel, kernel_mean
from .quadrature import IntervalQuadrature, check_half_width, equidistant


@dataclass(frozen=True)
class OptimalReport:
    kernel: FourierKernel
    n: int
    h: float
    lambda_star: float
    value: float
    profile: ErrorProfile
    quadrature: IntervalQuadrature

    @property
    def equioscillation_residual(self) -> float:
        return self.profile.equioscillation_residual

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.spec,
            "n": self.n,
            "h": self.h,
            "lambda_star": self.lambda_star,
            "value": self.value,
            "equioscillation_residual": self.equioscillation_residual,
            "profile": self.profile.to_dict(),
        }


def check_constant_sign(K: FourierKernel, grid_size: int = 4096) -> int:
    """Return the sign of ``K`` if it keeps one sign on a uniform grid, else raise."""
    vals = eval_kernel(K, TWO_PI * np.arange(grid_size) / grid_size, 1e-12)
    if np.all(vals > 0):
        return 1
    if np.all(vals < 0):
        return -1
    raise ValueError(f"kernel {K} changes sign; the common-weight solve needs a one-signed kernel")


def solve_lambda_star(K: FourierKernel, n: int, h: float, tol: float = 1e-10,
                      grid_size: int | None = None) -> float:
    """Common weight making ``M(q_{n,h,lambda})`` equioscillate about zero.

    ``M = int K - lambda psi`` with ``psi(t) = int K(u - t) H(q_{n,h,1}; u) du``,
    so ``max M + min M = 0`` gives ``lambda = 2 int K / (psi_max + psi_min)``.
    The sign of ``lambda`` follows from the data; no sign flip of ``K`` is made.
    """
    if K.mu != 0:
        raise ValueError("lambda* is only defined for kernels with nonzero mean")
    check_half_width(n, h)
    check_constant_sign(K)
    mean = kernel_mean(K)
    unit = profile(K, equidistant(n, h, 1.0), grid_size, tol)
    psi_max = mean - unit.min_value
    psi_min = mean - unit.max_value
    return 2.0 * mean / (psi_max + psi_min)


def optimal_error(K: FourierKernel, n: int, h: float, tol: float = 1e-10,
                  grid_size: int | None = None) -> OptimalReport:
    """Smallest worst-case error over all interval formulas with ``n`` windows of half-width ``h``."""
    check_half_width(n, h)
    if grid_size is None:
        grid_size = grid_floor(n)
    if K.mu == 1:
        lam = TWO_PI / n
    else:
        lam = solve_lambda_star(K, n, h, tol, grid_size)
    q = equidistant(n, h, lam)
    prof = worst_case_profile(K, q, grid_size, tol)
    return OptimalReport(K, n, float(h), lam, prof.value, prof, q)


@dataclass(frozen=True)
class RectangleLimit:
    """Optimal values along ``h -> 0`` ending with the point rule ``h = 0``."""

    rows: list[tuple[float, float]] = field(default_factory=list)

    @property
    def point_value(self) -> float:
        return self.rows[-1][1]

    @property
    def limit_gap(self) -> float:
        """Distance from the smallest positive ``h`` to the point-rule value."""
        positive = [(h, v) for h, v in self.rows if h > 0]
        if not positive:
            return 0.0
        return abs(min(positive)[1] - self.point_value)

    @property
    def converged(self) -> bool:
        # only judged once some h <= 1e-3 has been computed
        positive = [h for h, _ in self.rows if h > 0]
        return not positive or min(positive) > 1e-3 or self.limit_gap <= 1e-4


def rectangle_limit(K: FourierKernel, n: int, h_sequence, tol: float = 1e-10,
                    grid_size: int | None = None) -> RectangleLimit:
    hs = [float(h) for h in h_sequence]
    for h in hs:
        check_half_width(n, h)
    if not hs or hs[-1] != 0.0:
        hs.append(0.0)
    return RectangleLimit([(h, optimal_error(K, n, h, tol, grid_size).value) for h in hs])

