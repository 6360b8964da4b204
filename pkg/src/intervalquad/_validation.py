"""Argument checks shared by the estimator and the command line."""
from __future__ import annotations

import math
import numbers

from .error_profile import grid_floor
from .kernels import FourierKernel, parse_kernel
from .quadrature import check_half_width


def check_kernel(kernel) -> FourierKernel:
    """Accept a :class:`FourierKernel` or a spec string such as ``"bernoulli:2"``."""
    if isinstance(kernel, FourierKernel):
        return kernel
    if isinstance(kernel, str):
        return parse_kernel(kernel)
    raise TypeError(f"kernel must be a FourierKernel or a spec string, got {type(kernel).__name__}")


def check_n_h(n, h) -> tuple[int, float]:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if isinstance(h, bool) or not isinstance(h, numbers.Real):
        raise ValueError(f"h must be a real number, got {h!r}")
    check_half_width(int(n), float(h))
    return int(n), float(h)


def check_tol(tol) -> float:
    if isinstance(tol, bool) or not isinstance(tol, numbers.Real) or not (0 < tol < 1):
        raise ValueError(f"tol must lie in (0, 1), got {tol!r}")
    return float(tol)


def check_grid_size(grid_size, n: int) -> int:
    """Resolve ``None`` to the default grid and reject grids below it."""
    floor = grid_floor(n)
    if grid_size is None:
        return floor
    if isinstance(grid_size, bool) or not isinstance(grid_size, numbers.Integral):
        raise ValueError(f"grid_size must be an integer, got {grid_size!r}")
    if grid_size < floor:
        raise ValueError(f"grid_size must be at least max(4096, 512 n) = {floor}, got {grid_size}")
    return int(grid_size)


def check_fraction(frac) -> float:
    """Half-width given as a fraction of ``pi/n``."""
    if not (math.isfinite(frac) and 0 <= frac < 1):
        raise ValueError(f"h must satisfy 0 <= h < pi/n (h-frac {frac!r} not in [0, 1))")
    return float(frac)
