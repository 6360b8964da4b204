"""Estimator-style wrapper around the optimal interval formula."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid_size, check_kernel, check_n_h, check_tol
from .optimal import optimal_error
from .quadrature import apply


class OptimalIntervalQuadrature(TransformerMixin, BaseEstimator):
    """Optimal ``n``-window interval formula for a kernel class.

    Parameters
    ----------
    kernel : str or FourierKernel
        Kernel spec such as ``"bernoulli:2"`` or ``"poly:1,-1"``.
    n : int
        Number of windows.
    h : float
        Common half-width, ``0 <= h < pi/n``.
    tol : float
        Accuracy target for kernel evaluation.
    grid_size : int, optional
        Profile grid; defaults to ``max(4096, 512 n)``.

    Attributes
    ----------
    report_ : OptimalReport
    quadrature_ : IntervalQuadrature
    knots_, weights_ : ndarray
    lambda_star_, value_ : float

    Examples
    --------
    >>> est = OptimalIntervalQuadrature("bernoulli:1", n=2, h=0.0).fit()
    >>> round(est.value_, 12) == round(np.pi / 2, 12)
    True
    """

    def __init__(self, kernel="bernoulli:2", n=4, h=0.0, tol=1e-10, grid_size=None):
        self.kernel = kernel
        self.n = n
        self.h = h
        self.tol = tol
        self.grid_size = grid_size

    def fit(self, X=None, y=None):
        """Compute the optimal formula; ``X`` and ``y`` are ignored."""
        K = check_kernel(self.kernel)
        n, h = check_n_h(self.n, self.h)
        tol = check_tol(self.tol)
        grid = check_grid_size(self.grid_size, n)
        self.report_ = optimal_error(K, n, h, tol, grid)
        self.quadrature_ = self.report_.quadrature
        self.knots_ = self.quadrature_.knot_array
        self.weights_ = self.quadrature_.weight_array
        self.lambda_star_ = self.report_.lambda_star
        self.value_ = self.report_.value
        return self

    def transform(self, X):
        """Apply the fitted formula to each callable in ``X``.

        Returns an array of shape ``(len(X), 1)``.
        """
        check_is_fitted(self, "report_")
        if callable(X):
            X = [X]
        funcs = list(X)
        if not all(callable(f) for f in funcs):
            raise TypeError("transform expects callables of one variable")
        tol = check_tol(self.tol)
        return np.array([[apply(self.quadrature_, f, tol)] for f in funcs])

    def score(self, X=None, y=None):
        """Negative worst-case error, so larger is better."""
        check_is_fitted(self, "report_")
        return -self.value_
