"""Natural cubic spline basis on a scalar covariate.

Truncated-power construction with the natural (linear-beyond-boundary)
constraint absorbed into the basis. Knots are placed at empirical
quantiles of the fitting sample; evaluation maps x affinely onto [0, 1]
first, so the basis is exactly invariant to affine changes of scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = ["SplineSpec", "fit_spline_spec", "eval_basis", "basis_matrix"]


@dataclass(frozen=True)
class SplineSpec:
    """Frozen knot layout for a natural cubic spline basis.

    Attributes
    ----------
    boundary_knots : tuple of float
        (lo, hi) with lo < hi; the basis is linear outside this interval.
    interior_knots : tuple of float
        Strictly increasing, strictly inside the boundary interval.
    df : int
        Number of basis columns returned by eval_basis.
    include_intercept : bool
        Whether the first column is the constant 1.
    """

    boundary_knots: tuple
    interior_knots: tuple
    df: int
    include_intercept: bool = False

    def __post_init__(self) -> None:
        lo, hi = self.boundary_knots
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise DomainError("boundary knots must be finite with lo < hi")
        inter = np.asarray(self.interior_knots, dtype=float)
        if inter.size:
            if np.any(~np.isfinite(inter)):
                raise DomainError("interior knots must be finite")
            if np.any(np.diff(inter) <= 0):
                raise DomainError("interior knots must be strictly increasing")
            if inter[0] <= lo or inter[-1] >= hi:
                raise DomainError("interior knots must lie strictly inside the boundary")
        expected = inter.size + 1 + (1 if self.include_intercept else 0)
        if self.df != expected:
            raise DomainError(
                f"df {self.df} inconsistent with {inter.size} interior knots"
            )


def fit_spline_spec(xs, df: int, include_intercept: bool = False) -> SplineSpec:
    """Choose knots for a df-column natural cubic basis from a sample.

    Boundary knots sit at min(xs) and max(xs); interior knots at the
    i/(n_interior + 1) empirical quantiles (linear interpolation). The
    layout needs df - 1 interior knots without an intercept column, one
    fewer with it.

    Raises
    ------
    DomainError
        If xs has too few distinct values to separate the knots.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise DomainError("xs must be a non-empty one-dimensional array")
    if not np.all(np.isfinite(xs)):
        raise DomainError("xs must be finite")
    if not isinstance(df, (int, np.integer)) or df < 1:
        raise DomainError("df must be a positive integer")
    n_interior = df - 1 - (1 if include_intercept else 0)
    if n_interior < 0:
        raise DomainError("df too small for an intercept column")
    distinct = np.unique(xs)
    if distinct.size < max(df, 2):
        raise DomainError(
            f"need at least {max(df, 2)} distinct values for df={df}, got {distinct.size}"
        )
    lo, hi = float(distinct[0]), float(distinct[-1])
    if n_interior:
        probs = np.arange(1, n_interior + 1) / (n_interior + 1)
        interior = np.quantile(xs, probs)
        if interior[0] <= lo or interior[-1] >= hi or np.any(np.diff(interior) <= 0):
            raise DomainError("sample too concentrated: quantile knots collide")
    else:
        interior = np.empty(0)
    return SplineSpec(
        boundary_knots=(lo, hi),
        interior_knots=tuple(float(t) for t in interior),
        df=int(df),
        include_intercept=bool(include_intercept),
    )


def _natural_columns(t: np.ndarray, knots: np.ndarray) -> np.ndarray:
    # Columns: t, then d_k(t) - d_{K-1}(t) for k = 1..K-2, where
    # d_k(t) = [(t - u_k)^3_+ - (t - u_K)^3_+] / (u_K - u_k).
    # Each column has zero second derivative outside [u_1, u_K].
    kk = knots.shape[0]
    cube = np.clip(t[:, None] - knots[None, :], 0.0, None) ** 3
    d = (cube[:, : kk - 1] - cube[:, kk - 1 : kk]) / (knots[kk - 1] - knots[: kk - 1])
    cols = [t] + [d[:, k] - d[:, kk - 2] for k in range(kk - 2)]
    return np.stack(cols, axis=1)


def basis_matrix(spec: SplineSpec, xs) -> np.ndarray:
    """Evaluate the basis at an array of points, one row per point."""
    xs = np.asarray(xs, dtype=float)
    flat = xs.reshape(-1)
    if not np.all(np.isfinite(flat)):
        raise DomainError("evaluation points must be finite")
    lo, hi = spec.boundary_knots
    t = (flat - lo) / (hi - lo)
    knots = np.concatenate(
        [[0.0], (np.asarray(spec.interior_knots) - lo) / (hi - lo), [1.0]]
    )
    cols = _natural_columns(t, knots)
    if spec.include_intercept:
        cols = np.hstack([np.ones((cols.shape[0], 1)), cols])
    return cols.reshape(xs.shape + (spec.df,))


def eval_basis(spec: SplineSpec, x: float) -> np.ndarray:
    """Basis vector of length spec.df at a single point."""
    return basis_matrix(spec, np.array([float(x)]))[0]
