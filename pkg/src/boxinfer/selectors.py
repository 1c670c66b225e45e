"""Frozen selection algorithms treated as black boxes by the inference
machinery.

Three kinds: a subsample-threshold check on a scalar mean, stability
selection over randomized Lasso paths, and repeated cross-validated Lasso
on half subsamples. Each is a pure function of (spec, data, stream), so
re-running it on perturbed data is exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import DomainError
from .lasso import GramProblem, cv_lambda, lasso_cd, lasso_path
from .stats import CovarianceFactor, SeededStream

__all__ = [
    "SelectorSpec",
    "SelectionOutcome",
    "select",
    "single_component",
    "simple_threshold_select",
    "stability_select",
    "multi_cv_select",
    "multi_cv_single_run",
]


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of one selection run.

    selected holds variable indices; the scalar-threshold kind encodes
    "the data was selected" as {0} and rejection as the empty set.
    per_run_supports keeps the intermediate per-randomization supports for
    diagnostics.
    """

    selected: frozenset
    per_run_supports: tuple | None = None

    @property
    def passed(self) -> bool:
        return bool(self.selected)


def _check_int(name, value, low):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise DomainError(f"{name} must be an integer")
    if value < low:
        raise DomainError(f"{name} must be at least {low}")
    return int(value)


def _check_q(q) -> float:
    q = float(q)
    if not np.isfinite(q) or not 0.0 < q <= 1.0:
        raise DomainError("q must lie in (0, 1]")
    return q


@dataclass(frozen=True)
class SelectorSpec:
    """A selection algorithm with every tuning choice frozen.

    params holds plain scalars (serializable); context holds precomputed
    arrays and factors derived from them and from the observed dataset.
    Build instances through the classmethods, which validate and freeze
    everything the algorithm will ever need.
    """

    kind: str
    params: dict = field(default_factory=dict)
    context: dict = field(default_factory=dict, repr=False)

    @classmethod
    def simple_threshold(cls, m, q, tau, sigma, n, n_s) -> "SelectorSpec":
        m = _check_int("m", m, 1)
        q = _check_q(q)
        n = _check_int("n", n, 1)
        n_s = _check_int("n_s", n_s, 1)
        if n_s > n:
            raise DomainError("subsample size n_s cannot exceed n")
        tau = float(tau)
        sigma = float(sigma)
        if not np.isfinite(tau):
            raise DomainError("tau must be finite")
        if not np.isfinite(sigma) or sigma <= 0:
            raise DomainError("sigma must be positive")
        return cls(
            kind="simple-threshold",
            params={"m": m, "q": q, "tau": tau, "sigma": sigma, "n": n, "n_s": n_s},
        )

    @classmethod
    def stability(cls, m, q, gram, sigma2, lambda_grid) -> "SelectorSpec":
        m = _check_int("m", m, 1)
        q = _check_q(q)
        sigma2 = float(sigma2)
        if not np.isfinite(sigma2) or sigma2 <= 0:
            raise DomainError("sigma2 must be positive")
        gram = np.asarray(gram, dtype=float)
        grid = np.asarray(lambda_grid, dtype=float)
        GramProblem(gram, np.zeros(gram.shape[0]))  # reuse its validation
        if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) >= 0) or np.any(grid <= 0):
            raise DomainError("lambda_grid must be strictly decreasing and positive")
        factor = CovarianceFactor.from_covariance(0.5 * sigma2 * gram)
        return cls(
            kind="stability",
            params={"m": m, "q": q, "sigma2": sigma2},
            context={"gram": gram, "lambda_grid": grid, "noise_factor": factor},
        )

    @classmethod
    def multi_cv(cls, m, q, n_folds, X, y, lambda_grid) -> "SelectorSpec":
        m = _check_int("m", m, 1)
        q = _check_q(q)
        n_folds = _check_int("n_folds", n_folds, 2)
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DomainError("X must be (n, p) with y of length n")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DomainError("X and y must be finite")
        if X.shape[0] // 2 < 2 * n_folds:
            raise DomainError("half subsamples too small for the fold count")
        grid = np.asarray(lambda_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) >= 0) or np.any(grid <= 0):
            raise DomainError("lambda_grid must be strictly decreasing and positive")
        gram = X.T @ X
        try:
            chol = cho_factor(gram)
        except np.linalg.LinAlgError as exc:
            raise DomainError("X'X must be invertible to re-embed perturbed data") from exc
        return cls(
            kind="multi-cv",
            params={"m": m, "q": q, "n_folds": n_folds},
            context={
                "X": X,
                "y": y,
                "xty": X.T @ y,
                "gram_chol": chol,
                "lambda_grid": grid,
            },
        )


def simple_threshold_select(x, m, q, tau, sigma, n, n_s, stream: SeededStream) -> bool:
    """Threshold check repeated over m simulated subsample draws.

    Each draw tests sqrt(n) * x + omega > tau with omega normal of
    standard deviation sigma * sqrt(n / n_s); the data passes when at
    least q * m draws do.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    omega = stream.rng().normal(0.0, sigma * math.sqrt(n / n_s), size=m)
    count = int(np.sum(math.sqrt(n) * x + omega > tau))
    return count >= q * m


def stability_select(data_vector, m, q, gram, sigma2, lambda_grid,
                     stream: SeededStream, noise_factor=None) -> SelectionOutcome:
    """Stability selection over randomized Lasso paths.

    Each of the m randomizations solves a Lasso path on the half-weighted
    statistics (gram / 2, data / 2 + omega) with omega drawn from
    N(0, 0.5 * sigma2 * gram). A variable is selected when its appearance
    frequency reaches q at any penalty on the grid.

    noise_factor optionally carries the precomputed factor of that
    covariance so repeated calls skip the factorization.
    """
    d = np.asarray(data_vector, dtype=float)
    p = gram.shape[0]
    if d.shape != (p,):
        raise DomainError(f"data vector must have length {p}")
    if not np.all(np.isfinite(d)):
        raise DomainError("data vector must be finite")
    if noise_factor is None:
        noise_factor = CovarianceFactor.from_covariance(0.5 * float(sigma2) * gram)
    xi = stream.rng().standard_normal((m, p))
    omegas = xi @ noise_factor.lower_factor.T
    half_gram = 0.5 * gram
    counts = np.zeros((lambda_grid.size, p), dtype=np.int64)
    run_sets = []
    for i in range(m):
        prob = GramProblem(half_gram, 0.5 * d + omegas[i])
        path = lasso_path(prob, lambda_grid)
        active = path.betas != 0.0
        counts += active
        run_sets.append(frozenset(np.flatnonzero(active.any(axis=0)).tolist()))
    hits = (counts >= q * m).any(axis=0)
    return SelectionOutcome(
        selected=frozenset(np.flatnonzero(hits).tolist()),
        per_run_supports=tuple(run_sets),
    )


def _one_cv_support(X, y, n_folds, lambda_grid, sub_stream, cv_stream) -> frozenset:
    n = X.shape[0]
    idx = sub_stream.rng().integers(0, n, size=n // 2)
    X_sub, y_sub = X[idx], y[idx]
    lam = cv_lambda(X_sub, y_sub, n_folds, lambda_grid, cv_stream)
    diag_fix = X_sub.T @ X_sub
    dead = np.diag(diag_fix) <= 0.0
    if np.any(dead):
        diag_fix = diag_fix.copy()
        diag_fix[dead, dead] = 1e-10 * max(1.0, float(np.max(np.diag(diag_fix))))
    beta = lasso_cd(GramProblem(diag_fix, X_sub.T @ y_sub), lam)
    return frozenset(np.flatnonzero(beta).tolist())


def multi_cv_select(X, y, m, q, n_folds, lambda_grid,
                    stream: SeededStream) -> SelectionOutcome:
    """Aggregate supports of m cross-validated Lasso fits on half subsamples.

    Run i draws its subsample from stream.child(2i) and its fold split
    from stream.child(2i + 1), so run 0 coincides with
    multi_cv_single_run on the same stream. A variable is selected when
    it appears in at least q * m of the m supports.
    """
    run_sets = []
    for i in range(m):
        run_sets.append(
            _one_cv_support(
                X, y, n_folds, lambda_grid, stream.child(2 * i), stream.child(2 * i + 1)
            )
        )
    p = X.shape[1]
    counts = np.zeros(p)
    for s in run_sets:
        for j in s:
            counts[j] += 1
    hits = counts >= q * m
    return SelectionOutcome(
        selected=frozenset(np.flatnonzero(hits).tolist()),
        per_run_supports=tuple(run_sets),
    )


def multi_cv_single_run(X, y, n_folds, lambda_grid, stream: SeededStream) -> SelectionOutcome:
    """One subsample + cross-validated Lasso, the unit the multi-cv
    aggregate counts over."""
    support = _one_cv_support(
        X, y, n_folds, lambda_grid, stream.child(0), stream.child(1)
    )
    return SelectionOutcome(selected=support, per_run_supports=(support,))


def _reembed(spec: SelectorSpec, data_vector: np.ndarray) -> np.ndarray:
    # y' = y + X (X'X)^{-1} (D' - X'y): the response consistent with the
    # perturbed statistics, leaving residuals untouched.
    ctx = spec.context
    shift = cho_solve(ctx["gram_chol"], data_vector - ctx["xty"])
    return ctx["y"] + ctx["X"] @ shift


def select(spec: SelectorSpec, data_vector, stream: SeededStream) -> SelectionOutcome:
    """Run the frozen selection algorithm on a (possibly perturbed) data
    vector.

    The data vector is the statistic the algorithm consumes: the scalar
    mean for the threshold kind, X'y for the Lasso-based kinds.
    """
    if spec.kind == "simple-threshold":
        d = np.atleast_1d(np.asarray(data_vector, dtype=float))
        if d.shape != (1,):
            raise DomainError("simple-threshold expects a single statistic")
        ok = simple_threshold_select(d[0], stream=stream, **spec.params)
        return SelectionOutcome(selected=frozenset([0]) if ok else frozenset())
    if spec.kind == "stability":
        ctx = spec.context
        return stability_select(
            data_vector,
            spec.params["m"],
            spec.params["q"],
            ctx["gram"],
            spec.params["sigma2"],
            ctx["lambda_grid"],
            stream,
            noise_factor=ctx["noise_factor"],
        )
    if spec.kind == "multi-cv":
        ctx = spec.context
        d = np.asarray(data_vector, dtype=float)
        if d.shape != ctx["xty"].shape:
            raise DomainError("data vector must match X'y in length")
        y_new = _reembed(spec, d)
        return multi_cv_select(
            ctx["X"],
            y_new,
            spec.params["m"],
            spec.params["q"],
            spec.params["n_folds"],
            ctx["lambda_grid"],
            stream,
        )
    raise DomainError(f"unknown selector kind {spec.kind!r}")


def single_component(spec: SelectorSpec, data_vector, stream: SeededStream) -> SelectionOutcome:
    """One count unit of an aggregate selector, for selectors that decide
    by counting identical independent runs.

    The aggregate probability then follows from the binomial tail, which
    is far cheaper to learn than the full selector. Stability selection
    aggregates within-run frequencies across a penalty grid, not counts of
    one repeated event, so it has no such component.
    """
    if spec.kind == "simple-threshold":
        d = np.atleast_1d(np.asarray(data_vector, dtype=float))
        if d.shape != (1,):
            raise DomainError("simple-threshold expects a single statistic")
        p = spec.params
        ok = simple_threshold_select(
            d[0], 1, 1.0, p["tau"], p["sigma"], p["n"], p["n_s"], stream
        )
        return SelectionOutcome(selected=frozenset([0]) if ok else frozenset())
    if spec.kind == "multi-cv":
        ctx = spec.context
        d = np.asarray(data_vector, dtype=float)
        if d.shape != ctx["xty"].shape:
            raise DomainError("data vector must match X'y in length")
        y_new = _reembed(spec, d)
        return multi_cv_single_run(
            ctx["X"], y_new, spec.params["n_folds"], ctx["lambda_grid"], stream
        )
    raise DomainError(
        f"selector kind {spec.kind!r} is not a count of independent runs"
    )
