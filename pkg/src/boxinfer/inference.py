"""Core conditional-inference pipeline.

decompose: split the data vector into the target statistic and an
independent nuisance. learn: perturb the statistic, re-run the frozen
selector for labels, regress. infer: put the learned selection
probability into a discrete exponential-family and invert its pivot.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .exceptions import (
    BoxinferError,
    DegenerateSupportError,
    DomainError,
    NumericError,
    RangeError,
)
from .glm import BinaryGlmModel, fit_binary_glm, predict_prob
from .selectors import SelectorSpec, select, single_component
from .splines import SplineSpec
from .stats import SeededStream, binom_sf, norm_quantile, norm_sf

__all__ = [
    "TargetDecomposition",
    "LearningSample",
    "LearnedSelectionProb",
    "ConditionalDensityGrid",
    "NaiveResult",
    "decompose_full",
    "decompose_partial",
    "decompose_general",
    "sample_covariates",
    "generate_labels",
    "estimate_selection_prob",
    "build_density_grid",
    "selective_pvalue",
    "selective_ci",
    "naive_inference",
    "learning_sample_to_json",
    "learning_sample_from_json",
    "learned_prob_to_json",
    "learned_prob_from_json",
]

_SCALE_CHOICES = np.array([0.5, 1.0, 1.5, 2.0])
_MODES = ("direct", "binomial-component")


@dataclass(frozen=True)
class TargetDecomposition:
    """Split of the data vector along one inference target.

    data = n_obs + direction * stat_obs, with stat_obs the observed value
    of the target statistic and n_obs uncorrelated with it. Replaying the
    selector at a hypothetical statistic value x means handing it
    n_obs + direction * x.
    """

    n_obs: np.ndarray
    direction: np.ndarray
    target_var: float
    stat_obs: float
    target_kind: str

    def perturbed(self, x: float) -> np.ndarray:
        return self.n_obs + self.direction * x

    @property
    def target_sd(self) -> float:
        return math.sqrt(self.target_var)


def _as_vector(name, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} must be finite")
    return v


def decompose_full(data_vector, j: int, gram, sigma2: float) -> TargetDecomposition:
    """Target = j-th coordinate of the saturated solve gram^{-1} data.

    target_var is sigma2 * (gram^{-1})_{jj} and the direction is e_j
    scaled so that the nuisance n_obs has zero covariance with the target.
    """
    d = _as_vector("data_vector", data_vector)
    gram = np.asarray(gram, dtype=float)
    p = d.size
    if gram.shape != (p, p):
        raise DomainError("gram shape must match the data vector")
    if not isinstance(j, (int, np.integer)) or not 0 <= j < p:
        raise DomainError(f"j must index a coordinate in [0, {p})")
    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    e_j = np.zeros(p)
    e_j[j] = 1.0
    try:
        sol = np.linalg.solve(gram, np.column_stack([d, e_j]))
    except np.linalg.LinAlgError as exc:
        raise DomainError("gram is singular") from exc
    if not np.all(np.isfinite(sol)):
        raise DomainError("gram is numerically singular")
    stat_obs = float(sol[j, 0])
    ginv_jj = float(sol[j, 1])
    if ginv_jj <= 0:
        raise DomainError("gram is not positive definite at coordinate j")
    target_var = sigma2 * ginv_jj
    direction = e_j * (sigma2 / target_var)
    return TargetDecomposition(
        n_obs=d - direction * stat_obs,
        direction=direction,
        target_var=target_var,
        stat_obs=stat_obs,
        target_kind="full",
    )


def decompose_partial(data_vector, E, j_pos: int, gram, sigma2: float) -> TargetDecomposition:
    """Target = coefficient j_pos of the least-squares fit restricted to E.

    Works entirely from the Gram matrix: the restricted solve uses
    gram[E, E] and data[E], and the direction lives in the full
    p-dimensional space so the selector can be replayed.
    """
    d = _as_vector("data_vector", data_vector)
    gram = np.asarray(gram, dtype=float)
    p = d.size
    if gram.shape != (p, p):
        raise DomainError("gram shape must match the data vector")
    E = np.asarray(sorted(int(i) for i in E), dtype=int)
    if E.size == 0 or np.any(E < 0) or np.any(E >= p) or np.unique(E).size != E.size:
        raise DomainError("E must be a non-empty set of distinct coordinates")
    if not isinstance(j_pos, (int, np.integer)) or not 0 <= j_pos < E.size:
        raise DomainError(f"j_pos must index a position in E (size {E.size})")
    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    gram_EE = gram[np.ix_(E, E)]
    e_j = np.zeros(E.size)
    e_j[j_pos] = 1.0
    try:
        sol = np.linalg.solve(gram_EE, np.column_stack([d[E], e_j]))
    except np.linalg.LinAlgError as exc:
        raise DomainError("restricted design is rank deficient") from exc
    if not np.all(np.isfinite(sol)):
        raise DomainError("restricted design is numerically rank deficient")
    stat_obs = float(sol[j_pos, 0])
    w = sol[:, 1]
    if w[j_pos] <= 0:
        raise DomainError("restricted design is rank deficient")
    target_var = sigma2 * float(w[j_pos])
    # direction = (sigma2 / target_var) * X' X_E (gram_EE^{-1} e_j); the
    # X'X_E block is gram[:, E].
    direction = gram[:, E] @ w / float(w[j_pos])
    return TargetDecomposition(
        n_obs=d - direction * stat_obs,
        direction=direction,
        target_var=target_var,
        stat_obs=stat_obs,
        target_kind="partial",
    )


def decompose_general(data_vector, t_obs, cov_dt, cov_t):
    """Decompose against an arbitrary jointly normal target statistic.

    For scalar t_obs this returns a TargetDecomposition ready for the
    inference pipeline; a vector target returns the same structure with
    array-valued stat_obs/target_var (reconstruction and replay only).
    """
    d = _as_vector("data_vector", data_vector)
    t = np.atleast_1d(np.asarray(t_obs, dtype=float))
    if t.ndim != 1 or not np.all(np.isfinite(t)):
        raise DomainError("t_obs must be a finite scalar or vector")
    k = t.size
    cdt = np.asarray(cov_dt, dtype=float).reshape(d.size, k)
    ct = np.atleast_2d(np.asarray(cov_t, dtype=float))
    if ct.shape != (k, k):
        raise DomainError("cov_t shape must match the target dimension")
    if not (np.all(np.isfinite(cdt)) and np.all(np.isfinite(ct))):
        raise DomainError("covariances must be finite")
    try:
        direction = np.linalg.solve(ct.T, cdt.T).T
    except np.linalg.LinAlgError as exc:
        raise DomainError("cov_t is singular") from exc
    if not np.all(np.isfinite(direction)):
        raise DomainError("cov_t is numerically singular")
    n_obs = d - direction @ t
    if k == 1:
        var = float(ct[0, 0])
        if var <= 0:
            raise DomainError("target variance must be positive")
        return TargetDecomposition(
            n_obs=n_obs,
            direction=direction[:, 0],
            target_var=var,
            stat_obs=float(t[0]),
            target_kind="general",
        )
    return TargetDecomposition(
        n_obs=n_obs,
        direction=direction,
        target_var=ct,
        stat_obs=t,
        target_kind="general",
    )


def sample_covariates(stat_obs: float, target_sd: float, B: int,
                      stream: SeededStream) -> np.ndarray:
    """Draw B covariate values spread around the observed statistic.

    Each draw picks a scale uniformly from {0.5, 1, 1.5, 2} times the
    target standard deviation, then samples normally at that scale. The
    scale mixture widens the design so the regression sees both tails of
    the selection probability.
    """
    stat_obs = float(stat_obs)
    target_sd = float(target_sd)
    if not math.isfinite(stat_obs):
        raise DomainError("stat_obs must be finite")
    if not math.isfinite(target_sd) or target_sd <= 0:
        raise DomainError("target_sd must be positive")
    if not isinstance(B, (int, np.integer)) or B < 1:
        raise DomainError("B must be a positive integer")
    rng = stream.rng()
    scales = _SCALE_CHOICES[rng.integers(0, 4, size=B)]
    return stat_obs + rng.standard_normal(B) * (scales * target_sd)


@dataclass(frozen=True)
class LearningSample:
    """Covariate/label pairs from replaying the selector.

    mode "direct" labels whole selection events; "binomial-component"
    labels one count unit of an aggregate selector, with m_agg recording
    how many units the real selector counts.
    """

    zs: np.ndarray
    ws: np.ndarray
    mode: str
    m_agg: int | None = None
    n_dropped: int = 0

    def __post_init__(self) -> None:
        zs = np.asarray(self.zs, dtype=float)
        ws = np.asarray(self.ws, dtype=np.int8)
        if zs.ndim != 1 or zs.shape != ws.shape:
            raise DomainError("zs and ws must be vectors of equal length")
        if not np.all((ws == 0) | (ws == 1)):
            raise DomainError("labels must be binary")
        if self.mode not in _MODES:
            raise DomainError(f"mode must be one of {_MODES}")
        if self.mode == "binomial-component":
            if self.m_agg is None or int(self.m_agg) < 1:
                raise DomainError("binomial-component mode needs m_agg >= 1")
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "ws", ws)


def _label_one(spec, decomp, z, target_set, target_j, mode, sub):
    data_b = decomp.perturbed(z)
    if mode == "direct":
        out = select(spec, data_b, sub)
    else:
        out = single_component(spec, data_b, sub)
    if target_set is not None:
        return 1 if out.selected == target_set else 0
    return 1 if target_j in out.selected else 0


def generate_labels(spec: SelectorSpec, decomp: TargetDecomposition, zs,
                    target, mode: str = "direct", stream: SeededStream = None,
                    threads: int = 1) -> LearningSample:
    """Replay the selector at each covariate value and record the event.

    Parameters
    ----------
    spec : SelectorSpec
    decomp : TargetDecomposition
        Supplies the line n_obs + direction * z the selector sees.
    zs : array_like
        Covariate values, typically from sample_covariates.
    target : int or iterable of int
        A coordinate (label = membership in the selected set) or a whole
        set (label = exact set equality, the partial-target event).
    mode : {"direct", "binomial-component"}
        Direct replays the full selector; binomial-component replays one
        count unit and records the selector's m for later composition.
    stream : SeededStream
        Point b uses stream.child(b): labels are a pure function of
        (spec, decomp, zs, stream), whatever the thread count.
    threads : int
        Worker threads over points.

    Raises
    ------
    NumericError
        If more than 1% of the points fail inside the selector.
    """
    if mode not in _MODES:
        raise DomainError(f"mode must be one of {_MODES}")
    if stream is None:
        raise DomainError("a SeededStream is required")
    zs = _as_vector("zs", zs)
    if isinstance(target, (int, np.integer)) and not isinstance(target, bool):
        target_j, target_set = int(target), None
    else:
        try:
            target_set = frozenset(int(i) for i in target)
        except TypeError as exc:
            raise DomainError("target must be a coordinate or a set of them") from exc
        target_j = None
        if mode == "binomial-component":
            raise DomainError(
                "set-equality targets cannot be composed from count units; "
                "the aggregate set is not a per-run count event"
            )
    m_agg = spec.params.get("m") if mode == "binomial-component" else None
    if mode == "binomial-component" and m_agg is None:
        raise DomainError("selector spec carries no trial count m")

    B = zs.size
    labels = np.full(B, -1, dtype=np.int8)

    def work(lo, hi):
        for b in range(lo, hi):
            try:
                labels[b] = _label_one(
                    spec, decomp, zs[b], target_set, target_j, mode, stream.child(b)
                )
            except (BoxinferError, np.linalg.LinAlgError):
                labels[b] = -1

    threads = max(1, int(threads))
    if threads == 1:
        work(0, B)
    else:
        chunk = max(1, -(-B // threads))
        bounds = [(lo, min(lo + chunk, B)) for lo in range(0, B, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda ab: work(*ab), bounds))

    kept = labels >= 0
    n_dropped = int(B - kept.sum())
    if n_dropped > 0.01 * B:
        raise NumericError(
            f"{n_dropped} of {B} selector replays failed; exceeding the 1% tolerance"
        )
    return LearningSample(
        zs=zs[kept], ws=labels[kept], mode=mode, m_agg=m_agg, n_dropped=n_dropped
    )


@dataclass(frozen=True)
class LearnedSelectionProb:
    """Selection probability as a function of the target statistic.

    Either a fitted GLM (model) or a constant fallback when the labels
    carried no information. In binomial-component mode evaluation
    composes the per-unit probability through the binomial tail at the
    aggregate's count threshold q_threshold * m_agg.
    """

    model: BinaryGlmModel | None
    mode: str
    m_agg: int | None = None
    q_threshold: float | None = None
    constant: float | None = None

    def evaluate(self, x):
        if self.constant is not None:
            arr = np.asarray(x, dtype=float)
            out = np.full(arr.shape, self.constant)
            pointwise = out if arr.ndim else float(self.constant)
        else:
            pointwise = predict_prob(self.model, x)
        if self.mode == "direct":
            return pointwise
        return binom_sf(self.m_agg, pointwise, self.q_threshold * self.m_agg)


def estimate_selection_prob(sample: LearningSample, link: str = "probit",
                            df: int = 10, q_threshold: float = None) -> LearnedSelectionProb:
    """Regress labels on the covariate to learn the selection probability.

    Single-class labels cannot be regressed; the estimate falls back to
    the constant clamp(mean(W), 1e-6, 1 - 1e-6), which cancels from the
    conditional density and recovers unadjusted inference.

    q_threshold is required in binomial-component mode: the composed
    probability is the binomial tail at q_threshold * m_agg successes.
    """
    if sample.mode == "binomial-component":
        if q_threshold is None:
            raise DomainError("binomial-component mode needs the aggregate q")
        q_threshold = float(q_threshold)
        if not 0.0 < q_threshold <= 1.0:
            raise DomainError("q_threshold must lie in (0, 1]")
    if sample.zs.size == 0:
        raise DomainError("empty learning sample")
    mean_w = float(sample.ws.mean())
    if mean_w in (0.0, 1.0):
        return LearnedSelectionProb(
            model=None,
            mode=sample.mode,
            m_agg=sample.m_agg,
            q_threshold=q_threshold,
            constant=float(np.clip(mean_w, 1e-6, 1.0 - 1e-6)),
        )
    model = fit_binary_glm(sample.zs, sample.ws.astype(float), link=link, df=df)
    return LearnedSelectionProb(
        model=model, mode=sample.mode, m_agg=sample.m_agg, q_threshold=q_threshold
    )


@dataclass(frozen=True)
class ConditionalDensityGrid:
    """Discrete exponential-family approximation of the conditional law.

    log_weights hold log[s(x_g)] plus the log normal kernel written
    around `center` (a pure tilt of the zero-reference convention, which
    only shifts every weight by the same constant); the member at mean
    parameter mu uses natural parameter (mu - center) / target_var.
    """

    grid: np.ndarray
    log_weights: np.ndarray
    target_var: float
    center: float

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def _logits(self, mu: float) -> np.ndarray:
        eta = (float(mu) - self.center) / self.target_var
        return self.log_weights + eta * self.grid

    def log_partition(self, mu: float) -> float:
        return float(logsumexp(self._logits(mu)))

    def masses(self, mu: float) -> np.ndarray:
        logits = self._logits(mu)
        out = np.exp(logits - logits.max())
        return out / out.sum()

    def cdf(self, mu: float, x: float) -> float:
        """Pivot F_mu(x): mass strictly left of x's cell plus the linear
        fraction of the cell itself (each atom spread over its cell).

        At a grid point this equals the half-atom-corrected mass sum; the
        correction is what lets the s = 1 case match the continuous
        normal CDF to grid-squared accuracy.
        """
        x = float(x)
        if not (self.grid[0] <= x <= self.grid[-1]):
            raise RangeError(
                f"x={x} outside the grid range [{self.grid[0]}, {self.grid[-1]}]"
            )
        pm = self.masses(mu)
        h = self.spacing
        pos = (x - (self.grid[0] - 0.5 * h)) / h
        cell = min(int(pos), pm.size - 1)
        frac = pos - cell
        u = pm[:cell].sum() + pm[cell] * min(frac, 1.0)
        if math.isnan(u):
            raise NumericError("pivot evaluated to NaN; the grid weights are corrupt")
        # the mass sum can overshoot 1 by an ulp; a CDF value must not
        return float(min(1.0, max(0.0, u)))


def build_density_grid(s_fn, stat_obs: float, target_var: float, *,
                       n_grid: int = 2401, span_sd: float = 12.0,
                       cell_subdiv: int = 64) -> ConditionalDensityGrid:
    """Tabulate kernel times selection probability on an equally spaced grid.

    The grid spans stat_obs +- span_sd standard deviations. Each cell's
    selection probability is averaged over cell_subdiv interior points,
    which keeps cell mass second-order accurate even when s jumps inside
    a cell (learned step-like fits, hard truncations).

    s_fn is a LearnedSelectionProb or any vectorized callable returning
    values in [0, 1].
    """
    stat_obs = float(stat_obs)
    target_var = float(target_var)
    if not math.isfinite(stat_obs):
        raise DomainError("stat_obs must be finite")
    if not math.isfinite(target_var) or target_var <= 0:
        raise DomainError("target_var must be positive")
    if n_grid < 2:
        raise DomainError("need at least two grid points")
    fn = s_fn.evaluate if isinstance(s_fn, LearnedSelectionProb) else s_fn
    sd = math.sqrt(target_var)
    grid = np.linspace(stat_obs - span_sd * sd, stat_obs + span_sd * sd, n_grid)
    h = grid[1] - grid[0]
    offsets = ((np.arange(cell_subdiv) + 0.5) / cell_subdiv - 0.5) * h
    points = (grid[:, None] + offsets[None, :]).reshape(-1)
    vals = np.asarray(fn(points), dtype=float).reshape(n_grid, cell_subdiv)
    if not np.all(np.isfinite(vals)):
        raise DomainError("selection probability returned non-finite values")
    if np.any(vals < -1e-9) or np.any(vals > 1.0 + 1e-9):
        raise DomainError("selection probability must take values in [0, 1]")
    s_cell = np.clip(vals, 0.0, 1.0).mean(axis=1)
    if not np.any(s_cell > 0.0):
        raise DegenerateSupportError("selection probability vanishes on the whole grid")
    with np.errstate(divide="ignore"):
        log_w = -((grid - stat_obs) ** 2) / (2.0 * target_var) + np.log(s_cell)
    return ConditionalDensityGrid(
        grid=grid, log_weights=log_w, target_var=target_var, center=stat_obs
    )


def selective_pvalue(grid: ConditionalDensityGrid, mu0: float, x_obs: float,
                     alternative: str = "two-sided") -> float:
    """p-value for H0: mu = mu0 in the conditional family.

    The pivot U = F_mu0(x_obs) is uniform under the null; two-sided
    p = 2 min(U, 1 - U).
    """
    u = grid.cdf(mu0, x_obs)
    if alternative == "two-sided":
        return float(min(1.0, 2.0 * min(u, 1.0 - u)))
    if alternative == "greater":
        return float(1.0 - u)
    if alternative == "less":
        return float(u)
    raise DomainError("alternative must be two-sided, greater, or less")


def _bisect_mu(grid, x_obs, level, lo, hi) -> float:
    # F_mu(x_obs) is decreasing in mu; solve F = level.
    f_lo = grid.cdf(lo, x_obs)
    f_hi = grid.cdf(hi, x_obs)
    tol = 1e-6 * math.sqrt(grid.target_var)
    if not (f_lo >= level >= f_hi):
        return math.nan
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if grid.cdf(mid, x_obs) >= level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def selective_ci(grid: ConditionalDensityGrid, x_obs: float,
                 alpha: float = 0.05) -> tuple:
    """Equal-tailed confidence interval by test inversion.

    Endpoints solve F_mu(x_obs) = 1 - alpha/2 and alpha/2 by bisection
    over mu in x_obs +- 8 sd (widened once to +- 16 sd); an endpoint that
    still fails to bracket is clamped to the search edge with a warning.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    sd = math.sqrt(grid.target_var)
    x_obs = float(x_obs)

    for width in (8.0, 16.0):
        lo_mu, hi_mu = x_obs - width * sd, x_obs + width * sd
        # Monotonicity is the correctness backbone of the inversion;
        # check it on every call rather than trusting the family.
        probes = np.linspace(lo_mu, hi_mu, 5)
        vals = [grid.cdf(mu, x_obs) for mu in probes]
        if not np.all(np.isfinite(vals)):
            raise NumericError("pivot evaluated to a non-finite value")
        if np.any(np.diff(vals) > 1e-10):
            raise NumericError("pivot is not decreasing in mu; grid is corrupt")
        lower = _bisect_mu(grid, x_obs, 1.0 - alpha / 2.0, lo_mu, hi_mu)
        upper = _bisect_mu(grid, x_obs, alpha / 2.0, lo_mu, hi_mu)
        if not (math.isnan(lower) or math.isnan(upper)):
            return (lower, upper)

    lo_mu, hi_mu = x_obs - 16.0 * sd, x_obs + 16.0 * sd
    lower = _bisect_mu(grid, x_obs, 1.0 - alpha / 2.0, lo_mu, hi_mu)
    upper = _bisect_mu(grid, x_obs, alpha / 2.0, lo_mu, hi_mu)
    if math.isnan(lower):
        warnings.warn("lower endpoint clamped to the mu search range")
        lower = lo_mu
    if math.isnan(upper):
        warnings.warn("upper endpoint clamped to the mu search range")
        upper = hi_mu
    return (float(lower), float(upper))


class NaiveResult(NamedTuple):
    pvalue: float
    ci: tuple


def naive_inference(x_obs: float, target_var: float, mu0: float = 0.0,
                    alpha: float = 0.05) -> NaiveResult:
    """Classical z-test and z-interval that ignore selection entirely."""
    target_var = float(target_var)
    if not math.isfinite(target_var) or target_var <= 0:
        raise DomainError("target_var must be positive")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    sd = math.sqrt(target_var)
    z = (float(x_obs) - float(mu0)) / sd
    pvalue = float(min(1.0, 2.0 * norm_sf(abs(z))))
    half = norm_quantile(1.0 - alpha / 2.0) * sd
    return NaiveResult(pvalue=pvalue, ci=(float(x_obs) - half, float(x_obs) + half))


def learning_sample_to_json(sample: LearningSample) -> dict:
    return {
        "zs": [float(z) for z in sample.zs],
        "ws": [int(w) for w in sample.ws],
        "mode": sample.mode,
        "m_agg": None if sample.m_agg is None else int(sample.m_agg),
        "n_dropped": int(sample.n_dropped),
    }


def learning_sample_from_json(data: dict) -> LearningSample:
    return LearningSample(
        zs=np.asarray(data["zs"], dtype=float),
        ws=np.asarray(data["ws"], dtype=np.int8),
        mode=data["mode"],
        m_agg=data.get("m_agg"),
        n_dropped=int(data.get("n_dropped", 0)),
    )


def learned_prob_to_json(prob: LearnedSelectionProb) -> dict:
    out = {
        "mode": prob.mode,
        "m_agg": None if prob.m_agg is None else int(prob.m_agg),
        "q_threshold": None if prob.q_threshold is None else float(prob.q_threshold),
        "constant": None if prob.constant is None else float(prob.constant),
        "link": None,
        "knots": None,
        "coefficients": None,
    }
    if prob.model is not None:
        spec = prob.model.spec
        out["link"] = prob.model.link
        out["knots"] = {
            "boundary": [float(spec.boundary_knots[0]), float(spec.boundary_knots[1])],
            "interior": [float(t) for t in spec.interior_knots],
            "df": int(spec.df),
            "include_intercept": bool(spec.include_intercept),
        }
        out["coefficients"] = [float(c) for c in prob.model.coefficients]
        out["converged"] = bool(prob.model.converged)
        out["iterations"] = int(prob.model.iterations)
    return out


def learned_prob_from_json(data: dict) -> LearnedSelectionProb:
    model = None
    if data.get("coefficients") is not None:
        knots = data["knots"]
        spec = SplineSpec(
            boundary_knots=(knots["boundary"][0], knots["boundary"][1]),
            interior_knots=tuple(knots["interior"]),
            df=int(knots["df"]),
            include_intercept=bool(knots["include_intercept"]),
        )
        model = BinaryGlmModel(
            link=data["link"],
            spec=spec,
            coefficients=np.asarray(data["coefficients"], dtype=float),
            converged=bool(data.get("converged", True)),
            iterations=int(data.get("iterations", 0)),
        )
    return LearnedSelectionProb(
        model=model,
        mode=data["mode"],
        m_agg=data.get("m_agg"),
        q_threshold=data.get("q_threshold"),
        constant=data.get("constant"),
    )
