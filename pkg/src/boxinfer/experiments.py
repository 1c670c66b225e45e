"""Simulation harness for the three selection regimes.

Each experiment family draws synthetic datasets, runs its frozen
selector, learns the selection probability for every selected target,
and aggregates pivots, coverage, and interval lengths into a
schema-stable result table. Replications use disjoint seeded substreams
and are merged by replication index, so results do not depend on the
worker thread count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ExperimentConfig
from .exceptions import DomainError, NumericError
from .inference import (
    TargetDecomposition,
    build_density_grid,
    decompose_full,
    estimate_selection_prob,
    generate_labels,
    naive_inference,
    sample_covariates,
    selective_ci,
)
from .lasso import GramProblem, geometric_grid, lambda_range
from .selectors import SelectorSpec, select
from .stats import (
    CovarianceFactor,
    SeededStream,
    binom_sf,
    ld_binom_sf,
    norm_cdf,
    norm_sf,
)

__all__ = [
    "generate_synthetic",
    "ks_uniform",
    "ResultTable",
    "simple_selector_spec",
    "simple_truth_functions",
    "sample_selected_mean",
    "run_simple_experiment",
    "run_stability_experiment",
    "run_multicv_experiment",
    "run_experiment",
    "write_result_table",
]

# Label/learning streams sit far above the per-candidate selector streams
# so the two index families can never collide.
_STREAM_OFFSET = 1 << 32
_REJECTION_CAP = 100_000

_SIMPLE_METHODS = ("naive", "truth", "ld", "probit", "logit", "probit-binom", "logit-binom")
_STABILITY_METHODS = ("naive", "probit", "logit")
_MULTICV_METHODS = ("naive", "probit", "logit", "probit-direct", "logit-direct")


def generate_synthetic(n, p, rho, sigma, sparsity, amplitude,
                       stream: SeededStream):
    """Gaussian design with AR(rho) column correlation and a sparse signal.

    Returns (X, y, beta). beta has `sparsity` entries of magnitude
    `amplitude` with independent random signs at random positions. The
    draw order (design, positions, signs, noise) is fixed so a given
    stream always produces the same dataset.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError("rho must lie in [0, 1)")
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if not 0 <= sparsity <= p:
        raise DomainError("sparsity must lie in [0, p]")
    rng = stream.rng()
    X = rng.standard_normal((n, p))
    if rho > 0.0:
        idx = np.arange(p)
        cov = rho ** np.abs(idx[:, None] - idx[None, :])
        X = X @ CovarianceFactor.from_covariance(cov).lower_factor.T
    beta = np.zeros(p)
    if sparsity > 0:
        positions = rng.choice(p, size=sparsity, replace=False)
        signs = rng.choice(np.array([-1.0, 1.0]), size=sparsity)
        beta[positions] = signs * amplitude
    y = X @ beta + rng.normal(0.0, sigma, size=n)
    return X, y, beta


def ks_uniform(values) -> float:
    """Kolmogorov-Smirnov distance of a sample from Uniform(0, 1)."""
    u = np.sort(np.asarray(values, dtype=float))
    if u.ndim != 1 or u.size == 0:
        raise DomainError("need a non-empty vector of values")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise DomainError("values must lie in [0, 1]")
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    return float(max(np.max(i / n - u), np.max(u - (i - 1.0) / n)))


@dataclass
class ResultTable:
    """Aggregated experiment output.

    coverage_rows: dicts with keys (method, alpha, coverage_pct,
    mean_ci_len, n). pivot_rows: dicts with keys (sim_id, target_j,
    method, pivot). curve_rows: dicts with keys (x, method, s_value),
    present only for the scalar-threshold experiment. meta carries the
    run accounting (skipped replications included, never dropped).
    """

    experiment: str
    methods: tuple
    alphas: tuple
    coverage_rows: list = field(default_factory=list)
    pivot_rows: list = field(default_factory=list)
    curve_rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def pivots(self, method: str) -> np.ndarray:
        return np.array(
            [row["pivot"] for row in self.pivot_rows if row["method"] == method]
        )

    def ks(self, method: str) -> float:
        return ks_uniform(self.pivots(method))

    def _coverage_row(self, method: str, alpha: float) -> dict:
        for row in self.coverage_rows:
            if row["method"] == method and math.isclose(row["alpha"], alpha):
                return row
        raise KeyError(f"no coverage row for ({method}, {alpha})")

    def coverage(self, method: str, alpha: float) -> float:
        return self._coverage_row(method, alpha)["coverage_pct"]

    def mean_ci_len(self, method: str, alpha: float) -> float:
        return self._coverage_row(method, alpha)["mean_ci_len"]

    def summary_lines(self) -> list:
        lines = [f"experiment={self.experiment} "
                 f"nsims={self.meta.get('nsims')} skipped={self.meta.get('n_skipped', 0)}"]
        for method in self.methods:
            pivots = self.pivots(method)
            if pivots.size == 0:
                lines.append(f"  {method:>14s}: no targets")
                continue
            ks = ks_uniform(pivots)
            for alpha in self.alphas:
                row = self._coverage_row(method, alpha)
                lines.append(
                    f"  {method:>14s}: alpha={alpha:g} "
                    f"coverage={row['coverage_pct']:.1f}% "
                    f"mean_len={row['mean_ci_len']:.4f} "
                    f"ks={ks:.4f} n={row['n']}"
                )
        return lines


def _build_table(experiment, methods, alphas, rep_results, meta) -> ResultTable:
    pivot_rows, ci_rows, curve_rows = [], [], []
    skipped = []
    for res in rep_results:
        if res.get("skipped"):
            skipped.append(res["sim_id"])
            continue
        pivot_rows.extend(res["pivot_rows"])
        ci_rows.extend(res["ci_rows"])
        curve_rows.extend(res.get("curve_rows", []))
    coverage_rows = []
    for method in methods:
        for alpha in alphas:
            hits = [r for r in ci_rows if r["method"] == method and r["alpha"] == alpha]
            if not hits:
                continue
            coverage_rows.append({
                "method": method,
                "alpha": alpha,
                "coverage_pct": 100.0 * float(np.mean([r["covered"] for r in hits])),
                "mean_ci_len": float(np.mean([r["length"] for r in hits])),
                "n": len(hits),
            })
    meta = dict(meta)
    meta["n_skipped"] = len(skipped)
    meta["skipped_sims"] = skipped
    meta["n_targets"] = len({(r["sim_id"], r["target_j"]) for r in pivot_rows})
    ks_map = {}
    for method in methods:
        vals = [r["pivot"] for r in pivot_rows if r["method"] == method]
        if vals:
            ks_map[method] = ks_uniform(vals)
    meta["ks"] = ks_map
    return ResultTable(
        experiment=experiment,
        methods=methods,
        alphas=tuple(alphas),
        coverage_rows=coverage_rows,
        pivot_rows=pivot_rows,
        curve_rows=curve_rows,
        meta=meta,
    )


def _run_reps(worker, nsims: int, threads: int) -> list:
    if threads <= 1:
        return [worker(r) for r in range(nsims)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(nsims)))


def _meta_config(config: ExperimentConfig) -> dict:
    # threads and out_dir do not affect the science; leaving them out keeps
    # output files identical across worker counts and destinations.
    echo = asdict(config)
    echo.pop("threads", None)
    echo.pop("out_dir", None)
    return echo


# ---------------------------------------------------------------------------
# scalar threshold experiment


def simple_selector_spec(config: ExperimentConfig) -> SelectorSpec:
    return SelectorSpec.simple_threshold(
        config.m, config.q, config.tau, config.sigma, config.n, config.n_s
    )


def simple_truth_functions(config: ExperimentConfig):
    """Closed forms for the threshold selector's selection probability.

    Returns (truth, large_deviation): the exact binomial tail composed
    with the per-draw pass probability, and its large-deviation bound.
    """
    root_n = math.sqrt(config.n)
    noise_sd = config.sigma * math.sqrt(config.n / config.n_s)
    m, q, tau = config.m, config.q, config.tau

    def p_unit(xs):
        return norm_sf((tau - root_n * np.asarray(xs, dtype=float)) / noise_sd)

    def truth(xs):
        return binom_sf(m, p_unit(xs), q * m)

    def large_deviation(xs):
        # the KL form needs p strictly inside (0, 1)
        p = np.clip(p_unit(xs), 1e-300, 1.0 - 1e-16)
        return ld_binom_sf(m, p, q)

    return truth, large_deviation


def sample_selected_mean(spec: SelectorSpec, mu: float, sd: float,
                         stream: SeededStream, cap: int = _REJECTION_CAP):
    """Rejection-sample one dataset mean conditional on selection.

    Candidate means come sequentially from stream.child(0); candidate c
    hands the selector stream.child(1 + c). Returns (mean, attempts).
    """
    cand_rng = stream.child(0).rng()
    for c in range(cap):
        x = mu + sd * cand_rng.standard_normal()
        if select(spec, np.array([x]), stream.child(1 + c)).passed:
            return float(x), c + 1
    raise NumericError(
        f"no selection in {cap} candidate datasets; the acceptance rate is "
        "below the 1e-4 floor, so conditional replication is impractical "
        "with these tau/q settings"
    )


def _simple_rep(config: ExperimentConfig, spec: SelectorSpec, root: SeededStream,
                truth_fn, ld_fn, r: int) -> dict:
    sd = config.sigma / math.sqrt(config.n)
    tv = sd * sd
    rep = root.child(r)
    xbar, attempts = sample_selected_mean(spec, config.mu_true, sd, rep)
    decomp = TargetDecomposition(
        n_obs=np.zeros(1),
        direction=np.ones(1),
        target_var=tv,
        stat_obs=xbar,
        target_kind="general",
    )

    zs_direct = sample_covariates(xbar, sd, config.B, rep.child(_STREAM_OFFSET))
    direct = generate_labels(
        spec, decomp, zs_direct, 0, "direct", rep.child(_STREAM_OFFSET + 1)
    )
    zs_binom = sample_covariates(xbar, sd, config.B, rep.child(_STREAM_OFFSET + 2))
    binom = generate_labels(
        spec, decomp, zs_binom, 0, "binomial-component", rep.child(_STREAM_OFFSET + 3)
    )

    s_fns = {
        "truth": truth_fn,
        "ld": ld_fn,
        "probit": estimate_selection_prob(direct, "probit", config.df),
        "logit": estimate_selection_prob(direct, "logit", config.df),
        "probit-binom": estimate_selection_prob(
            binom, "probit", config.df, q_threshold=config.q
        ),
        "logit-binom": estimate_selection_prob(
            binom, "logit", config.df, q_threshold=config.q
        ),
    }

    pivot_rows, ci_rows = [], []
    for method in _SIMPLE_METHODS:
        if method == "naive":
            pivot = float(norm_cdf((xbar - config.mu_true) / sd))
            pivot_rows.append(
                {"sim_id": r, "target_j": 0, "method": method, "pivot": pivot}
            )
            for alpha in config.alphas:
                res = naive_inference(xbar, tv, mu0=config.mu_true, alpha=alpha)
                lo, hi = res.ci
                ci_rows.append({
                    "sim_id": r, "target_j": 0, "method": method, "alpha": alpha,
                    "covered": bool(lo <= config.mu_true <= hi),
                    "length": hi - lo,
                })
            continue
        grid = build_density_grid(s_fns[method], xbar, tv)
        pivot = grid.cdf(config.mu_true, xbar)
        pivot_rows.append(
            {"sim_id": r, "target_j": 0, "method": method, "pivot": pivot}
        )
        for alpha in config.alphas:
            lo, hi = selective_ci(grid, xbar, alpha=alpha)
            ci_rows.append({
                "sim_id": r, "target_j": 0, "method": method, "alpha": alpha,
                "covered": bool(lo <= config.mu_true <= hi),
                "length": hi - lo,
            })

    curve_rows = []
    if r == 0:
        xs = np.linspace(xbar - 6.0 * sd, xbar + 6.0 * sd, 241)
        for method in _SIMPLE_METHODS:
            if method == "naive":
                continue
            fn = s_fns[method]
            vals = fn.evaluate(xs) if hasattr(fn, "evaluate") else fn(xs)
            curve_rows.extend(
                {"x": float(x), "method": method, "s_value": float(v)}
                for x, v in zip(xs, vals)
            )

    return {
        "sim_id": r,
        "attempts": attempts,
        "pivot_rows": pivot_rows,
        "ci_rows": ci_rows,
        "curve_rows": curve_rows,
    }


def run_simple_experiment(config: ExperimentConfig) -> ResultTable:
    """Scalar-mean threshold selection, replicated conditional on selection.

    Every replication rejection-samples a dataset mean that passes the
    frozen selector, then runs naive, exact-truth, large-deviation, and
    learned (direct and binomial-composed, both links) inference on it.
    """
    if config.experiment != "simple":
        raise DomainError("config is not for the simple experiment")
    spec = simple_selector_spec(config)
    truth_fn, ld_fn = simple_truth_functions(config)
    root = SeededStream(config.seed)

    worker = lambda r: _simple_rep(config, spec, root, truth_fn, ld_fn, r)
    results = _run_reps(worker, config.nsims, config.threads)

    attempts = int(sum(res["attempts"] for res in results))
    meta = {
        "experiment": "simple",
        "nsims": config.nsims,
        "candidates": attempts,
        "acceptance_rate": config.nsims / attempts,
        "config": _meta_config(config),
    }
    return _build_table("simple", _SIMPLE_METHODS, config.alphas, results, meta)


# ---------------------------------------------------------------------------
# stability selection experiment


def _stability_lambda_grid(gram: np.ndarray, d: np.ndarray, num: int = 50) -> np.ndarray:
    # The selector solves randomized problems (gram / 2, d / 2 + omega), so
    # the frozen penalty window must come from the same halved scaling;
    # a full-scale window sits entirely above the randomized lambda_max
    # and selects nothing.
    lam_min, lam_max = lambda_range(GramProblem(0.5 * gram, 0.5 * d))
    if lam_min >= lam_max:
        lam_min = 0.999 * lam_max
    return geometric_grid(lam_min, lam_max, num)


def _lasso_target_rows(config, spec, gram, d, beta, rep, r, methods,
                       binomial: bool, E) -> tuple:
    """Shared per-target loop for the Lasso-based experiments.

    Learns the selection probability for each selected coordinate and
    tests H0: beta_j = beta_j(true) for the saturated-model target. With
    binomial=True the primary links learn one count unit and compose
    through the binomial tail; direct-mode fits are then reported
    alongside under the -direct suffix.
    """
    sigma2 = config.sigma**2
    pivot_rows, ci_rows = [], []
    for j in E:
        decomp = decompose_full(d, j, gram, sigma2)
        tstream = rep.child(_STREAM_OFFSET + j)
        mu0 = float(beta[j])

        fits = {}
        if binomial:
            zs = sample_covariates(decomp.stat_obs, decomp.target_sd,
                                   config.B, tstream.child(0))
            sample = generate_labels(
                spec, decomp, zs, j, "binomial-component", tstream.child(1)
            )
            for link in config.links:
                fits[link] = estimate_selection_prob(
                    sample, link, config.df, q_threshold=config.q
                )
            zs_d = sample_covariates(decomp.stat_obs, decomp.target_sd,
                                     config.B, tstream.child(2))
            sample_d = generate_labels(
                spec, decomp, zs_d, j, "direct", tstream.child(3)
            )
            for link in config.links:
                fits[link + "-direct"] = estimate_selection_prob(
                    sample_d, link, config.df
                )
        else:
            zs = sample_covariates(decomp.stat_obs, decomp.target_sd,
                                   config.B, tstream.child(0))
            sample = generate_labels(spec, decomp, zs, j, "direct", tstream.child(1))
            for link in config.links:
                fits[link] = estimate_selection_prob(sample, link, config.df)

        for method in methods:
            if method == "naive":
                z = (decomp.stat_obs - mu0) / decomp.target_sd
                pivot_rows.append({
                    "sim_id": r, "target_j": int(j), "method": method,
                    "pivot": float(norm_cdf(z)),
                })
                for alpha in config.alphas:
                    res = naive_inference(
                        decomp.stat_obs, decomp.target_var, mu0=mu0, alpha=alpha
                    )
                    lo, hi = res.ci
                    ci_rows.append({
                        "sim_id": r, "target_j": int(j), "method": method,
                        "alpha": alpha, "covered": bool(lo <= mu0 <= hi),
                        "length": hi - lo,
                    })
                continue
            if method not in fits:
                continue
            grid = build_density_grid(fits[method], decomp.stat_obs, decomp.target_var)
            pivot_rows.append({
                "sim_id": r, "target_j": int(j), "method": method,
                "pivot": grid.cdf(mu0, decomp.stat_obs),
            })
            for alpha in config.alphas:
                lo, hi = selective_ci(grid, decomp.stat_obs, alpha=alpha)
                ci_rows.append({
                    "sim_id": r, "target_j": int(j), "method": method,
                    "alpha": alpha, "covered": bool(lo <= mu0 <= hi),
                    "length": hi - lo,
                })
    return pivot_rows, ci_rows


def _stability_rep(config: ExperimentConfig, root: SeededStream, r: int) -> dict:
    rep = root.child(r)
    X, y, beta = generate_synthetic(
        config.n, config.p, config.rho, config.sigma,
        config.sparsity, config.amplitude, rep.child(0),
    )
    gram = X.T @ X
    d = X.T @ y
    lam_grid = _stability_lambda_grid(gram, d)
    spec = SelectorSpec.stability(
        config.m, config.q, gram, config.sigma**2, lam_grid
    )
    outcome = select(spec, d, rep.child(1))
    E = sorted(outcome.selected)
    if not E:
        return {"sim_id": r, "skipped": True}
    pivot_rows, ci_rows = _lasso_target_rows(
        config, spec, gram, d, beta, rep, r, _STABILITY_METHODS,
        binomial=False, E=E,
    )
    return {"sim_id": r, "pivot_rows": pivot_rows, "ci_rows": ci_rows}


def run_stability_experiment(config: ExperimentConfig) -> ResultTable:
    """Stability selection over randomized Lasso paths, then coordinate
    inference for every selected variable.

    Replications whose selection comes back empty are skipped and
    reported in the meta accounting; they never silently vanish.
    """
    if config.experiment != "stability":
        raise DomainError("config is not for the stability experiment")
    root = SeededStream(config.seed)
    worker = lambda r: _stability_rep(config, root, r)
    results = _run_reps(worker, config.nsims, config.threads)
    meta = {
        "experiment": "stability",
        "nsims": config.nsims,
        "config": _meta_config(config),
    }
    return _build_table("stability", _STABILITY_METHODS, config.alphas, results, meta)


# ---------------------------------------------------------------------------
# repeated cross-validated Lasso experiment


def _multicv_rep(config: ExperimentConfig, root: SeededStream, r: int) -> dict:
    rep = root.child(r)
    X, y, beta = generate_synthetic(
        config.n, config.p, config.rho, config.sigma,
        config.sparsity, config.amplitude, rep.child(0),
    )
    gram = X.T @ X
    d = X.T @ y
    lam_max = float(np.max(np.abs(d)))
    if lam_max <= 0.0:
        return {"sim_id": r, "skipped": True}
    lam_grid = geometric_grid(0.01 * lam_max, lam_max, 100)
    spec = SelectorSpec.multi_cv(
        config.m, config.q, config.n_folds, X, y, lam_grid
    )
    outcome = select(spec, d, rep.child(1))
    E = sorted(outcome.selected)
    if not E:
        return {"sim_id": r, "skipped": True}
    pivot_rows, ci_rows = _lasso_target_rows(
        config, spec, gram, d, beta, rep, r, _MULTICV_METHODS,
        binomial=True, E=E,
    )
    return {"sim_id": r, "pivot_rows": pivot_rows, "ci_rows": ci_rows}


def run_multicv_experiment(config: ExperimentConfig) -> ResultTable:
    """Selection by vote counting over repeated cross-validated Lasso fits
    on half subsamples.

    The per-run support is one count unit, so the primary learned methods
    regress single-run labels and compose the aggregate probability
    through the binomial tail; direct-mode fits of the full selector ride
    along for comparison under the -direct suffix.
    """
    if config.experiment != "multicv":
        raise DomainError("config is not for the multicv experiment")
    root = SeededStream(config.seed)
    worker = lambda r: _multicv_rep(config, root, r)
    results = _run_reps(worker, config.nsims, config.threads)
    meta = {
        "experiment": "multicv",
        "nsims": config.nsims,
        "config": _meta_config(config),
    }
    return _build_table("multicv", _MULTICV_METHODS, config.alphas, results, meta)


def run_experiment(config: ExperimentConfig) -> ResultTable:
    runner = {
        "simple": run_simple_experiment,
        "stability": run_stability_experiment,
        "multicv": run_multicv_experiment,
    }[config.experiment]
    return runner(config)


# ---------------------------------------------------------------------------
# output


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header: tuple, rows: list) -> None:
    # hand-rolled writer: no field ever contains a comma, and repr() floats
    # round-trip exactly, which keeps equal runs byte-identical
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_result_table(table: ResultTable, out_dir: str) -> list:
    """Write coverage.csv, pivots.csv, sx_curves.csv (when the experiment
    produces curves), and run_meta.json under out_dir.

    Returns the list of paths written. File contents are a pure function
    of the result table, independent of thread count and wall time.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "coverage.csv")
    _write_csv(path, ("method", "alpha", "coverage_pct", "mean_ci_len", "n"),
               table.coverage_rows)
    written.append(path)

    path = os.path.join(out_dir, "pivots.csv")
    _write_csv(path, ("sim_id", "target_j", "method", "pivot"), table.pivot_rows)
    written.append(path)

    if table.curve_rows:
        path = os.path.join(out_dir, "sx_curves.csv")
        _write_csv(path, ("x", "method", "s_value"), table.curve_rows)
        written.append(path)

    path = os.path.join(out_dir, "run_meta.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(table.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)
    return written
