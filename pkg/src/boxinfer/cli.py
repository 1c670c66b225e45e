"""Command-line entry point.

Subcommands: the three replicated experiments (simple, stability,
multicv) and a one-shot `infer` that runs the learned-selection pipeline
on user-supplied statistics. Exit codes: 0 on success, 2 for
configuration problems, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import build_config
from .exceptions import BoxinferError, ConfigError, DomainError
from .experiments import (
    _stability_lambda_grid,
    run_experiment,
    write_result_table,
)
from .inference import (
    TargetDecomposition,
    build_density_grid,
    decompose_full,
    estimate_selection_prob,
    generate_labels,
    learned_prob_to_json,
    sample_covariates,
    selective_ci,
    selective_pvalue,
)
from .lasso import geometric_grid
from .selectors import SelectorSpec
from .stats import SeededStream

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxinfer",
        description=(
            "Conditional inference after black-box selection: replicated "
            "simulation experiments and one-shot inference on supplied "
            "statistics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, blurb in (
        ("simple", "threshold selection of a scalar mean"),
        ("stability", "stability selection over randomized Lasso paths"),
        ("multicv", "repeated cross-validated Lasso on half subsamples"),
    ):
        sp = sub.add_parser(name, help=blurb)
        sp.add_argument("--config", default=None,
                        help="flat key = value file overriding the preset")
        sp.add_argument("--scale", choices=("desk", "paper"), default="desk",
                        help="preset size: quick desk run or full-size run")
        sp.add_argument("--seed", type=int, default=None, help="root seed")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads over replications")
        sp.add_argument("--out", default=None,
                        help="directory for coverage.csv, pivots.csv, "
                             "sx_curves.csv, run_meta.json")

    ip = sub.add_parser("infer", help="one-shot inference from a config file")
    ip.add_argument("--config", required=True,
                    help="flat key = value file describing the selector, "
                         "data, and target")
    ip.add_argument("--seed", type=int, default=0, help="root seed")
    ip.add_argument("--threads", type=int, default=1,
                    help="worker threads over selector replays")
    ip.add_argument("--out", default=None,
                    help="directory for results.json and fit.json")
    return parser


# ---------------------------------------------------------------------------
# one-shot inference

_INFER_INT = {"m", "n", "n_s", "n_folds", "B", "df", "target"}
_INFER_FLOAT = {"q", "tau", "sigma", "sigma2", "x_obs", "alpha", "mu0"}
_INFER_STR = {"kind", "mode", "link", "gram_csv", "xty_csv", "x_csv", "y_csv"}
_INFER_KEYS = _INFER_INT | _INFER_FLOAT | _INFER_STR

_INFER_DEFAULTS = {
    "mode": "direct",
    "link": "probit",
    "df": 10,
    "B": 1000,
    "alpha": 0.05,
    "mu0": 0.0,
    "target": 0,
}


def _parse_infer_config(path: str) -> dict:
    values = dict(_INFER_DEFAULTS)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _INFER_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _INFER_INT:
                values[key] = int(raw)
            elif key in _INFER_FLOAT:
                values[key] = float(raw)
            else:
                values[key] = raw
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: cannot parse {key!r}: {raw!r}") from exc
    return values


def _need(values: dict, *keys):
    out = []
    for key in keys:
        if key not in values:
            raise ConfigError(f"infer config is missing required key {key!r}")
        out.append(values[key])
    return out[0] if len(out) == 1 else out


def _load_matrix(path: str, name: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read {name} from {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{name} at {path} is not a numeric CSV: {exc}") from exc


def _infer_setup(values: dict):
    """Build (spec, decomposition, target) from a parsed infer config.

    Validation failures inside the constructors mean the supplied values
    are unusable, so they surface as configuration errors.
    """
    kind = _need(values, "kind")
    try:
        if kind == "simple-threshold":
            x_obs = float(_need(values, "x_obs"))
            m, q, tau, sigma, n, n_s = _need(
                values, "m", "q", "tau", "sigma", "n", "n_s"
            )
            spec = SelectorSpec.simple_threshold(m, q, tau, sigma, n, n_s)
            tv = float(sigma) ** 2 / float(n)
            decomp = TargetDecomposition(
                n_obs=np.zeros(1),
                direction=np.ones(1),
                target_var=tv,
                stat_obs=x_obs,
                target_kind="general",
            )
            return spec, decomp, 0
        if kind == "stability":
            m, q, sigma2, target = _need(values, "m", "q", "sigma2", "target")
            gram = _load_matrix(_need(values, "gram_csv"), "gram matrix")
            xty = _load_matrix(_need(values, "xty_csv"), "X'y vector").reshape(-1)
            if values["mode"] != "direct":
                raise ConfigError(
                    "stability selection aggregates path frequencies, not "
                    "counts of one repeated run; only mode = direct applies"
                )
            lam_grid = _stability_lambda_grid(gram, xty)
            spec = SelectorSpec.stability(m, q, gram, sigma2, lam_grid)
            decomp = decompose_full(xty, int(target), gram, sigma2)
            return spec, decomp, int(target)
        if kind == "multi-cv":
            m, q, n_folds, sigma2, target = _need(
                values, "m", "q", "n_folds", "sigma2", "target"
            )
            X = _load_matrix(_need(values, "x_csv"), "design matrix")
            y = _load_matrix(_need(values, "y_csv"), "response vector").reshape(-1)
            gram = X.T @ X
            d = X.T @ y
            lam_max = float(np.max(np.abs(d)))
            if lam_max <= 0.0:
                raise ConfigError("X'y is identically zero; nothing to select")
            lam_grid = geometric_grid(0.01 * lam_max, lam_max, 100)
            spec = SelectorSpec.multi_cv(m, q, n_folds, X, y, lam_grid)
            decomp = decompose_full(d, int(target), gram, sigma2)
            return spec, decomp, int(target)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(
        f"kind must be simple-threshold, stability, or multi-cv, got {kind!r}"
    )


def _cmd_infer(args) -> None:
    values = _parse_infer_config(args.config)
    mode = values["mode"]
    if mode not in ("direct", "binomial-component"):
        raise ConfigError("mode must be direct or binomial-component")
    link = values["link"]
    alpha = float(values["alpha"])
    mu0 = float(values["mu0"])
    B = int(values["B"])
    df = int(values["df"])
    if B < 1:
        raise ConfigError("B must be a positive integer")

    spec, decomp, target = _infer_setup(values)
    stream = SeededStream(args.seed)
    zs = sample_covariates(decomp.stat_obs, decomp.target_sd, B, stream.child(0))
    sample = generate_labels(
        spec, decomp, zs, target, mode, stream.child(1),
        threads=max(1, int(args.threads)),
    )
    try:
        q_threshold = spec.params["q"] if mode == "binomial-component" else None
        prob = estimate_selection_prob(sample, link, df, q_threshold=q_threshold)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    grid = build_density_grid(prob, decomp.stat_obs, decomp.target_var)
    pvalue = selective_pvalue(grid, mu0, decomp.stat_obs)
    lo, hi = selective_ci(grid, decomp.stat_obs, alpha=alpha)

    results = {
        "kind": spec.kind,
        "mode": mode,
        "link": link,
        "target": target,
        "stat_obs": decomp.stat_obs,
        "target_var": decomp.target_var,
        "mu0": mu0,
        "alpha": alpha,
        "pvalue": pvalue,
        "ci_lower": lo,
        "ci_upper": hi,
        "n_labels": int(sample.ws.size),
        "label_mean": float(sample.ws.mean()),
        "n_dropped": int(sample.n_dropped),
        "seed": int(args.seed),
    }
    print(
        f"{spec.kind} target={target} stat={decomp.stat_obs:.6g} "
        f"p={pvalue:.4g} ci=({lo:.6g}, {hi:.6g}) at alpha={alpha:g}"
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rpath = os.path.join(args.out, "results.json")
        with open(rpath, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
            fh.write("\n")
        fpath = os.path.join(args.out, "fit.json")
        with open(fpath, "w", encoding="utf-8") as fh:
            json.dump(learned_prob_to_json(prob), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {rpath} and {fpath}")


def _cmd_experiment(args) -> None:
    config = build_config(
        args.command,
        scale=args.scale,
        config_path=args.config,
        seed=args.seed,
        threads=args.threads,
        out_dir=args.out,
    )
    table = run_experiment(config)
    for line in table.summary_lines():
        print(line)
    if config.out_dir:
        for path in write_result_table(table, config.out_dir):
            print(f"wrote {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "infer":
            _cmd_infer(args)
        else:
            _cmd_experiment(args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BoxinferError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
