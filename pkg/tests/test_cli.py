"""Command-line interface: subcommands, exit codes, output files."""

import json
import os

import numpy as np
import pytest

from boxinfer.cli import main
from boxinfer.inference import learned_prob_from_json
from boxinfer.stats import SeededStream


def write_cfg(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)


class TestExperimentCommand:
    def test_simple_writes_all_files(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "nsims = 3\nB = 150\n")
        out = tmp_path / "r"
        code = main(["simple", "--config", cfg, "--seed", "1", "--out", str(out)])
        assert code == 0
        for name in ("coverage.csv", "pivots.csv", "sx_curves.csv", "run_meta.json"):
            assert (out / name).exists()
        header = (out / "coverage.csv").read_text().splitlines()[0]
        assert header == "method,alpha,coverage_pct,mean_ci_len,n"

    def test_no_out_dir_still_succeeds(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "nsims = 2\nB = 120\n")
        assert main(["simple", "--config", cfg, "--seed", "3"]) == 0

    def test_stability_runs(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "nsims = 2\nB = 60\np = 12\nsparsity = 3\n")
        out = tmp_path / "r"
        code = main(["stability", "--config", cfg, "--seed", "2", "--out", str(out)])
        assert code == 0
        assert (out / "pivots.csv").exists()
        assert not (out / "sx_curves.csv").exists()

    def test_unknown_key_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "wibble = 1\n")
        assert main(["simple", "--config", cfg]) == 2

    def test_invalid_value_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "q = 1.0\n")
        assert main(["simple", "--config", cfg]) == 2

    def test_missing_config_file_exits_2(self, tmp_path):
        assert main(["simple", "--config", str(tmp_path / "absent.cfg")]) == 2

    def test_unknown_flag_usage_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["simple", "--frobnicate"])
        assert exc.value.code == 2

    def test_unknown_subcommand_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["dance"])
        assert exc.value.code == 2

    def test_hopeless_selection_exits_3(self, tmp_path):
        # a threshold far beyond reach starves rejection sampling
        cfg = write_cfg(tmp_path / "t.cfg", "nsims = 1\nB = 100\ntau = 40.0\n")
        assert main(["simple", "--config", cfg, "--seed", "1"]) == 3

    def test_byte_identical_across_thread_counts(self, tmp_path):
        cfg = write_cfg(tmp_path / "t.cfg", "nsims = 3\nB = 120\n")
        out1, out4 = tmp_path / "a", tmp_path / "b"
        assert main(["simple", "--config", cfg, "--seed", "9",
                     "--threads", "1", "--out", str(out1)]) == 0
        assert main(["simple", "--config", cfg, "--seed", "9",
                     "--threads", "4", "--out", str(out4)]) == 0
        for name in ("coverage.csv", "pivots.csv", "sx_curves.csv", "run_meta.json"):
            assert (out1 / name).read_bytes() == (out4 / name).read_bytes()


@pytest.fixture(scope="module")
def lasso_inputs(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    rng = SeededStream(42).rng()
    X = rng.standard_normal((60, 8))
    beta = np.zeros(8)
    beta[2] = 3.0
    y = X @ beta + rng.normal(0.0, 2.0, 60)
    np.savetxt(d / "gram.csv", X.T @ X, delimiter=",")
    np.savetxt(d / "xty.csv", X.T @ y, delimiter=",")
    np.savetxt(d / "x.csv", X, delimiter=",")
    np.savetxt(d / "y.csv", y.reshape(-1, 1), delimiter=",")
    return d


class TestInferCommand:
    def test_simple_threshold(self, tmp_path):
        cfg = write_cfg(tmp_path / "i.cfg", (
            "kind = simple-threshold\nx_obs = 0.12\nm = 20\nq = 0.5\n"
            "tau = 0.0\nsigma = 1.0\nn = 100\nn_s = 50\nB = 600\n"
        ))
        out = tmp_path / "o"
        assert main(["infer", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
        res = json.loads((out / "results.json").read_text())
        assert 0.0 <= res["pvalue"] <= 1.0
        assert res["ci_lower"] < res["stat_obs"] < res["ci_upper"]
        fit = json.loads((out / "fit.json").read_text())
        prob = learned_prob_from_json(fit)
        val = prob.evaluate(0.12)
        assert 0.0 <= val <= 1.0

    def test_deterministic_across_seed_reuse(self, tmp_path):
        cfg = write_cfg(tmp_path / "i.cfg", (
            "kind = simple-threshold\nx_obs = 0.05\nm = 20\nq = 0.5\n"
            "tau = 0.0\nsigma = 1.0\nn = 100\nn_s = 50\nB = 400\n"
        ))
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["infer", "--config", cfg, "--seed", "8", "--out", str(out1)]) == 0
        assert main(["infer", "--config", cfg, "--seed", "8", "--out", str(out2)]) == 0
        assert (out1 / "results.json").read_bytes() == (out2 / "results.json").read_bytes()

    def test_stability_kind(self, tmp_path, lasso_inputs):
        cfg = write_cfg(tmp_path / "i.cfg", (
            f"kind = stability\ngram_csv = {lasso_inputs}/gram.csv\n"
            f"xty_csv = {lasso_inputs}/xty.csv\nm = 5\nq = 0.6\n"
            "sigma2 = 4.0\ntarget = 2\nB = 300\nlink = logit\n"
        ))
        out = tmp_path / "o"
        assert main(["infer", "--config", cfg, "--seed", "4", "--out", str(out)]) == 0
        res = json.loads((out / "results.json").read_text())
        # the planted coefficient is 3; the interval should sit well away
        # from zero for this strong signal
        assert res["ci_lower"] > 0.0

    def test_multicv_binomial_mode(self, tmp_path, lasso_inputs):
        cfg = write_cfg(tmp_path / "i.cfg", (
            f"kind = multi-cv\nx_csv = {lasso_inputs}/x.csv\n"
            f"y_csv = {lasso_inputs}/y.csv\nm = 3\nq = 0.66\nn_folds = 5\n"
            "sigma2 = 4.0\ntarget = 2\nB = 120\nmode = binomial-component\n"
        ))
        assert main(["infer", "--config", cfg, "--seed", "4"]) == 0

    def test_stability_binomial_mode_rejected(self, tmp_path, lasso_inputs):
        cfg = write_cfg(tmp_path / "i.cfg", (
            f"kind = stability\ngram_csv = {lasso_inputs}/gram.csv\n"
            f"xty_csv = {lasso_inputs}/xty.csv\nm = 5\nq = 0.6\n"
            "sigma2 = 4.0\ntarget = 2\nB = 100\nmode = binomial-component\n"
        ))
        assert main(["infer", "--config", cfg]) == 2

    def test_missing_required_key_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "i.cfg", "kind = stability\nm = 5\n")
        assert main(["infer", "--config", cfg]) == 2

    def test_missing_config_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["infer"])
        assert exc.value.code == 2

    def test_unknown_kind_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "i.cfg", "kind = telepathy\n")
        assert main(["infer", "--config", cfg]) == 2

    def test_missing_csv_exits_2(self, tmp_path):
        cfg = write_cfg(tmp_path / "i.cfg", (
            "kind = stability\ngram_csv = /nonexistent/g.csv\n"
            "xty_csv = /nonexistent/d.csv\nm = 5\nq = 0.6\nsigma2 = 4.0\ntarget = 0\n"
        ))
        assert main(["infer", "--config", cfg]) == 2
