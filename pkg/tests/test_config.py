"""Config assembly: presets, file parsing, precedence, validation."""

import os

import pytest

from boxinfer.config import ExperimentConfig, PRESETS, build_config, parse_config_file
from boxinfer.exceptions import ConfigError


class TestPresets:
    def test_all_presets_valid(self):
        for experiment, scales in PRESETS.items():
            for scale in scales:
                cfg = build_config(experiment, scale=scale)
                assert cfg.experiment == experiment

    def test_desk_smaller_than_paper(self):
        for experiment in PRESETS:
            desk = build_config(experiment, "desk")
            paper = build_config(experiment, "paper")
            assert desk.nsims <= paper.nsims
            assert desk.B <= paper.B

    def test_simple_paper_sizes(self):
        cfg = build_config("simple", "paper")
        assert cfg.B == 10_000
        assert cfg.nsims == 1000
        assert cfg.m == 20
        assert cfg.q == 0.5


class TestParseFile:
    def test_values_comments_blanks(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment line\n"
            "nsims = 12   # trailing comment\n"
            "\n"
            "q=0.4\n"
            "links = probit, logit\n"
            "alphas = 0.05, 0.1\n"
        )
        values = parse_config_file(str(path))
        assert values == {
            "nsims": 12,
            "q": 0.4,
            "links": ("probit", "logit"),
            "alphas": (0.05, 0.1),
        }

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("wibble = 3\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_file(str(path))

    def test_bad_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("nsims = many\n")
        with pytest.raises(ConfigError, match="cannot parse"):
            parse_config_file(str(path))

    def test_not_key_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("just words\n")
        with pytest.raises(ConfigError, match="expected"):
            parse_config_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config_file(str(tmp_path / "nope.cfg"))


class TestBuildConfig:
    def test_file_overrides_preset(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("nsims = 7\nB = 55\n")
        cfg = build_config("simple", "desk", config_path=str(path))
        assert cfg.nsims == 7 and cfg.B == 55
        assert cfg.m == PRESETS["simple"]["desk"]["m"]

    def test_override_beats_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("nsims = 7\n")
        cfg = build_config("simple", "desk", config_path=str(path), nsims=3, seed=9)
        assert cfg.nsims == 3 and cfg.seed == 9

    def test_none_override_ignored(self):
        cfg = build_config("simple", "desk", seed=None)
        assert cfg.seed == 0

    def test_bad_experiment_and_scale(self):
        with pytest.raises(ConfigError):
            build_config("mystery")
        with pytest.raises(ConfigError):
            build_config("simple", scale="huge")


class TestValidation:
    def test_rho_range(self):
        with pytest.raises(ConfigError, match="rho"):
            ExperimentConfig(experiment="stability", rho=1.0)
        with pytest.raises(ConfigError, match="rho"):
            ExperimentConfig(experiment="stability", rho=-0.1)

    def test_q_open_interval(self):
        for q in (0.0, 1.0, -0.2):
            with pytest.raises(ConfigError, match="q"):
                ExperimentConfig(experiment="simple", q=q)

    def test_counts_positive(self):
        for key in ("n", "m", "B", "nsims", "df"):
            with pytest.raises(ConfigError, match=key):
                ExperimentConfig(experiment="simple", **{key: 0})

    def test_alpha_levels(self):
        with pytest.raises(ConfigError, match="alpha"):
            ExperimentConfig(experiment="simple", alphas=(0.05, 1.0))
        with pytest.raises(ConfigError, match="alpha"):
            ExperimentConfig(experiment="simple", alphas=())

    def test_links_subset(self):
        with pytest.raises(ConfigError, match="links"):
            ExperimentConfig(experiment="simple", links=("probit", "cauchit"))

    def test_sparsity_vs_p(self):
        with pytest.raises(ConfigError, match="sparsity"):
            ExperimentConfig(experiment="stability", p=4, sparsity=5)

    def test_subsample_vs_n(self):
        with pytest.raises(ConfigError, match="n_s"):
            ExperimentConfig(experiment="simple", n=10, n_s=20)
