"""Configuration tests: INI loading, override precedence, validation."""

import pytest

from mvan.config import (
    OUTPUT_DIR_ENV,
    VARIANTS,
    ConfigError,
    ModelConfig,
    load_config,
    normalize_variant,
    resolved_ini,
    variant_display_name,
)

SAMPLE_INI = """\
[experiment]
seed = 7
n_runs = 3
output_dir = runs/sample
split_ratio = 0.8

[model]
variant = MVAN-TSA
embed_dim = 16
gru_hidden = 8
dropout = 0.2

[trainer]
epochs = 12
learning_rate = 0.005

[synthetic]
n_examples = 40
text_signal_strength = 0.7
"""


@pytest.fixture
def sample_path(tmp_path):
    p = tmp_path / "config.ini"
    p.write_text(SAMPLE_INI)
    return str(p)


class TestDefaults:
    def test_no_file_gives_synthetic_defaults(self):
        cfg = load_config(None)
        assert cfg.data is None
        assert cfg.synthetic is not None
        assert cfg.seed == 0
        assert cfg.n_runs == 10
        assert cfg.model.variant == "MVAN"
        assert cfg.trainer.epochs == 100
        assert cfg.early_detection.mode == "test_only"

    def test_variant_capability_flags(self):
        assert ModelConfig(variant="MVAN").uses_text
        assert ModelConfig(variant="MVAN").uses_graph
        assert not ModelConfig(variant="TSAN").uses_graph
        assert not ModelConfig(variant="PSAN").uses_text
        assert not ModelConfig(variant="MVAN_TSA").uses_word_attention
        assert not ModelConfig(variant="MVAN_PSA").uses_graph_attention


class TestVariantNames:
    def test_normalization_accepts_dashes_and_case(self):
        assert normalize_variant("mvan-tsa") == "MVAN_TSA"
        assert normalize_variant("MVAN_PSA") == "MVAN_PSA"

    def test_display_names_use_dashes(self):
        assert variant_display_name("MVAN_TSA") == "MVAN-TSA"
        assert variant_display_name("MVAN") == "MVAN"

    def test_every_variant_round_trips(self):
        for v in VARIANTS:
            assert normalize_variant(variant_display_name(v)) == v

    def test_unknown_variant_rejected(self):
        with pytest.raises(ConfigError, match="variant"):
            normalize_variant("BERT")


class TestFileLoading:
    def test_values_coerced_per_field_type(self, sample_path):
        cfg = load_config(sample_path)
        assert cfg.seed == 7
        assert cfg.n_runs == 3
        assert cfg.split_ratio == 0.8
        assert cfg.model.variant == "MVAN_TSA"
        assert cfg.model.embed_dim == 16
        assert cfg.model.dropout == 0.2
        assert cfg.trainer.epochs == 12
        assert cfg.synthetic.n_examples == 40
        assert cfg.synthetic.text_signal_strength == 0.7

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config("/nonexistent/config.ini")

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[optimizer]\nlr = 1\n")
        with pytest.raises(ConfigError, match=r"unknown config section \[optimizer\]"):
            load_config(str(p))

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[model]\nwidth = 3\n")
        with pytest.raises(ConfigError, match="unknown option model.width"):
            load_config(str(p))

    def test_bad_value_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[trainer]\nepochs = many\n")
        with pytest.raises(ConfigError, match="bad value for trainer.epochs"):
            load_config(str(p))

    def test_fractions_parse_as_float_tuple(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[early_detection]\nfractions = 0.1, 0.5,1.0\n")
        assert load_config(str(p)).early_detection.fractions == (0.1, 0.5, 1.0)


class TestOverrides:
    def test_override_beats_file(self, sample_path):
        cfg = load_config(sample_path, ["experiment.seed=99", "model.embed_dim=4"])
        assert cfg.seed == 99
        assert cfg.model.embed_dim == 4
        assert cfg.n_runs == 3  # untouched file value survives

    def test_env_var_beats_override(self, sample_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, "/tmp/from-env")
        cfg = load_config(sample_path, ["experiment.output_dir=from-override"])
        assert cfg.output_dir == "/tmp/from-env"

    def test_malformed_override_rejected(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            load_config(None, ["seed=3"])
        with pytest.raises(ConfigError, match="section.key=value"):
            load_config(None, ["experiment.seed"])

    def test_unknown_override_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            load_config(None, ["optimizer.lr=1"])


class TestSourceSelection:
    def test_both_sources_rejected(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[data]\ntweets = a\nretweets = b\nusers = c\n\n[synthetic]\nn_examples = 10\n")
        with pytest.raises(ConfigError, match="not both"):
            load_config(str(p))

    def test_data_section_requires_paths(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[data]\ntweets = a.jsonl\n")
        with pytest.raises(ConfigError, match="data section requires"):
            load_config(str(p))

    def test_empty_optional_path_means_absent(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text(
            "[data]\ntweets = a\nretweets = b\nusers = c\nembeddings =\n"
        )
        cfg = load_config(str(p))
        assert cfg.data.embeddings is None


class TestValidation:
    @pytest.mark.parametrize(
        "override, message",
        [
            ("model.dropout=1.0", "dropout"),
            ("model.embed_dim=0", ">= 1"),
            ("model.readout=sum", "readout"),
            ("trainer.epochs=0", "epochs"),
            ("trainer.val_fraction=1.0", "val_fraction"),
            ("trainer.learning_rate=-1", "learning_rate"),
            ("experiment.n_runs=0", "n_runs"),
            ("experiment.split_ratio=1.0", "split_ratio"),
            ("early_detection.fractions=1.5", "outside"),
            ("early_detection.mode=stream", "mode"),
            ("explain.top_k=0", "top_k"),
            ("synthetic.n_examples=3", "even"),
        ],
    )
    def test_invalid_values_rejected(self, override, message):
        with pytest.raises(ConfigError, match=message):
            load_config(None, [override])


class TestResolvedIni:
    def test_deterministic_text(self, sample_path):
        a = resolved_ini(load_config(sample_path))
        b = resolved_ini(load_config(sample_path))
        assert a == b

    def test_reload_is_a_fixed_point(self, sample_path, tmp_path):
        text = resolved_ini(load_config(sample_path))
        p = tmp_path / "resolved.ini"
        p.write_text(text)
        assert resolved_ini(load_config(str(p))) == text

    def test_mentions_every_resolved_value(self, sample_path):
        text = resolved_ini(load_config(sample_path))
        assert "[experiment]" in text
        assert "seed = 7" in text
        assert "variant = MVAN_TSA" in text
        assert "[synthetic]" in text
        assert "[data]" not in text
