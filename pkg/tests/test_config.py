"""JSON config parsing: unknown-key rejection and schema mapping."""

import pytest

from wranksim.config import (
    config_hash,
    load_json,
    parse_gradcheck_config,
    parse_sweep_file,
    parse_synth_config,
    parse_train_file,
)
from wranksim.exceptions import ParseError, ValidationError
from wranksim.model import Activation
from wranksim.ranking import TiePolicy
from wranksim.train import LossKind, RegularizerKind


class TestLoadJson:
    def test_reads_object(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"n_samples": 10}')
        assert load_json(path) == {"n_samples": 10}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_json(tmp_path / "nope.json")

    def test_syntax_error_names_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "a": 1,\n  oops\n}')
        with pytest.raises(ParseError, match="line 3"):
            load_json(path)

    def test_non_object_rejected(self, tmp_path):
        path = tmp_path / "arr.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValidationError, match="object"):
            load_json(path)


class TestSynthConfigParsing:
    def test_minimal(self):
        cfg = parse_synth_config({"n_samples": 100})
        assert cfg.n_samples == 100
        assert cfg.n_classes == 5

    def test_requires_n_samples(self):
        with pytest.raises(ValidationError, match="n_samples"):
            parse_synth_config({})

    def test_typo_rejected_with_suggestion_list(self):
        with pytest.raises(ValidationError, match="n_sample\\b"):
            parse_synth_config({"n_sample": 10})

    def test_custom_prior_list(self):
        cfg = parse_synth_config({"n_samples": 5, "n_classes": 2,
                                  "class_prior": [0.25, 0.75]})
        assert cfg.class_prior == (0.25, 0.75)

    def test_bool_is_not_a_number(self):
        with pytest.raises(ValidationError, match="n_samples"):
            parse_synth_config({"n_samples": True})

    def test_non_integer_count_rejected(self):
        with pytest.raises(ValidationError, match="n_samples"):
            parse_synth_config({"n_samples": 10.5})


class TestTrainFileParsing:
    def test_defaults_from_empty_object(self):
        cfg = parse_train_file({})
        assert cfg.train.loss is LossKind.CE
        assert cfg.train.regularizer is RegularizerKind.NONE
        assert cfg.hidden_dims == (128, 64)
        assert cfg.activation is Activation.RELU
        assert cfg.n_classes == 5
        assert cfg.ratios == (0.8, 0.1, 0.1)

    def test_full_mapping(self):
        cfg = parse_train_file({
            "loss": "lmcl", "regularizer": "wranksim", "gamma": 2.0,
            "lambda": 3.0, "lmcl_scale": 2.5, "lmcl_margin": 0.2,
            "lr": 1e-3, "weight_decay": 0.0, "epochs": 4, "batch_size": 8,
            "optimizer": "adam", "tie_policy": "permutation",
            "ratios": [0.6, 0.2, 0.2], "hidden_dims": [32, 16],
            "activation": "tanh", "n_classes": 3,
        })
        assert cfg.train.loss is LossKind.LMCL
        assert cfg.train.regularizer is RegularizerKind.WRANKSIM
        assert cfg.train.lam == 3.0
        assert cfg.train.lmcl.scale == 2.5
        assert cfg.train.tie_policy is TiePolicy.PERMUTATION
        assert cfg.hidden_dims == (32, 16)
        assert cfg.activation is Activation.TANH

    def test_gamma_typo_rejected(self):
        with pytest.raises(ValidationError, match="gama"):
            parse_train_file({"gama": 1.5})

    def test_seed_not_a_config_key(self):
        # seeds come from the command line alone
        with pytest.raises(ValidationError, match="seed"):
            parse_train_file({"seed": 3})

    def test_bad_enum_lists_alternatives(self):
        with pytest.raises(ValidationError, match="ce, lmcl"):
            parse_train_file({"loss": "hinge"})

    def test_bad_ratios_shape(self):
        with pytest.raises(ValidationError, match="ratios"):
            parse_train_file({"ratios": [0.8, 0.2]})

    def test_bad_hidden_dims(self):
        with pytest.raises(ValidationError, match="hidden_dims"):
            parse_train_file({"hidden_dims": [4, "eight"]})


class TestSweepFileParsing:
    BASE = {"batch_sizes": [2, 4], "seeds": [0, 1, 2]}

    def test_minimal(self):
        cfg = parse_sweep_file(dict(self.BASE))
        assert cfg.batch_sizes == (2, 4)
        assert cfg.seeds == (0, 1, 2)
        assert cfg.base.train.regularizer is RegularizerKind.NONE

    def test_grid_axes_cannot_be_fixed(self):
        with pytest.raises(ValidationError, match="regularizer"):
            parse_sweep_file({**self.BASE, "regularizer": "ranksim"})
        with pytest.raises(ValidationError, match="batch_size"):
            parse_sweep_file({**self.BASE, "batch_size": 2})

    def test_required_axes(self):
        with pytest.raises(ValidationError, match="batch_sizes"):
            parse_sweep_file({"seeds": [0, 1, 2]})
        with pytest.raises(ValidationError, match="seeds"):
            parse_sweep_file({"batch_sizes": [2, 4]})

    def test_axes_must_be_integer_lists(self):
        with pytest.raises(ValidationError, match="batch_sizes"):
            parse_sweep_file({"batch_sizes": [2, "four"], "seeds": [0, 1, 2]})
        with pytest.raises(ValidationError, match="seeds"):
            parse_sweep_file({"batch_sizes": [2, 4], "seeds": "012"})

    def test_shared_keys_still_parsed(self):
        cfg = parse_sweep_file({**self.BASE, "loss": "lmcl", "gamma": 0.5})
        assert cfg.base.train.loss is LossKind.LMCL
        assert cfg.base.train.gamma == 0.5

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="warmup"):
            parse_sweep_file({**self.BASE, "warmup": 10})


class TestGradcheckParsing:
    def test_defaults(self):
        cfg = parse_gradcheck_config({})
        assert cfg.cases == 100
        assert cfg.rank_cases == 1000

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match="tolerance"):
            parse_gradcheck_config({"tolerance": 1e-3})


class TestConfigHash:
    def test_stable_across_key_order(self):
        assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})

    def test_sensitive_to_values(self):
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_short_hex(self):
        digest = config_hash({"x": [1, 2, 3]})
        assert len(digest) == 12
        int(digest, 16)
