import json

import pytest

from rashomon_vi.config import RunConfig, parse_config, validate_config
from rashomon_vi.errors import ConfigError


def synth_doc(**overrides) -> dict:
    doc = {
        "data": {"source": "synthetic", "strengths": {"a": 0.9, "z": 0.0}},
        "master_seed": 7,
    }
    doc.update(overrides)
    return doc


def oulad_doc(**overrides) -> dict:
    doc = {
        "data": {"source": "oulad", "oulad_dir": "/data/oulad", "courses": ["AAA"]},
        "master_seed": 7,
    }
    doc.update(overrides)
    return doc


def problems_of(doc) -> list[str]:
    with pytest.raises(ConfigError) as err:
        parse_config(doc)
    return err.value.problems


class TestDefaults:
    def test_all_defaults_materialized(self):
        cfg = parse_config(synth_doc())
        assert cfg.master_seed == 7
        assert cfg.target_modes == ("binary", "multiclass")
        assert cfg.split_ratio == 0.25
        assert cfg.epsilon == 0.05
        assert cfg.pvi_repeats == 10
        assert cfg.viod_mode == "min"
        assert cfg.out_dir == "runs/rashomon"
        assert cfg.search.n_random == 200
        assert (cfg.search.bayes.n_iter, cfg.search.bayes.n_init) == (30, 26)
        assert cfg.search.total_models() == 424
        synth = cfg.data.synthetic
        assert (synth.n_rows, synth.levels_per_variable, synth.scale) == (1000, 4, 3.0)
        assert synth.course_tag == "synth"

    def test_courses_helper(self):
        assert parse_config(synth_doc()).courses() == ("synth",)
        assert parse_config(oulad_doc()).courses() == ("AAA",)

    def test_oulad_courses_default_to_all_four(self):
        doc = oulad_doc()
        del doc["data"]["courses"]
        assert parse_config(doc).courses() == ("AAA", "BBB", "DDD", "EEE")

    def test_resolved_round_trips_through_parse(self):
        cfg = parse_config(synth_doc(epsilon=0.1, viod_mode="max"))
        resolved = cfg.resolved()
        assert resolved["epsilon"] == 0.1
        assert resolved["viod_mode"] == "max"
        assert resolved["search"]["n_random"] == 200
        again = parse_config(json.loads(json.dumps(
            {k: v for k, v in resolved.items() if k != "search"}
            | {"search": {"n_random": resolved["search"]["n_random"],
                          "bayes": resolved["search"]["bayes"]}}
        )))
        assert again == cfg


class TestTopLevelValidation:
    def test_master_seed_required(self):
        doc = synth_doc()
        del doc["master_seed"]
        assert any("master_seed" in p for p in problems_of(doc))

    def test_negative_master_seed(self):
        assert any("master_seed" in p for p in problems_of(synth_doc(master_seed=-1)))

    def test_unknown_key_typo_guard(self):
        assert "epsillon: unknown key" in problems_of(synth_doc(epsillon=0.05))

    def test_negative_epsilon_names_field(self):
        assert any(p.startswith("epsilon") for p in problems_of(synth_doc(epsilon=-0.1)))

    def test_bad_split_ratio(self):
        assert any("split_ratio" in p for p in problems_of(synth_doc(split_ratio=1.0)))

    def test_bad_target_modes(self):
        assert any("target_modes" in p
                   for p in problems_of(synth_doc(target_modes=["binary", "binary"])))
        assert any("target_modes" in p
                   for p in problems_of(synth_doc(target_modes=["regression"])))

    def test_bad_viod_mode(self):
        assert any("viod_mode" in p for p in problems_of(synth_doc(viod_mode="mean")))

    def test_bad_pvi_repeats(self):
        assert any("pvi_repeats" in p for p in problems_of(synth_doc(pvi_repeats=0)))

    def test_multiple_problems_reported_together(self):
        problems = problems_of(synth_doc(epsilon=-1, viod_mode="avg", pvi_repeats=0))
        assert len(problems) >= 3

    def test_non_object_root(self):
        assert problems_of([1, 2]) == ["config root must be a JSON object"]


class TestDataValidation:
    def test_missing_data(self):
        assert "data: required object" in problems_of({"master_seed": 1})

    def test_bad_source(self):
        doc = synth_doc()
        doc["data"]["source"] = "csv"
        assert any("data.source" in p for p in problems_of(doc))

    def test_oulad_requires_dir(self):
        doc = oulad_doc()
        del doc["data"]["oulad_dir"]
        assert any("data.oulad_dir" in p for p in problems_of(doc))

    def test_oulad_rejects_unknown_course(self):
        doc = oulad_doc()
        doc["data"]["courses"] = ["AAA", "ZZZ"]
        assert any("data.courses" in p for p in problems_of(doc))

    def test_synth_keys_rejected_for_oulad(self):
        doc = oulad_doc()
        doc["data"]["n_rows"] = 500
        assert any("only valid for synthetic" in p for p in problems_of(doc))

    def test_oulad_keys_rejected_for_synth(self):
        doc = synth_doc()
        doc["data"]["courses"] = ["AAA"]
        assert any("only valid for oulad" in p for p in problems_of(doc))

    def test_strengths_required_and_bounded(self):
        doc = synth_doc()
        del doc["data"]["strengths"]
        assert any("data.strengths" in p for p in problems_of(doc))
        doc = synth_doc()
        doc["data"]["strengths"] = {"a": 1.5}
        assert any("data.strengths" in p for p in problems_of(doc))

    def test_small_n_rows_rejected(self):
        doc = synth_doc()
        doc["data"]["n_rows"] = 10
        assert any("data.n_rows" in p for p in problems_of(doc))

    def test_unknown_data_key(self):
        doc = synth_doc()
        doc["data"]["nrows"] = 100
        assert "data.nrows: unknown key" in problems_of(doc)


class TestSearchValidation:
    def test_bayes_null_allowed(self):
        cfg = parse_config(synth_doc(search={"n_random": 10, "bayes": None}))
        assert cfg.search.bayes is None
        assert cfg.search.total_models() == 10

    def test_empty_space_rejected(self):
        problems = problems_of(synth_doc(search={"n_random": 0, "bayes": None}))
        assert any("empty space" in p for p in problems)

    def test_bayes_budget_bounds(self):
        problems = problems_of(
            synth_doc(search={"n_random": 5, "bayes": {"n_iter": 0, "n_init": 1}})
        )
        assert any("search.bayes.n_iter" in p for p in problems)
        assert any("search.bayes.n_init" in p for p in problems)

    def test_unknown_search_key(self):
        problems = problems_of(synth_doc(search={"n_random": 5, "nrandom": 2}))
        assert "search.nrandom: unknown key" in problems

    def test_partial_bayes_uses_defaults(self):
        cfg = parse_config(synth_doc(search={"n_random": 5, "bayes": {"n_iter": 3}}))
        assert (cfg.search.bayes.n_iter, cfg.search.bayes.n_init) == (3, 26)


class TestValidateConfigFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(synth_doc()))
        cfg = validate_config(path)
        assert isinstance(cfg, RunConfig)
        assert cfg.master_seed == 7

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            validate_config(tmp_path / "absent.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            validate_config(path)
