import pytest

from vslsim.scenario import (ScenarioSchemaError, ScenarioValidationError,
                             apply_override, build_scenario,
                             bundled_scenario_names, load_bundled, loads,
                             parse_document)

MINIMAL = """
schema_version: 1
name: minimal
duration: 5.0
dt: 0.001
"""


class TestLoad:
    def test_minimal_document(self):
        sc = loads(MINIMAL)
        assert sc.name == "minimal"
        assert sc.duration == 5.0
        assert sc.stiffness_schedule == ()
        assert sc.payload_events == ()
        assert sc.disturbances.events == ()
        assert sc.sigma_at_start() == 0.0

    def test_bundled_hover_impacts_structure(self):
        sc = load_bundled("hover_impacts")
        assert sc.duration == 60.0
        sigmas = [c.sigma for c in sc.stiffness_schedule]
        assert sigmas == [0.0, 1.0, 0.0]
        assert len(sc.disturbances.events) == 6
        assert all(e.target == "tip" for e in sc.disturbances.events)
        labels = [w.label for w in sc.analysis_windows]
        assert labels == ["flex1", "rigid", "flex2"]

    def test_all_bundled_scenarios_load(self):
        names = bundled_scenario_names()
        assert len(names) >= 6
        for name in names:
            sc = load_bundled(name)
            assert sc.duration > 0

    def test_sigma_at_start_follows_schedule(self):
        sc = loads(MINIMAL + "stiffness_schedule:\n  - {t: 0.0, sigma: 0.7}\n")
        assert sc.sigma_at_start() == 0.7

    def test_initial_sigma_wins(self):
        sc = loads(MINIMAL + "initial_sigma: 0.4\n")
        assert sc.sigma_at_start() == 0.4


class TestSchemaErrors:
    def test_missing_version(self):
        with pytest.raises(ScenarioSchemaError, match="schema_version"):
            loads("name: x\nduration: 1.0\n")

    def test_wrong_version(self):
        with pytest.raises(ScenarioSchemaError, match="unsupported version"):
            loads("schema_version: 2\nname: x\nduration: 1.0\n")

    def test_missing_name(self):
        with pytest.raises(ScenarioSchemaError, match="'name'"):
            loads("schema_version: 1\nduration: 1.0\n")

    def test_mistyped_duration(self):
        with pytest.raises(ScenarioSchemaError, match="duration"):
            loads("schema_version: 1\nname: x\nduration: soon\n")

    def test_unknown_top_level_field(self):
        with pytest.raises(ScenarioSchemaError, match="unknown top-level"):
            loads(MINIMAL + "extra_field: 1\n")

    def test_unknown_param(self):
        with pytest.raises(ScenarioSchemaError, match="params"):
            loads(MINIMAL + "params: {bogus: 1}\n")

    def test_not_yaml(self):
        with pytest.raises(ScenarioSchemaError, match="not valid YAML"):
            loads("{{{{")

    def test_empty_document(self):
        with pytest.raises(ScenarioSchemaError, match="empty"):
            loads("")


class TestValidationErrors:
    def test_sigma_out_of_range(self):
        with pytest.raises(ScenarioValidationError, match=r"sigma out of \[0, 1\]"):
            loads(MINIMAL + "stiffness_schedule:\n  - {t: 1.0, sigma: 1.5}\n")

    def test_unordered_schedule(self):
        with pytest.raises(ScenarioValidationError, match="non-decreasing"):
            loads(MINIMAL + "stiffness_schedule:\n"
                            "  - {t: 2.0, sigma: 0.0}\n"
                            "  - {t: 1.0, sigma: 1.0}\n")

    def test_event_beyond_duration(self):
        with pytest.raises(ScenarioValidationError, match=r"outside \[0, 5.0\]"):
            loads(MINIMAL + "payload_events:\n  - {t: 9.0, m_p: 1.0}\n")

    def test_negative_mass(self):
        with pytest.raises(ScenarioValidationError, match="mass"):
            loads(MINIMAL + "payload_events:\n  - {t: 1.0, m_p: -1.0}\n")

    def test_bad_payload_label(self):
        with pytest.raises(ScenarioValidationError, match="label"):
            loads(MINIMAL + "payload_events:\n  - {t: 1.0, m_p: 1.0, label: drop}\n")

    def test_window_outside_duration(self):
        with pytest.raises(ScenarioValidationError, match="outside"):
            loads(MINIMAL + "analysis_windows:\n  - {label: w, t0: 0.0, t1: 99.0}\n")

    def test_duplicate_window_labels(self):
        with pytest.raises(ScenarioValidationError, match="duplicate"):
            loads(MINIMAL + "analysis_windows:\n"
                            "  - {label: w, t0: 0.0, t1: 1.0}\n"
                            "  - {label: w, t0: 2.0, t1: 3.0}\n")

    def test_bad_dt(self):
        with pytest.raises(ScenarioValidationError, match="dt"):
            loads("schema_version: 1\nname: x\nduration: 1.0\ndt: 0.5\n")


class TestOverride:
    def test_patch_scalar_field(self):
        doc = parse_document(MINIMAL)
        apply_override(doc, "duration", 9.0)
        assert build_scenario(doc).duration == 9.0

    def test_patch_nested_list_entry(self):
        doc = parse_document(MINIMAL + "stiffness_schedule:\n  - {t: 0.0, sigma: 0.0}\n")
        apply_override(doc, "stiffness_schedule.0.sigma", 0.5)
        assert build_scenario(doc).stiffness_schedule[0].sigma == 0.5

    def test_creates_missing_containers(self):
        doc = parse_document(MINIMAL)
        apply_override(doc, "params.k_max", 400.0)
        assert build_scenario(doc).params.k_max == 400.0

    def test_bad_list_index(self):
        doc = parse_document(MINIMAL + "stiffness_schedule:\n  - {t: 0.0, sigma: 0.0}\n")
        with pytest.raises(ScenarioValidationError, match="index"):
            apply_override(doc, "stiffness_schedule.5.sigma", 0.5)

    def test_cannot_descend_into_scalar(self):
        doc = parse_document(MINIMAL)
        with pytest.raises(ScenarioValidationError, match="scalar"):
            apply_override(doc, "duration.x.y", 1.0)
