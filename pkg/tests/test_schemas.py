import json

import pytest

from anywhere.agents.schemas import (
    ANALYSIS_ANSWERS,
    FOREGROUND_DESCRIPTION,
    SCENE_RANKING,
    SCENE_SET,
    SchemaRegistry,
    extract_json_object,
)
from anywhere.errors import SchemaError

QIDS = ("common_context", "placed_normally")


@pytest.fixture
def registry():
    return SchemaRegistry(n_scenes=5, question_ids=QIDS)


class TestExtraction:
    def test_bare_object(self):
        assert extract_json_object('{"a": 1}') == {"a": 1}

    def test_prose_and_fence(self):
        text = 'Sure! Here you go:\n```json\n{"name": "chair", "n": 2}\n```\nHope it helps.'
        assert extract_json_object(text) == {"name": "chair", "n": 2}

    def test_nested_braces_and_strings(self):
        text = 'prefix {"a": {"b": "}"}, "c": [1, 2]} suffix'
        assert extract_json_object(text) == {"a": {"b": "}"}, "c": [1, 2]}

    def test_skips_invalid_candidates(self):
        text = "{not json} then {\"ok\": true}"
        assert extract_json_object(text) == {"ok": True}

    def test_no_object(self):
        with pytest.raises(SchemaError):
            extract_json_object("just words, no json")


class TestForegroundDescription:
    def test_valid(self, registry):
        raw = '{"name":"chair","viewpoint":"horizontal view","description":"a chair"}'
        parsed = registry.validate_json(raw, FOREGROUND_DESCRIPTION)
        assert parsed["name"] == "chair"

    def test_wrapped_in_prose_parses_identically(self, registry):
        raw = '{"name":"chair","viewpoint":"horizontal view","description":"a chair"}'
        wrapped = f"Here is the JSON you asked for:\n```json\n{raw}\n```"
        assert registry.validate_json(wrapped, FOREGROUND_DESCRIPTION) == \
            registry.validate_json(raw, FOREGROUND_DESCRIPTION)

    def test_missing_viewpoint(self, registry):
        with pytest.raises(SchemaError, match="viewpoint"):
            registry.validate_json('{"name":"chair","description":"x"}',
                                   FOREGROUND_DESCRIPTION)

    def test_empty_name_rejected(self, registry):
        raw = '{"name":"","viewpoint":"v","description":"d"}'
        with pytest.raises(SchemaError, match="name"):
            registry.validate_json(raw, FOREGROUND_DESCRIPTION)

    def test_extra_fields_ignored(self, registry):
        raw = '{"name":"chair","viewpoint":"v","description":"d","mood":"sassy"}'
        parsed = registry.validate_json(raw, FOREGROUND_DESCRIPTION)
        assert "mood" not in parsed


class TestSceneSet:
    def test_exact_count(self, registry):
        raw = json.dumps({"scenes": [f"scene {i}" for i in range(5)]})
        assert len(registry.validate_json(raw, SCENE_SET)["scenes"]) == 5

    def test_wrong_count(self, registry):
        raw = json.dumps({"scenes": ["a", "b", "c"]})
        with pytest.raises(SchemaError, match="scenes"):
            registry.validate_json(raw, SCENE_SET)

    def test_configurable_n(self):
        reg = SchemaRegistry(n_scenes=3, question_ids=QIDS)
        raw = json.dumps({"scenes": ["a", "b", "c"]})
        assert reg.validate_json(raw, SCENE_SET)["scenes"] == ["a", "b", "c"]


class TestSceneRanking:
    def test_valid_permutation(self, registry):
        parsed = registry.validate_json('{"ranks":[3,1,5,2,4]}', SCENE_RANKING)
        assert parsed["ranks"] == [3, 1, 5, 2, 4]

    def test_identity_permutation(self, registry):
        assert registry.validate_json('{"ranks":[1,2,3,4,5]}', SCENE_RANKING)["ranks"] == \
            [1, 2, 3, 4, 5]

    def test_duplicate_rejected(self, registry):
        with pytest.raises(SchemaError, match="permutation"):
            registry.validate_json('{"ranks":[1,1,3,4,5]}', SCENE_RANKING)

    def test_out_of_range_rejected(self, registry):
        with pytest.raises(SchemaError, match="permutation"):
            registry.validate_json('{"ranks":[0,1,2,3,4]}', SCENE_RANKING)

    def test_non_integer_rejected(self, registry):
        with pytest.raises(SchemaError):
            registry.validate_json('{"ranks":[1,2,"3",4,5]}', SCENE_RANKING)


class TestAnalysisAnswers:
    def test_valid(self, registry):
        raw = '{"common_context":"yes","placed_normally":"no"}'
        parsed = registry.validate_json(raw, ANALYSIS_ANSWERS)
        assert parsed["answers"] == {"common_context": True, "placed_normally": False}

    def test_missing_question(self, registry):
        with pytest.raises(SchemaError, match="placed_normally"):
            registry.validate_json('{"common_context":"yes"}', ANALYSIS_ANSWERS)

    def test_case_insensitive_yes(self, registry):
        raw = '{"common_context":"Yes","placed_normally":"NO"}'
        parsed = registry.validate_json(raw, ANALYSIS_ANSWERS)
        assert parsed["answers"]["common_context"] is True

    def test_aesthetic_range(self, registry):
        raw = '{"common_context":"yes","placed_normally":"yes","aesthetic":4}'
        assert registry.validate_json(raw, ANALYSIS_ANSWERS)["aesthetic"] == 4
        bad = '{"common_context":"yes","placed_normally":"yes","aesthetic":6}'
        with pytest.raises(SchemaError, match="aesthetic"):
            registry.validate_json(bad, ANALYSIS_ANSWERS)


def test_unknown_schema_id(registry):
    with pytest.raises(SchemaError, match="unknown schema"):
        registry.validate_json("{}", "haiku")
