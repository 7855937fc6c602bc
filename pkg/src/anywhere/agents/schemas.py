"""Structured-JSON validation for agent replies.

Chat models habitually wrap JSON in prose or fenced code blocks, so parsing
scans for the first balanced top-level object instead of trusting the whole
reply. Validation is strict on required fields and types and ignores extras.
"""
from __future__ import annotations

import json

from ..errors import SchemaError

FOREGROUND_DESCRIPTION = "foreground_description"
SCENE_SET = "scene_set"
SCENE_RANKING = "scene_ranking"
ANALYSIS_ANSWERS = "analysis_answers"


def extract_json_object(text: str) -> dict:
    """Extract and parse the first balanced top-level JSON object in ``text``.

    Raises SchemaError when no parseable object exists.
    """
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if escaped:
                escaped = False
                continue
            if ch == "\\" and in_string:
                escaped = True
            elif ch == '"':
                in_string = not in_string
            elif not in_string:
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        candidate = text[start : i + 1]
                        try:
                            value = json.loads(candidate)
                        except json.JSONDecodeError:
                            break
                        if isinstance(value, dict):
                            return value
                        break
        start = text.find("{", start + 1)
    raise SchemaError("no balanced JSON object found in reply", raw_text=text)


def _require_str(obj: dict, key: str) -> str:
    if key not in obj:
        raise SchemaError(f"{key}: required field missing")
    value = obj[key]
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{key}: must be a non-empty string")
    return value


class SchemaRegistry:
    """Validators plus the JSON-model strings rendered into prompt templates.

    ``n_scenes`` sizes the scene-set and ranking schemas; ``question_ids``
    names the analyzer's mandatory yes/no answers.
    """

    def __init__(self, n_scenes: int = 5,
                 question_ids: tuple[str, ...] = (),
                 allow_aesthetic: bool = True):
        if n_scenes < 1:
            raise ValueError("n_scenes must be >= 1")
        self.n_scenes = n_scenes
        self.question_ids = tuple(question_ids)
        self.allow_aesthetic = allow_aesthetic
        self._validators = {
            FOREGROUND_DESCRIPTION: self._validate_foreground_description,
            SCENE_SET: self._validate_scene_set,
            SCENE_RANKING: self._validate_scene_ranking,
            ANALYSIS_ANSWERS: self._validate_analysis_answers,
        }

    def known(self, schema_id: str) -> bool:
        return schema_id in self._validators

    def validate_json(self, raw: str, schema_id: str) -> dict:
        if schema_id not in self._validators:
            raise SchemaError(f"unknown schema id {schema_id!r}")
        obj = extract_json_object(raw)
        try:
            return self._validators[schema_id](obj)
        except SchemaError as err:
            err.raw_text = raw
            raise

    # -- validators ------------------------------------------------------

    def _validate_foreground_description(self, obj: dict) -> dict:
        return {
            "description": _require_str(obj, "description"),
            "name": _require_str(obj, "name"),
            "viewpoint": _require_str(obj, "viewpoint"),
        }

    def _validate_scene_set(self, obj: dict) -> dict:
        scenes = obj.get("scenes")
        if scenes is None:
            raise SchemaError("scenes: required field missing")
        if not isinstance(scenes, list) or len(scenes) != self.n_scenes:
            raise SchemaError(f"scenes: must be a list of exactly {self.n_scenes} entries")
        for i, scene in enumerate(scenes):
            if not isinstance(scene, str) or not scene.strip():
                raise SchemaError(f"scenes[{i}]: must be a non-empty string")
        return {"scenes": list(scenes)}

    def _validate_scene_ranking(self, obj: dict) -> dict:
        ranks = obj.get("ranks")
        if ranks is None:
            raise SchemaError("ranks: required field missing")
        n = self.n_scenes
        if (not isinstance(ranks, list) or len(ranks) != n
                or any(not isinstance(r, int) or isinstance(r, bool) for r in ranks)):
            raise SchemaError(f"ranks: must be a list of {n} integers")
        if sorted(ranks) != list(range(1, n + 1)):
            raise SchemaError(f"ranks: must be a permutation of 1..{n}")
        return {"ranks": list(ranks)}

    def _validate_analysis_answers(self, obj: dict) -> dict:
        answers = {}
        for qid in self.question_ids:
            if qid not in obj:
                raise SchemaError(f"{qid}: required field missing")
            value = obj[qid]
            if not isinstance(value, str) or value.strip().lower() not in ("yes", "no"):
                raise SchemaError(f'{qid}: must be "yes" or "no"')
            answers[qid] = value.strip().lower() == "yes"
        result = {"answers": answers}
        if self.allow_aesthetic and "aesthetic" in obj:
            score = obj["aesthetic"]
            if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
                raise SchemaError("aesthetic: must be an integer in 1..5")
            result["aesthetic"] = score
        return result

    # -- JSON model strings for {json_format} template slots -------------

    def model_text(self, schema_id: str) -> str:
        if schema_id == FOREGROUND_DESCRIPTION:
            return '{"description": "<detailed description>", "name": "<object name>", "viewpoint": "<viewpoint>"}'
        if schema_id == SCENE_SET:
            scenes = ", ".join(f'"<scene {i + 1}>"' for i in range(self.n_scenes))
            return f'{{"scenes": [{scenes}]}}'
        if schema_id == SCENE_RANKING:
            return (
                f'{{"ranks": [<{self.n_scenes} integers, a permutation of 1..'
                f"{self.n_scenes}, aligned with the scene order, where 1 marks "
                'the most appropriate scene>]}'
            )
        if schema_id == ANALYSIS_ANSWERS:
            fields = ", ".join(f'"{qid}": "yes|no"' for qid in self.question_ids)
            return "{" + fields + "}"
        raise SchemaError(f"unknown schema id {schema_id!r}")
