"""Outcome analysis: question the candidate image through the analyzer VLM,
turn the yes/no answers into a verdict, and build feedback text for the next
brainstorming round.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .agents import AgentClient, ChatRequest
from .agents.schemas import ANALYSIS_ANSWERS
from .errors import AnywhereError
from .prompt_generation import ForegroundDescription, load_template
from .raster import RasterImage, encode_png

# the first two questions appear verbatim in the analyzer instruction; the
# extras ride along inside the JSON answer model
MANDATORY_QUESTIONS: tuple[tuple[str, str | None], ...] = (
    ("common_context", None),
    ("placed_normally", None),
    ("perspective_consistent",
     "Is the camera perspective of the scene consistent with the viewpoint of the [{subject}]?"),
    ("background_relevant",
     "Is the background scene relevant to the [{subject}]?"),
)

QUESTION_IDS = tuple(qid for qid, _ in MANDATORY_QUESTIONS)

DEFAULT_AESTHETIC_FLOOR = 3


def _feedback_sentences() -> dict[str, str]:
    text = (
        resources.files("anywhere.templates")
        .joinpath("feedback_sentences.txt")
        .read_text("utf-8")
    )
    sentences = {}
    for line in text.splitlines():
        if line.strip():
            qid, _, sentence = line.partition(": ")
            sentences[qid] = sentence
    return sentences


@dataclass(frozen=True)
class AnalysisReport:
    answers: dict[str, bool]
    feedback_text: str
    passed: bool
    aesthetic_estimate: int | None = None

    @property
    def passed_count(self) -> int:
        return sum(self.answers.values())


@dataclass(frozen=True)
class Accept:
    pass


@dataclass(frozen=True)
class Regenerate:
    feedback: str


@dataclass(frozen=True)
class Exhausted:
    pass


Decision = Accept | Regenerate | Exhausted


def analyzer_json_format(request_aesthetic: bool = False) -> str:
    """Answer model rendered into the analyzer instruction's {json_format}
    slot; extra questions carry their text inline so the template body stays
    byte-identical to the shipped asset."""
    fields = []
    for qid, question in MANDATORY_QUESTIONS:
        if question is None:
            fields.append(f'"{qid}": "yes|no"')
        else:
            fields.append(f'"{qid}": "yes|no (answer for: {question})"')
    if request_aesthetic:
        fields.append('"aesthetic": <integer 1-5 rating the overall image>')
    return "{" + ", ".join(fields) + "}"


def render_analyzer_prompt(subject: str, request_aesthetic: bool = False) -> str:
    template = load_template("analyzer")
    return template.replace("{subject}", subject).replace(
        "{json_format}", analyzer_json_format(request_aesthetic)
    )


def build_feedback(answers: dict[str, bool], subject: str,
                   aesthetic_failed: bool = False) -> str:
    """One templated sentence per failed question, semicolon-joined."""
    sentences = _feedback_sentences()
    parts = [
        sentences[qid].replace("{subject}", subject)
        for qid in QUESTION_IDS
        if not answers.get(qid, False)
    ]
    if aesthetic_failed:
        parts.append(sentences["aesthetic"].replace("{subject}", subject))
    return "; ".join(parts)


def analyze_candidate(client: AgentClient, candidate: RasterImage,
                      subject: ForegroundDescription,
                      request_aesthetic: bool = False,
                      aesthetic_floor: int = DEFAULT_AESTHETIC_FLOOR,
                      seed: int | None = None) -> AnalysisReport:
    """Send the candidate to the analyzer and fold its answers into a verdict."""
    request = ChatRequest(
        system_prompt="",
        user_prompt=render_analyzer_prompt(subject.object_name, request_aesthetic),
        response_schema_id=ANALYSIS_ANSWERS,
        image_png=encode_png(candidate),
        seed=seed,
    )
    try:
        response = client.call_chat("analyzer", request, stage="analysis")
    except AnywhereError as err:
        raise err.tagged("analysis")
    answers: dict[str, bool] = response.parsed["answers"]
    aesthetic = response.parsed.get("aesthetic")
    aesthetic_ok = aesthetic is None or aesthetic >= aesthetic_floor
    passed = all(answers.get(qid, False) for qid in QUESTION_IDS) and aesthetic_ok
    feedback = "" if passed else build_feedback(
        answers, subject.object_name, aesthetic_failed=not aesthetic_ok
    )
    return AnalysisReport(answers=answers, feedback_text=feedback,
                          passed=passed, aesthetic_estimate=aesthetic)


def decide(report: AnalysisReport, iteration: int, max_iterations: int) -> Decision:
    """Map a report and the iteration budget to the loop decision."""
    if not 1 <= iteration <= max_iterations:
        raise ValueError(f"iteration {iteration} outside 1..{max_iterations}")
    if report.passed:
        return Accept()
    if iteration < max_iterations:
        return Regenerate(feedback=report.feedback_text)
    return Exhausted()
