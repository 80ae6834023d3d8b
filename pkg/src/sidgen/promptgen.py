"""Rendering of zero-shot and few-shot generation prompts.

Rendering is a pure function of the spec (and exemplars): identical inputs
give identical bytes, which the golden-file tests rely on. Output is
ASCII-normalized (straight quotes only).
"""

import hashlib
import random
from dataclasses import dataclass

from .errors import InsufficientClassError, InvalidExemplarsError, InvalidSpecError
from .taxonomy import LabelSchema, render_criteria

ZERO_SHOT = "zero_shot"
FEW_SHOT = "few_shot"

OUTPUT_COLUMNS = ("text", "topic", "risk level")

JSON_INSTRUCTION = (
    "Provide the answers in JSON format with the following columns: "
    + ", ".join(OUTPUT_COLUMNS)
    + "."
)


@dataclass(frozen=True)
class PromptSpec:
    schema: LabelSchema
    topics: tuple = ()          # empty tuple means "without topics"
    with_topics: bool = True
    shot_mode: str = ZERO_SHOT
    exemplars_per_class: int = 0
    instance_count: int = 10    # only used in no-topic mode

    def __post_init__(self):
        if self.shot_mode not in (ZERO_SHOT, FEW_SHOT):
            raise InvalidSpecError(f"unknown shot mode {self.shot_mode!r}")
        if self.with_topics and not self.topics:
            raise InvalidSpecError("WithTopics spec requires a nonempty topic list")
        if self.shot_mode == FEW_SHOT and self.exemplars_per_class < 1:
            raise InvalidSpecError("few-shot spec needs exemplars_per_class >= 1")


@dataclass(frozen=True)
class Exemplar:
    text: str
    label: str
    source_id: str = ""


def _task_block(spec):
    lines = []
    if spec.with_topics:
        lines.append(
            'Your task is to generate a suicidal text for each of the following '
            '"topics" with different Risk levels.'
        )
        lines.append("")
        for i, topic in enumerate(spec.topics, start=1):
            lines.append(f"{i}-{topic.display_name}")
    else:
        lines.append(
            f"Your task is to generate {spec.instance_count} short texts "
            "with different Risk levels."
        )
    lines.append("")
    lines.append(JSON_INSTRUCTION)
    lines.append("")
    lines.append("Risk level criteria: ```" + render_criteria(spec.schema) + "```")
    return "\n".join(lines) + "\n"


def render_zero_shot(spec):
    if spec.shot_mode != ZERO_SHOT:
        raise InvalidSpecError("render_zero_shot requires a zero-shot spec")
    return _task_block(spec)


def render_few_shot(spec, exemplars):
    """Few-shot prompt: exemplar blocks (grouped by class in schema order)
    followed by the zero-shot instruction block."""
    if spec.shot_mode != FEW_SHOT:
        raise InvalidSpecError("render_few_shot requires a few-shot spec")
    by_label = {name: [] for name in spec.schema.names}
    for ex in exemplars:
        if ex.label not in by_label:
            raise InvalidExemplarsError(
                f"exemplar label {ex.label!r} not in the {spec.schema.kind} schema"
            )
        by_label[ex.label].append(ex)
    k = spec.exemplars_per_class
    for name, group in by_label.items():
        if len(group) != k:
            raise InvalidExemplarsError(
                f"class {name} has {len(group)} exemplars, expected {k}"
            )
    lines = ["Here are examples of labeled texts:", ""]
    for level in spec.schema.levels:
        for ex in by_label[level.name]:
            lines.append(f"Example (Risk Level={level.prompt_name}):")
            lines.append(ex.text)
            lines.append("")
    return "\n".join(lines) + "\n" + _task_block(spec)


def render(spec, exemplars=None):
    if spec.shot_mode == FEW_SHOT:
        return render_few_shot(spec, exemplars or [])
    return render_zero_shot(spec)


def prompt_hash(prompt_text):
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


def select_exemplars(dataset, k, seed):
    """Draw exactly k exemplars per class, without replacement, seeded on
    (dataset content hash, k, seed) so repeated calls agree."""
    by_label = {name: [] for name in dataset.schema.names}
    for rec in dataset.records:
        by_label[rec.label].append(rec)
    for name, group in by_label.items():
        if len(group) < k:
            raise InsufficientClassError(name, len(group), k)
    rng = random.Random(f"{dataset.content_hash()}|{k}|{seed}")
    out = []
    for name in dataset.schema.names:
        group = sorted(by_label[name], key=lambda r: r.id)
        for rec in rng.sample(group, k):
            out.append(Exemplar(text=rec.text, label=rec.label, source_id=rec.id))
    return out
