"""Label schemas, risk-level criteria, and the suicide-related topic registry.

The default registry ships 14 social/psychological factors as data
(``data/topics.json``) so deployments can extend or replace them without
code changes.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import InvalidLabelError, SchemaError

BINARY = "binary"
FOURCLASS = "fourclass"


@dataclass(frozen=True)
class Topic:
    id: str
    display_name: str
    description: str = ""
    citation_keys: tuple = ()

    def __post_init__(self):
        if not self.id or not self.display_name:
            raise ValueError("topic id and display_name must be nonempty")


@dataclass(frozen=True)
class RiskLevel:
    name: str          # canonical label value, e.g. "NonSuicidal"
    prompt_name: str   # spelling used inside prompts, e.g. "Non Suicidal"
    criterion: str

    def __post_init__(self):
        if not self.criterion:
            raise ValueError(f"risk level {self.name} has no criterion")


@dataclass(frozen=True)
class LabelSchema:
    kind: str
    levels: tuple = field(default_factory=tuple)

    def __post_init__(self):
        expected = {BINARY: 2, FOURCLASS: 4}.get(self.kind)
        if expected is None:
            raise SchemaError(f"unknown schema kind {self.kind!r}")
        if len(self.levels) != expected:
            raise SchemaError(
                f"{self.kind} schema needs {expected} levels, got {len(self.levels)}"
            )
        names = [lv.name for lv in self.levels]
        if len(set(names)) != len(names):
            raise SchemaError("level names must be unique")

    @property
    def names(self):
        return [lv.name for lv in self.levels]

    def level(self, name):
        for lv in self.levels:
            if lv.name == name:
                return lv
        raise InvalidLabelError(f"{name!r} is not a level of the {self.kind} schema")


# Criteria prose for NonSuicidal/Suicidal follows the published prompt wording;
# the two middle fourclass criteria are editable paraphrases (replace via
# dataclasses.replace or a custom schema).
BINARY_SCHEMA = LabelSchema(
    kind=BINARY,
    levels=(
        RiskLevel(
            "NonSuicidal",
            "Non Suicidal",
            "I do not see evidence that this person is at risk for suicide",
        ),
        RiskLevel(
            "Suicidal",
            "Suicidal",
            "I believe this person is at high risk of attempting suicide in the near future.",
        ),
    ),
)

FOURCLASS_SCHEMA = LabelSchema(
    kind=FOURCLASS,
    levels=(
        RiskLevel(
            "NoRisk",
            "No Risk",
            "I do not see evidence that this person is at risk for suicide",
        ),
        RiskLevel(
            "LowRisk",
            "Low Risk",
            "This person may have occasional thoughts of suicide but shows no plan or intent",
        ),
        RiskLevel(
            "ModerateRisk",
            "Moderate Risk",
            "This person shows clear signs of suicidal ideation and may act on it",
        ),
        RiskLevel(
            "HighRisk",
            "High Risk",
            "I believe this person is at high risk of attempting suicide in the near future.",
        ),
    ),
)

SCHEMAS = {BINARY: BINARY_SCHEMA, FOURCLASS: FOURCLASS_SCHEMA}

_BINARIZE = {
    "NoRisk": "NonSuicidal",
    "LowRisk": "NonSuicidal",
    "ModerateRisk": "Suicidal",
    "HighRisk": "Suicidal",
}

CRITERIA_HEADER = "These are the criteria of different suicide risk level:"


def get_schema(kind):
    try:
        return SCHEMAS[kind]
    except KeyError:
        raise SchemaError(f"unknown schema kind {kind!r}") from None


def binarize(level_name):
    """Map a fourclass level name onto the binary schema."""
    try:
        return _BINARIZE[level_name]
    except KeyError:
        raise InvalidLabelError(
            f"{level_name!r} is not a fourclass risk level"
        ) from None


def render_criteria(schema):
    """Render the criteria block embedded in generation prompts.

    One ``Risk Level=<name>: <criterion>`` line per level, preceded by the
    header sentence. Byte-stable for a given schema.
    """
    lines = [CRITERIA_HEADER]
    for lv in schema.levels:
        lines.append(f"Risk Level={lv.prompt_name}: {lv.criterion}")
    return "\n".join(lines)


def load_topics(path_or_file):
    """Load a topic registry from a JSON array of topic objects."""
    if hasattr(path_or_file, "read"):
        raw = json.load(path_or_file)
    else:
        with open(path_or_file, encoding="utf-8") as fh:
            raw = json.load(fh)
    topics = [
        Topic(
            id=t["id"],
            display_name=t["display_name"],
            description=t.get("description", ""),
            citation_keys=tuple(t.get("citation_keys", ())),
        )
        for t in raw
    ]
    ids = [t.id for t in topics]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate topic ids in registry")
    return topics


def default_topics():
    """The 14 bundled suicide-related social/psychological factors."""
    with resources.files("sidgen.data").joinpath("topics.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return load_topics(fh)
