"""Extraction of labeled records from free-form model output.

Providers are asked for JSON but frequently wrap it in prose or markdown
fences; a three-step repair ladder (strict parse, fenced block, largest
balanced JSON substring) recovers the payload where possible. Rejections are
data, not failures: they are tallied in the ParseReport.
"""

import json
import re
from dataclasses import dataclass, field

from .errors import NoPayloadError

FLAG_REPAIRED = "repaired"
FLAG_LABEL_COERCED = "label_coerced"
FLAG_TOPIC_UNKNOWN = "topic_unknown"

MIN_TEXT_LENGTH = 20

# Observed provider drift on the label column name.
LABEL_KEYS = ("risk level", "risk_level", "riskLevel", "label")
TEXT_KEYS = ("text", "post", "content")
TOPIC_KEYS = ("topic",)

# Fixed synonym table on top of schema level names.
_LABEL_SYNONYMS = {
    "nonsuicidal": "NonSuicidal",
    "notsuicidal": "NonSuicidal",
    "nonsuicide": "NonSuicidal",
    "suicidal": "Suicidal",
    "suicide": "Suicidal",
    "norisk": "NoRisk",
    "lowrisk": "LowRisk",
    "moderaterisk": "ModerateRisk",
    "mediumrisk": "ModerateRisk",
    "highrisk": "HighRisk",
}

_FENCE = re.compile(r"```(?:[a-zA-Z]+)?\s*(.*?)```", re.DOTALL)


@dataclass
class ParsedRecord:
    text: str
    topic: str
    raw_label: str
    label: str
    provenance: dict = field(default_factory=dict)
    flags: frozenset = frozenset()


@dataclass
class ParseReport:
    accepted: int = 0
    repaired: int = 0
    rejected: int = 0
    rejection_reasons: dict = field(default_factory=dict)

    def reject(self, reason):
        self.rejected += 1
        self.rejection_reasons[reason] = self.rejection_reasons.get(reason, 0) + 1

    def to_dict(self):
        return {
            "accepted": self.accepted,
            "repaired": self.repaired,
            "rejected": self.rejected,
            "rejection_reasons": dict(sorted(self.rejection_reasons.items())),
        }


def _largest_embedded_json(text):
    decoder = json.JSONDecoder()
    best = None
    best_len = 0
    for m in re.finditer(r"[\[{]", text):
        start = m.start()
        try:
            value, end = decoder.raw_decode(text[start:])
        except json.JSONDecodeError:
            continue
        if end > best_len and isinstance(value, (list, dict)):
            best, best_len = value, end
    return best


def extract_payload(response_text):
    """Return (json_value, repaired). Strict parse first, then fenced code
    blocks, then the largest balanced bracketed substring."""
    try:
        return json.loads(response_text), False
    except json.JSONDecodeError:
        pass
    for block in _FENCE.findall(response_text):
        try:
            return json.loads(block), True
        except json.JSONDecodeError:
            continue
    embedded = _largest_embedded_json(response_text)
    if embedded is not None:
        return embedded, True
    raise NoPayloadError("no JSON payload found", response_text=response_text)


def _first_key(candidate, keys):
    for k in keys:
        if k in candidate:
            return candidate[k]
    return None


def coerce_label(raw, schema):
    """Case/whitespace/hyphen-insensitive match against the schema's level
    names and the synonym table. Returns (name, coerced) or (None, False)."""
    if raw is None:
        return None, False
    raw_str = str(raw)
    key = re.sub(r"[\s_\-]+", "", raw_str).lower()
    for lv in schema.levels:
        if raw_str == lv.name:
            return lv.name, False
        for alias in (lv.name, lv.prompt_name):
            if re.sub(r"[\s_\-]+", "", alias).lower() == key:
                return lv.name, True
    name = _LABEL_SYNONYMS.get(key)
    if name is not None and name in schema.names:
        return name, True
    return None, False


def parse_completion(
    completion,
    spec,
    topics=None,
    min_text_length=MIN_TEXT_LENGTH,
):
    """Validate every candidate record in one raw completion.

    Returns (records, report). Unknown topics are kept but flagged; short
    texts and unknown labels are rejected.
    """
    report = ParseReport()
    known_topics = {t.id for t in topics or ()} | {
        t.display_name.lower() for t in (topics or ())
    }
    provenance = {
        "provider": getattr(completion, "provider", None),
        "job_id": getattr(completion, "job_id", None),
        "request_index": getattr(completion, "request_index", None),
    }
    try:
        payload, repaired = extract_payload(completion.response_text)
    except NoPayloadError:
        report.reject("no_payload")
        return [], report

    if not isinstance(payload, (list, dict)):
        report.reject("unexpected_payload")
        return [], report
    if isinstance(payload, dict):
        # either a single record or a wrapper like {"answers": [...]}
        for v in payload.values():
            if isinstance(v, list):
                payload = v
                break
        else:
            payload = [payload]

    records = []
    for candidate in payload:
        if not isinstance(candidate, dict):
            report.reject("not_an_object")
            continue
        text = _first_key(candidate, TEXT_KEYS)
        text = str(text).strip() if text is not None else ""
        if len(text) < min_text_length:
            report.reject("text_too_short")
            continue
        raw_label = _first_key(candidate, LABEL_KEYS)
        label, coerced = coerce_label(raw_label, spec.schema)
        if label is None:
            report.reject("unknown_label")
            continue
        flags = set()
        if repaired:
            flags.add(FLAG_REPAIRED)
        if coerced:
            flags.add(FLAG_LABEL_COERCED)
        topic = _first_key(candidate, TOPIC_KEYS)
        topic = str(topic).strip() if topic else None
        if topic and known_topics and topic.lower() not in known_topics:
            flags.add(FLAG_TOPIC_UNKNOWN)
        records.append(
            ParsedRecord(
                text=text,
                topic=topic,
                raw_label="" if raw_label is None else str(raw_label),
                label=label,
                provenance=dict(provenance),
                flags=frozenset(flags),
            )
        )
        report.accepted += 1
        if repaired:
            report.repaired += 1
    return records, report
