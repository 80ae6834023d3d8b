"""Deterministic offline provider.

Speaks the same content contract as a real chat-completion provider: given a
rendered generation prompt it returns a JSON payload of {text, topic,
risk level} records. Output is a pure function of (prompt, request_index),
which keeps offline runs reproducible. Every third response is wrapped in a
markdown fence or prose so the repair ladder gets exercised end to end.
"""

import hashlib
import json
import re

_TOPIC_LINE = re.compile(r"^(\d+)-(.+)$", re.MULTILINE)
_COUNT = re.compile(r"generate (\d+) short texts")

_SUICIDAL_OPENERS = (
    "I feel completely hopeless about",
    "I can't stop thinking about ending it all because of",
    "Everything has become unbearable since",
    "I am drowning and nobody notices, it started with",
    "There is no way out of this pain from",
)
_SUICIDAL_CLOSERS = (
    "and I honestly don't see a reason to keep going anymore.",
    "and I keep wondering if everyone would be better off without me.",
    "and lately I've been planning how to make the pain stop for good.",
    "and I feel like such a burden that disappearing seems easier.",
)
_SAFE_OPENERS = (
    "I've been struggling with",
    "Things got really hard after",
    "It has been a tough year dealing with",
    "I went through a rough patch because of",
)
_SAFE_CLOSERS = (
    "but therapy and my support network are helping me cope and heal.",
    "but I'm grateful for my friends and I keep pushing forward every day.",
    "but I've learned healthier ways to manage it and I feel hopeful now.",
    "but talking to someone made a difference and I'm doing better.",
)
_MID_CLOSERS = (
    "and some days I have dark thoughts, though I would never act on them.",
    "and I sometimes wish I could disappear, but I still hold on to hope.",
)


def _pick(options, *seeds):
    h = hashlib.sha256("|".join(str(s) for s in seeds).encode("utf-8"))
    return options[int.from_bytes(h.digest()[:4], "big") % len(options)]


def _text_for(topic, level, request_index):
    if level in ("Suicidal", "High Risk", "Moderate Risk"):
        opener = _pick(_SUICIDAL_OPENERS, topic, level, request_index, "o")
        closers = _MID_CLOSERS if level == "Moderate Risk" else _SUICIDAL_CLOSERS
        closer = _pick(closers, topic, level, request_index, "c")
    else:
        opener = _pick(_SAFE_OPENERS, topic, level, request_index, "o")
        closers = _MID_CLOSERS if level == "Low Risk" else _SAFE_CLOSERS
        closer = _pick(closers, topic, level, request_index, "c")
    return f"{opener} {topic.lower()} {closer}"


def _levels_in(prompt):
    if "Risk Level=High Risk" in prompt:
        return ["No Risk", "Low Risk", "Moderate Risk", "High Risk"]
    return ["Non Suicidal", "Suicidal"]


def mock_response(prompt, request_index=0):
    levels = _levels_in(prompt)
    topics = [m.group(2).strip() for m in _TOPIC_LINE.finditer(prompt)]
    records = []
    if topics:
        for topic in topics:
            for level in levels:
                records.append(
                    {
                        "text": _text_for(topic, level, request_index),
                        "topic": topic,
                        "risk level": level,
                    }
                )
    else:
        m = _COUNT.search(prompt)
        count = int(m.group(1)) if m else 10
        generic = ("my life", "everything lately", "what happened to me")
        for i in range(count):
            level = levels[i % len(levels)]
            topic = _pick(generic, request_index, i)
            records.append(
                {
                    "text": _text_for(topic, level, f"{request_index}:{i}"),
                    "topic": None,
                    "risk level": level,
                }
            )
    payload = json.dumps(records, ensure_ascii=False, indent=1)
    style = request_index % 3
    if style == 1:
        return f"Here are the generated texts:\n```json\n{payload}\n```\n"
    if style == 2:
        return f"Sure. The requested answers follow.\n{payload}\nLet me know if you need more."
    return payload
