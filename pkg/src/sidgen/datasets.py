"""Canonical record model, ingestion, splits, binarization, and mixing.

Datasets are immutable after construction; every operation returns a new
``Dataset``. On-disk format: JSONL records plus a sidecar manifest JSON,
content hash = SHA-256 over sorted record ids.
"""

import hashlib
import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import taxonomy
from .errors import (
    CompositionError,
    EmptyDatasetError,
    IngestError,
    ParameterError,
    SchemaError,
    SplitError,
)

_WS = re.compile(r"\s+")


def normalize_text(text):
    return _WS.sub(" ", text).strip()


def record_id(text, source_tag):
    h = hashlib.sha256()
    h.update(normalize_text(text).encode("utf-8"))
    h.update(b"|")
    h.update(source_tag.encode("utf-8"))
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class TextRecord:
    id: str
    text: str
    label: str
    topic: str = None
    user_id: str = None
    source: dict = field(default_factory=dict)
    split: str = None


def synthetic_source(provider, shot_mode, topic_oriented):
    return {
        "kind": "synthetic",
        "provider": provider,
        "shot_mode": shot_mode,
        "topic_oriented": bool(topic_oriented),
    }


def real_source(corpus_name):
    return {"kind": "real", "corpus_name": corpus_name}


def mixed_source(lineage):
    return {"kind": "mixed", "lineage": list(lineage)}


def source_tag(source):
    kind = source.get("kind", "unknown")
    if kind == "synthetic":
        return f"synthetic:{source.get('provider')}:{source.get('shot_mode')}"
    if kind == "real":
        return f"real:{source.get('corpus_name')}"
    return kind


class Dataset:
    def __init__(self, name, schema, records, source=None, params=None):
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            dup = [i for i, c in Counter(ids).items() if c > 1][0]
            raise CompositionError(f"duplicate record id {dup} in dataset {name!r}")
        for r in records:
            if r.label not in schema.names:
                raise SchemaError(
                    f"record {r.id} has label {r.label!r}, "
                    f"not a {schema.kind} level"
                )
        self.name = name
        self.schema = schema
        self.records = tuple(records)
        self.source = source or {}
        self.params = params or {}

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def ids(self):
        return frozenset(r.id for r in self.records)

    def content_hash(self):
        h = hashlib.sha256()
        for rid in sorted(r.id for r in self.records):
            h.update(rid.encode("ascii"))
        return h.hexdigest()

    def by_id(self, rid):
        for r in self.records:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def subset(self, ids, name):
        keep = frozenset(ids)
        return Dataset(
            name,
            self.schema,
            [r for r in self.records if r.id in keep],
            source=self.source,
            params=dict(self.params),
        )

    def manifest(self):
        n = len(self.records)
        classes = Counter(r.label for r in self.records)
        class_distribution = {
            name: {
                "count": classes.get(name, 0),
                "percent": round(100.0 * classes.get(name, 0) / n, 2) if n else 0.0,
            }
            for name in self.schema.names
        }
        topics = Counter(r.topic for r in self.records if r.topic)
        return {
            "name": self.name,
            "schema": self.schema.kind,
            "record_count": n,
            "class_distribution": class_distribution,
            "topic_distribution": dict(sorted(topics.items())),
            "creation_parameters": self.params,
            "content_hash": self.content_hash(),
        }

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        records_path = directory / f"{self.name}.jsonl"
        with records_path.open("w", encoding="utf-8") as fh:
            for r in self.records:
                row = {"id": r.id, "text": r.text, "label": r.label}
                if r.topic:
                    row["topic"] = r.topic
                if r.user_id:
                    row["user_id"] = r.user_id
                if r.source:
                    row["source"] = r.source
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        manifest_path = directory / f"{self.name}.manifest.json"
        manifest_path.write_text(
            json.dumps(self.manifest(), indent=2) + "\n", encoding="utf-8"
        )
        return records_path

    @classmethod
    def load(cls, records_path, schema, name=None):
        records_path = Path(records_path)
        records = []
        with records_path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                records.append(
                    TextRecord(
                        id=row["id"],
                        text=row["text"],
                        label=row["label"],
                        topic=row.get("topic"),
                        user_id=row.get("user_id"),
                        source=row.get("source", {}),
                    )
                )
        return cls(name or records_path.stem, schema, records)


def _canon_label(raw, schema):
    key = re.sub(r"[\s_\-]+", "", str(raw)).lower()
    for name in schema.names:
        if re.sub(r"[\s_\-]+", "", name).lower() == key:
            return name
    return None


def normalize_ingest(path, source, schema, name=None):
    """Ingest a normalized JSONL file ({text, label, user_id?, topic?}).

    Whitespace-normalized exact-duplicate texts collapse to the first
    occurrence; the removal count lands in the manifest parameters.
    """
    path = Path(path)
    tag = source_tag(source)
    seen = {}
    removed = 0
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {lineno}: invalid JSON ({exc})") from None
            text = row.get("text", "")
            if not normalize_text(text):
                raise IngestError(f"line {lineno}: empty text")
            label = _canon_label(row.get("label"), schema)
            if label is None:
                raise IngestError(
                    f"line {lineno}: unknown label {row.get('label')!r} "
                    f"for {schema.kind} schema"
                )
            key = normalize_text(text)
            if key in seen:
                removed += 1
                continue
            seen[key] = True
            records.append(
                TextRecord(
                    id=record_id(text, tag),
                    text=text,
                    label=label,
                    topic=row.get("topic"),
                    user_id=row.get("user_id"),
                    source=source,
                )
            )
    if not records:
        raise EmptyDatasetError(f"{path} contains no records")
    return Dataset(
        name or path.stem,
        schema,
        records,
        source=source,
        params={"ingested_from": str(path), "duplicates_removed": removed},
    )


@dataclass(frozen=True)
class SplitSpec:
    val: float = 0.10
    test: float = 0.20
    train: float = 0.70
    seed: int = 0
    unit: str = None  # by_user | by_record; None = by_user when user ids exist
    stratify_by_label: bool = True

    def __post_init__(self):
        if abs(self.val + self.test + self.train - 1.0) > 1e-9:
            raise ParameterError("split fractions must sum to 1")


def split_sizes(n, spec):
    """val and test are rounded; train takes the remainder."""
    val = round(spec.val * n)
    test = round(spec.test * n)
    train = n - val - test
    if train < 0:
        raise SplitError(f"dataset of size {n} too small for the split")
    return {"train": train, "test": test, "val": val}


def _allocate(class_counts, part_sizes):
    """Apportion each class's count across parts so that part totals are met
    exactly and each cell is within 1 of its proportional share.

    Floor the proportional shares, then assign the leftover units by maximum
    flow with unit capacity per (class, part) cell, so no cell ever exceeds
    its floor by more than one. The fractional share matrix itself is a
    feasible point of the flow polytope, so a saturating integral flow always
    exists.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    n = sum(class_counts.values())
    classes = sorted(class_counts)
    parts = sorted(part_sizes)
    cells = {}
    class_deficit = dict(class_counts)
    part_deficit = dict(part_sizes)
    for c in classes:
        for p in parts:
            base = int(class_counts[c] * part_sizes[p] / n) if n else 0
            cells[(c, p)] = base
            class_deficit[c] -= base
            part_deficit[p] -= base
    remaining = sum(class_deficit.values())
    if remaining == 0:
        return cells

    # nodes: 0 source, 1..C classes, C+1..C+P parts, C+P+1 sink
    n_classes, n_parts = len(classes), len(parts)
    sink = 1 + n_classes + n_parts
    rows, cols, caps = [], [], []
    for ci, c in enumerate(classes):
        if class_deficit[c] > 0:
            rows.append(0)
            cols.append(1 + ci)
            caps.append(class_deficit[c])
        for pi in range(n_parts):
            rows.append(1 + ci)
            cols.append(1 + n_classes + pi)
            caps.append(1)
    for pi, p in enumerate(parts):
        if part_deficit[p] > 0:
            rows.append(1 + n_classes + pi)
            cols.append(sink)
            caps.append(part_deficit[p])
    graph = csr_matrix((caps, (rows, cols)), shape=(sink + 1, sink + 1))
    result = maximum_flow(graph, 0, sink)
    if result.flow_value != remaining:
        raise SplitError("allocation failed")  # cannot happen, see docstring
    flow = result.flow.tocoo()
    for r, col, f in zip(flow.row, flow.col, flow.data):
        if f == 1 and 1 <= r <= n_classes and col > n_classes and col < sink:
            cells[(classes[r - 1], parts[col - 1 - n_classes])] += 1
    return cells


def _assign_units(units_by_class, part_sizes, seed):
    """units_by_class: label -> list of unit keys. Returns part -> set of keys."""
    class_counts = {c: len(us) for c, us in units_by_class.items()}
    cells = _allocate(class_counts, part_sizes)
    rng = random.Random(seed)
    assignment = {p: set() for p in part_sizes}
    parts = sorted(part_sizes)
    for c in sorted(units_by_class):
        units = sorted(units_by_class[c])
        rng.shuffle(units)
        pos = 0
        for p in parts:
            take = cells[(c, p)]
            assignment[p].update(units[pos : pos + take])
            pos += take
    return assignment


def _majority_label(records):
    counts = Counter(r.label for r in records)
    top = max(counts.values())
    return sorted(l for l, c in counts.items() if c == top)[0]


def split_dataset(dataset, spec):
    """Deterministic stratified split into train/test/val."""
    unit = spec.unit
    has_users = all(r.user_id for r in dataset.records)
    if unit is None:
        unit = "by_user" if has_users else "by_record"
    if unit == "by_user" and not has_users:
        raise SplitError("by_user split requires user_id on every record")
    if unit not in ("by_user", "by_record"):
        raise SplitError(f"unknown split unit {unit!r}")

    if unit == "by_user":
        groups = {}
        for r in dataset.records:
            groups.setdefault(r.user_id, []).append(r)
        unit_label = {u: _majority_label(rs) for u, rs in groups.items()}
        n = len(groups)
    else:
        unit_label = {r.id: r.label for r in dataset.records}
        n = len(dataset.records)

    sizes = split_sizes(n, spec)
    if spec.stratify_by_label:
        by_class = {}
        for u, lab in unit_label.items():
            by_class.setdefault(lab, []).append(u)
    else:
        by_class = {"_all": list(unit_label)}
    assignment = _assign_units(by_class, sizes, spec.seed)

    out = {}
    for part in ("train", "test", "val"):
        keys = assignment[part]
        if unit == "by_user":
            recs = [
                replace(r, split=part)
                for r in dataset.records
                if r.user_id in keys
            ]
        else:
            recs = [replace(r, split=part) for r in dataset.records if r.id in keys]
        out[part] = Dataset(
            f"{dataset.name}.{part}",
            dataset.schema,
            recs,
            source=dataset.source,
            params={
                "split_of": dataset.name,
                "split": part,
                "unit": unit,
                "seed": spec.seed,
            },
        )
    return out


def binarize_distribution(distribution):
    """Collapse a fourclass name->value mapping (counts or percents) onto the
    binary schema by exact summation."""
    out = {"NonSuicidal": None, "Suicidal": None}
    for name, value in distribution.items():
        target = taxonomy.binarize(name)
        out[target] = value if out[target] is None else out[target] + value
    return out


def binarize_dataset(dataset, name=None):
    if dataset.schema.kind != taxonomy.FOURCLASS:
        raise SchemaError(f"dataset {dataset.name!r} is already {dataset.schema.kind}")
    records = [
        replace(r, label=taxonomy.binarize(r.label)) for r in dataset.records
    ]
    return Dataset(
        name or f"{dataset.name}.binary",
        taxonomy.BINARY_SCHEMA,
        records,
        source=dataset.source,
        params={"binarized_from": dataset.name},
    )


def holdout_synthetic_test(datasets, fraction=0.10, seed=0, name="synthetic_test"):
    """Pull a stratified round(fraction*N) sample from each dataset into a
    shared test pool; returns (pool, remainders)."""
    if not (0 <= fraction < 1):
        raise ParameterError(f"holdout fraction {fraction} outside [0, 1)")
    kinds = {d.schema.kind for d in datasets}
    if len(kinds) > 1:
        raise SchemaError(f"datasets mix schemas: {sorted(kinds)}")
    pool_records = []
    remainders = []
    for d in datasets:
        m = round(fraction * len(d))
        by_class = {}
        for r in d.records:
            by_class.setdefault(r.label, []).append(r.id)
        assignment = _assign_units(
            by_class, {"pool": m, "rest": len(d) - m}, seed=f"{seed}|{d.name}"
        )
        pool_ids = assignment["pool"]
        pool_records.extend(r for r in d.records if r.id in pool_ids)
        remainders.append(d.subset(d.ids() - pool_ids, f"{d.name}.rest"))
    schema = datasets[0].schema
    pool = Dataset(
        name,
        schema,
        pool_records,
        source=mixed_source([d.name for d in datasets]),
        params={"holdout_fraction": fraction, "seed": seed},
    )
    return pool, remainders


def dataset_from_parsed(parsed_records, schema, source, name, topics=None):
    """Build a dataset from parser output, collapsing duplicate ids.

    Topic strings are mapped to registry ids by display name when a registry
    is given; unmatched topics are kept verbatim.
    """
    topic_ids = {}
    for t in topics or ():
        topic_ids[t.display_name.lower()] = t.id
        topic_ids[t.id] = t.id
    tag = source_tag(source)
    seen = set()
    records = []
    dropped = 0
    for p in parsed_records:
        rid = record_id(p.text, tag)
        if rid in seen:
            dropped += 1
            continue
        seen.add(rid)
        topic = topic_ids.get(p.topic.lower()) if p.topic else None
        records.append(
            TextRecord(
                id=rid,
                text=normalize_text(p.text),
                label=p.label,
                topic=topic or p.topic,
                source=source,
            )
        )
    if not records:
        raise EmptyDatasetError("no records survived parsing")
    return Dataset(
        name,
        schema,
        records,
        source=source,
        params={"duplicates_removed": dropped},
    )


def compose_mix(datasets, name):
    """Concatenate datasets with disjoint ids into one mixed dataset."""
    kinds = {d.schema.kind for d in datasets}
    if len(kinds) > 1:
        raise SchemaError(f"datasets mix schemas: {sorted(kinds)}")
    seen = set()
    records = []
    for d in datasets:
        overlap = seen & d.ids()
        if overlap:
            raise CompositionError(
                f"duplicate record ids across inputs: {sorted(overlap)[:3]}"
            )
        seen |= d.ids()
        records.extend(d.records)
    return Dataset(
        name,
        datasets[0].schema,
        records,
        source=mixed_source([d.name for d in datasets]),
        params={"composed_from": [d.name for d in datasets]},
    )
