"""Classification metrics and the train-set x test-set evaluation matrix.

The source tables never state which F1 aggregation they use, so reports carry
positive-class (binary, positive = Suicidal), macro, and weighted F1 side by
side and every rendering labels the variant.
"""

import csv
import io
from dataclasses import dataclass, field

from .errors import LeakageError, ParameterError
from .taxonomy import BINARY

POSITIVE_CLASS = "Suicidal"


@dataclass
class MetricsReport:
    accuracy: float
    per_class: dict          # name -> {precision, recall, f1, support}
    macro_f1: float
    weighted_f1: float
    positive_f1: float = None  # binary schemas only
    n: int = 0

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "per_class": self.per_class,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "positive_f1": self.positive_f1,
            "n": self.n,
        }


def confusion_matrix(predictions, golds, schema):
    """C x C counts, rows = gold, columns = predicted, schema class order."""
    index = {name: i for i, name in enumerate(schema.names)}
    c = len(index)
    mat = [[0] * c for _ in range(c)]
    for pred, gold in zip(predictions, golds):
        mat[index[gold]][index[pred]] += 1
    return mat


def _f1(p, r):
    return 2 * p * r / (p + r) if (p + r) > 0 else 0.0


def compute_metrics(predictions, golds, schema):
    if len(predictions) != len(golds):
        raise ParameterError("predictions and golds differ in length")
    if not golds:
        raise ParameterError("empty evaluation input")
    for lab in list(predictions) + list(golds):
        if lab not in schema.names:
            raise ParameterError(f"label {lab!r} not in {schema.kind} schema")
    mat = confusion_matrix(predictions, golds, schema)
    names = schema.names
    n = len(golds)
    correct = sum(mat[i][i] for i in range(len(names)))
    per_class = {}
    for i, name in enumerate(names):
        tp = mat[i][i]
        fp = sum(mat[j][i] for j in range(len(names))) - tp
        fn = sum(mat[i]) - tp
        precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
        recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
        per_class[name] = {
            "precision": precision,
            "recall": recall,
            "f1": _f1(precision, recall),
            "support": sum(mat[i]),
        }
    macro = sum(c["f1"] for c in per_class.values()) / len(names)
    weighted = (
        sum(c["f1"] * c["support"] for c in per_class.values()) / n if n else 0.0
    )
    positive = per_class[POSITIVE_CLASS]["f1"] if schema.kind == BINARY else None
    return MetricsReport(
        accuracy=correct / n,
        per_class=per_class,
        macro_f1=macro,
        weighted_f1=weighted,
        positive_f1=positive,
        n=n,
    )


def verify_against_reference(predictions, golds, schema):
    """Recompute every metric by brute-force counting over the label vectors
    and compare exactly against compute_metrics."""
    if len(golds) > 1000:
        raise ParameterError("reference check limited to 1000 samples")
    report = compute_metrics(predictions, golds, schema)
    pairs = list(zip(predictions, golds))
    n = len(pairs)
    acc = sum(1 for p, g in pairs if p == g) / n
    if acc != report.accuracy:
        return False
    f1s = {}
    for name in schema.names:
        tp = sum(1 for p, g in pairs if p == name and g == name)
        fp = sum(1 for p, g in pairs if p == name and g != name)
        fn = sum(1 for p, g in pairs if p != name and g == name)
        support = sum(1 for _, g in pairs if g == name)
        prec = tp / (tp + fp) if (tp + fp) > 0 else 0.0
        rec = tp / (tp + fn) if (tp + fn) > 0 else 0.0
        f1 = 2 * prec * rec / (prec + rec) if (prec + rec) > 0 else 0.0
        cell = report.per_class[name]
        if (prec, rec, f1, support) != (
            cell["precision"],
            cell["recall"],
            cell["f1"],
            cell["support"],
        ):
            return False
        f1s[name] = (f1, support)
    macro = sum(f for f, _ in f1s.values()) / len(f1s)
    weighted = sum(f * s for f, s in f1s.values()) / n
    if macro != report.macro_f1 or weighted != report.weighted_f1:
        return False
    if schema.kind == BINARY and report.positive_f1 != f1s[POSITIVE_CLASS][0]:
        return False
    return True


@dataclass
class EvalMatrix:
    train_names: list
    test_names: list
    cells: dict = field(default_factory=dict)  # (train, test) -> MetricsReport

    def to_dict(self):
        return {
            "train_sets": self.train_names,
            "test_sets": self.test_names,
            "cells": {
                f"{tr}|{te}": rep.to_dict() for (tr, te), rep in self.cells.items()
            },
        }

    @classmethod
    def from_dict(cls, payload):
        matrix = cls(
            train_names=list(payload["train_sets"]),
            test_names=list(payload["test_sets"]),
        )
        for key, rep in payload["cells"].items():
            tr, te = key.split("|", 1)
            matrix.cells[(tr, te)] = MetricsReport(
                accuracy=rep["accuracy"],
                per_class=rep["per_class"],
                macro_f1=rep["macro_f1"],
                weighted_f1=rep["weighted_f1"],
                positive_f1=rep.get("positive_f1"),
                n=rep.get("n", 0),
            )
        return matrix


_F1_VARIANTS = (
    ("positive_f1", "F1 (positive=Suicidal)"),
    ("macro_f1", "F1 (macro)"),
    ("weighted_f1", "F1 (weighted)"),
)


def evaluate_matrix(train_sets, test_sets, trainer):
    """Train one model per train set, evaluate on every test set.

    Any record-id overlap between a train set and a test set is leakage and
    aborts the run.
    """
    for tr in train_sets:
        for te in test_sets:
            overlap = tr.ids() & te.ids()
            if overlap:
                raise LeakageError(
                    f"train set {tr.name!r} shares {len(overlap)} record id(s) "
                    f"with test set {te.name!r}"
                )
    matrix = EvalMatrix(
        train_names=[d.name for d in train_sets],
        test_names=[d.name for d in test_sets],
    )
    for tr in train_sets:
        model = trainer.train(tr)
        for te in test_sets:
            preds = trainer.predict(model, te)
            golds = [r.label for r in te.records]
            matrix.cells[(tr.name, te.name)] = compute_metrics(
                preds, golds, te.schema
            )
    return matrix


def _matrix_rows(matrix):
    """Rows = (test set, metric variant), columns = train sets."""
    rows = []
    sample = next(iter(matrix.cells.values()))
    variants = [("accuracy", "Accuracy")] + [
        (attr, label)
        for attr, label in _F1_VARIANTS
        if getattr(sample, attr) is not None
    ]
    for te in matrix.test_names:
        for attr, label in variants:
            row = [te, label]
            for tr in matrix.train_names:
                row.append(f"{getattr(matrix.cells[(tr, te)], attr):.4f}")
            rows.append(row)
    return rows


def matrix_to_csv(matrix):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["test_set", "metric"] + matrix.train_names)
    writer.writerows(_matrix_rows(matrix))
    return buf.getvalue()


def matrix_to_text(matrix):
    rows = [["test_set", "metric"] + matrix.train_names] + _matrix_rows(matrix)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"
