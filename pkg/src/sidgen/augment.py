"""Fold-based augmentation of synthetic data with real training data, and
the rate sweep with fold-aggregated metrics.

Standard deviation is the population form over the k folds; fold sampling is
stratified by label to control variance at small fold sizes.
"""

import json
import math
from dataclasses import dataclass, field

from .datasets import Dataset
from .datasets import _assign_units  # shared stratified allocation
from .errors import InfeasibleFoldsError, SidgenError


@dataclass(frozen=True)
class AugmentationPlan:
    synthetic: object            # Dataset
    real_train: object           # Dataset
    rates: tuple = (0.10, 0.20, 0.30)
    folds: int = 3
    seed: int = 0
    test_sets: tuple = ()        # first entry is the primary test set

    def __post_init__(self):
        if list(self.rates) != sorted(set(self.rates)):
            raise InfeasibleFoldsError("rates must be strictly increasing")
        for r in self.rates:
            if self.folds * r > 1 + 1e-9:
                raise InfeasibleFoldsError(
                    f"{self.folds} folds at rate {r} need more data than exists"
                )


class SweepAborted(SidgenError):
    def __init__(self, message, partial_report):
        super().__init__(message)
        self.partial_report = partial_report


def make_folds(real_train, rate, k, seed):
    """k pairwise-disjoint, label-stratified record-id sets, each of size
    round(rate * N)."""
    if k * rate > 1 + 1e-9:
        raise InfeasibleFoldsError(f"{k} folds at rate {rate}: {k * rate:.2f} > 1")
    n = len(real_train)
    size = round(rate * n)
    by_class = {}
    for r in real_train.records:
        by_class.setdefault(r.label, []).append(r.id)
    parts = {f"fold{i}": size for i in range(k)}
    parts["rest"] = n - k * size
    assignment = _assign_units(by_class, parts, seed=f"{seed}|{rate}|{k}")
    return [frozenset(assignment[f"fold{i}"]) for i in range(k)]


def _mean(xs):
    return sum(xs) / len(xs)


def _pstdev(xs):
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


@dataclass
class SweepReport:
    rates: list
    test_names: list
    folds: int
    cells: dict = field(default_factory=dict)
    # cells[(rate, test_name)] = {"accuracy_mean", "accuracy_std",
    #                             "f1_mean", "f1_std", "fold_metrics"}
    stop_rate: float = None
    baseline_f1: float = None

    def to_dict(self):
        return {
            "rates": self.rates,
            "test_sets": self.test_names,
            "folds": self.folds,
            "baseline_f1": self.baseline_f1,
            "stop_rate": self.stop_rate,
            "cells": {
                f"{rate}|{test}": cell
                for (rate, test), cell in self.cells.items()
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, payload):
        report = cls(
            rates=list(payload["rates"]),
            test_names=list(payload["test_sets"]),
            folds=payload["folds"],
            stop_rate=payload.get("stop_rate"),
            baseline_f1=payload.get("baseline_f1"),
        )
        for key, cell in payload["cells"].items():
            rate, test = key.split("|", 1)
            report.cells[(float(rate), test)] = cell
        return report

    def to_text(self):
        """Aligned table: rows = test set x metric, columns = rates."""
        header = ["test_set", "metric"] + [f"{r:.0%}" for r in self.rates]
        rows = [header]
        for test in self.test_names:
            for metric in ("accuracy", "f1"):
                row = [test, metric]
                for rate in self.rates:
                    cell = self.cells.get((rate, test))
                    if cell is None:
                        row.append("-")
                    else:
                        row.append(
                            f"{cell[metric + '_mean']:.4f}"
                            f"±{cell[metric + '_std']:.4f}"
                        )
                rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return (
            "\n".join(
                "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                for row in rows
            )
            + "\n"
        )


def run_sweep(plan, trainer, baseline_f1):
    """For each rate and fold: union synthetic + fold of real data, train,
    evaluate on every test set. Stop rate = first rate whose mean F1 on the
    primary (first) test set reaches baseline_f1."""
    report = SweepReport(
        rates=list(plan.rates),
        test_names=[t.name for t in plan.test_sets],
        folds=plan.folds,
        baseline_f1=baseline_f1,
    )
    primary = plan.test_sets[0].name if plan.test_sets else None
    for rate in plan.rates:
        folds = make_folds(plan.real_train, rate, plan.folds, plan.seed)
        fold_metrics = {t.name: [] for t in plan.test_sets}
        for fi, fold_ids in enumerate(folds):
            fold_ds = plan.real_train.subset(
                fold_ids, f"{plan.real_train.name}.r{rate}.f{fi}"
            )
            augmented = Dataset(
                f"{plan.synthetic.name}+{fold_ds.name}",
                plan.synthetic.schema,
                list(plan.synthetic.records) + list(fold_ds.records),
            )
            try:
                model = trainer.train(augmented)
                for test in plan.test_sets:
                    fold_metrics[test.name].append(trainer.evaluate(model, test))
            except Exception as exc:
                raise SweepAborted(
                    f"trainer failed at rate {rate} fold {fi}: {exc}", report
                ) from exc
        for test in plan.test_sets:
            ms = fold_metrics[test.name]
            report.cells[(rate, test.name)] = {
                "accuracy_mean": _mean([m["accuracy"] for m in ms]),
                "accuracy_std": _pstdev([m["accuracy"] for m in ms]),
                "f1_mean": _mean([m["f1"] for m in ms]),
                "f1_std": _pstdev([m["f1"] for m in ms]),
                "fold_metrics": ms,
            }
        if (
            report.stop_rate is None
            and primary is not None
            and report.cells[(rate, primary)]["f1_mean"] >= baseline_f1
        ):
            report.stop_rate = rate
    return report
