"""Acceptance gate: one test per primary criterion, each printing a single
PASS/FAIL line (run with -s or rely on pytest's captured stdout on failure).

Tolerances are pinned in each test body; the fixtures and goldens they compare
against were frozen after being derived independently of the code under test.
"""

import csv
import functools
import json
import random
import time
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from sidgen import (
    augment,
    annotation,
    classifier,
    datasets,
    metrics,
    parsing,
    promptgen,
    taxonomy,
)
from sidgen.cli import run_offline_demo
from sidgen.errors import InfeasibleFoldsError

from conftest import make_dataset, make_record, random_dataset
from test_augment import ScriptedTrainer, basic_plan
from test_classifier import separable_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def criterion(name, budget_s):
    """Print one pass/fail line per criterion and enforce its time budget."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            started = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[PRIMARY] {name}: FAIL")
                raise
            elapsed = time.monotonic() - started
            assert elapsed < budget_s, f"{name} took {elapsed:.1f}s > {budget_s}s"
            print(f"[PRIMARY] {name}: PASS ({elapsed:.2f}s)")

        return run

    return wrap


@criterion("binarization-arithmetic", budget_s=1.0)
def test_binarization_arithmetic():
    train_pct = {
        "NoRisk": Decimal("27.45"),
        "LowRisk": Decimal("16.39"),
        "ModerateRisk": Decimal("31.90"),
        "HighRisk": Decimal("24.24"),
    }
    binary = datasets.binarize_distribution(train_pct)
    assert binary["NonSuicidal"] == Decimal("43.84")
    assert binary["Suicidal"] == Decimal("56.14")

    train_users = {"NoRisk": 154, "LowRisk": 92, "ModerateRisk": 179, "HighRisk": 136}
    binary_users = datasets.binarize_distribution(train_users)
    assert binary_users == {"NonSuicidal": 246, "Suicidal": 315}

    test_users = {"NoRisk": 42, "LowRisk": 20, "ModerateRisk": 46, "HighRisk": 64}
    assert datasets.binarize_distribution(test_users) == {
        "NonSuicidal": 62,
        "Suicidal": 110,
    }


@criterion("prompt-goldens", budget_s=1.0)
def test_prompt_goldens():
    topics = tuple(taxonomy.default_topics())
    spec = promptgen.PromptSpec(
        schema=taxonomy.BINARY_SCHEMA, topics=topics, with_topics=True
    )
    rendered = promptgen.render_zero_shot(spec)
    golden = (FIXTURES / "prompts" / "zero_shot_binary_topics.txt").read_text()
    assert rendered == golden  # byte-exact against the frozen golden

    for i, topic in enumerate(topics, start=1):
        assert f"{i}-{topic.display_name}" in rendered
    assert len(topics) == 14
    assert (
        "Provide the answers in JSON format with the following columns: "
        "text, topic, risk level." in rendered
    )
    criteria = (
        "```These are the criteria of different suicide risk level:\n"
        "Risk Level=Non Suicidal: I do not see evidence that this person "
        "is at risk for suicide\n"
        "Risk Level=Suicidal: I believe this person is at high risk of "
        "attempting suicide in the near future.```"
    )
    assert criteria in rendered


@criterion("split-properties", budget_s=10.0)
def test_split_properties():
    rng = random.Random(20260826)
    for trial in range(200):
        with_users = trial % 2 == 1
        n = rng.randint(10, 2000)
        schema = (
            taxonomy.BINARY_SCHEMA if trial % 3 else taxonomy.FOURCLASS_SCHEMA
        )
        ds = random_dataset(rng, n, schema=schema, with_users=with_users)
        spec = datasets.SplitSpec(
            seed=trial, unit="by_user" if with_users else "by_record"
        )
        parts = datasets.split_dataset(ds, spec)

        ids = [p.ids() for p in parts.values()]
        assert ids[0] | ids[1] | ids[2] == ds.ids()
        assert not (ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2])

        if with_users:
            # user-atomic, sizes follow the rounding rule in units of users
            owner = {}
            for part_name, part in parts.items():
                for r in part.records:
                    assert owner.setdefault(r.user_id, part_name) == part_name
            n_units = len({r.user_id for r in ds.records})
            expected = datasets.split_sizes(n_units, spec)
            got = {
                name: len({r.user_id for r in part.records})
                for name, part in parts.items()
            }
            assert got == expected
        else:
            expected = datasets.split_sizes(n, spec)
            assert {k: len(v) for k, v in parts.items()} == expected
            # stratified within +-1 of the exact proportional share
            class_totals = {
                name: sum(1 for r in ds.records if r.label == name)
                for name in schema.names
            }
            for part in parts.values():
                for name, total in class_totals.items():
                    got_c = sum(1 for r in part.records if r.label == name)
                    assert abs(got_c - total * len(part) / n) <= 1


@criterion("fold-properties", budget_s=5.0)
def test_fold_properties():
    rng = random.Random(4)
    real = random_dataset(rng, 561, name="real")
    for rate in (0.1, 0.2, 0.3):
        folds = augment.make_folds(real, rate, 3, seed=0)
        assert all(len(f) == round(rate * 561) for f in folds)
        assert len(folds[0] | folds[1] | folds[2]) == 3 * round(rate * 561)
    with pytest.raises(InfeasibleFoldsError):
        augment.make_folds(real, 0.4, 3, seed=0)

    # mean/stddev against an independent two-pass oracle, 1e-12
    xs = [0.8123, 0.7951, 0.8077]
    mean = sum(xs) / len(xs)
    var = sum((x - mean) ** 2 for x in xs) / len(xs)
    assert abs(augment._mean(xs) - mean) <= 1e-12
    assert abs(augment._pstdev(xs) - var ** 0.5) <= 1e-12

    # reference fixture: rate means 0.79/0.84/0.88 vs baseline 0.87 -> 0.30
    plan = basic_plan()
    by_rate = {0.1: 0.79, 0.2: 0.84, 0.3: 0.88}

    def f1(model_name):
        for r, v in by_rate.items():
            if f".r{r}." in model_name:
                return v
        raise AssertionError(model_name)

    report = augment.run_sweep(plan, ScriptedTrainer(f1), baseline_f1=0.87)
    assert report.stop_rate == pytest.approx(0.30)


@criterion("parser-fixture-corpus", budget_s=5.0)
def test_parser_fixture_corpus():
    golden = json.loads((FIXTURES / "responses" / "golden_reports.json").read_text())
    assert len(golden) >= 10
    spec = promptgen.PromptSpec(
        schema=taxonomy.BINARY_SCHEMA, topics=tuple(taxonomy.default_topics())
    )
    topics = taxonomy.default_topics()

    class Comp:
        provider = "fixture"
        job_id = "acceptance"
        request_index = 0

        def __init__(self, text):
            self.response_text = text

    for name, expected in golden.items():
        text = (FIXTURES / "responses" / name).read_text()
        _, report = parsing.parse_completion(Comp(text), spec, topics)
        assert report.to_dict() == expected, name

    # strict path: output equals a reference plain-JSON parse
    strict = (FIXTURES / "responses" / "strict_array.txt").read_text()
    records, report = parsing.parse_completion(Comp(strict), spec, topics)
    reference = json.loads(strict)
    assert report.repaired == 0
    assert [r.text for r in records] == [row["text"] for row in reference]


@criterion("metrics-oracle", budget_s=5.0)
def test_metrics_oracle():
    hand = metrics.compute_metrics(
        ["Suicidal", "Suicidal", "NonSuicidal", "NonSuicidal"],
        ["Suicidal", "NonSuicidal", "NonSuicidal", "NonSuicidal"],
        taxonomy.BINARY_SCHEMA,
    )
    assert hand.accuracy == 0.75
    assert hand.positive_f1 == 2 / 3

    rng = random.Random(123)
    for trial in range(100):
        schema = taxonomy.BINARY_SCHEMA if trial % 2 else taxonomy.FOURCLASS_SCHEMA
        n = rng.randint(1, 20)
        gold = [rng.choice(schema.names) for _ in range(n)]
        pred = [rng.choice(schema.names) for _ in range(n)]
        # brute-force recount, exact equality on accuracy and every F1 variant
        assert metrics.verify_against_reference(pred, gold, schema)


@criterion("baseline-classifier", budget_s=30.0)
def test_baseline_classifier():
    # gradient check: central differences, step 1e-5, rel err <= 1e-4
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 8))
    y = np.zeros((6, 2))
    for i in range(6):
        y[i, rng.integers(2)] = 1.0
    w = rng.normal(scale=0.3, size=(2, 8))
    b = rng.normal(scale=0.3, size=2)
    _, grad_w, grad_b = classifier.loss_and_grad(w, b, x, y, 1e-3)
    step = 1e-5
    num_w = np.zeros_like(w)
    for i in range(2):
        for j in range(8):
            wp, wm = w.copy(), w.copy()
            wp[i, j] += step
            wm[i, j] -= step
            num_w[i, j] = (
                classifier.loss_and_grad(wp, b, x, y, 1e-3)[0]
                - classifier.loss_and_grad(wm, b, x, y, 1e-3)[0]
            ) / (2 * step)
    num_b = np.zeros_like(b)
    for i in range(2):
        bp, bm = b.copy(), b.copy()
        bp[i] += step
        bm[i] -= step
        num_b[i] = (
            classifier.loss_and_grad(w, bp, x, y, 1e-3)[0]
            - classifier.loss_and_grad(w, bm, x, y, 1e-3)[0]
        ) / (2 * step)
    scale = max(np.abs(num_w).max(), np.abs(num_b).max())
    assert np.abs(grad_w - num_w).max() / scale <= 1e-4
    assert np.abs(grad_b - num_b).max() / scale <= 1e-4

    # >= 0.95 training accuracy on the deterministic separable corpus
    ds = separable_corpus()
    trainer = classifier.BaselineTrainer(classifier.TrainConfig(epochs=50, seed=0))
    model = trainer.train(ds)
    preds = trainer.predict(model, ds)
    acc = sum(p == r.label for p, r in zip(preds, ds.records)) / len(ds)
    assert acc >= 0.95

    # bit-identical weights across same-seed runs
    fm = classifier.fit_features([r.text for r in ds.records])
    m1 = classifier.train(ds, fm, classifier.TrainConfig(epochs=20, seed=7))
    m2 = classifier.train(ds, fm, classifier.TrainConfig(epochs=20, seed=7))
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.bias, m2.bias)


@criterion("offline-end-to-end", budget_s=60.0)
def test_offline_end_to_end(tmp_path, monkeypatch):
    # no network: any socket connect attempt fails the run
    import socket

    def no_network(*args, **kwargs):
        raise AssertionError("network use during offline demo")

    monkeypatch.setattr(socket.socket, "connect", no_network)

    csv_path = run_offline_demo(tmp_path / "demo", seed=0)
    rows = list(csv.reader(csv_path.open()))
    assert rows[0][:2] == ["test_set", "metric"]
    assert len(rows) > 1 and len(rows[0]) > 2
    for row in rows[1:]:
        assert len(row) == len(rows[0])
        for cell in row[2:]:
            assert 0.0 <= float(cell) <= 1.0
    # manifests for generation jobs and every saved dataset
    assert (tmp_path / "demo" / "jobs" / "mock_topic" / "job.json").exists()
    saved = list((tmp_path / "demo" / "datasets").glob("*.jsonl"))
    assert saved
    for data_file in saved:
        assert data_file.with_name(
            data_file.name.replace(".jsonl", ".manifest.json")
        ).exists()


@criterion("annotation-service", budget_s=10.0)
def test_annotation_service():
    # 318-task fixture, 283 retained -> retention 0.890
    labels = (["Suicidal", "NonSuicidal"] * 159)[:318]
    store = annotation.AnnotationStore()
    ds = make_dataset(labels, name="holdout318")
    session = store.open_session(ds, "a1", "a2", session_id="acc")
    flip_ids = set(list(session.tasks)[:35])
    for tid, task in session.tasks.items():
        store.submit_label("acc", tid, "a1", task.model_label)
        if tid in flip_ids:
            other = (
                "NonSuicidal" if task.model_label == "Suicidal" else "Suicidal"
            )
            store.submit_label("acc", tid, "a2", other)
            store.resolve("acc", tid, other)
        else:
            store.submit_label("acc", tid, "a2", task.model_label)
    report = store.agreement_report("acc")
    assert report.total == 318
    assert round(report.retention_rate, 3) == 0.890

    # blindness: pre-submission payloads never leak the other label
    store2 = annotation.AnnotationStore()
    ds2 = make_dataset(["Suicidal", "NonSuicidal"] * 2)
    s2 = store2.open_session(ds2, "a1", "a2", session_id="blind")
    store2.submit_label("blind", "t00000", "a1", "Suicidal")
    view = s2.tasks["t00000"].redacted_view("a2")
    assert "model_label" not in view
    assert "a1" not in view["labels"]

    # randomized operation sequences keep the state machine consistent
    rng = random.Random(0)
    store3 = annotation.AnnotationStore()
    s3 = store3.open_session(
        make_dataset(["Suicidal", "NonSuicidal"] * 5), "a1", "a2", session_id="rnd"
    )
    tids = list(s3.tasks)
    for _ in range(500):
        tid = rng.choice(tids)
        try:
            if rng.random() < 0.7:
                store3.submit_label(
                    "rnd",
                    tid,
                    rng.choice(["a1", "a2"]),
                    rng.choice(["Suicidal", "NonSuicidal"]),
                )
            else:
                store3.resolve("rnd", tid, "Suicidal")
        except annotation.AnnotationError:
            pass
    for task in s3.tasks.values():
        assert task.status in {
            annotation.PENDING,
            annotation.AWAITING_SECOND,
            annotation.DISAGREEMENT,
            annotation.FINAL,
        }
        if task.status == annotation.FINAL:
            assert task.consensus_label is not None
        if task.status == annotation.PENDING:
            assert not task.labels
