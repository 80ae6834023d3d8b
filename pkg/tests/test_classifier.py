import math
import random

import numpy as np
import pytest

from sidgen import classifier, taxonomy
from sidgen.classifier import (
    BaselineTrainer,
    FINETUNE_CONFIG,
    LinearModel,
    TrainConfig,
    export_for_finetune,
    fit_features,
    loss_and_grad,
    predict,
    train,
)
from sidgen.datasets import Dataset, normalize_ingest, real_source
from sidgen.errors import DegenerateDataError, ExportError, ParameterError

from conftest import make_dataset, make_record

HOPEFUL_WORDS = ["hopeful", "calm", "grateful", "support", "healing", "sunrise"]
DARK_WORDS = ["hopeless", "trapped", "unbearable", "burden", "ending", "darkness"]


def separable_corpus(n=40, seed=0):
    """Deterministic toy corpus: class A texts carry hopeful vocabulary,
    class B texts carry dark vocabulary."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        if i % 2 == 0:
            words = rng.sample(HOPEFUL_WORDS, 3)
            label = "NonSuicidal"
        else:
            words = rng.sample(DARK_WORDS, 3)
            label = "Suicidal"
        text = f"entry {i}: today I feel {words[0]} and {words[1]} almost {words[2]}"
        records.append(make_record(text, label, source_name="sep"))
    return Dataset("separable", taxonomy.BINARY_SCHEMA, records)


class TestFeatures:
    def test_idf_monotone_in_rarity(self):
        fm = fit_features(["a b", "a"])
        assert fm.idf[fm.vocabulary["b"]] > fm.idf[fm.vocabulary["a"]]

    def test_idf_everywhere_token_is_one(self):
        fm = fit_features(["common unique1", "common unique2", "common unique3"])
        assert fm.idf[fm.vocabulary["common"]] == pytest.approx(1.0)

    def test_idf_formula(self):
        fm = fit_features(["a b", "a c", "a"])
        n = 3
        assert fm.idf[fm.vocabulary["b"]] == pytest.approx(math.log((1 + n) / 2) + 1)

    def test_deterministic_vocab_order(self):
        corpus = ["z y x w", "y x", "x"]
        a = fit_features(corpus).vocabulary
        b = fit_features(corpus).vocabulary
        assert a == b
        # most frequent first, ties lexicographic
        assert a["x"] == 0 and a["y"] == 1

    def test_rows_l2_normalized(self):
        fm = fit_features(["a b c", "a a b"])
        mat = fm.transform(["a b c", "unseen only"]).toarray()
        assert np.linalg.norm(mat[0]) == pytest.approx(1.0)
        assert np.linalg.norm(mat[1]) == 0.0

    def test_vocab_cap(self):
        fm = fit_features(["one two three four five"], max_vocab=3)
        assert fm.dim == 3

    def test_empty_corpus(self):
        with pytest.raises(ParameterError):
            fit_features([])


class TestTraining:
    def test_zero_epochs_uniform(self):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        model = train(ds, fm, TrainConfig(epochs=0))
        _, probs = predict(model, fm, "anything at all")
        assert probs["Suicidal"] == pytest.approx(0.5)
        assert probs["NonSuicidal"] == pytest.approx(0.5)

    def test_separable_corpus_accuracy(self):
        ds = separable_corpus()
        trainer = BaselineTrainer(TrainConfig(epochs=50, seed=0))
        model = trainer.train(ds)
        preds = trainer.predict(model, ds)
        acc = sum(p == r.label for p, r in zip(preds, ds.records)) / len(ds)
        assert acc >= 0.95

    def test_loss_decreases(self):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        model = train(ds, fm, TrainConfig(epochs=50, seed=0))
        assert model.loss_history[-1] < model.loss_history[0]

    def test_bit_stable_determinism(self):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        m1 = train(ds, fm, TrainConfig(epochs=10, seed=123))
        m2 = train(ds, fm, TrainConfig(epochs=10, seed=123))
        assert np.array_equal(m1.weights, m2.weights)
        assert np.array_equal(m1.bias, m2.bias)

    def test_single_class_rejected(self):
        ds = make_dataset(["Suicidal"] * 5)
        fm = fit_features([r.text for r in ds.records])
        with pytest.raises(DegenerateDataError):
            train(ds, fm, TrainConfig(epochs=1))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        n_docs, n_feats, n_classes = 5, 10, 3
        x = rng.normal(size=(n_docs, n_feats))
        y = np.zeros((n_docs, n_classes))
        for i in range(n_docs):
            y[i, rng.integers(n_classes)] = 1.0
        w = rng.normal(scale=0.5, size=(n_classes, n_feats))
        b = rng.normal(scale=0.5, size=n_classes)
        l2 = 1e-3
        _, grad_w, grad_b = loss_and_grad(w, b, x, y, l2)
        step = 1e-5
        num_w = np.zeros_like(w)
        for i in range(n_classes):
            for j in range(n_feats):
                wp, wm = w.copy(), w.copy()
                wp[i, j] += step
                wm[i, j] -= step
                lp, _, _ = loss_and_grad(wp, b, x, y, l2)
                lm, _, _ = loss_and_grad(wm, b, x, y, l2)
                num_w[i, j] = (lp - lm) / (2 * step)
        num_b = np.zeros_like(b)
        for i in range(n_classes):
            bp, bm = b.copy(), b.copy()
            bp[i] += step
            bm[i] -= step
            lp, _, _ = loss_and_grad(w, bp, x, y, l2)
            lm, _, _ = loss_and_grad(w, bm, x, y, l2)
            num_b[i] = (lp - lm) / (2 * step)
        scale = max(np.abs(num_w).max(), np.abs(num_b).max())
        assert np.abs(grad_w - num_w).max() / scale <= 1e-4
        assert np.abs(grad_b - num_b).max() / scale <= 1e-4


class TestPredict:
    def test_probabilities_sum_to_one(self):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        model = train(ds, fm, TrainConfig(epochs=5))
        rng = random.Random(0)
        for _ in range(10):
            words = rng.sample(HOPEFUL_WORDS + DARK_WORDS, 4)
            _, probs = predict(model, fm, " ".join(words))
            assert sum(probs.values()) == pytest.approx(1.0, abs=1e-6)

    def test_oov_equals_bias_only(self):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        model = train(ds, fm, TrainConfig(epochs=5))
        _, oov_probs = predict(model, fm, "zzz qqq www")
        bias_probs = np.exp(model.bias) / np.exp(model.bias).sum()
        for name, p in zip(model.classes, bias_probs):
            assert oov_probs[name] == pytest.approx(p)

    def test_model_roundtrip(self, tmp_path):
        ds = separable_corpus()
        fm = fit_features([r.text for r in ds.records])
        model = train(ds, fm, TrainConfig(epochs=3))
        model.save(tmp_path / "m.json")
        loaded = LinearModel.load(tmp_path / "m.json")
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.vocabulary_hash == model.vocabulary_hash


class TestExport:
    def test_bundle_contents(self, tmp_path):
        tr = make_dataset(["Suicidal", "NonSuicidal"] * 3, name="tr")
        va = make_dataset(["Suicidal", "NonSuicidal"], name="va")
        out = export_for_finetune(tr, va, tmp_path / "bundle")
        config = (out / "finetune_config.json").read_text()
        import json

        cfg = json.loads(config)
        assert cfg["max_sequence_length"] == 512
        assert cfg["learning_rate"] == 2e-5
        assert cfg["batch_size"] == 4
        assert cfg["dropout_rate"] == 0.1

    def test_roundtrip_ids(self, tmp_path):
        tr = make_dataset(["Suicidal", "NonSuicidal"] * 3, name="tr")
        va = make_dataset(["Suicidal", "NonSuicidal"], name="va")
        out = export_for_finetune(tr, va, tmp_path / "bundle")
        back = normalize_ingest(
            out / "train.jsonl", real_source("tr"), taxonomy.BINARY_SCHEMA
        )
        assert back.ids() == tr.ids()

    def test_schema_mismatch(self, tmp_path):
        tr = make_dataset(["Suicidal", "NonSuicidal"])
        va = make_dataset(["NoRisk", "HighRisk"], schema=taxonomy.FOURCLASS_SCHEMA)
        with pytest.raises(ExportError):
            export_for_finetune(tr, va, tmp_path / "bundle")
