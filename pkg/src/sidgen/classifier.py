"""Lightweight native text classifier: L2-normalized tf-idf features and
multinomial logistic regression trained by mini-batch gradient descent.

This is the desk-scale stand-in behind the trainer contract; heavyweight
encoder fine-tuning is delegated through the export bundle instead
(``export_for_finetune``).
"""

import hashlib
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import DegenerateDataError, ExportError, ParameterError
from .metrics import compute_metrics

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"\w+", re.UNICODE)

# Fine-tune hyperparameters carried by the export bundle for external
# BERT-family training.
FINETUNE_CONFIG = {
    "learning_rate": 2e-5,
    "batch_size": 4,
    "dropout_rate": 0.1,
    "max_sequence_length": 512,
}


def tokenize(text):
    return _TOKEN.findall(text.lower())


@dataclass
class FeatureModel:
    vocabulary: dict          # token -> column index, dense 0..V-1
    idf: np.ndarray

    @property
    def dim(self):
        return len(self.vocabulary)

    def vocabulary_hash(self):
        h = hashlib.sha256()
        for tok, _ in sorted(self.vocabulary.items(), key=lambda kv: kv[1]):
            h.update(tok.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()[:16]

    def transform(self, texts):
        """Sparse document-term matrix, tf * idf, L2-normalized per row."""
        rows, cols, vals = [], [], []
        for i, text in enumerate(texts):
            counts = Counter(
                self.vocabulary[t] for t in tokenize(text) if t in self.vocabulary
            )
            for j, tf in counts.items():
                rows.append(i)
                cols.append(j)
                vals.append(tf * self.idf[j])
        mat = sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(texts), self.dim), dtype=np.float64
        )
        norms = np.sqrt(mat.multiply(mat).sum(axis=1)).A.ravel()
        norms[norms == 0] = 1.0
        inv = sparse.diags(1.0 / norms)
        return inv @ mat


def fit_features(corpus, max_vocab=20000):
    """Build the vocabulary (most-frequent-first, ties lexicographic) and
    smoothed idf weights: idf(t) = ln((1+N)/(1+df(t))) + 1."""
    texts = list(corpus)
    if not texts:
        raise ParameterError("empty corpus")
    tf_total = Counter()
    df = Counter()
    for text in texts:
        toks = tokenize(text)
        tf_total.update(toks)
        df.update(set(toks))
    ranked = sorted(tf_total.items(), key=lambda kv: (-kv[1], kv[0]))[:max_vocab]
    vocabulary = {tok: i for i, (tok, _) in enumerate(ranked)}
    n = len(texts)
    idf = np.array(
        [np.log((1 + n) / (1 + df[tok])) + 1.0 for tok, _ in ranked],
        dtype=np.float64,
    )
    return FeatureModel(vocabulary=vocabulary, idf=idf)


@dataclass
class LinearModel:
    weights: np.ndarray       # C x V
    bias: np.ndarray          # C
    classes: list             # schema order
    vocabulary_hash: str = ""
    loss_history: list = field(default_factory=list)

    def save(self, path):
        payload = {
            "classes": self.classes,
            "vocabulary_hash": self.vocabulary_hash,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path):
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=np.array(payload["bias"], dtype=np.float64),
            classes=payload["classes"],
            vocabulary_hash=payload["vocabulary_hash"],
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    l2: float = 1e-4
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be > 0")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(weights, bias, x, y_onehot, l2):
    """Mean cross-entropy + 0.5*l2*||W||^2 and its analytic gradient.

    Kept as a standalone function so tests can check it against central
    finite differences.
    """
    b = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    eps = 1e-12
    ce = -np.mean(np.sum(y_onehot * np.log(probs + eps), axis=1))
    loss = ce + 0.5 * l2 * np.sum(weights**2)
    delta = (probs - y_onehot) / b
    grad_w = delta.T @ x + l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, np.asarray(grad_w), grad_b


def train(dataset, features, config=TrainConfig()):
    """Seeded mini-batch gradient descent; zero-initialized, so epochs=0
    yields the uniform predictor."""
    classes = dataset.schema.names
    present = {r.label for r in dataset.records}
    if len(present) < 2:
        raise DegenerateDataError(
            f"train set {dataset.name!r} contains a single class: {sorted(present)}"
        )
    x = features.transform([r.text for r in dataset.records])
    x = np.asarray(x.todense())
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.zeros((len(dataset.records), len(classes)), dtype=np.float64)
    for i, r in enumerate(dataset.records):
        y[i, class_index[r.label]] = 1.0

    weights = np.zeros((len(classes), features.dim), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    n = x.shape[0]
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, gw, gb = loss_and_grad(weights, bias, x[idx], y[idx], config.l2)
            weights -= config.learning_rate * gw
            bias -= config.learning_rate * gb
            losses.append(loss)
        epoch_loss = float(np.mean(losses))
        history.append(epoch_loss)
        log.debug("epoch %d mean loss %.6f", epoch + 1, epoch_loss)
    return LinearModel(
        weights=weights,
        bias=bias,
        classes=list(classes),
        vocabulary_hash=features.vocabulary_hash(),
        loss_history=history,
    )


def predict_proba(model, features, texts):
    x = np.asarray(features.transform(texts).todense())
    return _softmax(x @ model.weights.T + model.bias)


def predict(model, features, text):
    """Returns (label, {class: probability}); ties break to the lowest
    class index."""
    probs = predict_proba(model, features, [text])[0]
    label = model.classes[int(np.argmax(probs))]
    return label, dict(zip(model.classes, probs.tolist()))


class BaselineTrainer:
    """Trainer-contract adapter around the native classifier."""

    def __init__(self, config=TrainConfig(), max_vocab=20000):
        self.config = config
        self.max_vocab = max_vocab

    def train(self, dataset):
        features = fit_features(
            [r.text for r in dataset.records], max_vocab=self.max_vocab
        )
        model = train(dataset, features, self.config)
        return (features, model)

    def predict(self, trained, dataset):
        features, model = trained
        probs = predict_proba(model, features, [r.text for r in dataset.records])
        return [model.classes[int(i)] for i in np.argmax(probs, axis=1)]

    def evaluate(self, trained, dataset):
        preds = self.predict(trained, dataset)
        golds = [r.label for r in dataset.records]
        report = compute_metrics(preds, golds, dataset.schema)
        f1 = report.positive_f1 if report.positive_f1 is not None else report.macro_f1
        return {"accuracy": report.accuracy, "f1": f1}


def export_for_finetune(train_set, val_set, out_dir):
    """Write train.jsonl / val.jsonl plus the fine-tune hyperparameter file
    for external encoder training."""
    if train_set.schema.kind != val_set.schema.kind:
        raise ExportError(
            f"schema mismatch: {train_set.schema.kind} vs {val_set.schema.kind}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, ds in (("train.jsonl", train_set), ("val.jsonl", val_set)):
        with (out_dir / name).open("w", encoding="utf-8") as fh:
            for r in ds.records:
                row = {"text": r.text, "label": r.label}
                if r.topic:
                    row["topic"] = r.topic
                if r.user_id:
                    row["user_id"] = r.user_id
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    config = dict(FINETUNE_CONFIG, schema=train_set.schema.kind)
    (out_dir / "finetune_config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )
    return out_dir
