#!/usr/bin/env python3
"""Augmentation-rate sweep on mock-generated data.

Builds a synthetic dataset from the mock provider, fabricates a small "real"
train/test pair from a second mock job, and runs the fold-averaged rate sweep
against a baseline F1 measured on real-only training.
"""

import argparse
import sys
from pathlib import Path

from sidgen import augment, classifier, datasets, gateway, parsing, promptgen, taxonomy


def build_dataset(name, out_dir, requests, spec, seed):
    topics = taxonomy.default_topics()
    job = gateway.GenerationJob(
        job_id=name,
        prompt=promptgen.render_zero_shot(spec),
        provider="mock",
        request_count=requests,
        output_dir=Path(out_dir) / name,
        seed=seed,
    )
    completions = gateway.run_job(job, gateway.MOCK_PROFILE)
    records = []
    for completion in completions:
        parsed, _ = parsing.parse_completion(completion, spec, topics)
        records.extend(parsed)
    source = datasets.synthetic_source("mock", "zero_shot", spec.with_topics)
    return datasets.dataset_from_parsed(records, spec.schema, source, name, topics)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="sweep_out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.1, 0.2, 0.3])
    args = ap.parse_args()

    schema = taxonomy.BINARY_SCHEMA
    synthetic = build_dataset(
        "synthetic",
        args.out,
        requests=4,
        spec=promptgen.PromptSpec(
            schema=schema, topics=tuple(taxonomy.default_topics()), with_topics=True
        ),
        seed=args.seed,
    )
    stand_in_real = build_dataset(
        "real_standin",
        args.out,
        requests=6,
        spec=promptgen.PromptSpec(schema=schema, with_topics=False, instance_count=20),
        seed=args.seed,
    )
    parts = datasets.split_dataset(stand_in_real, datasets.SplitSpec(seed=args.seed))

    trainer = classifier.BaselineTrainer(
        classifier.TrainConfig(epochs=args.epochs, seed=args.seed)
    )
    baseline_model = trainer.train(parts["train"])
    baseline_f1 = trainer.evaluate(baseline_model, parts["test"])["f1"]
    print(f"real-only baseline F1: {baseline_f1:.4f}")

    plan = augment.AugmentationPlan(
        synthetic=synthetic,
        real_train=parts["train"],
        rates=tuple(args.rates),
        folds=3,
        seed=args.seed,
        test_sets=(parts["test"],),
    )
    report = augment.run_sweep(plan, trainer, baseline_f1)
    out = Path(args.out)
    (out / "sweep.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_text(), end="")
    print(f"stop rate: {report.stop_rate}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
