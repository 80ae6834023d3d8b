"""Command-line entry point wiring the pipeline modules together.

Exit codes: 0 success, 1 operational failure, 2 usage error. Every command
writes its artifacts (JSON/JSONL/CSV plus manifests) under the chosen output
directory and never mutates an input dataset file in place.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from . import augment, classifier, datasets, gateway, metrics, parsing, promptgen, taxonomy
from .errors import SidgenError


def _schema(kind):
    return taxonomy.get_schema(kind)


def _load_dataset(path, kind, name=None):
    return datasets.Dataset.load(path, _schema(kind), name=name)


def _spec_from_args(args):
    topics = tuple(taxonomy.default_topics()) if args.topics else ()
    return promptgen.PromptSpec(
        schema=_schema(args.schema),
        topics=topics,
        with_topics=args.topics,
        shot_mode=promptgen.FEW_SHOT if getattr(args, "shot", "zero") == "few"
        else promptgen.ZERO_SHOT,
        exemplars_per_class=getattr(args, "per_class", 0) or 0,
        instance_count=getattr(args, "instances", 10),
    )


def _profile_from_args(args):
    if args.profile == "mock":
        return gateway.MOCK_PROFILE
    if not args.config:
        raise SidgenError(
            f"profile {args.profile!r} requires --config with provider profiles"
        )
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for entry in config.get("providers", []):
        if entry.get("name") == args.profile:
            return gateway.ProviderProfile(**entry)
    raise SidgenError(f"no provider {args.profile!r} in {args.config}")


# -- subcommand implementations -------------------------------------------


def cmd_topics_list(args):
    for i, t in enumerate(taxonomy.default_topics(), start=1):
        print(f"{i}-{t.display_name}")
    return 0


def cmd_prompt_render(args):
    spec = _spec_from_args(args)
    if spec.shot_mode == promptgen.FEW_SHOT:
        exemplar_ds = _load_dataset(args.exemplar_dataset, args.schema)
        exemplars = promptgen.select_exemplars(
            exemplar_ds, spec.exemplars_per_class, args.seed
        )
        text = promptgen.render_few_shot(spec, exemplars)
    else:
        text = promptgen.render_zero_shot(spec)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_generate(args):
    spec = _spec_from_args(args)
    prompt = promptgen.render_zero_shot(spec)
    profile = _profile_from_args(args)
    job = gateway.GenerationJob(
        job_id=args.job_id,
        prompt=prompt,
        provider=profile.name,
        request_count=args.requests,
        output_dir=args.out,
        seed=args.seed,
    )
    completions = gateway.run_job(job, profile, concurrency=args.concurrency)
    print(f"{len(completions)} completions persisted under {args.out}")
    return 0


def cmd_parse(args):
    spec = _spec_from_args(args)
    topics = taxonomy.default_topics() if args.topics else None
    completions = gateway.read_completions(args.job)
    all_records = []
    totals = parsing.ParseReport()
    for completion in completions:
        records, report = parsing.parse_completion(completion, spec, topics)
        all_records.extend(records)
        totals.accepted += report.accepted
        totals.repaired += report.repaired
        totals.rejected += report.rejected
        for reason, count in report.rejection_reasons.items():
            totals.rejection_reasons[reason] = (
                totals.rejection_reasons.get(reason, 0) + count
            )
    source = datasets.synthetic_source(
        args.provider, "few_shot" if getattr(args, "shot", "zero") == "few"
        else "zero_shot", args.topics
    )
    ds = datasets.dataset_from_parsed(
        all_records, spec.schema, source, args.name, topics
    )
    out = Path(args.out)
    ds.save(out)
    (out / f"{args.name}.parse_report.json").write_text(
        json.dumps(totals.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    print(
        f"accepted {totals.accepted}, rejected {totals.rejected}, "
        f"dataset {args.name} -> {out}"
    )
    return 0


def cmd_dataset_split(args):
    ds = _load_dataset(args.input, args.schema)
    spec = datasets.SplitSpec(seed=args.seed, unit=args.unit)
    parts = datasets.split_dataset(ds, spec)
    for part in parts.values():
        part.save(args.out)
    print(", ".join(f"{k}={len(v)}" for k, v in parts.items()))
    return 0


def cmd_dataset_binarize(args):
    ds = _load_dataset(args.input, "fourclass")
    out = datasets.binarize_dataset(ds, name=args.name)
    out.save(args.out)
    print(f"{out.name}: {len(out)} records")
    return 0


def cmd_dataset_mix(args):
    inputs = [_load_dataset(p, args.schema) for p in args.inputs]
    mixed = datasets.compose_mix(inputs, args.name)
    mixed.save(args.out)
    print(f"{mixed.name}: {len(mixed)} records")
    return 0


def cmd_dataset_holdout(args):
    inputs = [_load_dataset(p, args.schema) for p in args.inputs]
    pool, remainders = datasets.holdout_synthetic_test(
        inputs, fraction=args.fraction, seed=args.seed
    )
    pool.save(args.out)
    for rest in remainders:
        rest.save(args.out)
    print(f"pool={len(pool)}, remainders={[len(r) for r in remainders]}")
    return 0


def cmd_dataset_stats(args):
    ds = _load_dataset(args.input, args.schema)
    print(json.dumps(ds.manifest(), indent=2))
    return 0


def cmd_train(args):
    ds = _load_dataset(args.train, args.schema)
    features = classifier.fit_features(
        [r.text for r in ds.records], max_vocab=args.max_vocab
    )
    config = classifier.TrainConfig(epochs=args.epochs, seed=args.seed)
    model = classifier.train(ds, features, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.json")
    print(f"trained on {len(ds)} records; final loss {model.loss_history[-1]:.4f}")
    return 0


def cmd_eval_matrix(args):
    trains = [_load_dataset(p, args.schema) for p in args.train]
    tests = [_load_dataset(p, args.schema) for p in args.test]
    trainer = classifier.BaselineTrainer(
        classifier.TrainConfig(epochs=args.epochs, seed=args.seed)
    )
    matrix = metrics.evaluate_matrix(trains, tests, trainer)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "matrix.csv").write_text(metrics.matrix_to_csv(matrix), encoding="utf-8")
    (out / "matrix.txt").write_text(metrics.matrix_to_text(matrix), encoding="utf-8")
    (out / "matrix.json").write_text(
        json.dumps(matrix.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    print(metrics.matrix_to_text(matrix), end="")
    return 0


def cmd_augment_sweep(args):
    synthetic = _load_dataset(args.synthetic, args.schema)
    real = _load_dataset(args.real, args.schema)
    tests = [_load_dataset(p, args.schema) for p in args.test]
    plan = augment.AugmentationPlan(
        synthetic=synthetic,
        real_train=real,
        rates=tuple(args.rates),
        folds=args.folds,
        seed=args.seed,
        test_sets=tuple(tests),
    )
    trainer = classifier.BaselineTrainer(
        classifier.TrainConfig(epochs=args.epochs, seed=args.seed)
    )
    report = augment.run_sweep(plan, trainer, args.baseline_f1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out / "sweep.txt").write_text(report.to_text(), encoding="utf-8")
    print(report.to_text(), end="")
    if report.stop_rate is not None:
        print(f"stop rate: {report.stop_rate}")
    return 0


def cmd_export_finetune(args):
    train = _load_dataset(args.train, args.schema)
    val = _load_dataset(args.val, args.schema)
    classifier.export_for_finetune(train, val, args.out)
    print(f"export bundle written to {args.out}")
    return 0


def cmd_annotate_serve(args):
    import uvicorn

    from .annotation import AnnotationStore, create_app

    store = AnnotationStore(log_path=args.log)
    ds = _load_dataset(args.dataset, args.schema)
    annotator_a, annotator_b = args.annotators.split(",", 1)
    session = store.open_session(ds, annotator_a, annotator_b)
    print(f"session {session.session_id} with {len(session.tasks)} tasks")
    uvicorn.run(create_app(store), host=args.host, port=args.port)
    return 0


def cmd_report(args):
    if args.matrix:
        payload = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
        print(metrics.matrix_to_text(metrics.EvalMatrix.from_dict(payload)), end="")
    if args.sweep:
        payload = json.loads(Path(args.sweep).read_text(encoding="utf-8"))
        print(augment.SweepReport.from_dict(payload).to_text(), end="")
    return 0


def run_offline_demo(out_dir, seed=0, epochs=30, requests=4):
    """Mock-provider end-to-end run: generate, parse, split, train, evaluate,
    report. Returns the path of the EvalMatrix CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    schema = taxonomy.BINARY_SCHEMA
    topics = taxonomy.default_topics()

    specs = {
        "mock_topic": promptgen.PromptSpec(
            schema=schema, topics=tuple(topics), with_topics=True
        ),
        "mock_plain": promptgen.PromptSpec(
            schema=schema, with_topics=False, instance_count=20
        ),
    }
    built = {}
    for name, spec in specs.items():
        prompt = promptgen.render_zero_shot(spec)
        job = gateway.GenerationJob(
            job_id=f"demo-{name}",
            prompt=prompt,
            provider="mock",
            request_count=requests,
            output_dir=out / "jobs" / name,
            seed=seed,
        )
        completions = gateway.run_job(job, gateway.MOCK_PROFILE)
        parsed = []
        for completion in completions:
            records, _ = parsing.parse_completion(completion, spec, topics)
            parsed.extend(records)
        source = datasets.synthetic_source("mock", "zero_shot", spec.with_topics)
        built[name] = datasets.dataset_from_parsed(
            parsed, schema, source, name, topics
        )

    pool, remainders = datasets.holdout_synthetic_test(
        list(built.values()), fraction=0.10, seed=seed
    )
    topic_rest, plain_rest = remainders
    parts = datasets.split_dataset(topic_rest, datasets.SplitSpec(seed=seed))

    data_dir = out / "datasets"
    for ds in [pool, topic_rest, plain_rest, *parts.values()]:
        ds.save(data_dir)

    trainer = classifier.BaselineTrainer(
        classifier.TrainConfig(epochs=epochs, seed=seed)
    )
    matrix = metrics.evaluate_matrix(
        [parts["train"], plain_rest], [parts["test"], pool], trainer
    )
    report_dir = out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    csv_path = report_dir / "matrix.csv"
    csv_path.write_text(metrics.matrix_to_csv(matrix), encoding="utf-8")
    (report_dir / "matrix.txt").write_text(
        metrics.matrix_to_text(matrix), encoding="utf-8"
    )
    (report_dir / "matrix.json").write_text(
        json.dumps(matrix.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return csv_path


def cmd_demo(args):
    if not args.offline:
        raise SidgenError("only --offline demo runs are supported")
    started = time.time()
    csv_path = run_offline_demo(args.out, seed=args.seed)
    print(f"demo complete in {time.time() - started:.1f}s; matrix at {csv_path}")
    return 0


# -- argument grammar ------------------------------------------------------


def _add_schema(p, default="binary"):
    p.add_argument("--schema", choices=["binary", "fourclass"], default=default)


def build_parser():
    parser = argparse.ArgumentParser(prog="sidgen")
    sub = parser.add_subparsers(dest="command", required=True)

    topics = sub.add_parser("topics").add_subparsers(dest="sub", required=True)
    topics.add_parser("list").set_defaults(func=cmd_topics_list)

    prompt = sub.add_parser("prompt").add_subparsers(dest="sub", required=True)
    render = prompt.add_parser("render")
    _add_schema(render)
    render.add_argument("--topics", action=argparse.BooleanOptionalAction, default=True)
    render.add_argument("--shot", choices=["zero", "few"], default="zero")
    render.add_argument("--per-class", type=int, default=2, dest="per_class")
    render.add_argument("--instances", type=int, default=10)
    render.add_argument("--exemplar-dataset")
    render.add_argument("--seed", type=int, default=0)
    render.add_argument("--out")
    render.set_defaults(func=cmd_prompt_render)

    gen = sub.add_parser("generate")
    _add_schema(gen)
    gen.add_argument("--topics", action=argparse.BooleanOptionalAction, default=True)
    gen.add_argument("--instances", type=int, default=10)
    gen.add_argument("--profile", default="mock")
    gen.add_argument("--config")
    gen.add_argument("--job-id", required=True)
    gen.add_argument("--requests", type=int, default=1)
    gen.add_argument("--concurrency", type=int, default=4)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    parse = sub.add_parser("parse")
    _add_schema(parse)
    parse.add_argument("--topics", action=argparse.BooleanOptionalAction, default=True)
    parse.add_argument("--job", required=True)
    parse.add_argument("--provider", default="mock")
    parse.add_argument("--name", required=True)
    parse.add_argument("--out", required=True)
    parse.set_defaults(func=cmd_parse)

    dataset = sub.add_parser("dataset").add_subparsers(dest="sub", required=True)
    split = dataset.add_parser("split")
    _add_schema(split)
    split.add_argument("--in", dest="input", required=True)
    split.add_argument("--unit", choices=["by_user", "by_record"])
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--out", required=True)
    split.set_defaults(func=cmd_dataset_split)
    binarize = dataset.add_parser("binarize")
    binarize.add_argument("--in", dest="input", required=True)
    binarize.add_argument("--name")
    binarize.add_argument("--out", required=True)
    binarize.set_defaults(func=cmd_dataset_binarize)
    mix = dataset.add_parser("mix")
    _add_schema(mix)
    mix.add_argument("--in", dest="inputs", nargs="+", required=True)
    mix.add_argument("--name", required=True)
    mix.add_argument("--out", required=True)
    mix.set_defaults(func=cmd_dataset_mix)
    holdout = dataset.add_parser("holdout")
    _add_schema(holdout)
    holdout.add_argument("--in", dest="inputs", nargs="+", required=True)
    holdout.add_argument("--fraction", type=float, default=0.10)
    holdout.add_argument("--seed", type=int, default=0)
    holdout.add_argument("--out", required=True)
    holdout.set_defaults(func=cmd_dataset_holdout)
    stats = dataset.add_parser("stats")
    _add_schema(stats)
    stats.add_argument("--in", dest="input", required=True)
    stats.set_defaults(func=cmd_dataset_stats)

    train = sub.add_parser("train")
    _add_schema(train)
    train.add_argument("--train", required=True)
    train.add_argument("--epochs", type=int, default=50)
    train.add_argument("--max-vocab", type=int, default=20000)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--out", required=True)
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval").add_subparsers(dest="sub", required=True)
    matrix = ev.add_parser("matrix")
    _add_schema(matrix)
    matrix.add_argument("--train", nargs="+", required=True)
    matrix.add_argument("--test", nargs="+", required=True)
    matrix.add_argument("--epochs", type=int, default=50)
    matrix.add_argument("--seed", type=int, default=0)
    matrix.add_argument("--out", required=True)
    matrix.set_defaults(func=cmd_eval_matrix)

    aug = sub.add_parser("augment").add_subparsers(dest="sub", required=True)
    sweep = aug.add_parser("sweep")
    _add_schema(sweep)
    sweep.add_argument("--synthetic", required=True)
    sweep.add_argument("--real", required=True)
    sweep.add_argument("--test", nargs="+", required=True)
    sweep.add_argument("--rates", type=float, nargs="+", default=[0.10, 0.20, 0.30])
    sweep.add_argument("--folds", type=int, default=3)
    sweep.add_argument("--baseline-f1", type=float, required=True)
    sweep.add_argument("--epochs", type=int, default=50)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(func=cmd_augment_sweep)

    export = sub.add_parser("export").add_subparsers(dest="sub", required=True)
    finetune = export.add_parser("finetune")
    _add_schema(finetune)
    finetune.add_argument("--train", required=True)
    finetune.add_argument("--val", required=True)
    finetune.add_argument("--out", required=True)
    finetune.set_defaults(func=cmd_export_finetune)

    annotate = sub.add_parser("annotate").add_subparsers(dest="sub", required=True)
    serve = annotate.add_parser("serve")
    _add_schema(serve)
    serve.add_argument("--dataset", required=True)
    serve.add_argument("--annotators", default="annotator_a,annotator_b")
    serve.add_argument("--log")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8700)
    serve.set_defaults(func=cmd_annotate_serve)

    report = sub.add_parser("report")
    report.add_argument("--matrix")
    report.add_argument("--sweep")
    report.set_defaults(func=cmd_report)

    demo = sub.add_parser("demo")
    demo.add_argument("--offline", action="store_true")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out", default="demo_out")
    demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SidgenError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
