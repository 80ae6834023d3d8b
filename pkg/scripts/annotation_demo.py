#!/usr/bin/env python3
"""Serve the annotation API over a mock-generated synthetic test pool.

Opens a dual-annotator session on freshly generated data and starts the HTTP
service; point the annotation UI (or curl) at it. The event log makes the
session resumable across restarts.
"""

import argparse
import sys
from pathlib import Path

from sidgen import datasets, gateway, parsing, promptgen, taxonomy
from sidgen.annotation import AnnotationStore, create_app


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="annotation_out")
    ap.add_argument("--port", type=int, default=8700)
    ap.add_argument("--annotators", default="annotator_a,annotator_b")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    topics = taxonomy.default_topics()
    spec = promptgen.PromptSpec(
        schema=taxonomy.BINARY_SCHEMA, topics=tuple(topics), with_topics=True
    )
    job = gateway.GenerationJob(
        job_id="annotation-pool",
        prompt=promptgen.render_zero_shot(spec),
        provider="mock",
        request_count=2,
        output_dir=Path(args.out) / "job",
        seed=args.seed,
    )
    records = []
    for completion in gateway.run_job(job, gateway.MOCK_PROFILE):
        parsed, _ = parsing.parse_completion(completion, spec, topics)
        records.extend(parsed)
    source = datasets.synthetic_source("mock", "zero_shot", True)
    pool = datasets.dataset_from_parsed(
        records, spec.schema, source, "annotation_pool", topics
    )

    store = AnnotationStore(log_path=Path(args.out) / "events.jsonl")
    a, b = args.annotators.split(",", 1)
    session = store.open_session(pool, a, b)
    print(f"session {session.session_id}: {len(session.tasks)} tasks for {a}, {b}")
    print(f"GET http://127.0.0.1:{args.port}/sessions/{session.session_id}")

    import uvicorn

    uvicorn.run(create_app(store), host="127.0.0.1", port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
