"""Dual-annotator labeling, adjudication, and agreement statistics.

Session state lives in an append-only event log replayed on startup, so a
crashed process never loses human work. The read API is blind: an annotator
never sees the other annotator's label before submitting their own, and the
model-proposed label stays hidden until a task is Final.
"""

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SidgenError

PENDING = "pending"
AWAITING_SECOND = "awaiting_second"
DISAGREEMENT = "disagreement"
FINAL = "final"


class AnnotationError(SidgenError):
    status_code = 400


class SessionError(AnnotationError):
    status_code = 400


class UnknownTaskError(AnnotationError):
    status_code = 404


class ForeignAnnotatorError(AnnotationError):
    status_code = 403


class DuplicateSubmissionError(AnnotationError):
    status_code = 409


class InvalidStateError(AnnotationError):
    status_code = 409


class InvalidLabelError(AnnotationError):
    status_code = 422


class IncompleteSessionError(AnnotationError):
    status_code = 409


@dataclass
class AnnotationTask:
    task_id: str
    record_id: str
    text: str
    model_label: str                  # hidden until Final
    labels: dict = field(default_factory=dict)
    status: str = PENDING
    consensus_label: str = None
    note: str = None

    def redacted_view(self, annotator=None):
        """What the given annotator may see at the task's current state."""
        view = {
            "task_id": self.task_id,
            "record_id": self.record_id,
            "text": self.text,
            "status": self.status,
        }
        if self.status == FINAL:
            view["labels"] = dict(self.labels)
            view["consensus_label"] = self.consensus_label
            view["model_label"] = self.model_label
            view["note"] = self.note
        elif self.status == DISAGREEMENT:
            # adjudication needs both raw labels on the table
            view["labels"] = dict(self.labels)
        elif annotator is not None and annotator in self.labels:
            view["labels"] = {annotator: self.labels[annotator]}
        else:
            view["labels"] = {}
        return view


@dataclass
class AnnotationSession:
    session_id: str
    dataset_name: str
    schema_kind: str
    label_names: tuple
    annotators: tuple
    tasks: dict = field(default_factory=dict)  # task_id -> AnnotationTask

    def task(self, task_id):
        try:
            return self.tasks[task_id]
        except KeyError:
            raise UnknownTaskError(f"no task {task_id}") from None

    def counts(self):
        counts = {PENDING: 0, AWAITING_SECOND: 0, DISAGREEMENT: 0, FINAL: 0}
        for t in self.tasks.values():
            counts[t.status] += 1
        return counts


@dataclass
class AgreementReport:
    total: int
    inter_annotator_agreement: float
    retention_rate: float
    kappa: float
    relabeled: int

    def to_dict(self):
        return {
            "total": self.total,
            "inter_annotator_agreement": self.inter_annotator_agreement,
            "retention_rate": self.retention_rate,
            "kappa": self.kappa,
            "relabeled": self.relabeled,
        }


def cohens_kappa(labels_a, labels_b):
    """Chance-corrected agreement; p_e from each rater's marginal label
    frequencies."""
    n = len(labels_a)
    if n == 0:
        return 0.0
    p_o = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    values = set(labels_a) | set(labels_b)
    p_e = sum(
        (labels_a.count(v) / n) * (labels_b.count(v) / n) for v in values
    )
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


class AnnotationStore:
    """All sessions, backed by an optional append-only event log.

    Mutations are serialized through one lock; replaying the log rebuilds
    identical state.
    """

    def __init__(self, log_path=None):
        self.sessions = {}
        self.log_path = Path(log_path) if log_path else None
        self._lock = threading.Lock()
        if self.log_path and self.log_path.exists():
            self._replay()

    # -- event log ---------------------------------------------------------

    def _append(self, event):
        if self.log_path is None:
            return
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _replay(self):
        with self.log_path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    self._apply(json.loads(line), record=False)

    def _apply(self, event, record=True):
        kind = event["event"]
        if kind == "session_opened":
            session = AnnotationSession(
                session_id=event["session_id"],
                dataset_name=event["dataset_name"],
                schema_kind=event["schema_kind"],
                label_names=tuple(event["label_names"]),
                annotators=tuple(event["annotators"]),
            )
            for t in event["tasks"]:
                session.tasks[t["task_id"]] = AnnotationTask(
                    task_id=t["task_id"],
                    record_id=t["record_id"],
                    text=t["text"],
                    model_label=t["model_label"],
                )
            self.sessions[session.session_id] = session
        elif kind == "label_submitted":
            self._do_submit(
                self.session(event["session_id"]),
                event["task_id"],
                event["annotator"],
                event["label"],
            )
        elif kind == "task_resolved":
            self._do_resolve(
                self.session(event["session_id"]),
                event["task_id"],
                event["label"],
                event.get("note"),
            )
        else:
            raise SessionError(f"unknown event kind {kind!r}")
        if record:
            self._append(event)

    # -- operations --------------------------------------------------------

    def session(self, session_id):
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownTaskError(f"no session {session_id}") from None

    def open_session(self, dataset, annotator_a, annotator_b, session_id=None):
        if annotator_a == annotator_b:
            raise SessionError("annotators must be distinct")
        if len(dataset) == 0:
            raise SessionError("cannot annotate an empty dataset")
        session_id = session_id or uuid.uuid4().hex[:12]
        if session_id in self.sessions:
            raise SessionError(f"session {session_id} already exists")
        with self._lock:
            self._apply(
                {
                    "event": "session_opened",
                    "session_id": session_id,
                    "dataset_name": dataset.name,
                    "schema_kind": dataset.schema.kind,
                    "label_names": dataset.schema.names,
                    "annotators": [annotator_a, annotator_b],
                    "tasks": [
                        {
                            "task_id": f"t{idx:05d}",
                            "record_id": r.id,
                            "text": r.text,
                            "model_label": r.label,
                        }
                        for idx, r in enumerate(dataset.records)
                    ],
                }
            )
        return self.sessions[session_id]

    def _do_submit(self, session, task_id, annotator, label):
        task = session.task(task_id)
        if annotator not in session.annotators:
            raise ForeignAnnotatorError(
                f"{annotator!r} is not an annotator of this session"
            )
        if label not in session.label_names:
            raise InvalidLabelError(
                f"{label!r} is not a {session.schema_kind} label"
            )
        if task.status in (DISAGREEMENT, FINAL):
            raise InvalidStateError(f"task {task_id} is {task.status}")
        if annotator in task.labels:
            raise DuplicateSubmissionError(
                f"{annotator} already labeled task {task_id}"
            )
        task.labels[annotator] = label
        if len(task.labels) == 1:
            task.status = AWAITING_SECOND
        else:
            a, b = (task.labels[x] for x in session.annotators)
            if a == b:
                task.consensus_label = a
                task.status = FINAL
            else:
                task.status = DISAGREEMENT
        return task.status

    def submit_label(self, session_id, task_id, annotator, label):
        with self._lock:
            session = self.session(session_id)
            # validate before logging so the log never holds bad events
            status = self._do_submit(session, task_id, annotator, label)
            self._append(
                {
                    "event": "label_submitted",
                    "session_id": session_id,
                    "task_id": task_id,
                    "annotator": annotator,
                    "label": label,
                }
            )
        return status

    def _do_resolve(self, session, task_id, label, note):
        task = session.task(task_id)
        if task.status != DISAGREEMENT:
            raise InvalidStateError(
                f"task {task_id} is {task.status}, not in disagreement"
            )
        if label not in session.label_names:
            raise InvalidLabelError(
                f"{label!r} is not a {session.schema_kind} label"
            )
        task.consensus_label = label
        task.note = note
        task.status = FINAL
        return task.status

    def resolve(self, session_id, task_id, label, note=None):
        with self._lock:
            session = self.session(session_id)
            status = self._do_resolve(session, task_id, label, note)
            self._append(
                {
                    "event": "task_resolved",
                    "session_id": session_id,
                    "task_id": task_id,
                    "label": label,
                    "note": note,
                }
            )
        return status

    def agreement_report(self, session_id):
        session = self.session(session_id)
        unfinished = [
            t.task_id for t in session.tasks.values() if t.status != FINAL
        ]
        if unfinished:
            raise IncompleteSessionError(
                f"{len(unfinished)} task(s) not yet final"
            )
        tasks = list(session.tasks.values())
        total = len(tasks)
        a_id, b_id = session.annotators
        raw_a = [t.labels[a_id] for t in tasks]
        raw_b = [t.labels[b_id] for t in tasks]
        agree = sum(1 for a, b in zip(raw_a, raw_b) if a == b)
        retained = sum(1 for t in tasks if t.consensus_label == t.model_label)
        return AgreementReport(
            total=total,
            inter_annotator_agreement=agree / total,
            retention_rate=retained / total,
            kappa=cohens_kappa(raw_a, raw_b),
            relabeled=total - retained,
        )


def create_app(store):
    """FastAPI app exposing the annotation workflow over HTTP."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="annotation service")

    @app.exception_handler(AnnotationError)
    async def _annotation_error(request: Request, exc: AnnotationError):
        return JSONResponse(
            status_code=exc.status_code, content={"error": str(exc)}
        )

    @app.get("/sessions/{session_id}")
    def session_summary(session_id: str):
        session = store.session(session_id)
        return {
            "session_id": session.session_id,
            "dataset": session.dataset_name,
            "schema": session.schema_kind,
            "labels": list(session.label_names),
            "annotators": list(session.annotators),
            "counts": session.counts(),
        }

    @app.get("/sessions/{session_id}/tasks")
    def list_tasks(session_id: str, annotator: str = None, status: str = None):
        session = store.session(session_id)
        tasks = [
            t.redacted_view(annotator)
            for t in session.tasks.values()
            if status is None or t.status == status
        ]
        return {"tasks": tasks}

    @app.post("/sessions/{session_id}/tasks/{task_id}/labels")
    async def submit(session_id: str, task_id: str, request: Request):
        body = await request.json()
        status = store.submit_label(
            session_id, task_id, body.get("annotator"), body.get("label")
        )
        return {"task_id": task_id, "status": status}

    @app.post("/sessions/{session_id}/tasks/{task_id}/resolve")
    async def resolve(session_id: str, task_id: str, request: Request):
        body = await request.json()
        status = store.resolve(
            session_id, task_id, body.get("label"), body.get("note")
        )
        return {"task_id": task_id, "status": status}

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        return store.agreement_report(session_id).to_dict()

    return app
