import json
import random
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from sidgen.datasets import Dataset, TextRecord, real_source, record_id
from sidgen.taxonomy import BINARY_SCHEMA, FOURCLASS_SCHEMA


def make_record(text, label, source_name="test", topic=None, user_id=None):
    src = real_source(source_name)
    return TextRecord(
        id=record_id(text, f"real:{source_name}"),
        text=text,
        label=label,
        topic=topic,
        user_id=user_id,
        source=src,
    )


def make_dataset(labels, name="toy", schema=None, with_users=False, seed=0):
    """One record per label entry; texts are unique and deterministic."""
    schema = schema or (
        BINARY_SCHEMA if set(labels) <= set(BINARY_SCHEMA.names) else FOURCLASS_SCHEMA
    )
    rng = random.Random(seed)
    records = []
    for i, label in enumerate(labels):
        text = f"sample text number {i} for {label} with filler {rng.random():.6f}"
        user = f"user{i // 3}" if with_users else None
        records.append(make_record(text, label, source_name=name, user_id=user))
    return Dataset(name, schema, records)


def random_dataset(rng, n, schema=BINARY_SCHEMA, with_users=False, name="rand"):
    labels = [rng.choice(schema.names) for _ in range(n)]
    records = []
    n_users = max(1, n // rng.randint(1, 4)) if with_users else 0
    for i, label in enumerate(labels):
        text = f"record {i} {rng.random():.9f} about {label}"
        user = f"u{rng.randrange(n_users)}" if with_users else None
        records.append(make_record(text, label, source_name=name, user_id=user))
    return Dataset(name, schema, records)


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        server = self.server
        with server.state_lock:
            server.request_count += 1
            server.in_flight += 1
            server.max_in_flight = max(server.max_in_flight, server.in_flight)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        server.request_log.append(body)
        time.sleep(server.latency)
        with server.state_lock:
            if server.scripted:
                status, payload = server.scripted.pop(0)
            else:
                status, payload = 200, None
            server.in_flight -= 1
        if payload is None and status == 200:
            payload = {
                "choices": [{"message": {"content": server.default_content}}],
                "usage": {"prompt_tokens": 1, "completion_tokens": 1},
            }
        data = json.dumps(payload or {}).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class FixtureServer:
    """Scriptable offline chat-completion endpoint for transport tests."""

    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.httpd.state_lock = threading.Lock()
        self.httpd.request_count = 0
        self.httpd.in_flight = 0
        self.httpd.max_in_flight = 0
        self.httpd.request_log = []
        self.httpd.scripted = []
        self.httpd.latency = 0.0
        self.httpd.default_content = '[{"text": "placeholder completion text here", "topic": "Depression", "risk level": "Suicidal"}]'
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def script(self, *steps):
        """Each step: an int status (with default/empty body) or (status, payload)."""
        for step in steps:
            if isinstance(step, int):
                self.httpd.scripted.append((step, None if step == 200 else {}))
            else:
                self.httpd.scripted.append(step)

    @property
    def request_count(self):
        return self.httpd.request_count

    @property
    def max_in_flight(self):
        return self.httpd.max_in_flight

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def fixture_server():
    server = FixtureServer()
    yield server
    server.close()
