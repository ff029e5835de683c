"""In-process mock of the remote solve endpoint, for tests and demos.

    python -m cqmkit.solvers.mock_server --port 8765 --mode exact

Modes: ``exact`` answers with the exact enumerator's samples, ``fixed``
returns ``fixed_samples`` verbatim, ``corrupt_energy`` is ``exact`` with
wrong energy fields, ``empty``, ``error`` (HTTP 500), ``malformed``
(non-JSON body), ``wrong_length`` (one bit too many per sample).
"""

from __future__ import annotations

import argparse
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from cqmkit.core import CqmModel
from cqmkit.errors import CqmError
from cqmkit.solvers.exact import solve_exact

MODES = ("exact", "fixed", "corrupt_energy", "empty", "error", "malformed", "wrong_length")


class _Handler(BaseHTTPRequestHandler):
    server: "MockSolverServer"

    def log_message(self, fmt, *args):
        pass

    def _send(self, status, body):
        data = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status, code, message):
        self._send(status, {"error": {"code": code, "message": message}})

    def do_POST(self):
        srv = self.server
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        srv.requests.append({"path": self.path, "headers": dict(self.headers), "body": body})
        if self.path != "/v1/solve":
            return self._error(404, "not_found", f"no route {self.path}")
        if srv.token and self.headers.get("Authorization") != f"Bearer {srv.token}":
            return self._error(401, "unauthorized", "missing or wrong bearer token")
        try:
            doc = json.loads(body)
            model = CqmModel.from_dict(doc["model"])
            max_samples = int(doc.get("max_samples", 10))
        except (ValueError, KeyError, TypeError, CqmError) as exc:
            return self._error(400, "bad_request", str(exc))

        if srv.delay:
            time.sleep(srv.delay)
        mode = srv.mode
        if mode == "error":
            return self._error(500, "internal", "solver crashed")
        if mode == "malformed":
            return self._send(200, b"{not json")
        if mode == "empty":
            samples = []
        elif mode == "fixed":
            samples = srv.fixed_samples
        else:
            result = solve_exact(model, top_k=max(1, max_samples), all_optimal=False)
            samples = [
                {"bits": list(s.assignment), "count": s.num_occurrences, "energy": s.energy}
                for s in result.samples[:max_samples]
            ]
            if mode == "corrupt_energy":
                for s in samples:
                    s["energy"] = s["energy"] + 1000.0
            elif mode == "wrong_length":
                for s in samples:
                    s["bits"] = s["bits"] + [0]
        self._send(200, {"samples": samples, "solver_info": {"name": f"mock-{mode}"}})


class MockSolverServer(ThreadingHTTPServer):
    """Threaded mock server; use as a context manager to run it in the background."""

    daemon_threads = True

    def __init__(self, mode="exact", host="127.0.0.1", port=0, fixed_samples=None, token=None,
                 delay=0.0):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
        super().__init__((host, port), _Handler)
        self.mode = mode
        self.fixed_samples = fixed_samples or []
        self.token = token
        self.delay = delay
        self.requests: list[dict] = []
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread = threading.Thread(target=self.serve_forever, args=(0.05,), daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join()


def main(argv=None):
    parser = argparse.ArgumentParser(description="Run the mock remote solver.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--mode", choices=MODES, default="exact")
    parser.add_argument("--token")
    args = parser.parse_args(argv)
    server = MockSolverServer(args.mode, args.host, args.port, token=args.token)
    print(f"mock solver listening on {server.url} (mode={args.mode})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
