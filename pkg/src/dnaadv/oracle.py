"""Black-box classifier oracles.

An oracle maps DNA sequences to class-probability vectors and counts every
sequence it is asked about.  Two implementations: the in-process k-mer
model, and a client for external models spoken to over a line-delimited
JSON protocol on a child process's stdin/stdout (see oracle_worker for the
reference child).
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading

import numpy as np

from .errors import (
    HandshakeMismatchError,
    OracleFailureError,
    SpawnFailureError,
)
from .model import LinearKmerModel
from .seqcore import decode_codes, encode_sequence

PROB_TOLERANCE = 1e-6


def check_probs(probs: np.ndarray, n_classes: int) -> np.ndarray:
    """Validate a probability matrix: shape, range, rows summing to 1."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != n_classes:
        raise OracleFailureError(
            f"expected (n,{n_classes}) probabilities, got shape {probs.shape}")
    if not np.isfinite(probs).all():
        raise OracleFailureError("non-finite probability")
    if (probs < -PROB_TOLERANCE).any() or (probs > 1 + PROB_TOLERANCE).any():
        raise OracleFailureError("probability outside [0,1]")
    sums = probs.sum(axis=1)
    if (np.abs(sums - 1.0) > PROB_TOLERANCE).any():
        raise OracleFailureError("probability rows must sum to 1")
    return probs


class Oracle:
    """Query interface shared by all attack code."""

    n_classes: int

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self._queries = 0
        self._count_lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._queries

    def _count(self, n: int) -> None:
        with self._count_lock:
            self._queries += n

    def predict_proba(self, seqs) -> np.ndarray:
        """One probability row per input sequence, in input order."""
        raise NotImplementedError

    def predict_proba_encoded(self, codes: np.ndarray) -> np.ndarray:
        """Same as predict_proba for a batch of encoded equal-length rows."""
        return self.predict_proba([decode_codes(row) for row in np.atleast_2d(codes)])

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class InProcessOracle(Oracle):
    """Oracle view of a LinearKmerModel."""

    def __init__(self, model: LinearKmerModel):
        super().__init__(model.n_classes)
        self.model = model

    def predict_proba(self, seqs) -> np.ndarray:
        probs = self.model.predict_proba(seqs)
        self._count(len(seqs))
        return check_probs(probs, self.n_classes)

    def predict_proba_encoded(self, codes: np.ndarray) -> np.ndarray:
        codes = np.atleast_2d(codes)
        probs = self.model.predict_proba_encoded(codes)
        self._count(codes.shape[0])
        return check_probs(probs, self.n_classes)


class ExternalOracle(Oracle):
    """Client for a child process speaking the JSON-lines oracle protocol.

    Writes are serialized; responses are matched to callers by request id,
    so concurrent callers multiplex safely over one child.
    """

    def __init__(self, command, n_classes: int, timeout: float = 60.0):
        super().__init__(n_classes)
        self.timeout = timeout
        if isinstance(command, str):
            command = shlex.split(command)
        try:
            self._proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as exc:
            raise SpawnFailureError(f"cannot start oracle {command!r}: {exc}") from exc
        self._write_lock = threading.Lock()
        self._pending_lock = threading.Lock()
        self._pending: dict[int, dict] = {}
        self._next_id = 0
        self._dead: str | None = None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._handshake()

    # -- wire helpers -------------------------------------------------

    def _send(self, obj: dict) -> None:
        line = json.dumps(obj) + "\n"
        with self._write_lock:
            try:
                self._proc.stdin.write(line)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError, ValueError) as exc:
                raise OracleFailureError(f"oracle pipe closed: {exc}") from exc

    def _read_loop(self) -> None:
        stream = self._proc.stdout
        while True:
            line = stream.readline()
            if not line:
                self._fail_all("oracle process closed its output")
                return
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                self._fail_all(f"oracle sent unparseable line: {line[:200]!r}")
                return
            # the handshake "ready" reply carries no id; it is parked at -1
            msg_id = msg.get("id", -1)
            with self._pending_lock:
                slot = self._pending.get(msg_id)
            if slot is None:
                self._fail_all(f"oracle sent response for unknown id {msg_id!r}")
                return
            slot["msg"] = msg
            slot["event"].set()

    def _fail_all(self, reason: str) -> None:
        self._dead = reason
        with self._pending_lock:
            pending = list(self._pending.values())
        for slot in pending:
            slot["event"].set()

    def _roundtrip(self, request: dict) -> dict:
        if self._dead:
            raise OracleFailureError(self._dead)
        msg_id = request["id"]
        slot = {"event": threading.Event(), "msg": None}
        with self._pending_lock:
            self._pending[msg_id] = slot
        try:
            self._send(request)
            if not slot["event"].wait(self.timeout):
                raise OracleFailureError(
                    f"oracle timed out after {self.timeout}s (request {msg_id})")
        finally:
            with self._pending_lock:
                self._pending.pop(msg_id, None)
        if slot["msg"] is None:
            raise OracleFailureError(self._dead or "oracle died mid-request")
        msg = slot["msg"]
        if msg.get("type") == "error":
            raise OracleFailureError(f"oracle error: {msg.get('message')}")
        return msg

    def _alloc_id(self) -> int:
        with self._pending_lock:
            self._next_id += 1
            return self._next_id

    # -- protocol -----------------------------------------------------

    def _handshake(self) -> None:
        slot = {"event": threading.Event(), "msg": None}
        with self._pending_lock:
            self._pending[-1] = slot
        try:
            self._send({"type": "hello", "n_classes": self.n_classes})
            if not slot["event"].wait(self.timeout):
                raise HandshakeMismatchError("no handshake reply from oracle")
        finally:
            with self._pending_lock:
                self._pending.pop(-1, None)
        msg = slot["msg"]
        if msg is None:
            raise HandshakeMismatchError(self._dead or "oracle died during handshake")
        if msg.get("type") != "ready" or msg.get("n_classes") != self.n_classes:
            raise HandshakeMismatchError(f"bad handshake reply: {msg!r}")

    def predict_proba(self, seqs) -> np.ndarray:
        texts = [str(s) for s in seqs]
        msg = self._roundtrip({
            "type": "predict",
            "id": self._alloc_id(),
            "sequences": texts,
        })
        if msg.get("type") != "probs":
            raise OracleFailureError(f"expected probs reply, got {msg.get('type')!r}")
        probs = msg.get("probs")
        if not isinstance(probs, list) or len(probs) != len(texts):
            raise OracleFailureError("probs reply has wrong row count")
        self._count(len(texts))
        return check_probs(np.array(probs, dtype=np.float64), self.n_classes)

    def close(self) -> None:
        proc = self._proc
        try:
            if proc.stdin:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.terminate()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()


def spawn_external_oracle(command, n_classes: int,
                          timeout: float = 60.0) -> ExternalOracle:
    """Start an external oracle child process and complete the handshake."""
    return ExternalOracle(command, n_classes, timeout)
