"""Reference external-oracle worker.

Serves a saved model file over the JSON-lines oracle protocol:

    python -m dnaadv.oracle_worker --model model.json

Protocol (one JSON object per line, UTF-8):
    parent: {"type":"hello","n_classes":K}   child: {"type":"ready","n_classes":K}
    parent: {"type":"predict","id":N,"sequences":[...]}
    child:  {"type":"probs","id":N,"probs":[[...],...]}
    child:  {"type":"error","id":N,"message":"..."} on per-request failure
"""

import argparse
import json
import sys

from .model import load_model


def serve(model, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout

    def reply(obj):
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            reply({"type": "error", "id": -1, "message": "unparseable request"})
            continue
        kind = msg.get("type")
        if kind == "hello":
            if msg.get("n_classes") != model.n_classes:
                reply({"type": "error", "id": -1,
                       "message": f"model has {model.n_classes} classes"})
                return 1
            reply({"type": "ready", "n_classes": model.n_classes})
        elif kind == "predict":
            msg_id = msg.get("id")
            try:
                probs = model.predict_proba(msg["sequences"])
                reply({"type": "probs", "id": msg_id,
                       "probs": [row.tolist() for row in probs]})
            except Exception as exc:
                reply({"type": "error", "id": msg_id, "message": str(exc)})
        else:
            reply({"type": "error", "id": msg.get("id", -1),
                   "message": f"unknown request type {kind!r}"})
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="serve a saved model as an oracle")
    parser.add_argument("--model", required=True, help="path to a saved model JSON")
    args = parser.parse_args(argv)
    return serve(load_model(args.model))


if __name__ == "__main__":
    sys.exit(main())
