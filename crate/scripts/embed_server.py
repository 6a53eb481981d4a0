"""Minimal embedding service speaking the variant JSON protocol.

    POST /embed  {"model": "...", "input": ["text", ...]}  ->  {"vectors": [[...], ...]}

Usage:
    python scripts/embed_server.py --model sentence-transformers/all-MiniLM-L6-v2 --port 8765
    VARIANT_EMBED_URL=http://127.0.0.1:8765/embed cargo test -p variant-app --test acceptance
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def make_handler(encode, model_name):
    class Handler(BaseHTTPRequestHandler):
        def _reply(self, status, payload):
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path != "/embed":
                self._reply(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                request = json.loads(self.rfile.read(length))
                texts = request["input"]
                if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                    raise ValueError("input must be a list of strings")
            except (ValueError, KeyError) as exc:
                self._reply(400, {"error": str(exc)})
                return
            requested = request.get("model")
            if requested and requested != model_name:
                self._reply(400, {"error": f"serving {model_name}, not {requested}"})
                return
            self._reply(200, {"vectors": encode(texts)})

        def log_message(self, fmt, *args):
            pass

    return Handler


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--model", default="sentence-transformers/all-MiniLM-L6-v2")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args()

    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(args.model)

    def encode(texts):
        return model.encode(texts, convert_to_numpy=True).astype(float).tolist()

    server = ThreadingHTTPServer((args.host, args.port), make_handler(encode, args.model))
    print(f"serving {args.model} on http://{args.host}:{args.port}/embed", flush=True)
    server.serve_forever()


if __name__ == "__main__":
    main()
