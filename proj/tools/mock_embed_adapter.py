#!/usr/bin/env python3
"""Reference local-model adapter for the subprocess backend.

Reads {"id", "text"} JSON lines on stdin and answers {"id", "vec"} lines with a
deterministic pseudo-embedding derived from a SHA-256 stream of the text.

usage: mock_embed_adapter.py --dim N
"""
import argparse
import hashlib
import json
import struct
import sys


def embed(text, dim):
    out, counter = [], 0
    while len(out) < dim:
        block = hashlib.sha256(f"{counter}:{text}".encode()).digest()
        for (word,) in struct.iter_unpack("<I", block):
            out.append(word / 2**31 - 1.0)
        counter += 1
    return out[:dim]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, required=True)
    args = ap.parse_args()
    for line in sys.stdin:
        req = json.loads(line)
        sys.stdout.write(json.dumps({"id": req["id"], "vec": embed(req["text"], args.dim)}) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
