"""Report records, input hashing and order-preserving parallel maps."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional

from . import __version__

JOBS_ENV = "QAMRKIT_JOBS"


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def meta_record(command: str, config: dict, seed: Optional[int], inputs: Iterable[str]) -> dict:
    return {
        "type": "meta",
        "tool": "qamrkit",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {p: file_sha256(p) for p in inputs if p and p != "-"},
    }


def dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def pmap(fn: Callable, items: list, jobs: int = 1) -> list:
    """``map`` over processes; results come back in input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
