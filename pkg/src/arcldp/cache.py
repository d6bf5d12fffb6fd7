"""On-disk JSON results cache.

One file per (kind, parameter hash); writes go through a temporary file
and ``os.replace`` so readers never see partial files.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Optional

from . import __version__

ENV_VAR = "ARC_LDP_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "arcldp"


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)


def write_json_atomic(path, payload: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ResultsCache:
    """JSON store keyed by a kind string and a mapping of parameters."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def key(self, kind: str, params: Mapping[str, Any]) -> str:
        blob = canonical_json({"kind": kind, "params": dict(params), "version": __version__})
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:24]

    def path(self, kind: str, params: Mapping[str, Any]) -> Path:
        return self.root / f"{kind}-{self.key(kind, params)}.json"

    def get(self, kind: str, params: Mapping[str, Any]) -> Optional[dict]:
        p = self.path(kind, params)
        if not p.exists():
            return None
        with p.open(encoding="utf-8") as fh:
            return json.load(fh)

    def put(self, kind: str, params: Mapping[str, Any], payload: dict) -> Path:
        p = self.path(kind, params)
        write_json_atomic(p, payload)
        return p
