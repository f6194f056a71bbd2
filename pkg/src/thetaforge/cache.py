"""Content-addressed on-disk cache for pipeline stage payloads.

Keys are SHA-256 digests of ``(geometry hash, stage, order, extra)``; values are
JSON documents.  Writes go to a temp file in the same directory followed by
``os.replace``, so readers never see partial files.  A file that fails to parse
or whose embedded key does not match is ignored with a warning.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import warnings
from pathlib import Path
from typing import Any, Callable

log = logging.getLogger(__name__)

ENV_VAR = "THETAFORGE_CACHE"


class CacheWarning(UserWarning):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "thetaforge"


def cache_key(geometry_hash: str, stage: str, order: int, extra: str = "") -> str:
    blob = json.dumps([geometry_hash, stage, order, extra], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class ResultCache:
    def __init__(self, directory: str | os.PathLike | None = None, enabled: bool = True):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.enabled = enabled

    def path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> Any | None:
        if not self.enabled:
            return None
        p = self.path(key)
        if not p.exists():
            return None
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
            if not isinstance(doc, dict) or doc.get("key") != key or "payload" not in doc:
                raise ValueError("key mismatch or missing payload")
        except (OSError, ValueError) as exc:
            warnings.warn(f"ignoring corrupted cache entry {p}: {exc}", CacheWarning, stacklevel=2)
            return None
        log.debug("cache hit %s", key)
        return doc["payload"]

    def put(self, key: str, payload: Any) -> None:
        if not self.enabled:
            return
        p = self.path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        data = json.dumps({"key": key, "payload": payload}, indent=1)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(data)
            os.replace(tmp, p)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def fetch(self, key: str, compute: Callable[[], Any]) -> Any:
        hit = self.get(key)
        if hit is not None:
            return hit
        payload = compute()
        try:
            self.put(key, payload)
        except OSError as exc:
            warnings.warn(f"could not write cache entry: {exc}", CacheWarning, stacklevel=2)
        return payload
