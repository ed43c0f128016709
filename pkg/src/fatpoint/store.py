"""Persistent memo of dimension results keyed by (d, m, n).

On disk this is a JSON-lines file: a header line
``{"store": "fatpoint-cache", "version": 1}`` followed by one entry per line.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from .dimensions import SystemSpec

log = logging.getLogger(__name__)

HEADER = {"store": "fatpoint-cache", "version": 1}

NON_SPECIAL = "NonSpecial"
PROBABLY_SPECIAL = "ProbablySpecial"
UNKNOWN = "Unknown"
_RANK = {UNKNOWN: 0, PROBABLY_SPECIAL: 1, NON_SPECIAL: 2}


class StoreError(Exception):
    pass


class CorruptRecord(StoreError):
    def __init__(self, path, lineno: int, line: str, why: str):
        super().__init__(f"{path}:{lineno}: {why}: {line[:200]!r}")
        self.path = path
        self.lineno = lineno
        self.line = line


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class CacheEntry:
    """One stored result.

    ``evidence`` is either ``{"kind": "certificate", "certificate": {...}}``
    with a cert-v1 document, or ``{"kind": "oracle", "prime", "seed",
    "trials", ...}`` describing a reproducible oracle run.
    """

    spec: SystemSpec
    status: str
    evidence: dict[str, Any] | None = None
    gap: int | None = None
    created_at: str = field(default_factory=_now)

    def __post_init__(self) -> None:
        if self.status not in _RANK:
            raise ValueError(f"unknown status {self.status!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "spec": self.spec.as_dict(),
            "status": self.status,
            "gap": self.gap,
            "evidence": self.evidence,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "CacheEntry":
        s = obj["spec"]
        return cls(
            spec=SystemSpec(int(s["d"]), int(s["m"]), int(s["n"])),
            status=obj["status"],
            evidence=obj.get("evidence"),
            gap=obj.get("gap"),
            created_at=obj["created_at"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


class ResultStore:
    """Thread-safe in-memory store with JSON-lines persistence."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[int, int, int], CacheEntry] = {}
        self._lock = threading.Lock()
        self.load_errors: list[CorruptRecord] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[CacheEntry]:
        with self._lock:
            return iter(list(self._entries.values()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResultStore):
            return NotImplemented
        return self._entries == other._entries

    @staticmethod
    def _key(spec: SystemSpec) -> tuple[int, int, int]:
        return (spec.d, spec.m, spec.n)

    def get(self, spec: SystemSpec) -> CacheEntry | None:
        return self._entries.get(self._key(spec))

    def put(self, entry: CacheEntry) -> CacheEntry:
        """Insert ``entry`` unless it would downgrade the stored status.

        Returns whichever entry is stored afterwards.
        """
        if entry.status == NON_SPECIAL and not entry.evidence:
            raise StoreError(f"NonSpecial entry for {entry.spec} carries no evidence")
        key = self._key(entry.spec)
        with self._lock:
            old = self._entries.get(key)
            if old is not None and _RANK[old.status] > _RANK[entry.status]:
                return old
            if old is not None and old.status == entry.status and old.evidence == entry.evidence:
                return old
            self._entries[key] = entry
            return entry

    def save(self, path: str | os.PathLike | None = None) -> Path:
        """Write every entry, replacing the target file atomically."""
        target = Path(path) if path is not None else self.path
        if target is None:
            raise StoreError("no path to save to")
        with self._lock:
            snapshot = sorted(self._entries.items())
        lines = [json.dumps(HEADER, sort_keys=True, separators=(",", ":"))]
        lines += [e.dumps() for _, e in snapshot]
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
            os.replace(tmp, target)
        except OSError as exc:
            Path(tmp).unlink(missing_ok=True)
            raise StoreError(f"cannot write store {target}: {exc}") from exc
        return target

    def append(self, entry: CacheEntry, path: str | os.PathLike | None = None) -> None:
        """Put ``entry`` and append it as one line to the store file."""
        stored = self.put(entry)
        if stored is not entry:
            return
        target = Path(path) if path is not None else self.path
        if target is None:
            raise StoreError("no path to append to")
        new = not target.exists() or target.stat().st_size == 0
        try:
            with open(target, "a", encoding="utf-8") as fh:
                if new:
                    fh.write(json.dumps(HEADER, sort_keys=True, separators=(",", ":")) + "\n")
                fh.write(entry.dumps() + "\n")
        except OSError as exc:
            raise StoreError(f"cannot append to store {target}: {exc}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike, strict: bool = False) -> "ResultStore":
        """Read a store file. A missing file yields an empty store.

        Malformed lines are logged and collected in ``load_errors``; with
        ``strict=True`` the first one is raised instead.
        """
        store = cls(path)
        p = Path(path)
        if not p.exists():
            return store
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreError(f"cannot read store {p}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if lineno == 1 and "store" in obj:
                    if obj != HEADER:
                        raise ValueError(f"unsupported header {obj}")
                    continue
                store.put(CacheEntry.from_json(obj))
            except (ValueError, KeyError, TypeError, StoreError) as exc:
                err = CorruptRecord(p, lineno, line, str(exc) or type(exc).__name__)
                if strict:
                    raise err from exc
                log.warning("skipping malformed store record: %s", err)
                store.load_errors.append(err)
        return store
