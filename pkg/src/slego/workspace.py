"""File-tree workspace: the shared dataspace, service code, KB files and run outputs.

All access goes through :class:`Workspace`, which confines every path to the
workspace root. Writes are atomic (temp file + rename). Symlinks are refused
at put time so confinement cannot be bypassed through links we created.
"""

from __future__ import annotations

import os
import shutil
from dataclasses import dataclass
from pathlib import Path

from .errors import SlegoError

SUBTREES = ("dataspace", "microservices", "kb", "runs", "fixtures")


@dataclass(frozen=True)
class FileEntry:
    path: str
    size: int
    modified: float

    def to_json(self) -> dict:
        return {"path": self.path, "size": self.size, "modified": self.modified}


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root).resolve()
        self.root.mkdir(parents=True, exist_ok=True)
        for sub in SUBTREES:
            (self.root / sub).mkdir(exist_ok=True)

    # -- path confinement ---------------------------------------------------

    def resolve(self, rel_path: str) -> Path:
        """Resolve a workspace-relative path, raising E_ESCAPE if it leaves root."""
        if not isinstance(rel_path, str) or rel_path == "":
            raise SlegoError("E_ESCAPE", f"invalid workspace path {rel_path!r}")
        p = Path(rel_path)
        if p.is_absolute() or (len(rel_path) > 1 and rel_path[1] == ":"):
            raise SlegoError("E_ESCAPE", f"absolute path not allowed: {rel_path!r}")
        resolved = Path(os.path.normpath(self.root / p))
        if resolved != self.root and self.root not in resolved.parents:
            raise SlegoError("E_ESCAPE", f"path escapes workspace root: {rel_path!r}")
        return resolved

    def rel(self, abs_path: Path) -> str:
        return abs_path.relative_to(self.root).as_posix()

    def exists(self, rel_path: str) -> bool:
        try:
            return self.resolve(rel_path).exists()
        except SlegoError:
            return False

    # -- operations ---------------------------------------------------------

    def put_file(self, rel_path: str, data: bytes) -> str:
        target = self.resolve(rel_path)
        if target == self.root:
            raise SlegoError("E_ESCAPE", "cannot overwrite workspace root")
        if target.is_symlink():
            raise SlegoError("E_IO", f"refusing to write through symlink: {rel_path!r}")
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            tmp = target.parent / f".{target.name}.tmp-{os.getpid()}"
            tmp.write_bytes(data)
            os.replace(tmp, target)
        except OSError as exc:
            raise SlegoError("E_IO", f"write failed for {rel_path!r}: {exc}") from exc
        return self.rel(target)

    def read_file(self, rel_path: str) -> bytes:
        target = self.resolve(rel_path)
        if not target.is_file():
            raise SlegoError("E_NOT_FOUND", f"no such file: {rel_path!r}")
        return target.read_bytes()

    def list_tree(self, rel_prefix: str = "") -> list[FileEntry]:
        base = self.resolve(rel_prefix) if rel_prefix else self.root
        if not base.exists():
            return []
        entries = []
        for p in sorted(base.rglob("*")):
            if p.is_file() and not p.name.startswith("."):
                st = p.stat()
                entries.append(FileEntry(path=self.rel(p), size=st.st_size, modified=st.st_mtime))
        entries.sort(key=lambda e: e.path)
        return entries

    def remove_path(self, rel_path: str) -> int:
        target = self.resolve(rel_path)
        if target == self.root:
            raise SlegoError("E_ESCAPE", "refusing to remove workspace root")
        if target.is_file():
            target.unlink()
            return 1
        if target.is_dir():
            count = sum(1 for p in target.rglob("*") if p.is_file())
            shutil.rmtree(target)
            return count
        raise SlegoError("E_NOT_FOUND", f"no such path: {rel_path!r}")
