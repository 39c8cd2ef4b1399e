"""Two-tier catalog distribution: a central node takes operator publishes,
sub-servers mirror their subscribed categories, kiosks mirror from their
sub-server and expose a menu. Sync is pull-based over a monotone sequence
cursor; blobs are content-addressed by bundle digest and verified before
install, so a mirror can keep updating its kiosks while cut off from its
own upstream.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from . import bundle as bundlemod
from .errors import McmsError

ROLES = ("central", "subserver", "kiosk")


class DistributionError(McmsError):
    pass


class VersionNotIncreased(DistributionError):
    code = "VersionNotIncreased"


class MalformedBundle(DistributionError):
    code = "MalformedBundle"


class StorageFailure(DistributionError):
    code = "StorageFailure"


class UpstreamUnreachable(DistributionError):
    code = "UpstreamUnreachable"


class DigestMismatch(DistributionError):
    code = "DigestMismatch"


class UnknownApp(DistributionError):
    code = "UnknownApp"


@dataclass(frozen=True)
class Release:
    app_id: str
    version: int
    category: str
    digest: bytes
    size: int
    published_seq: int

    def to_json(self) -> dict:
        return {
            "app_id": self.app_id,
            "version": self.version,
            "category": self.category,
            "digest": self.digest.hex(),
            "size": self.size,
            "published_seq": self.published_seq,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Release":
        return cls(
            app_id=doc["app_id"],
            version=int(doc["version"]),
            category=doc["category"],
            digest=bytes.fromhex(doc["digest"]),
            size=int(doc["size"]),
            published_seq=int(doc["published_seq"]),
        )


@dataclass
class SyncReport:
    downloaded: int = 0
    skipped: int = 0
    failed: int = 0


@dataclass(frozen=True)
class MenuEntry:
    app_id: str
    title: str
    version: int
    size: int

    def to_json(self) -> dict:
        return {"app_id": self.app_id, "title": self.title,
                "version": self.version, "size": self.size}


class BlobStore:
    """Content-addressed files: store/<first-2-hex>/<digest-hex>.amb."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, digest: bytes) -> Path:
        hexd = digest.hex()
        return self.root / hexd[:2] / f"{hexd}.amb"

    def has(self, digest: bytes) -> bool:
        return self.path_for(digest).is_file()

    def put(self, data: bytes) -> bytes:
        digest = hashlib.sha256(data).digest()
        path = self.path_for(digest)
        if path.is_file():
            return digest
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except OSError as e:
            raise StorageFailure(str(e)) from None
        return digest

    def get(self, digest: bytes) -> bytes:
        """Read back a blob, refusing to return bytes that fail verification."""
        path = self.path_for(digest)
        try:
            data = path.read_bytes()
        except OSError as e:
            raise StorageFailure(f"{path}: {e}") from None
        if hashlib.sha256(data).digest() != digest:
            raise DigestMismatch(digest.hex())
        return data


class Node:
    """One catalog-bearing node of any role.

    Catalog reads hand out immutable snapshots; mutations swap the entries
    dict wholesale under the lock, so a concurrent reader sees either the
    old or the new catalog and never a mixture.
    """

    def __init__(self, node_id: str, role: str, store_dir: Path,
                 categories: Optional[Iterable[str]] = None):
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        self.node_id = node_id
        self.role = role
        self.store_dir = Path(store_dir)
        self.categories = None if categories is None else frozenset(categories)
        self.store = BlobStore(self.store_dir / "store")
        self._lock = threading.Lock()
        self._entries: dict = {}  # app_id -> Release, replaced wholesale
        self.seq = 0
        self.last_seq_seen = 0
        self.auto_broadcast: Optional[str] = None
        self._load_state()

    # -- state persistence -------------------------------------------------

    @property
    def _state_path(self) -> Path:
        return self.store_dir / "state.json"

    def _load_state(self) -> None:
        if not self._state_path.is_file():
            return
        doc = json.loads(self._state_path.read_text(encoding="utf-8"))
        self.seq = doc["seq"]
        self.last_seq_seen = doc["last_seq_seen"]
        self.auto_broadcast = doc.get("auto_broadcast")
        self._entries = {r["app_id"]: Release.from_json(r) for r in doc["held"]}

    def _save_state(self) -> None:
        doc = {
            "node_id": self.node_id,
            "role": self.role,
            "categories": sorted(self.categories) if self.categories is not None else None,
            "seq": self.seq,
            "last_seq_seen": self.last_seq_seen,
            "auto_broadcast": self.auto_broadcast,
            "held": [r.to_json() for r in sorted(self._entries.values(),
                                                 key=lambda r: r.published_seq)],
        }
        try:
            fd, tmp = tempfile.mkstemp(dir=self.store_dir, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(doc, f, indent=2)
            os.replace(tmp, self._state_path)
        except OSError as e:
            raise StorageFailure(str(e)) from None

    # -- catalog -----------------------------------------------------------

    def entries_snapshot(self) -> dict:
        with self._lock:
            return self._entries

    def held_versions(self) -> dict:
        """app_id -> (version, digest) of everything installed locally."""
        return {app: (r.version, r.digest) for app, r in self.entries_snapshot().items()}

    def publish(self, app_id: str, version: int, category: str, data: bytes) -> Release:
        """Operator upload: verify the bundle, store the blob, replace the
        catalog entry atomically."""
        try:
            parsed = bundlemod.parse(data)
        except bundlemod.BundleError as e:
            raise MalformedBundle(str(e)) from None
        if parsed.app_id != app_id or parsed.version != version:
            raise MalformedBundle(
                f"bundle says {parsed.app_id} v{parsed.version}, request says {app_id} v{version}")
        if not isinstance(version, int) or version < 1:
            raise MalformedBundle(f"bad version {version!r}")
        with self._lock:
            current = self._entries.get(app_id)
            if current is not None and version <= current.version:
                raise VersionNotIncreased(f"{app_id} v{version} <= v{current.version}")
            digest = self.store.put(data)
            self.seq += 1
            release = Release(app_id=app_id, version=version, category=category,
                              digest=digest, size=len(data), published_seq=self.seq)
            entries = dict(self._entries)
            entries[app_id] = release
            self._entries = entries
            self._save_state()
        return release

    def catalog_since(self, categories: Optional[Iterable[str]], since_seq: int) -> list:
        """Current entries newer than the cursor, filtered by category,
        ordered by publish sequence."""
        wanted = None if categories is None else set(categories)
        releases = [
            r for r in self.entries_snapshot().values()
            if r.published_seq > since_seq and (wanted is None or r.category in wanted)
        ]
        return sorted(releases, key=lambda r: r.published_seq)

    def get_blob(self, digest: bytes) -> bytes:
        return self.store.get(digest)

    # -- sync --------------------------------------------------------------

    def _install(self, release: Release, data: bytes) -> None:
        with self._lock:
            self.store.put(data)
            self.seq += 1
            local = Release(app_id=release.app_id, version=release.version,
                            category=release.category, digest=release.digest,
                            size=release.size, published_seq=self.seq)
            entries = dict(self._entries)
            entries[local.app_id] = local
            self._entries = entries

    def sync_once(self, upstream) -> SyncReport:
        """One pull round against the upstream node.

        The cursor advances only past entries that are fully installed (or
        already held), so a failed download is retried on the next round;
        an unreachable upstream keeps whatever progress was made.
        """
        report = SyncReport()
        releases = upstream.fetch_catalog(self.categories, self.last_seq_seen)
        cursor = self.last_seq_seen
        advancing = True
        try:
            for release in releases:
                held = self._entries.get(release.app_id)
                if held is not None and held.version >= release.version:
                    report.skipped += 1
                    if advancing:
                        cursor = release.published_seq
                    continue
                try:
                    data = upstream.fetch_blob(release.digest)
                except (DigestMismatch, StorageFailure):
                    report.failed += 1
                    advancing = False
                    continue
                if hashlib.sha256(data).digest() != release.digest:
                    report.failed += 1
                    advancing = False
                    continue
                self._install(release, data)
                report.downloaded += 1
                if advancing:
                    cursor = release.published_seq
        finally:
            with self._lock:
                self.last_seq_seen = cursor
                self._save_state()
        return report

    # -- kiosk surface -------------------------------------------------------

    def menu(self) -> list:
        """Title-sorted listing of held apps; titles come from bundle META."""
        entries = []
        for release in self.entries_snapshot().values():
            data = self.store.get(release.digest)
            parsed = bundlemod.parse(data)
            entries.append(MenuEntry(app_id=release.app_id, title=parsed.title,
                                     version=release.version, size=release.size))
        return sorted(entries, key=lambda e: (e.title, e.app_id))

    def mark_auto_broadcast(self, app_id: str, enabled: bool) -> Optional[str]:
        """Flag at most one held app for proximity broadcast."""
        with self._lock:
            if enabled:
                if app_id not in self._entries:
                    raise UnknownApp(app_id)
                self.auto_broadcast = app_id
            elif self.auto_broadcast == app_id:
                self.auto_broadcast = None
            self._save_state()
            return self.auto_broadcast

    def health(self) -> dict:
        return {"role": self.role, "seq": self.seq,
                "held_count": len(self.entries_snapshot())}


class LocalUpstream:
    """In-process upstream view of a node; the HTTP client mirrors this."""

    def __init__(self, node: Node):
        self.node = node

    def fetch_catalog(self, categories, since_seq: int) -> list:
        return self.node.catalog_since(categories, since_seq)

    def fetch_blob(self, digest: bytes) -> bytes:
        return self.node.get_blob(digest)


def fetch_catalog(upstream, categories, since_seq: int) -> list:
    return upstream.fetch_catalog(categories, since_seq)


def sync_once(local: Node, upstream) -> SyncReport:
    return local.sync_once(upstream)
