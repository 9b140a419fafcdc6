"""Persistent cache of single-body hydrodynamic data."""

import logging
import shelve
import threading
from pathlib import Path
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)

CACHE_FILENAME = "hydro_cache"
CACHE_SUBDIR = "cache"


class CoefficientCache:
    """
    Key-value cache backed by a shelve file in a study directory.

    Lookups read an in-memory dictionary; inserts and counter updates take an
    exclusive lock, and inserts are written to disk on flush(). Entries are
    never evicted.
    """

    def __init__(self, directory: Optional[Path] = None):
        """
        Open (or create) the cache.

        Args:
            directory: Directory holding the cache file; None keeps the cache
                in memory until attach() is called
        """
        self.path: Optional[Path] = None
        self._entries: Dict[str, Any] = {}
        self._pending: Dict[str, Any] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if directory is not None:
            self.attach(directory)

    def attach(self, directory: Path):
        """
        Back the cache with a shelve file in directory.

        Entries already on disk are loaded; entries computed so far in memory
        are queued for the next flush(). Attaching twice is a no-op.
        """
        with self._lock:
            if self.path is not None:
                return
            path = Path(directory) / CACHE_FILENAME
            path.parent.mkdir(parents=True, exist_ok=True)
            with shelve.open(str(path), flag="c") as db:
                stored = dict(db.items())
            self._pending.update({k: v for k, v in self._entries.items() if k not in stored})
            for key, value in stored.items():
                self._entries.setdefault(key, value)
            self.path = path
        logger.debug("Opened coefficient cache %s (%d entries)", path, len(self))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str, default: Any = None) -> Any:
        return self._entries.get(key, default)

    def put(self, key: str, value: Any):
        """Insert an entry; an existing entry for the key is kept."""
        with self._lock:
            if key not in self._entries:
                self._entries[key] = value
                self._pending[key] = value

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        """
        Return the cached value, computing and storing it on a miss.

        Concurrent misses on the same key may both compute; the first stored
        value wins and is returned to every caller afterwards.
        """
        value = self._entries.get(key)
        with self._lock:
            if value is not None:
                self.hits += 1
            else:
                self.misses += 1
        if value is not None:
            return value
        self.put(key, compute())
        return self._entries[key]

    def flush(self):
        """Write pending entries to disk."""
        with self._lock:
            if self.path is None or not self._pending:
                return
            with shelve.open(str(self.path), flag="c") as db:
                for key, value in self._pending.items():
                    db[key] = value
            logger.debug("Flushed %d cache entries to %s", len(self._pending), self.path)
            self._pending.clear()

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"entries": len(self._entries), "hits": self.hits, "misses": self.misses}
