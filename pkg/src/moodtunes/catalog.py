"""External catalog provider abstraction.

Real deployments would back this with a remote music-catalog API; the
bundled stub is deterministic and fully offline so the rest of the system
(and its tests) never touch the network. A remote provider is a drop-in:
implement ``lookup`` and ``search`` with the same signatures.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Protocol

from .recommend import SongRecord


class CatalogProvider(Protocol):
    def lookup(self, song_id: str) -> dict | None:
        """External metadata for a song, or None if unknown."""

    def search(self, title: str = "", artist: str = "") -> list[str]:
        """Candidate catalog refs matching the query, best first."""


class StubCatalogProvider:
    """Offline provider keyed by catalog_ref, deterministic per song id."""

    def __init__(self, songs: Iterable[SongRecord]):
        self._songs = {s.song_id: s for s in songs}

    def lookup(self, song_id: str) -> dict | None:
        song = self._songs.get(song_id)
        if song is None:
            return None
        digest = hashlib.sha256(song_id.encode("utf-8")).digest()
        return {
            "ref": song.catalog_ref or f"stub:track:{song_id}",
            "duration_seconds": 120 + digest[0] % 180,
            "release_year": 1970 + digest[1] % 55,
            "preview_url": f"stub://preview/{song_id}",
        }

    def search(self, title: str = "", artist: str = "") -> list[str]:
        title_q = title.strip().lower()
        artist_q = artist.strip().lower()
        if not title_q and not artist_q:
            return []
        hits = []
        for song in self._songs.values():
            if title_q and title_q not in song.title.lower():
                continue
            if artist_q and artist_q not in song.artist.lower():
                continue
            hits.append((song.song_id, song.catalog_ref or f"stub:track:{song.song_id}"))
        hits.sort()
        return [ref for _, ref in hits]
