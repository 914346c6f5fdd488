"""Song ranking: emotional affinity blended with item-item collaborative
filtering and content-based similarity over song emotion profiles.

All scoring is pure and deterministic over immutable snapshots; ties are
broken by ascending song id so catalog order never matters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .emotions import EmotionDistribution, EmotionLabel

LIKE = "like"
SKIP = "skip"
FEEDBACK_VALUES = {LIKE: 1, SKIP: 0}

DEFAULT_WEIGHTS = (0.6, 0.3, 0.1)
DEFAULT_TAG_BLEND = 0.5


class MissingTags(ValueError):
    """Song has no curated emotion tags."""


class ZeroVector(ValueError):
    """Emotion profile is all zeros (corrupt data)."""


class EmptyCatalog(ValueError):
    """Recommendation requested over an empty catalog."""


@dataclass(frozen=True)
class SongRecord:
    song_id: str
    title: str = ""
    artist: str = ""
    curated_tags: EmotionDistribution | None = None
    predicted_tags: EmotionDistribution | None = None
    catalog_ref: str | None = None

    def __post_init__(self):
        if not self.song_id:
            raise ValueError("song_id must be non-empty")

    def with_predicted(self, predicted: EmotionDistribution) -> "SongRecord":
        return SongRecord(
            self.song_id,
            self.title,
            self.artist,
            self.curated_tags,
            predicted,
            self.catalog_ref,
        )


def _tags_from_field(value) -> EmotionDistribution:
    """Catalog "emotion" field: a single label name or a label->weight map."""
    if isinstance(value, str):
        return EmotionDistribution.one_hot(EmotionLabel.parse(value))
    if isinstance(value, dict):
        weights = {k: float(v) for k, v in value.items()}
        total = sum(weights.values())
        if total <= 0:
            raise ValueError(f"emotion weights sum to {total}")
        return EmotionDistribution.from_dict(
            {k: v / total for k, v in weights.items()}
        )
    raise ValueError(f"unsupported emotion field: {value!r}")


def song_from_json(obj: dict) -> SongRecord:
    return SongRecord(
        song_id=obj["id"],
        title=obj.get("title", ""),
        artist=obj.get("artist", ""),
        curated_tags=_tags_from_field(obj["emotion"]) if "emotion" in obj else None,
        catalog_ref=obj.get("catalog_ref"),
    )


def load_catalog(path: str | Path) -> list[SongRecord]:
    """Read a JSON-lines catalog (same song format as the lyric corpus)."""
    songs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                songs.append(song_from_json(json.loads(line)))
    return songs


@dataclass(frozen=True)
class Interaction:
    user_id: str
    song_id: str
    feedback: str
    timestamp: int


class InteractionStore:
    """Append-only per-user feedback history."""

    def __init__(self, events=None):
        self._events: list[Interaction] = []
        self._last_ts: dict[str, int] = {}
        for ev in events or []:
            self.append(ev.user_id, ev.song_id, ev.feedback, ev.timestamp)

    def append(self, user_id: str, song_id: str, feedback: str, timestamp: int) -> Interaction:
        if feedback not in FEEDBACK_VALUES:
            raise ValueError(f"feedback must be one of {sorted(FEEDBACK_VALUES)}")
        last = self._last_ts.get(user_id)
        if last is not None and timestamp < last:
            raise ValueError(
                f"timestamp {timestamp} precedes last event {last} for {user_id}"
            )
        event = Interaction(user_id, song_id, feedback, int(timestamp))
        self._events.append(event)
        self._last_ts[user_id] = event.timestamp
        return event

    @property
    def events(self) -> tuple[Interaction, ...]:
        return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def liked_songs(self, user_id: str) -> list[str]:
        """Distinct songs the user ever liked, sorted by song id."""
        return sorted(
            {e.song_id for e in self._events if e.user_id == user_id and e.feedback == LIKE}
        )

    def likers(self, song_id: str) -> set[str]:
        return {
            e.user_id
            for e in self._events
            if e.song_id == song_id and e.feedback == LIKE
        }


def song_emotion_profile(
    song: SongRecord, blend: float = DEFAULT_TAG_BLEND
) -> EmotionDistribution:
    """blend*curated + (1-blend)*predicted, renormalized; curated alone
    when no prediction exists."""
    if song.curated_tags is None:
        raise MissingTags(f"song {song.song_id} has no curated tags")
    if not (0.0 <= blend <= 1.0):
        raise ValueError(f"blend must be in [0, 1], got {blend}")
    if song.predicted_tags is None or blend == 1.0:
        return song.curated_tags
    mixed = [
        blend * c + (1.0 - blend) * p
        for c, p in zip(song.curated_tags.probs, song.predicted_tags.probs)
    ]
    total = sum(mixed)
    return EmotionDistribution(tuple(v / total for v in mixed))


def emotion_affinity(
    user_mood: EmotionDistribution, profile: EmotionDistribution
) -> float:
    """Dot product of the two distributions; always in [0, 1]."""
    return float(sum(u * p for u, p in zip(user_mood.probs, profile.probs)))


def _cosine(a, b) -> float:
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def content_similarity(
    a: SongRecord, b: SongRecord, blend: float = DEFAULT_TAG_BLEND
) -> float:
    """Cosine similarity of the two songs' emotion profiles, in [0, 1]."""
    pa = song_emotion_profile(a, blend).probs
    pb = song_emotion_profile(b, blend).probs
    if all(x == 0.0 for x in pa) or all(x == 0.0 for x in pb):
        raise ZeroVector("emotion profile is all zeros")
    return min(1.0, _cosine(pa, pb))


def cf_score(user_id: str, song: SongRecord, store: InteractionStore) -> float:
    """Item-item collaborative score.

    Mean, over the songs the user liked, of the cosine similarity between
    like-vectors (columns of the user x song like matrix). The scoring
    user's own row is left out of the columns so their like of a song
    never inflates its similarity to itself. 0 for users with no likes and
    for songs nobody else liked.
    """
    liked = store.liked_songs(user_id)
    if not liked:
        return 0.0
    target_likers = store.likers(song.song_id) - {user_id}
    if not target_likers:
        return 0.0
    total = 0.0
    for other_id in liked:
        other_likers = store.likers(other_id) - {user_id}
        if other_likers:
            overlap = len(target_likers & other_likers)
            total += overlap / math.sqrt(len(target_likers) * len(other_likers))
    return total / len(liked)


def content_score(
    user_id: str,
    song: SongRecord,
    catalog_by_id: dict[str, SongRecord],
    store: InteractionStore,
    blend: float = DEFAULT_TAG_BLEND,
) -> float:
    """Mean profile similarity between the song and the user's liked songs
    (those still present in the catalog); 0 for users with no likes."""
    liked = [s for s in store.liked_songs(user_id) if s in catalog_by_id]
    if not liked:
        return 0.0
    total = sum(
        content_similarity(song, catalog_by_id[other], blend) for other in liked
    )
    return total / len(liked)


@dataclass(frozen=True)
class Recommendation:
    song_id: str
    score: float
    emotion_affinity: float
    cf_score: float
    content_score: float
    title: str = ""
    artist: str = ""

    def as_json(self) -> dict:
        return {
            "song_id": self.song_id,
            "title": self.title,
            "artist": self.artist,
            "score": self.score,
            "components": {
                "emotion_affinity": self.emotion_affinity,
                "cf_score": self.cf_score,
                "content_score": self.content_score,
            },
        }


def recommend(
    user_id: str,
    mood: EmotionDistribution,
    catalog: list[SongRecord],
    store: InteractionStore,
    k: int = 10,
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
    blend: float = DEFAULT_TAG_BLEND,
    exclude_song_ids=(),
) -> list[Recommendation]:
    """Top-k songs by blended score, descending; ties by ascending song id.

    ``exclude_song_ids`` carries the session-liked songs the caller wants
    withheld; historical likes stay eligible.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    alpha, beta, gamma = (float(w) for w in weights)
    if min(alpha, beta, gamma) < 0 or abs(alpha + beta + gamma - 1.0) > 1e-6:
        raise ValueError(f"weights must be non-negative and sum to 1, got {weights}")
    if not catalog:
        raise EmptyCatalog("catalog is empty")

    catalog_by_id = {s.song_id: s for s in catalog}
    excluded = set(exclude_song_ids)
    scored = []
    for song in catalog:
        if song.song_id in excluded:
            continue
        affinity = emotion_affinity(mood, song_emotion_profile(song, blend))
        cf = cf_score(user_id, song, store)
        content = content_score(user_id, song, catalog_by_id, store, blend)
        scored.append(
            Recommendation(
                song_id=song.song_id,
                score=alpha * affinity + beta * cf + gamma * content,
                emotion_affinity=affinity,
                cf_score=cf,
                content_score=content,
                title=song.title,
                artist=song.artist,
            )
        )
    scored.sort(key=lambda r: (-r.score, r.song_id))
    return scored[:k]
