"""HTTP gateway tying the classifiers, recommender, and ledger together.

Endpoints (JSON over HTTP):

* ``POST /mood``            {user_id, self_report | image} -> mood report
* ``GET  /recommendations`` ?user_id=&k= -> ranked songs with components
* ``POST /feedback``        {user_id, song_id, feedback} -> token balance
* ``GET  /ledger/verify``   -> {ok, first_bad_index?}
* ``GET  /metrics/requests`` -> UTC date -> request count

Every /mood and /recommendations call appends exactly one "request"
record to the ledger. Feedback lands on the chain as a preference record
plus a 1-token reward; the interaction store is rebuilt from those
preference records on startup, so a restart replays to identical state.
"""

from __future__ import annotations

import base64
import binascii
import threading
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

from fastapi import Body, FastAPI, Query
from fastapi.responses import JSONResponse

from .catalog import StubCatalogProvider
from .classify import BadImageShape, MoodImageClassifier
from .config import ServiceConfig
from .datasets import parse_pgm
from .emotions import EmotionDistribution, EmotionLabel, MoodReport, make_mood_report
from .ledger import (
    KIND_EMOTION_TAG,
    KIND_PREFERENCE,
    KIND_REQUEST,
    KIND_TOKEN_REWARD,
    Ledger,
    LedgerRecord,
    verify_chain_file,
)
from .recommend import (
    LIKE,
    FEEDBACK_VALUES,
    InteractionStore,
    SongRecord,
    load_catalog,
    recommend,
)

FEEDBACK_REWARD = 1  # tokens per feedback event


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        self.status = status
        self.code = code
        self.detail = detail
        super().__init__(detail)


@dataclass
class Session:
    user_id: str
    mood: MoodReport | None = None
    liked_song_ids: set[str] = dataclass_field(default_factory=set)
    created_at: float = 0.0
    last_seen: float = 0.0
    lock: threading.Lock = dataclass_field(default_factory=threading.Lock)


class SessionStore:
    """In-memory per-user sessions with idle expiry."""

    def __init__(self, idle_seconds: int, now_fn=time.monotonic):
        self.idle_seconds = idle_seconds
        self.now_fn = now_fn
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def obtain(self, user_id: str) -> Session:
        """Session for the user, creating or recycling an expired one."""
        now = self.now_fn()
        with self._lock:
            session = self._sessions.get(user_id)
            if session is None or now - session.last_seen > self.idle_seconds:
                session = Session(user_id=user_id, created_at=now, last_seen=now)
                self._sessions[user_id] = session
            session.last_seen = now
            return session

    def peek(self, user_id: str) -> Session | None:
        """Live session for the user, or None if absent or expired."""
        now = self.now_fn()
        with self._lock:
            session = self._sessions.get(user_id)
            if session is None or now - session.last_seen > self.idle_seconds:
                return None
            session.last_seen = now
            return session


class Gateway:
    """Shared application state: catalog, chain, store, sessions, model."""

    def __init__(self, config: ServiceConfig, clock=None):
        self.config = config
        self.clock = clock or (lambda: int(time.time()))
        self.chain = Ledger(config.chain_path)
        self.sessions = SessionStore(config.session_idle_seconds)
        self.write_lock = threading.Lock()

        catalog = load_catalog(config.catalog_path) if Path(config.catalog_path).exists() else []
        self.catalog: dict[str, SongRecord] = {s.song_id: s for s in catalog}
        self._hydrate_predicted_tags()
        self.catalog_provider = StubCatalogProvider(self.catalog.values())

        self.image_classifier: MoodImageClassifier | None = None
        if config.checkpoint_path and Path(config.checkpoint_path).exists():
            self.image_classifier = MoodImageClassifier.load(config.checkpoint_path)

        self.store = InteractionStore()
        for record in self.chain.query(KIND_PREFERENCE):
            self.store.append(
                record.payload["user_id"],
                record.payload["song_id"],
                record.payload["feedback"],
                record.timestamp,
            )

    def _hydrate_predicted_tags(self) -> None:
        # latest emotion_tag record per song wins
        for record in self.chain.query(KIND_EMOTION_TAG):
            song = self.catalog.get(record.payload["song_id"])
            if song is not None:
                tags = EmotionDistribution.from_dict(record.payload["tags"])
                self.catalog[song.song_id] = song.with_predicted(tags)

    def log_request(self, user_id: str, endpoint: str) -> None:
        with self.write_lock:
            record = LedgerRecord(
                kind=KIND_REQUEST,
                payload={"user_id": user_id, "endpoint": endpoint},
                actor=user_id,
                timestamp=self.clock(),
            )
            self.chain.append([record], timestamp=record.timestamp)

    def submit_mood(self, payload: dict) -> MoodReport:
        user_id = _require_user(payload.get("user_id"))
        self.log_request(user_id, "mood")

        self_report = payload.get("self_report")
        image_b64 = payload.get("image")
        if (self_report is None) == (image_b64 is None):
            raise ApiError(
                400,
                "both_or_neither_channel",
                "provide exactly one of self_report or image",
            )
        if self_report is not None:
            try:
                label = EmotionLabel.parse(str(self_report))
            except ValueError:
                raise ApiError(400, "unknown_label", f"unknown emotion label {self_report!r}")
            report = make_mood_report(
                EmotionDistribution.one_hot(label), self.config.mood_threshold
            )
        else:
            report = self._classify_image(image_b64)

        session = self.sessions.obtain(user_id)
        with session.lock:
            session.mood = report
        return report

    def _classify_image(self, image_b64) -> MoodReport:
        if self.image_classifier is None:
            raise ApiError(
                400, "bad_image", "image channel unavailable: no mood classifier configured"
            )
        try:
            raw = base64.b64decode(image_b64, validate=True)
            pixels = parse_pgm(raw)
        except (ValueError, binascii.Error) as exc:
            raise ApiError(400, "bad_image", f"cannot decode graymap: {exc}")
        try:
            return self.image_classifier.classify(pixels)
        except BadImageShape as exc:
            raise ApiError(400, "bad_image", str(exc))

    def recommendations(self, user_id: str, k_raw: str | None) -> list[dict]:
        user_id = _require_user(user_id)
        self.log_request(user_id, "recommendations")

        try:
            k = 10 if k_raw is None else int(k_raw)
        except ValueError:
            raise ApiError(400, "bad_k", f"k must be an integer, got {k_raw!r}")
        if not (1 <= k <= 100):
            raise ApiError(400, "bad_k", f"k must be in [1, 100], got {k}")

        session = self.sessions.peek(user_id)
        if session is None or session.mood is None:
            raise ApiError(409, "no_mood_set", "submit a mood before asking for recommendations")
        with session.lock:
            mood = session.mood.distribution
            exclude = set(session.liked_song_ids)
        results = recommend(
            user_id,
            mood,
            sorted(self.catalog.values(), key=lambda s: s.song_id),
            self.store,
            k=k,
            weights=self.config.weights,
            blend=self.config.tag_blend,
            exclude_song_ids=exclude,
        )
        return [r.as_json() for r in results]

    def feedback(self, payload: dict) -> dict:
        user_id = _require_user(payload.get("user_id"))
        session = self.sessions.peek(user_id)
        if session is None:
            raise ApiError(409, "no_session", "submit a mood to open a session first")
        song_id = payload.get("song_id")
        if not song_id or song_id not in self.catalog:
            raise ApiError(404, "unknown_song", f"song {song_id!r} is not in the catalog")
        feedback = payload.get("feedback")
        if feedback not in FEEDBACK_VALUES:
            raise ApiError(400, "bad_feedback", "feedback must be \"like\" or \"skip\"")

        with self.write_lock:
            timestamp = self.clock()
            preference = LedgerRecord(
                kind=KIND_PREFERENCE,
                payload={"user_id": user_id, "song_id": song_id, "feedback": feedback},
                actor=user_id,
                timestamp=timestamp,
            )
            reward = LedgerRecord(
                kind=KIND_TOKEN_REWARD,
                payload={
                    "user_id": user_id,
                    "amount": FEEDBACK_REWARD,
                    "reason": f"feedback:{feedback}:{song_id}",
                },
                actor="system",
                timestamp=timestamp,
            )
            self.chain.append([preference, reward], timestamp=timestamp)
            self.store.append(user_id, song_id, feedback, timestamp)
            balance = self.chain.token_balance(user_id)
        with session.lock:
            if feedback == LIKE:
                session.liked_song_ids.add(song_id)
        return {"user_id": user_id, "token_balance": balance}


def _require_user(user_id) -> str:
    if not user_id or not isinstance(user_id, str):
        raise ApiError(400, "bad_user", "user_id must be a non-empty string")
    return user_id


def create_app(config: ServiceConfig, clock=None) -> FastAPI:
    gateway = Gateway(config, clock=clock)
    app = FastAPI(title="moodtunes", version="0.1.0")
    app.state.gateway = gateway

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.code, "detail": exc.detail},
        )

    @app.post("/mood")
    def post_mood(payload: dict = Body(...)):
        return gateway.submit_mood(payload).as_json()

    @app.get("/recommendations")
    def get_recommendations(user_id: str | None = Query(None), k: str | None = Query(None)):
        return gateway.recommendations(user_id, k)

    @app.post("/feedback")
    def post_feedback(payload: dict = Body(...)):
        return gateway.feedback(payload)

    @app.get("/ledger/verify")
    def ledger_verify():
        ok, first_bad = verify_chain_file(config.chain_path)
        body = {"ok": ok}
        if first_bad is not None:
            body["first_bad_index"] = first_bad
        return body

    @app.get("/metrics/requests")
    def metrics_requests():
        return gateway.chain.requests_per_day()

    if config.ui_path and Path(config.ui_path).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_path, html=True), name="ui")

    return app
