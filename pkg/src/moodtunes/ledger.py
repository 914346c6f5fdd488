"""Append-only hash-chained ledger for preferences, song metadata, emotion
tags, token rewards, ownership records, and request events.

Each block commits to its predecessor via SHA-256 over a canonical JSON
serialization (sorted keys, no insignificant whitespace, UTF-8), so any
mutation anywhere in the chain is detectable. The chain persists as a
JSON-lines file, one block per line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

GENESIS_PREV_HASH = "0" * 64

KIND_PREFERENCE = "preference"
KIND_SONG_METADATA = "song_metadata"
KIND_EMOTION_TAG = "emotion_tag"
KIND_TOKEN_REWARD = "token_reward"
KIND_OWNERSHIP = "ownership"
KIND_REQUEST = "request"

REQUIRED_PAYLOAD_FIELDS = {
    KIND_PREFERENCE: ("user_id", "song_id", "feedback"),
    KIND_SONG_METADATA: ("song_id", "title", "artist"),
    KIND_EMOTION_TAG: ("song_id", "tags"),
    KIND_TOKEN_REWARD: ("user_id", "amount", "reason"),
    KIND_OWNERSHIP: ("song_id", "owner", "rights"),
    KIND_REQUEST: ("user_id", "endpoint"),
}


class InvalidRecord(ValueError):
    def __init__(self, kind: str, problem: str):
        self.kind = kind
        self.problem = problem
        super().__init__(f"invalid {kind} record: {problem}")


class InvalidAmount(ValueError):
    """Token rewards must be integers >= 1."""


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class LedgerRecord:
    kind: str
    payload: dict
    actor: str
    timestamp: int

    def validate(self) -> None:
        required = REQUIRED_PAYLOAD_FIELDS.get(self.kind)
        if required is None:
            raise InvalidRecord(self.kind, "unknown record kind")
        for fieldname in required:
            if fieldname not in self.payload:
                raise InvalidRecord(self.kind, f"missing payload field {fieldname!r}")
        if self.kind == KIND_TOKEN_REWARD:
            amount = self.payload["amount"]
            if not isinstance(amount, int) or isinstance(amount, bool) or amount < 1:
                raise InvalidRecord(self.kind, f"amount must be an integer >= 1, got {amount!r}")
        if not self.actor:
            raise InvalidRecord(self.kind, "actor must be non-empty")

    def as_json(self) -> dict:
        return {
            "kind": self.kind,
            "payload": self.payload,
            "actor": self.actor,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LedgerRecord":
        return cls(
            kind=obj["kind"],
            payload=obj["payload"],
            actor=obj["actor"],
            timestamp=int(obj["timestamp"]),
        )


def block_hash(index: int, prev_hash: str, timestamp: int, records) -> str:
    body = canonical_json(
        {
            "index": index,
            "prev_hash": prev_hash,
            "timestamp": timestamp,
            "records": [r.as_json() for r in records],
        }
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LedgerBlock:
    index: int
    prev_hash: str
    timestamp: int
    records: tuple[LedgerRecord, ...]
    hash: str

    @classmethod
    def build(cls, index: int, prev_hash: str, timestamp: int, records) -> "LedgerBlock":
        records = tuple(records)
        return cls(
            index=index,
            prev_hash=prev_hash,
            timestamp=timestamp,
            records=records,
            hash=block_hash(index, prev_hash, timestamp, records),
        )

    def as_json(self) -> dict:
        return {
            "index": self.index,
            "prev_hash": self.prev_hash,
            "timestamp": self.timestamp,
            "records": [r.as_json() for r in self.records],
            "hash": self.hash,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LedgerBlock":
        return cls(
            index=int(obj["index"]),
            prev_hash=obj["prev_hash"],
            timestamp=int(obj["timestamp"]),
            records=tuple(LedgerRecord.from_json(r) for r in obj["records"]),
            hash=obj["hash"],
        )


def _utc_date(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m-%d")


class Ledger:
    """In-memory chain, optionally mirrored to an append-only JSONL file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.blocks: list[LedgerBlock] = []
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self.blocks.append(LedgerBlock.from_json(json.loads(line)))

    def __len__(self) -> int:
        return len(self.blocks)

    def head_hash(self) -> str:
        return self.blocks[-1].hash if self.blocks else GENESIS_PREV_HASH

    def append(self, records, timestamp: int | None = None) -> LedgerBlock:
        """Link a new block holding ``records`` to the chain head."""
        records = tuple(records)
        if not records:
            raise InvalidRecord("(none)", "a block needs at least one record")
        for record in records:
            record.validate()
        if timestamp is None:
            timestamp = int(datetime.now(tz=timezone.utc).timestamp())
        block = LedgerBlock.build(len(self.blocks), self.head_hash(), timestamp, records)
        self.blocks.append(block)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(canonical_json(block.as_json()) + "\n")
        return block

    def verify(self) -> tuple[bool, int | None]:
        """Recompute every hash and link; (True, None) iff all match."""
        prev = GENESIS_PREV_HASH
        for i, block in enumerate(self.blocks):
            if (
                block.index != i
                or block.prev_hash != prev
                or block_hash(block.index, block.prev_hash, block.timestamp, block.records)
                != block.hash
            ):
                return False, i
            prev = block.hash
        return True, None

    def records(self):
        for block in self.blocks:
            yield from block.records

    def query(self, kind: str, **payload_filter) -> list[LedgerRecord]:
        """Records of ``kind`` whose payload matches every filter, in chain
        order."""
        out = []
        for record in self.records():
            if record.kind != kind:
                continue
            if all(record.payload.get(k) == v for k, v in payload_filter.items()):
                out.append(record)
        return out

    def award_tokens(
        self, user_id: str, amount: int, reason: str, timestamp: int | None = None
    ) -> LedgerBlock:
        if not isinstance(amount, int) or isinstance(amount, bool) or amount < 1:
            raise InvalidAmount(f"amount must be an integer >= 1, got {amount!r}")
        record = LedgerRecord(
            kind=KIND_TOKEN_REWARD,
            payload={"user_id": user_id, "amount": amount, "reason": reason},
            actor="system",
            timestamp=timestamp if timestamp is not None else int(datetime.now(tz=timezone.utc).timestamp()),
        )
        return self.append([record], timestamp=record.timestamp)

    def token_balance(self, user_id: str) -> int:
        return sum(
            r.payload["amount"]
            for r in self.query(KIND_TOKEN_REWARD, user_id=user_id)
        )

    def requests_per_day(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for record in self.records():
            if record.kind == KIND_REQUEST:
                day = _utc_date(record.timestamp)
                counts[day] = counts.get(day, 0) + 1
        return counts


def verify_chain_file(path: str | Path) -> tuple[bool, int | None]:
    """Byte-level verification of a persisted chain.

    Unparseable lines count as corruption at that block position; an empty
    or missing file is a valid empty chain.
    """
    path = Path(path)
    if not path.exists():
        return True, None
    raw = path.read_bytes()
    if not raw:
        return True, None
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    chain = Ledger()
    for i, line in enumerate(lines):
        try:
            block = LedgerBlock.from_json(json.loads(line.decode("utf-8")))
        except (ValueError, KeyError, TypeError, UnicodeDecodeError):
            return False, i
        chain.blocks.append(block)
    return chain.verify()
