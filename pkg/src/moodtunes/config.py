"""Service configuration: a flat key=value text file.

Example::

    port = 8300
    mood_threshold = 0.30
    weight_emotion = 0.6
    weight_cf = 0.3
    weight_content = 0.1
    tag_blend = 0.5
    chain_path = data/chain.jsonl
    catalog_path = data/catalog.jsonl
    checkpoint_path = data/mood_image.ckpt
    seed = 0

``checkpoint_path`` names the mood-image classifier used by the /mood
image channel; leave it out to serve with self-report moods only.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .emotions import DEFAULT_MOOD_THRESHOLD
from .recommend import DEFAULT_TAG_BLEND, DEFAULT_WEIGHTS


@dataclass
class ServiceConfig:
    chain_path: str = "chain.jsonl"
    catalog_path: str = "catalog.jsonl"
    checkpoint_path: str = ""
    port: int = 8300
    mood_threshold: float = DEFAULT_MOOD_THRESHOLD
    weight_emotion: float = DEFAULT_WEIGHTS[0]
    weight_cf: float = DEFAULT_WEIGHTS[1]
    weight_content: float = DEFAULT_WEIGHTS[2]
    tag_blend: float = DEFAULT_TAG_BLEND
    seed: int = 0
    session_idle_seconds: int = 3600
    ui_path: str = ""

    def __post_init__(self):
        if not (0.0 < self.mood_threshold < 1.0):
            raise ValueError(f"mood_threshold must be in (0, 1), got {self.mood_threshold}")
        total = self.weight_emotion + self.weight_cf + self.weight_content
        if min(self.weight_emotion, self.weight_cf, self.weight_content) < 0 or abs(total - 1.0) > 1e-6:
            raise ValueError(f"score weights must be non-negative and sum to 1, got {total}")
        if not (0.0 <= self.tag_blend <= 1.0):
            raise ValueError(f"tag_blend must be in [0, 1], got {self.tag_blend}")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.weight_emotion, self.weight_cf, self.weight_content)


def load_config(path: str | Path) -> ServiceConfig:
    """Parse the flat key=value format; '#' starts a comment line."""
    known = {f.name: f.type for f in fields(ServiceConfig)}
    ints = {"port", "seed", "session_idle_seconds"}
    floats = {"mood_threshold", "weight_emotion", "weight_cf", "weight_content", "tag_blend"}
    values: dict = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{line_no}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
        if key in ints:
            values[key] = int(value)
        elif key in floats:
            values[key] = float(value)
        else:
            values[key] = value
    return ServiceConfig(**values)


def save_config(config: ServiceConfig, path: str | Path) -> None:
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(config)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
