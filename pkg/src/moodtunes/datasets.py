"""Synthetic desk-scale datasets and the dataset file formats.

Lyric corpora are JSON-lines files ({"id", "title", "artist", "lyrics",
"emotion"}); mood-image datasets are directories of 48x48 portable graymap
files named <label>_<n>.pgm with maxval 255. The generators are seeded and
separable by construction: each emotion class has a signature keyword in
lyrics and a signature bright region in images.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .emotions import LABELS, EmotionLabel

IMAGE_SIZE = 48

CLASS_KEYWORDS = {
    EmotionLabel.HAPPY: "sunshine",
    EmotionLabel.SAD: "teardrops",
    EmotionLabel.SURPRISE: "astonished",
    EmotionLabel.DISGUST: "rotten",
    EmotionLabel.NEUTRAL: "ordinary",
}

_FILLER_WORDS = [
    "music", "melody", "night", "day", "dancing", "dreaming", "heart",
    "road", "city", "river", "light", "shadow", "morning", "echo", "fire",
    "rain", "golden", "silver", "wild", "quiet",
]

# mixed into raw lyrics so the preprocessing pipeline has stop words to drop
_GLUE_WORDS = ["the", "and", "in", "of", "my", "you", "a", "to"]

_TITLE_WORDS = [
    "Midnight", "Golden", "Electric", "Broken", "Velvet", "Neon", "Paper",
    "Winter", "Scarlet", "Hollow",
]
_ARTIST_WORDS = [
    "The Owls", "Nova Lane", "Cedar & Pine", "Marble Arch", "Iron Petals",
    "June Atlas", "Glass Harbor", "Old Lanterns",
]


def generate_lyric_corpus(seed: int = 0, samples_per_class: int = 40) -> list[dict]:
    """Seeded separable corpus: every song contains its class keyword."""
    rng = np.random.default_rng(seed)
    songs = []
    n = 0
    for label in LABELS:
        keyword = CLASS_KEYWORDS[label]
        for _ in range(samples_per_class):
            length = int(rng.integers(18, 32))
            words = list(rng.choice(_FILLER_WORDS, size=length))
            glue = list(rng.choice(_GLUE_WORDS, size=length // 3))
            words.extend(glue)
            repeats = int(rng.integers(3, 7))
            words.extend([keyword] * repeats)
            rng.shuffle(words)
            songs.append(
                {
                    "id": f"s{n:04d}",
                    "title": f"{rng.choice(_TITLE_WORDS)} {rng.choice(_FILLER_WORDS).title()}",
                    "artist": str(rng.choice(_ARTIST_WORDS)),
                    "lyrics": " ".join(words),
                    "emotion": label.serialize(),
                }
            )
            n += 1
    return songs


def write_corpus(songs: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for song in songs:
            fh.write(json.dumps(song, ensure_ascii=False) + "\n")


def load_corpus(path: str | Path) -> list[dict]:
    songs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            if not line.strip():
                continue
            song = json.loads(line)
            for field in ("id", "title", "artist", "lyrics", "emotion"):
                if field not in song:
                    raise ValueError(
                        f"{path}:{line_no + 1}: missing field {field!r}"
                    )
            songs.append(song)
    return songs


def train_test_split(items: list, seed: int, test_fraction: float = 0.2):
    """Seeded shuffle then split; returns (train, test)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(items))
    n_test = int(round(len(items) * test_fraction))
    test_idx = set(order[:n_test].tolist())
    train = [it for i, it in enumerate(items) if i not in test_idx]
    test = [it for i, it in enumerate(items) if i in test_idx]
    return train, test


# glyph centers, one bright disk per emotion, well separated on the canvas
_GLYPH_CENTERS = {
    EmotionLabel.HAPPY: (12, 12),
    EmotionLabel.SAD: (12, 36),
    EmotionLabel.SURPRISE: (36, 12),
    EmotionLabel.DISGUST: (36, 36),
    EmotionLabel.NEUTRAL: (24, 24),
}
_GLYPH_RADIUS = 7.0


def glyph(label: EmotionLabel) -> np.ndarray:
    """Clean 48x48 pattern for one emotion, values in [0, 1]."""
    cy, cx = _GLYPH_CENTERS[label]
    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE]
    dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    img = np.clip((_GLYPH_RADIUS + 1.0 - dist) / 2.0, 0.0, 1.0)
    return img.astype(np.float32)


def blend_glyphs(a: EmotionLabel, b: EmotionLabel, alpha: float = 0.5) -> np.ndarray:
    return np.clip(alpha * glyph(a) + (1.0 - alpha) * glyph(b), 0.0, 1.0).astype(
        np.float32
    )


def generate_mood_images(seed: int = 0, per_class: int = 20) -> list[tuple[np.ndarray, EmotionLabel]]:
    """Noisy, intensity-jittered glyph samples for every emotion."""
    rng = np.random.default_rng(seed)
    samples = []
    for label in LABELS:
        base = glyph(label)
        for _ in range(per_class):
            intensity = rng.uniform(0.55, 1.0)
            noise = rng.uniform(0.0, 0.12, size=base.shape)
            img = np.clip(base * intensity + noise, 0.0, 1.0).astype(np.float32)
            samples.append((img, label))
    return samples


def write_pgm(pixels: np.ndarray, path: str | Path) -> None:
    """Write [0,1] grayscale pixels as a binary (P5) graymap, maxval 255."""
    arr = np.asarray(pixels, dtype=np.float64)
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def parse_pgm(raw: bytes) -> np.ndarray:
    """Decode a P5 (binary) or P2 (ascii) graymap to [0,1] floats."""
    tokens: list[bytes] = []
    pos = 0
    # header: magic, width, height, maxval, with '#' comments allowed
    while len(tokens) < 4 and pos < len(raw):
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if len(tokens) < 4:
        raise ValueError("truncated graymap header")
    magic, width, height, maxval = (
        tokens[0],
        int(tokens[1]),
        int(tokens[2]),
        int(tokens[3]),
    )
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"unsupported graymap maxval {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        data = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    elif magic == b"P2":
        values = raw[pos:].split()
        if len(values) < width * height:
            raise ValueError("truncated P2 pixel data")
        data = np.array(
            [int(v) for v in values[: width * height]], dtype=np.int64
        )
        if data.min() < 0 or data.max() > maxval:
            raise ValueError("P2 pixel value outside [0, maxval]")
    else:
        raise ValueError(f"not a graymap: magic {magic!r}")
    if data.size != width * height:
        raise ValueError("truncated graymap pixel data")
    img = data.reshape(height, width).astype(np.float32) / float(maxval)
    return img


def read_pgm(path: str | Path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def write_image_dir(samples, directory: str | Path) -> None:
    """Write labeled images as <label>_<n>.pgm files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    counters: dict[str, int] = {}
    for pixels, label in samples:
        name = label.serialize()
        n = counters.get(name, 0)
        counters[name] = n + 1
        write_pgm(pixels, directory / f"{name}_{n}.pgm")


def load_image_dir(directory: str | Path) -> list[tuple[np.ndarray, EmotionLabel]]:
    """Load <label>_<n>.pgm files from a dataset directory."""
    samples = []
    for path in sorted(Path(directory).glob("*.pgm")):
        label_name = path.stem.rsplit("_", 1)[0]
        label = EmotionLabel.parse(label_name)
        samples.append((read_pgm(path), label))
    if not samples:
        raise ValueError(f"no .pgm files in {directory}")
    return samples
