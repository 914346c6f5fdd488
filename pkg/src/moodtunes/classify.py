"""Emotion classifiers: lyrics -> song emotion tags and mood images ->
mood reports, plus evaluation and incremental retraining.

Trained classifiers are frozen (parameters marked read-only); retraining
continues optimization on a copy and returns a new frozen classifier.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import textprep
from .emotions import (
    NUM_EMOTIONS,
    TAXONOMY_VERSION,
    DEFAULT_MOOD_THRESHOLD,
    ClassificationMetrics,
    EmotionDistribution,
    EmotionLabel,
    MoodReport,
    compute_metrics,
    make_mood_report,
)
from .nn import (
    Conv1dSpec,
    Conv2dSpec,
    DenseSpec,
    EmbeddingSpec,
    GlobalMaxPoolSpec,
    MaxPool2dSpec,
    Model,
    ReluSpec,
    SoftmaxSpec,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)

IMAGE_SIZE = 48


class EmptyCorpus(ValueError):
    """No training samples."""


class SingleClassCorpus(ValueError):
    """Training corpus holds fewer than two distinct labels."""


class EmptyTestSet(ValueError):
    """Evaluation called with no samples."""


class BadImageShape(ValueError):
    """Mood image is not 48x48 grayscale in [0, 1]."""


def lyric_model_specs(vocab_ids: int) -> list:
    """Reference lyric architecture: embedding -> conv1d -> global max ->
    two dense layers -> softmax."""
    return [
        EmbeddingSpec(vocab_size=vocab_ids, dim=32),
        Conv1dSpec(filters=64, width=3),
        ReluSpec(),
        GlobalMaxPoolSpec(),
        DenseSpec(64),
        ReluSpec(),
        DenseSpec(NUM_EMOTIONS),
        SoftmaxSpec(),
    ]


def image_model_specs() -> list:
    """Reference mood-image architecture: two conv/pool stages then two
    dense layers."""
    return [
        Conv2dSpec(filters=8, kernel_size=3),
        ReluSpec(),
        MaxPool2dSpec(2),
        Conv2dSpec(filters=16, kernel_size=3),
        ReluSpec(),
        MaxPool2dSpec(2),
        DenseSpec(64),
        ReluSpec(),
        DenseSpec(NUM_EMOTIONS),
        SoftmaxSpec(),
    ]


def _as_lyric_triples(corpus) -> list[tuple[str, str, EmotionLabel]]:
    """Accept (song_id, lyrics, label) tuples or corpus-file dicts."""
    triples = []
    for item in corpus:
        if isinstance(item, dict):
            triples.append(
                (item["id"], item["lyrics"], EmotionLabel.parse(item["emotion"]))
            )
        else:
            song_id, lyrics, label = item
            if not isinstance(label, EmotionLabel):
                label = EmotionLabel.parse(label)
            triples.append((song_id, lyrics, label))
    return triples


class LyricClassifier:
    """Frozen lyric model plus the preprocessing pipeline that feeds it."""

    def __init__(self, model: Model, vocab: textprep.Vocabulary, seq_len: int,
                 loss_history=None, stopwords=textprep.DEFAULT_STOPWORDS):
        self.model = model.freeze()
        self.vocab = vocab
        self.seq_len = seq_len
        self.loss_history = list(loss_history or [])
        self.stopwords = frozenset(stopwords)
        self.taxonomy_version = TAXONOMY_VERSION

    def encode(self, lyrics: str) -> np.ndarray:
        ids = textprep.prepare(lyrics, self.vocab, self.seq_len, self.stopwords)
        return np.asarray(ids, dtype=np.int64)

    def classify(self, lyrics: str) -> EmotionDistribution:
        probs = self.model.forward(self.encode(lyrics))
        return EmotionDistribution.from_array(_renormalize(probs))

    def evaluate(self, test) -> ClassificationMetrics:
        triples = _as_lyric_triples(test)
        if not triples:
            raise EmptyTestSet("no lyrics to evaluate")
        preds = [self.classify(lyrics).argmax() for _, lyrics, _ in triples]
        truths = [label for _, _, label in triples]
        return compute_metrics(preds, truths)

    def save(self, path: str | Path) -> None:
        """Checkpoint plus a <path>.vocab sidecar (token<TAB>id lines)."""
        path = Path(path)
        vocab_file = path.name + ".vocab"
        self.vocab.save(path.parent / vocab_file)
        save_checkpoint(
            self.model,
            path,
            meta={
                "classifier": "lyrics",
                "taxonomy": self.taxonomy_version,
                "seq_len": self.seq_len,
                "vocab_file": vocab_file,
                "stopwords": sorted(self.stopwords),
            },
        )

    @classmethod
    def load(cls, path: str | Path) -> "LyricClassifier":
        path = Path(path)
        model, meta = load_checkpoint(path)
        if meta.get("classifier") != "lyrics":
            raise ValueError(f"{path} is not a lyric classifier checkpoint")
        if meta.get("taxonomy") != TAXONOMY_VERSION:
            raise ValueError(f"taxonomy mismatch in {path}: {meta.get('taxonomy')}")
        vocab = textprep.Vocabulary.load(path.parent / meta["vocab_file"])
        return cls(
            model,
            vocab,
            int(meta["seq_len"]),
            stopwords=frozenset(meta["stopwords"]),
        )


def train_lyric_classifier(
    corpus,
    config: TrainConfig,
    vocab_size: int = textprep.DEFAULT_VOCAB_SIZE,
    seq_len: int = textprep.DEFAULT_SEQUENCE_LENGTH,
    stopwords=textprep.DEFAULT_STOPWORDS,
) -> LyricClassifier:
    """Build the vocabulary and train the reference lyric model.

    Deterministic for a fixed (corpus order, config.seed): the same seed
    drives both initialization and epoch shuffling.
    """
    triples = _as_lyric_triples(corpus)
    if not triples:
        raise EmptyCorpus("lyric corpus is empty")
    if len({label for _, _, label in triples}) < 2:
        raise SingleClassCorpus("need at least 2 distinct labels to train")

    token_lists = [
        textprep.remove_stopwords(textprep.tokenize(lyrics), stopwords)
        for _, lyrics, _ in triples
    ]
    vocab = textprep.build_vocabulary(token_lists, vocab_size)
    dataset = [
        (np.asarray(textprep.encode(tokens, vocab, seq_len), dtype=np.int64),
         label.value)
        for tokens, (_, _, label) in zip(token_lists, triples)
    ]
    model = Model(lyric_model_specs(vocab.total_ids), (seq_len,), seed=config.seed)
    trained, history = train(model, dataset, config)
    return LyricClassifier(trained, vocab, seq_len, history, stopwords)


def retrain_lyric_classifier(
    classifier: LyricClassifier, new_corpus, config: TrainConfig
) -> LyricClassifier:
    """Continue optimization from the existing parameters on new data.

    The vocabulary is kept (embedding table shape is fixed); the input
    classifier remains valid and unchanged.
    """
    triples = _as_lyric_triples(new_corpus)
    if not triples:
        raise EmptyCorpus("no new lyrics to retrain on")
    dataset = [
        (classifier.encode(lyrics), label.value) for _, lyrics, label in triples
    ]
    trained, history = train(classifier.model, dataset, config)
    return LyricClassifier(
        trained,
        classifier.vocab,
        classifier.seq_len,
        classifier.loss_history + history,
        classifier.stopwords,
    )


def _check_image(pixels) -> np.ndarray:
    arr = np.asarray(pixels, dtype=np.float32)
    if arr.shape == (IMAGE_SIZE, IMAGE_SIZE):
        arr = arr[:, :, None]
    if arr.shape != (IMAGE_SIZE, IMAGE_SIZE, 1):
        raise BadImageShape(f"expected {IMAGE_SIZE}x{IMAGE_SIZE} image, got {arr.shape}")
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise BadImageShape("pixel values must be finite and in [0, 1]")
    return arr


class MoodImageClassifier:
    """Frozen image model emitting mood reports at a fixed threshold."""

    def __init__(self, model: Model, threshold: float = DEFAULT_MOOD_THRESHOLD,
                 loss_history=None):
        self.model = model.freeze()
        self.threshold = threshold
        self.loss_history = list(loss_history or [])
        self.taxonomy_version = TAXONOMY_VERSION

    def distribution(self, pixels) -> EmotionDistribution:
        arr = _check_image(pixels)
        probs = self.model.forward(arr)
        return EmotionDistribution.from_array(_renormalize(probs))

    def classify(self, pixels) -> MoodReport:
        return make_mood_report(self.distribution(pixels), self.threshold)

    def evaluate(self, test) -> ClassificationMetrics:
        test = list(test)
        if not test:
            raise EmptyTestSet("no images to evaluate")
        preds = [self.distribution(pixels).argmax() for pixels, _ in test]
        truths = [label for _, label in test]
        return compute_metrics(preds, truths)

    def save(self, path: str | Path) -> None:
        save_checkpoint(
            self.model,
            path,
            meta={
                "classifier": "mood_image",
                "taxonomy": self.taxonomy_version,
                "threshold": self.threshold,
                "normalization": "divide-255",
            },
        )

    @classmethod
    def load(cls, path: str | Path) -> "MoodImageClassifier":
        model, meta = load_checkpoint(path)
        if meta.get("classifier") != "mood_image":
            raise ValueError(f"{path} is not a mood-image classifier checkpoint")
        if meta.get("taxonomy") != TAXONOMY_VERSION:
            raise ValueError(f"taxonomy mismatch in {path}: {meta.get('taxonomy')}")
        return cls(model, float(meta["threshold"]))


def train_image_classifier(
    images, config: TrainConfig, threshold: float = DEFAULT_MOOD_THRESHOLD
) -> MoodImageClassifier:
    """Train the reference mood-image model on (pixels, label) samples."""
    images = list(images)
    if not images:
        raise EmptyCorpus("image corpus is empty")
    if len({label for _, label in images}) < 2:
        raise SingleClassCorpus("need at least 2 distinct labels to train")
    dataset = [(_check_image(pixels), label.value) for pixels, label in images]
    model = Model(image_model_specs(), (IMAGE_SIZE, IMAGE_SIZE, 1), seed=config.seed)
    trained, history = train(model, dataset, config)
    return MoodImageClassifier(trained, threshold, history)


def retrain_image_classifier(
    classifier: MoodImageClassifier, new_images, config: TrainConfig
) -> MoodImageClassifier:
    new_images = list(new_images)
    if not new_images:
        raise EmptyCorpus("no new images to retrain on")
    dataset = [(_check_image(pixels), label.value) for pixels, label in new_images]
    trained, history = train(classifier.model, dataset, config)
    return MoodImageClassifier(
        trained, classifier.threshold, classifier.loss_history + history
    )


def classify_lyrics(classifier: LyricClassifier, lyrics: str) -> EmotionDistribution:
    return classifier.classify(lyrics)


def classify_mood_image(classifier: MoodImageClassifier, pixels) -> MoodReport:
    return classifier.classify(pixels)


def evaluate(classifier, test) -> ClassificationMetrics:
    return classifier.evaluate(test)


def _renormalize(probs: np.ndarray) -> np.ndarray:
    # float32 softmax sums to 1 within ~1e-7; exact renormalization keeps
    # EmotionDistribution's 1e-6 invariant airtight
    p = np.asarray(probs, dtype=np.float64)
    p = np.maximum(p, 0.0)
    return p / p.sum()
