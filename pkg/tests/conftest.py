"""Shared fixtures: the seeded synthetic datasets and trained classifiers
are expensive enough to build once per session."""

import pytest

from moodtunes import classify, datasets
from moodtunes.nn import TrainConfig

CORPUS_SEED = 11
SPLIT_SEED = 5
LYRIC_TRAIN_SEED = 0
IMAGE_SEED = 3
IMAGE_TRAIN_SEED = 1


@pytest.fixture(scope="session")
def lyric_corpus():
    return datasets.generate_lyric_corpus(seed=CORPUS_SEED, samples_per_class=40)


@pytest.fixture(scope="session")
def lyric_split(lyric_corpus):
    return datasets.train_test_split(lyric_corpus, seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def lyric_classifier(lyric_split):
    train_set, _ = lyric_split
    return classify.train_lyric_classifier(train_set, TrainConfig(seed=LYRIC_TRAIN_SEED))


@pytest.fixture(scope="session")
def mood_images():
    return datasets.generate_mood_images(seed=IMAGE_SEED, per_class=20)


@pytest.fixture(scope="session")
def image_classifier(mood_images):
    return classify.train_image_classifier(mood_images, TrainConfig(seed=IMAGE_TRAIN_SEED))
