"""moodtunes: emotion-aware music recommendation.

Classifies emotions from lyrics and user mood input with a small CNN,
ranks songs by blending emotional affinity with collaborative and
content-based signals, and records preferences, tags, token rewards, and
ownership on an append-only hash-chained ledger behind an HTTP service.
"""

__version__ = "0.1.0"

from .emotions import (
    EmotionDistribution,
    EmotionLabel,
    MoodReport,
    compute_metrics,
    make_mood_report,
)

__all__ = [
    "EmotionDistribution",
    "EmotionLabel",
    "MoodReport",
    "compute_metrics",
    "make_mood_report",
    "__version__",
]
