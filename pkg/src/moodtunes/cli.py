"""Command line entry points.

    moodtunes train --corpus songs.jsonl --out lyric.ckpt --seed 0 --epochs 20
    moodtunes evaluate --corpus songs.jsonl --ckpt lyric.ckpt
    moodtunes ingest --catalog songs.jsonl --chain chain.jsonl --ckpt lyric.ckpt
    moodtunes recommend --user u1 --emotion happy --k 10 --catalog songs.jsonl
    moodtunes serve --config service.conf
    moodtunes ledger verify --chain chain.jsonl

Exit codes: 0 success, 1 runtime failure (including a corrupt chain),
2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from . import classify, datasets
from .config import load_config
from .emotions import EmotionDistribution, EmotionLabel
from .ledger import (
    KIND_EMOTION_TAG,
    KIND_OWNERSHIP,
    KIND_SONG_METADATA,
    Ledger,
    LedgerRecord,
    verify_chain_file,
)
from .nn import TrainConfig
from .recommend import DEFAULT_WEIGHTS, InteractionStore, load_catalog, recommend


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        momentum=args.momentum,
        seed=args.seed,
    )


def cmd_synth(args) -> int:
    if args.kind == "lyrics":
        songs = datasets.generate_lyric_corpus(args.seed, args.per_class)
        datasets.write_corpus(songs, args.out)
        print(f"wrote {len(songs)} songs to {args.out}")
    else:
        images = datasets.generate_mood_images(args.seed, args.per_class)
        datasets.write_image_dir(images, args.out)
        print(f"wrote {len(images)} graymaps to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _train_config(args)
    if args.kind == "lyrics":
        corpus = datasets.load_corpus(args.corpus)
        clf = classify.train_lyric_classifier(
            corpus, config, vocab_size=args.vocab_size, seq_len=args.seq_len
        )
    else:
        images = datasets.load_image_dir(args.corpus)
        clf = classify.train_image_classifier(images, config)
    clf.save(args.out)
    first = clf.loss_history[0] if clf.loss_history else float("nan")
    last = clf.loss_history[-1] if clf.loss_history else float("nan")
    print(f"trained {args.kind} classifier on {args.corpus}")
    print(f"epochs {config.epochs}  loss {first:.4f} -> {last:.4f}")
    print(f"saved checkpoint to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    if args.kind == "lyrics":
        clf = classify.LyricClassifier.load(args.ckpt)
        test = datasets.load_corpus(args.corpus)
    else:
        clf = classify.MoodImageClassifier.load(args.ckpt)
        test = datasets.load_image_dir(args.corpus)
    metrics = clf.evaluate(test)
    print(metrics.format_table())
    return 0


def cmd_ingest(args) -> int:
    from .catalog import StubCatalogProvider
    from .recommend import load_catalog

    songs = datasets.load_corpus(args.catalog)
    clf = classify.LyricClassifier.load(args.ckpt)
    chain = Ledger(args.chain)
    provider = StubCatalogProvider(load_catalog(args.catalog))
    for song in songs:
        predicted = clf.classify(song["lyrics"])
        metadata_payload = {
            "song_id": song["id"],
            "title": song["title"],
            "artist": song["artist"],
        }
        external = provider.lookup(song["id"])
        if external is not None:
            metadata_payload["external"] = external
        records = [
            LedgerRecord(
                kind=KIND_SONG_METADATA,
                payload=metadata_payload,
                actor="system",
                timestamp=_now(),
            ),
            LedgerRecord(
                kind=KIND_EMOTION_TAG,
                payload={"song_id": song["id"], "tags": predicted.as_dict()},
                actor="system",
                timestamp=_now(),
            ),
        ]
        if "owner" in song and "rights" in song:
            records.append(
                LedgerRecord(
                    kind=KIND_OWNERSHIP,
                    payload={
                        "song_id": song["id"],
                        "owner": song["owner"],
                        "rights": song["rights"],
                    },
                    actor="system",
                    timestamp=_now(),
                )
            )
        chain.append(records)
    print(f"ingested {len(songs)} songs into {args.chain}")
    return 0


def cmd_recommend(args) -> int:
    from .emotions import EmotionDistribution as Distribution

    catalog = load_catalog(args.catalog)
    store = InteractionStore()
    if args.chain:
        chain = Ledger(args.chain)
        for record in chain.query("preference"):
            store.append(
                record.payload["user_id"],
                record.payload["song_id"],
                record.payload["feedback"],
                record.timestamp,
            )
        # classifier tags recorded at ingest feed the song profiles
        by_id = {s.song_id: i for i, s in enumerate(catalog)}
        for record in chain.query(KIND_EMOTION_TAG):
            i = by_id.get(record.payload["song_id"])
            if i is not None:
                catalog[i] = catalog[i].with_predicted(
                    Distribution.from_dict(record.payload["tags"])
                )
    mood = EmotionDistribution.one_hot(EmotionLabel.parse(args.emotion))
    weights = tuple(float(w) for w in args.weights.split(","))
    if len(weights) != 3:
        raise ValueError("weights must be three comma-separated numbers")
    results = recommend(
        args.user, mood, catalog, store, k=args.k, weights=weights, blend=args.blend
    )
    print(f"{'#':>2} {'song':<10} {'score':>7}  {'affinity':>8} {'cf':>6} {'content':>7}  title")
    for i, rec in enumerate(results, 1):
        print(
            f"{i:>2} {rec.song_id:<10} {rec.score:>7.4f}  {rec.emotion_affinity:>8.4f}"
            f" {rec.cf_score:>6.4f} {rec.content_score:>7.4f}  {rec.title} - {rec.artist}"
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


def cmd_ledger_verify(args) -> int:
    ok, first_bad = verify_chain_file(args.chain)
    if ok:
        print(f"{args.chain}: chain valid")
        return 0
    print(f"{args.chain}: CORRUPT at block {first_bad}", file=sys.stderr)
    return 1


def _now() -> int:
    import time

    return int(time.time())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moodtunes", description="emotion-aware music recommendation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    synth.add_argument("--kind", choices=("lyrics", "images"), default="lyrics")
    synth.add_argument("--out", required=True, help="JSONL file (lyrics) or directory (images)")
    synth.add_argument("--seed", type=int, default=11)
    synth.add_argument("--per-class", type=int, default=40)
    synth.set_defaults(func=cmd_synth)

    train = sub.add_parser("train", help="train a classifier and save a checkpoint")
    train.add_argument("--corpus", required=True, help="JSONL lyrics file or PGM directory")
    train.add_argument("--out", required=True, help="checkpoint output path")
    train.add_argument("--kind", choices=("lyrics", "image"), default="lyrics")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=20)
    train.add_argument("--lr", type=float, default=0.01)
    train.add_argument("--batch-size", type=int, default=32)
    train.add_argument("--momentum", type=float, default=0.9)
    train.add_argument("--vocab-size", type=int, default=5000)
    train.add_argument("--seq-len", type=int, default=64)
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="print accuracy/precision/recall/F1")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--kind", choices=("lyrics", "image"), default="lyrics")
    ev.set_defaults(func=cmd_evaluate)

    ingest = sub.add_parser(
        "ingest", help="tag a catalog and record metadata + tags on the ledger"
    )
    ingest.add_argument("--catalog", required=True)
    ingest.add_argument("--chain", required=True)
    ingest.add_argument("--ckpt", required=True, help="lyric classifier checkpoint")
    ingest.set_defaults(func=cmd_ingest)

    rec = sub.add_parser("recommend", help="headless recommendation run")
    rec.add_argument("--user", required=True)
    rec.add_argument("--emotion", required=True)
    rec.add_argument("--catalog", required=True)
    rec.add_argument("--chain", default="", help="optional chain for feedback history")
    rec.add_argument("--k", type=int, default=10)
    rec.add_argument("--weights", default=",".join(str(w) for w in DEFAULT_WEIGHTS))
    rec.add_argument("--blend", type=float, default=0.5)
    rec.set_defaults(func=cmd_recommend)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=cmd_serve)

    ledger = sub.add_parser("ledger", help="ledger maintenance")
    ledger_sub = ledger.add_subparsers(dest="ledger_command", required=True)
    verify = ledger_sub.add_parser("verify", help="verify chain file integrity")
    verify.add_argument("--chain", required=True)
    verify.set_defaults(func=cmd_ledger_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
