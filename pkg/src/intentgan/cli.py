"""Command-line entry point.

One JSON config document drives a run; command-line flags override config
keys, and the resolved result is echoed into the output directory as
``resolved-config.json`` so every artifact set records how it was made.
Artifacts are deterministic for a fixed config and seed: JSON keys are
sorted and floats carry nine significant digits.

Exit codes: 0 ok, 2 config error, 3 data error, 4 checkpoint error,
5 numeric abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import dataset as ds
from . import metrics as mx
from .encoder import (
    FeatureSource,
    HashedNgramConfig,
    load_embeddings,
)
from .errors import (
    CheckpointError,
    ConfigError,
    DataFormatError,
    IntentGanError,
    NumericError,
)
from .ssgan import (
    DiscriminatorNet,
    NoiseSpec,
    TrainConfig,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)

OUTPUT_DIR_ENV = "INTENTGAN_OUTPUT_DIR"

CONFIG_KEY_DOCS = """\
config file keys (JSON object; flags override):
  dataset           path to a canonical .jsonl dataset
  clinc             path to a CLINC-style JSON corpus (prepare-data input)
  classes           path to a class-list file, one name per line (prepare-data)
  min_tokens        prepare-data cleaning threshold in tokens (default 2)
  output_dir        artifact directory (env INTENTGAN_OUTPUT_DIR overrides)
  encoder           {"type":"hashed","dim":768,"ngram_min":2,"ngram_max":4,"seed":0}
                    or {"type":"embeddings","path":"features.emb1"}
  epochs            training epochs (default 50)
  batch_size        batch size (default 64)
  lr                Adam learning rate for both nets (default 0.01)
  g_lr              optional generator-only learning rate override
  dropout           hidden-layer dropout rate (default 0.2)
  seed              run seed (default 0)
  labeled_fraction  fraction of train labels kept per class (default 1.0)
  g_hidden          generator hidden width (default 512)
  d_hidden          discriminator hidden width (default 512)
  noise_dim         generator noise dimension (default 100)
  noise_mean        noise mean (default 0.0)
  noise_stddev      noise standard deviation (default 1.0)
  eval_split        split scored by evaluate: train|validation|test (default test)
"""

_DEFAULT_ENCODER = {"type": "hashed", "dim": 768, "ngram_min": 2, "ngram_max": 4, "seed": 0}

_CONFIG_DEFAULTS: dict = {
    "dataset": None,
    "clinc": None,
    "classes": None,
    "min_tokens": 2,
    "output_dir": None,
    "encoder": _DEFAULT_ENCODER,
    "epochs": 50,
    "batch_size": 64,
    "lr": 0.01,
    "g_lr": None,
    "dropout": 0.2,
    "seed": 0,
    "labeled_fraction": 1.0,
    "g_hidden": 512,
    "d_hidden": 512,
    "noise_dim": 100,
    "noise_mean": 0.0,
    "noise_stddev": 1.0,
    "eval_split": "test",
}


def _round9(obj):
    if isinstance(obj, float):
        return float(mx.fmt9(obj))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def write_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round9(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(_CONFIG_DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = set(user) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if os.environ.get(OUTPUT_DIR_ENV):
        cfg["output_dir"] = os.environ[OUTPUT_DIR_ENV]
    return cfg


def _train_config(cfg: dict) -> TrainConfig:
    try:
        return TrainConfig(
            epochs=int(cfg["epochs"]),
            batch_size=int(cfg["batch_size"]),
            lr=float(cfg["lr"]),
            dropout=float(cfg["dropout"]),
            noise=NoiseSpec(int(cfg["noise_dim"]), float(cfg["noise_mean"]),
                            float(cfg["noise_stddev"])),
            seed=int(cfg["seed"]),
            labeled_fraction=float(cfg["labeled_fraction"]),
            g_hidden=int(cfg["g_hidden"]),
            d_hidden=int(cfg["d_hidden"]),
            g_lr=None if cfg["g_lr"] is None else float(cfg["g_lr"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad training hyperparameter: {exc}") from exc


def _encoder_source(spec: dict) -> FeatureSource:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError('encoder config must be an object with a "type" key')
    if spec["type"] == "hashed":
        known = {"type", "dim", "ngram_min", "ngram_max", "seed"}
        extra = set(spec) - known
        if extra:
            raise ConfigError(f"unknown hashed-encoder keys: {sorted(extra)}")
        return HashedNgramConfig(
            dim=int(spec.get("dim", 768)),
            ngram_min=int(spec.get("ngram_min", 2)),
            ngram_max=int(spec.get("ngram_max", 4)),
            seed=int(spec.get("seed", 0)),
        )
    if spec["type"] == "embeddings":
        if "path" not in spec:
            raise ConfigError('embeddings encoder needs a "path" key')
        return load_embeddings(spec["path"])
    raise ConfigError(f"unknown encoder type {spec['type']!r}")


def _require(cfg: dict, key: str) -> str:
    if not cfg.get(key):
        raise ConfigError(f"missing required setting: {key} (flag or config key)")
    return cfg[key]


def _output_dir(cfg: dict) -> str:
    out = _require(cfg, "output_dir")
    os.makedirs(out, exist_ok=True)
    return out


def _load_bundle(cfg: dict) -> ds.DatasetBundle:
    return ds.load_canonical_jsonl(_require(cfg, "dataset"))


def cmd_prepare_data(cfg: dict, out_path: str) -> None:
    clinc = _require(cfg, "clinc")
    classes_path = _require(cfg, "classes")
    try:
        with open(classes_path, encoding="utf-8") as fh:
            names = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    except OSError as exc:
        raise DataFormatError(f"cannot read class list {classes_path}: {exc}") from exc
    bundle = ds.load_clinc_json(clinc)
    bundle = ds.select_classes(bundle, names)
    bundle = ds.clean_min_length(bundle, int(cfg["min_tokens"]))
    ds.save_canonical_jsonl(bundle, out_path)
    print(f"wrote {len(bundle.utterances)} utterances over {len(bundle.vocab)} classes to {out_path}")


def cmd_mask_labels(cfg: dict, out_path: str) -> None:
    bundle = _load_bundle(cfg)
    view = ds.mask_labels(bundle, float(cfg["labeled_fraction"]), int(cfg["seed"]))
    write_json(
        {
            "labeled_fraction": float(cfg["labeled_fraction"]),
            "seed": int(cfg["seed"]),
            "labeled_ids": sorted(view.labeled_ids),
            "unlabeled_ids": sorted(view.unlabeled_ids),
        },
        out_path,
    )
    print(f"labeled {len(view.labeled_ids)} of {len(view.labeled_ids) + len(view.unlabeled_ids)} train utterances")


def cmd_train(cfg: dict) -> None:
    out = _output_dir(cfg)
    bundle = _load_bundle(cfg)
    source = _encoder_source(cfg["encoder"])
    tc = _train_config(cfg)
    view = ds.mask_labels(bundle, tc.labeled_fraction, tc.seed)
    gen, disc, logs = train(source, view, tc)

    extra = {"class_names": list(bundle.vocab.names), "encoder": cfg["encoder"]}
    save_checkpoint(gen, disc, tc, os.path.join(out, "checkpoint.gbnb"), extra=extra)
    mx.export_curves(logs, os.path.join(out, "curves.csv"))
    write_json(cfg, os.path.join(out, "resolved-config.json"))
    final = logs[-1].validation_accuracy if logs else float("nan")
    print(f"trained {tc.epochs} epochs; final validation accuracy {final:.4f}"
          if logs else "trained 0 epochs; checkpoint holds initialized nets")


def _checkpoint_encoder(header: dict) -> FeatureSource:
    spec = header.get("config", {}).get("encoder")
    if spec is None:
        raise CheckpointError("checkpoint header carries no encoder settings")
    return _encoder_source(spec)


def cmd_evaluate(cfg: dict, checkpoint: str) -> None:
    out = _output_dir(cfg)
    bundle = _load_bundle(cfg)
    _, disc, header = load_checkpoint(checkpoint)
    if disc.k != len(bundle.vocab):
        raise CheckpointError(
            f"checkpoint has {disc.k} classes but dataset has {len(bundle.vocab)}"
        )
    source = _encoder_source(cfg["encoder"]) if cfg.get("dataset") else _checkpoint_encoder(header)
    split = cfg["eval_split"]
    if split not in ds.SPLITS:
        raise ConfigError(f"eval_split must be one of {ds.SPLITS}, got {split!r}")
    items = bundle.split_items(split)
    if not items:
        raise DataFormatError(f"split {split!r} is empty")

    from .encoder import feature_matrix
    from .ssgan import predict_classes

    feats = feature_matrix(source, items)
    preds = predict_classes(disc, feats)
    truths = np.array([u.label for u in items])
    cm = mx.confusion(preds, truths, len(bundle.vocab))
    rep = mx.report(cm)

    write_json({"split": split, "averaging": "macro", **asdict(rep)},
               os.path.join(out, "metrics.json"))
    mx.export_confusion_csv(cm, bundle.vocab, os.path.join(out, "confusion.csv"))
    records = mx.misclass_report(disc, bundle, split, source)
    with open(os.path.join(out, "misclassified.jsonl"), "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_round9({
                "text": rec.text,
                "true_intent": rec.true_class,
                "intent": rec.predicted_class,
                "prob": rec.prob,
                "runner_up": rec.runner_up,
                "runner_up_prob": rec.runner_up_prob,
            }), sort_keys=True, ensure_ascii=False) + "\n")
    write_json(cfg, os.path.join(out, "resolved-config.json"))
    print(f"accuracy {rep.accuracy:.4f}  mcc {rep.mcc:.4f}  ({rep.total} items, {len(records)} misclassified)")


def cmd_predict(checkpoint: str, input_path: str | None) -> None:
    _, disc, header = load_checkpoint(checkpoint)
    source = _checkpoint_encoder(header)
    if not isinstance(source, HashedNgramConfig):
        raise ConfigError(
            "checkpoint was trained on precomputed embeddings; raw-text predict "
            "needs the hashed encoder"
        )
    names = header.get("config", {}).get("class_names")
    if not names or len(names) != disc.k:
        raise CheckpointError("checkpoint header lacks a usable class_names list")

    from .encoder import encode_hashed

    fh = sys.stdin if input_path in (None, "-") else open(input_path, encoding="utf-8")
    try:
        for line in fh:
            text = line.rstrip("\n")
            if not text:
                continue
            probs = predict(disc, encode_hashed(text, source))
            top2 = np.argsort(probs)[::-1][:2]
            print(json.dumps(_round9({
                "text": text,
                "intent": names[int(top2[0])],
                "prob": float(probs[top2[0]]),
                "runner_up": names[int(top2[1])],
                "runner_up_prob": float(probs[top2[1]]),
            }), sort_keys=True, ensure_ascii=False))
    finally:
        if fh is not sys.stdin:
            fh.close()


def cmd_export_report(cfg: dict) -> None:
    out = _output_dir(cfg)
    metrics_path = os.path.join(out, "metrics.json")
    try:
        with open(metrics_path, encoding="utf-8") as fh:
            rep = json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"run evaluate first: {exc}") from exc

    lines = ["evaluation report", "=================", ""]
    for key in ("split", "total", "accuracy", "precision_macro", "recall_macro",
                "f1_macro", "mcc", "precision_weighted", "recall_weighted"):
        if key in rep:
            lines.append(f"{key:20s} {rep[key]}")
    mis_path = os.path.join(out, "misclassified.jsonl")
    if os.path.exists(mis_path):
        with open(mis_path, encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
        lines += ["", f"misclassified items: {len(records)}", ""]
        for rec in records[:10]:
            lines.append(
                f"  {rec['text']!r}: true {rec['true_intent']} -> predicted "
                f"{rec['intent']} ({rec['prob']}), nearest {rec['runner_up']} "
                f"({rec['runner_up_prob']})"
            )
    report_path = os.path.join(out, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {report_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intentgan",
        description="Semi-supervised adversarial intent classification toolkit.",
        epilog=CONFIG_KEY_DOCS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(
            name, help=help_text, epilog=CONFIG_KEY_DOCS,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", help="JSON config file; flags override its keys")
        return p

    p = add("prepare-data", "build a canonical dataset from a CLINC-style corpus")
    p.add_argument("--clinc", help="CLINC-style JSON input")
    p.add_argument("--classes", help="class-list file, one name per line")
    p.add_argument("--min-tokens", type=int, dest="min_tokens")
    p.add_argument("--out", required=True, help="canonical .jsonl output path")

    p = add("mask-labels", "emit the labeled/unlabeled id partition for a dataset")
    p.add_argument("--dataset")
    p.add_argument("--fraction", type=float, dest="labeled_fraction")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="view JSON output path")

    p = add("train", "train the adversarial classifier and write artifacts")
    p.add_argument("--dataset")
    p.add_argument("--out-dir", dest="output_dir")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--labeled-fraction", type=float, dest="labeled_fraction")

    p = add("evaluate", "score a checkpoint on a dataset split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset")
    p.add_argument("--split", dest="eval_split")
    p.add_argument("--out-dir", dest="output_dir")

    p = add("predict", "classify newline-delimited texts from a file or stdin")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", help="text file, one utterance per line (default stdin)")

    p = add("export-report", "render a text report from evaluate artifacts")
    p.add_argument("--out-dir", dest="output_dir")
    return parser


_OVERRIDE_KEYS = (
    "dataset", "clinc", "classes", "min_tokens", "output_dir", "epochs",
    "seed", "labeled_fraction", "eval_split",
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    try:
        cfg = load_config(getattr(args, "config", None), overrides)
        if args.command == "prepare-data":
            cmd_prepare_data(cfg, args.out)
        elif args.command == "mask-labels":
            cmd_mask_labels(cfg, args.out)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "evaluate":
            cmd_evaluate(cfg, args.checkpoint)
        elif args.command == "predict":
            cmd_predict(args.checkpoint, args.input)
        elif args.command == "export-report":
            cmd_export_report(cfg)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return 4
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except IntentGanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
