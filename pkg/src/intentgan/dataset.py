"""Intent corpus handling: loading, subsetting, cleaning, splitting, stats.

Two on-disk layouts are understood.  The published CLINC-style JSON holds
``{"train": [[text, label], ...], "val": ..., "test": ...}``; any other top
level keys (``oos_train`` etc.) are ignored.  The canonical format is UTF-8
JSON Lines: an optional first line ``{"vocab": [...]}`` pinning class order,
then one ``{"text", "label", "split"}`` object per utterance, line order
equal to id order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .errors import ConfigError, DataFormatError
from .rng import Rng

SPLITS = ("train", "validation", "test")


@dataclass(frozen=True)
class Utterance:
    id: int
    text: str
    label: int | None
    split: str


@dataclass(frozen=True)
class LabelVocab:
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise DataFormatError("label vocabulary contains duplicate names")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataFormatError(f"unknown class name: {name!r}") from None


@dataclass(frozen=True)
class DatasetBundle:
    vocab: LabelVocab
    utterances: tuple[Utterance, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        k = len(self.vocab)
        for i, utt in enumerate(self.utterances):
            if utt.id != i:
                raise DataFormatError(f"utterance ids not dense: got {utt.id} at position {i}")
            if utt.split not in SPLITS:
                raise DataFormatError(f"utterance {utt.id}: bad split {utt.split!r}")
            if utt.label is not None and not 0 <= utt.label < k:
                raise DataFormatError(f"utterance {utt.id}: label {utt.label} out of range [0, {k})")
            if utt.label is None and utt.split != "train":
                raise DataFormatError(f"utterance {utt.id}: {utt.split} items must be labeled")

    def split_items(self, split: str) -> list[Utterance]:
        return [u for u in self.utterances if u.split == split]

    def split_sizes(self) -> dict[str, int]:
        return {s: len(self.split_items(s)) for s in SPLITS}


@dataclass(frozen=True)
class SemiSupervisedView:
    bundle: DatasetBundle
    labeled_ids: frozenset[int]
    unlabeled_ids: frozenset[int]


@dataclass(frozen=True)
class DatasetStats:
    total_words: int
    unique_words: int
    max_len: int
    min_len: int
    avg_len: float


_CLINC_SPLIT_KEYS = {"train": "train", "val": "validation", "test": "test"}


def load_clinc_json(path: str) -> DatasetBundle:
    """Load a CLINC-style JSON corpus; vocab is lexicographic over label names."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: cannot read CLINC JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataFormatError(f"{path}: top level must be a JSON object")

    rows: list[tuple[str, str, str]] = []  # (text, label, split)
    names: set[str] = set()
    for key, split in _CLINC_SPLIT_KEYS.items():
        if key not in raw:
            raise DataFormatError(f"{path}: missing key {key!r}")
        entries = raw[key]
        if not isinstance(entries, list):
            raise DataFormatError(f"{path}: key {key!r} must hold a list")
        for i, pair in enumerate(entries):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not isinstance(pair[0], str)
                or not isinstance(pair[1], str)
            ):
                raise DataFormatError(f"{path}: malformed [text, label] pair at {key}[{i}]")
            text, label = pair
            if not text:
                raise DataFormatError(f"{path}: empty text at {key}[{i}]")
            rows.append((text, label, split))
            names.add(label)

    vocab = LabelVocab(tuple(sorted(names)))
    utterances = tuple(
        Utterance(id=i, text=text, label=vocab.index(label), split=split)
        for i, (text, label, split) in enumerate(rows)
    )
    return DatasetBundle(vocab, utterances, provenance=f"clinc:{path}")


def load_canonical_jsonl(path: str) -> DatasetBundle:
    """Load the canonical JSON Lines layout (optional vocab header line)."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: cannot read: {exc}") from exc

    vocab_names: tuple[str, ...] | None = None
    start = 0
    if lines:
        try:
            first = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}:1: malformed JSON: {exc}") from exc
        if isinstance(first, dict) and "vocab" in first and "text" not in first:
            if not isinstance(first["vocab"], list) or not all(
                isinstance(n, str) for n in first["vocab"]
            ):
                raise DataFormatError(f"{path}:1: vocab header must list class-name strings")
            vocab_names = tuple(first["vocab"])
            start = 1

    rows: list[tuple[str, str, str]] = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
        if not isinstance(obj, dict) or not {"text", "label", "split"} <= set(obj):
            raise DataFormatError(f"{path}:{lineno}: need keys text/label/split")
        text, label, split = obj["text"], obj["label"], obj["split"]
        if not isinstance(text, str) or not text:
            raise DataFormatError(f"{path}:{lineno}: text must be a non-empty string")
        if not isinstance(label, str):
            raise DataFormatError(f"{path}:{lineno}: label must be a class-name string")
        if split not in SPLITS:
            raise DataFormatError(f"{path}:{lineno}: bad split {split!r}")
        rows.append((text, label, split))

    if vocab_names is None:
        vocab_names = tuple(sorted({label for _, label, _ in rows}))
    vocab = LabelVocab(vocab_names)
    utterances = tuple(
        Utterance(id=i, text=text, label=vocab.index(label), split=split)
        for i, (text, label, split) in enumerate(rows)
    )
    return DatasetBundle(vocab, utterances, provenance=f"canonical:{path}")


def save_canonical_jsonl(bundle: DatasetBundle, path: str) -> None:
    """Write the canonical layout; id order becomes line order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"vocab": list(bundle.vocab.names)}, ensure_ascii=False) + "\n")
        for utt in bundle.utterances:
            if utt.label is None:
                raise DataFormatError(f"utterance {utt.id}: cannot serialize unlabeled item")
            obj = {
                "text": utt.text,
                "label": bundle.vocab.names[utt.label],
                "split": utt.split,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def select_classes(bundle: DatasetBundle, names: list[str]) -> DatasetBundle:
    """Keep only the named classes; vocab is re-indexed to the given order."""
    unknown = [n for n in names if n not in bundle.vocab.names]
    if unknown:
        raise DataFormatError(f"unknown class names: {unknown}")
    if len(set(names)) != len(names):
        raise DataFormatError("class selection contains duplicates")

    vocab = LabelVocab(tuple(names))
    wanted = {bundle.vocab.index(n): i for i, n in enumerate(names)}
    kept = [u for u in bundle.utterances if u.label in wanted]
    utterances = tuple(
        replace(u, id=i, label=wanted[u.label]) for i, u in enumerate(kept)
    )
    provenance = f"{bundle.provenance}; select_classes({len(names)} classes)"
    return DatasetBundle(vocab, utterances, provenance)


def clean_min_length(bundle: DatasetBundle, min_tokens: int = 2) -> DatasetBundle:
    """Drop utterances shorter than ``min_tokens`` whitespace tokens."""
    if min_tokens < 1:
        raise ConfigError("min_tokens must be >= 1")
    kept = [u for u in bundle.utterances if len(u.text.split()) >= min_tokens]
    removed = len(bundle.utterances) - len(kept)
    utterances = tuple(replace(u, id=i) for i, u in enumerate(kept))
    provenance = (
        f"{bundle.provenance}; clean_min_length(min_tokens={min_tokens}): "
        f"removed {removed} of {len(bundle.utterances)}"
    )
    return DatasetBundle(bundle.vocab, utterances, provenance)


def mask_labels(bundle: DatasetBundle, labeled_fraction: float, seed: int) -> SemiSupervisedView:
    """Per-class stratified label masking of the train split.

    Class ``c`` with ``n_c`` train items keeps ``max(1, floor(f * n_c + 0.5))``
    labeled ids, taken as the head of a seeded shuffle of that class's train
    ids in ascending id order.  The shuffle stream for class ``c`` is
    ``Rng(seed).split(f"mask-class-{c}")``.
    """
    if not 0.0 < labeled_fraction <= 1.0:
        raise ConfigError(f"labeled_fraction must be in (0, 1], got {labeled_fraction}")

    by_class: dict[int, list[int]] = {}
    for utt in bundle.utterances:
        if utt.split == "train":
            if utt.label is None:
                raise DataFormatError(f"utterance {utt.id}: train item without label cannot be masked")
            by_class.setdefault(utt.label, []).append(utt.id)
    for c in range(len(bundle.vocab)):
        if c not in by_class:
            raise DataFormatError(f"class {bundle.vocab.names[c]!r} has no train utterances")

    root = Rng(seed)
    labeled: set[int] = set()
    unlabeled: set[int] = set()
    for c in sorted(by_class):
        ids = sorted(by_class[c])
        root.split(f"mask-class-{c}").shuffle(ids)
        keep = max(1, int(labeled_fraction * len(ids) + 0.5))
        labeled.update(ids[:keep])
        unlabeled.update(ids[keep:])
    return SemiSupervisedView(bundle, frozenset(labeled), frozenset(unlabeled))


def stats(bundle: DatasetBundle, length_unit: str = "token") -> DatasetStats:
    """Corpus statistics; lengths in whitespace tokens or in characters."""
    if length_unit not in ("token", "char"):
        raise ConfigError(f"length_unit must be 'token' or 'char', got {length_unit!r}")
    if not bundle.utterances:
        return DatasetStats(0, 0, 0, 0, 0.0)

    total = 0
    uniques: set[str] = set()
    lengths: list[int] = []
    for utt in bundle.utterances:
        tokens = utt.text.split()
        total += len(tokens)
        uniques.update(tokens)
        lengths.append(len(tokens) if length_unit == "token" else len(utt.text))
    return DatasetStats(
        total_words=total,
        unique_words=len(uniques),
        max_len=max(lengths),
        min_len=min(lengths),
        avg_len=sum(lengths) / len(lengths),
    )
