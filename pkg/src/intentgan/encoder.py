"""Utterance feature encoders.

Two sources produce the fixed-dimension vectors the networks consume: a
precomputed embedding table keyed by utterance id (EMB1 binary file), or a
built-in signed hashed character n-gram encoder that needs no external
model.  Feature storage is float32 throughout.

EMB1 layout, little-endian: magic ``EMB1``, u32 version (1), u32 count,
u32 dim, then ``count * dim`` IEEE-754 binary32 values row-major; row i
belongs to utterance id i of the dataset the file was built from.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dataset import Utterance
from .errors import BindingError, ConfigError, DataFormatError
from .rng import FNV_OFFSET, FNV_PRIME, _MASK

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1
DEFAULT_DIM = 768


@dataclass(frozen=True)
class HashedNgramConfig:
    dim: int = DEFAULT_DIM
    ngram_min: int = 2
    ngram_max: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigError("hashed encoder dim must be >= 1")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ConfigError("need 1 <= ngram_min <= ngram_max")


@dataclass(frozen=True)
class PrecomputedEmbeddings:
    rows: np.ndarray  # count x dim, float32

    @property
    def count(self) -> int:
        return int(self.rows.shape[0])

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])


def _seeded_fnv_prefix(seed: int) -> int:
    # Fold the 8 little-endian seed bytes into the hash state once.
    h = FNV_OFFSET
    for b in struct.pack("<Q", seed & _MASK):
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def encode_hashed(text: str, config: HashedNgramConfig) -> np.ndarray:
    """Signed hashing-trick encoding of character n-grams, L2-normalized.

    Every n-gram over the Unicode scalar sequence (n in
    ``[ngram_min, ngram_max]``) is hashed with seeded FNV-1a-64; bit 63
    picks the sign, ``h mod dim`` the bucket.  All-zero vectors (no
    n-grams) are returned as-is instead of being normalized.
    """
    acc = np.zeros(config.dim, dtype=np.float64)
    prefix = _seeded_fnv_prefix(config.seed)
    for n in range(config.ngram_min, config.ngram_max + 1):
        for i in range(len(text) - n + 1):
            h = prefix
            for b in text[i : i + n].encode("utf-8"):
                h = ((h ^ b) * FNV_PRIME) & _MASK
            sign = 1.0 if (h >> 63) == 0 else -1.0
            acc[h % config.dim] += sign
    norm = float(np.linalg.norm(acc))
    if norm > 0.0:
        acc /= norm
    return acc.astype(np.float32)


def save_embeddings(rows: np.ndarray, path: str) -> None:
    """Write an EMB1 file; rejects non-finite values."""
    arr = np.asarray(rows, dtype=np.float32)
    if arr.ndim != 2:
        raise DataFormatError(f"embedding table must be 2-D, got shape {arr.shape}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise DataFormatError(
            f"non-finite embedding value at byte offset {16 + 4 * int(bad[0])}"
        )
    count, dim = arr.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", EMB1_MAGIC, EMB1_VERSION, count, dim))
        fh.write(arr.astype("<f4").tobytes(order="C"))


def load_embeddings(path: str) -> PrecomputedEmbeddings:
    """Read an EMB1 file; errors carry the byte offset of the problem."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise DataFormatError(f"{path}: truncated header, {len(blob)} < 16 bytes")
    magic, version, count, dim = struct.unpack_from("<4sIII", blob, 0)
    if magic != EMB1_MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r} at byte offset 0")
    if version != EMB1_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version} at byte offset 4")
    expected = 16 + 4 * count * dim
    if len(blob) != expected:
        raise DataFormatError(
            f"{path}: payload ends at byte offset {len(blob)}, expected {expected}"
        )
    arr = np.frombuffer(blob, dtype="<f4", offset=16).reshape(count, dim).copy()
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise DataFormatError(
            f"{path}: non-finite value at byte offset {16 + 4 * int(bad[0])}"
        )
    return PrecomputedEmbeddings(arr)


FeatureSource = PrecomputedEmbeddings | HashedNgramConfig


def get_feature(source: FeatureSource, utterance: Utterance) -> np.ndarray:
    """Resolve one utterance to its feature vector."""
    if isinstance(source, PrecomputedEmbeddings):
        if not 0 <= utterance.id < source.count:
            raise BindingError(
                f"utterance id {utterance.id} outside embedding table of {source.count} rows"
            )
        return source.rows[utterance.id]
    return encode_hashed(utterance.text, source)


def feature_dim(source: FeatureSource) -> int:
    return source.dim


def feature_matrix(source: FeatureSource, utterances: list[Utterance]) -> np.ndarray:
    """Stack features for a list of utterances into a float32 matrix."""
    out = np.zeros((len(utterances), feature_dim(source)), dtype=np.float32)
    for i, utt in enumerate(utterances):
        out[i] = get_feature(source, utt)
    return out
