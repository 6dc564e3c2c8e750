"""Shared synthetic fixtures: Gaussian feature blobs with a known structure."""

from __future__ import annotations

import numpy as np

from intentgan import dataset as ds
from intentgan.encoder import PrecomputedEmbeddings
from intentgan.rng import Rng


def make_blobs(
    k: int = 5,
    dim: int = 16,
    n_train: int = 1000,
    n_test: int = 500,
    sigma: float = 0.1,
    seed: int = 0,
    n_validation: int | None = None,
):
    """Class means are i.i.d. unit-norm directions; samples add N(0, sigma^2).

    Returns (bundle, embeddings, centroids); the bundle's validation split
    mirrors the test items unless a separate size is given, so per-epoch
    validation accuracy tracks held-out performance.
    """
    rng = Rng(seed)
    means = rng.split("means").normal(k * dim).reshape(k, dim)
    means /= np.linalg.norm(means, axis=1, keepdims=True)

    def sample_split(n, split, noise_rng, start_id):
        rows, utts = [], []
        for i in range(n):
            c = i % k
            rows.append(means[c] + sigma * noise_rng.normal(dim))
            utts.append(ds.Utterance(start_id + i, f"{split} point {i} class {c}", c, split))
        return rows, utts

    n_val = n_test if n_validation is None else n_validation
    train_rows, train_utts = sample_split(n_train, "train", rng.split("train-noise"), 0)
    val_rows, val_utts = sample_split(n_val, "validation", rng.split("val-noise"), n_train)
    test_rows, test_utts = sample_split(n_test, "test", rng.split("test-noise"), n_train + n_val)

    vocab = ds.LabelVocab(tuple(f"blob-{i}" for i in range(k)))
    bundle = ds.DatasetBundle(vocab, tuple(train_utts + val_utts + test_utts), "blobs")
    rows = np.array(train_rows + val_rows + test_rows, dtype=np.float32)
    return bundle, PrecomputedEmbeddings(rows), means


def nearest_centroid_accuracy(bundle, embeddings, split: str = "test") -> float:
    """Oracle separability check: centroids from train labels, then 1-NN."""
    train = bundle.split_items("train")
    k = len(bundle.vocab)
    dim = embeddings.dim
    centroids = np.zeros((k, dim))
    counts = np.zeros(k)
    for u in train:
        centroids[u.label] += embeddings.rows[u.id]
        counts[u.label] += 1
    centroids /= counts[:, None]

    items = bundle.split_items(split)
    x = embeddings.rows[[u.id for u in items]].astype(np.float64)
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    preds = d2.argmin(axis=1)
    truths = np.array([u.label for u in items])
    return float((preds == truths).mean())
