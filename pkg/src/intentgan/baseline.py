"""Plain supervised MLP head, the non-adversarial comparison point.

Same engine, same hyperparameters, same feature space as the adversarial
model, but trained with cross-entropy on labeled rows only.  Used by the
benefit checks that compare adversarial training against a supervised
head on an identical labeled budget.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .nn import MLP, AdamState, MLPSpec, adam_step, backward, forward, init_mlp, softmax_xent
from .rng import Rng
from .ssgan import TrainConfig


def train_mlp_classifier(
    x: np.ndarray, y: np.ndarray, k: int, config: TrainConfig
) -> MLP:
    """Train a [d, hidden, k] softmax classifier on the given labeled rows."""
    x = np.asarray(x, dtype=np.float32)
    y = np.asarray(y, dtype=np.int64)
    if len(x) == 0:
        raise ConfigError("baseline training needs labeled examples")

    root = Rng(config.seed)
    spec = MLPSpec((x.shape[1], config.d_hidden, k), dropout_rate=config.dropout)
    mlp = init_mlp(spec, root.split("init-baseline"))
    drop = root.split("dropout-baseline")
    opt = AdamState(mlp.parameters(), lr=config.lr)

    n = len(x)
    for epoch in range(config.epochs):
        order = np.array(root.split(f"shuffle-epoch-{epoch}").permutation(n))
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            cache = forward(mlp, x[idx], train=True, rng=drop)
            _, dlogits = softmax_xent(cache.logits, y[idx])
            grads = backward(mlp, cache, dlogits)
            adam_step(mlp.parameters(), grads.flat(), opt)
    return mlp


def classify(mlp: MLP, x: np.ndarray) -> np.ndarray:
    cache = forward(mlp, np.atleast_2d(np.asarray(x, dtype=np.float64)), train=False)
    return cache.logits.argmax(axis=1)


def accuracy(mlp: MLP, x: np.ndarray, y: np.ndarray) -> float:
    return float((classify(mlp, x) == np.asarray(y)).mean())
