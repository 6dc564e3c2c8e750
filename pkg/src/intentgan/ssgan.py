"""Adversarial semi-supervised classifier core.

A generator maps Gaussian noise into the frozen feature space; a
discriminator scores K real intent classes plus one fake class (index K).
The discriminator trains on three summed terms: supervised cross-entropy
on labeled rows, a real/fake term pushing real rows away from the fake
class, and one pushing generated rows into it.  The generator trains on
feature matching plus a fooling term.  All the fake-probability logs use
the stable identity ``ln(1 - p(fake|x)) = lse(real logits) - lse(all
logits)``.

Inference drops the generator: class probabilities are the K+1 softmax
renormalized over the K real classes (computed directly as a softmax over
the real logits, which is the same distribution).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict

import numpy as np

from .dataset import SemiSupervisedView
from .encoder import FeatureSource, feature_dim, feature_matrix
from .errors import CheckpointError, ConfigError, NumericError
from .nn import (
    MLP,
    AdamState,
    Gradients,
    MLPSpec,
    adam_step,
    backward,
    check_finite,
    forward,
    init_mlp,
    log_softmax,
    logsumexp,
)
from .rng import Rng

GBNB_MAGIC = b"GBNB"
GBNB_VERSION = 1


@dataclass(frozen=True)
class NoiseSpec:
    dim: int = 100
    mean: float = 0.0
    stddev: float = 1.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigError("noise dim must be >= 1")
        if self.stddev <= 0.0:
            raise ConfigError("noise stddev must be > 0")


@dataclass
class GeneratorNet:
    mlp: MLP
    noise: NoiseSpec


@dataclass
class DiscriminatorNet:
    mlp: MLP
    k: int  # number of real classes; fake class index == k

    @property
    def feature_dim(self) -> int:
        return self.mlp.d_in


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 0.01
    dropout: float = 0.2
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    labeled_fraction: float = 1.0
    g_hidden: int = 512
    d_hidden: int = 512
    g_lr: float | None = None  # defaults to lr

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.batch_size < 1 or self.g_hidden < 1 or self.d_hidden < 1:
            raise ConfigError("epochs/batch_size/hidden sizes must be positive")
        if self.lr <= 0.0 or (self.g_lr is not None and self.g_lr < 0.0):
            raise ConfigError("learning rates must be positive (g_lr may be 0)")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if not 0.0 < self.labeled_fraction <= 1.0:
            raise ConfigError("labeled_fraction must be in (0, 1]")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    l_sup: float
    l_unsup_real: float
    l_unsup_fake: float
    l_d: float
    l_fm: float
    l_fool: float
    l_g: float
    train_accuracy: float
    validation_accuracy: float


def make_generator(noise: NoiseSpec, out_dim: int, rng: Rng, hidden: int = 512,
                   dropout: float = 0.0) -> GeneratorNet:
    spec = MLPSpec((noise.dim, hidden, out_dim), dropout_rate=dropout)
    return GeneratorNet(init_mlp(spec, rng), noise)


def make_discriminator(in_dim: int, k: int, rng: Rng, hidden: int = 512,
                       dropout: float = 0.0) -> DiscriminatorNet:
    spec = MLPSpec((in_dim, hidden, k + 1), dropout_rate=dropout)
    return DiscriminatorNet(init_mlp(spec, rng), k)


def sample_noise(batch_size: int, spec: NoiseSpec, rng: Rng) -> np.ndarray:
    """Gaussian noise batch (batch_size x dim), Box-Muller on the rng stream."""
    if batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    z = rng.normal(batch_size * spec.dim).reshape(batch_size, spec.dim)
    return spec.mean + spec.stddev * z


def _log_one_minus_p_fake(logits: np.ndarray, k: int) -> np.ndarray:
    """Per-row ln(1 - p(fake|x)) via lse(real) - lse(all)."""
    return logsumexp(logits[:, :k], axis=1) - logsumexp(logits, axis=1)


@dataclass
class DLossParts:
    l_sup: float
    l_unsup_real: float
    l_unsup_fake: float

    @property
    def total(self) -> float:
        return self.l_sup + self.l_unsup_real + self.l_unsup_fake


def d_loss(
    disc: DiscriminatorNet,
    labeled: tuple[np.ndarray, np.ndarray],
    unlabeled: np.ndarray,
    fake: np.ndarray,
    rng: Rng | None = None,
    train: bool = True,
    need_input_grad: bool = False,
) -> tuple[DLossParts, Gradients]:
    """Discriminator losses and parameter gradients for one batch.

    The three groups are stacked labeled / unlabeled / fake and share a
    single forward pass (one set of dropout masks).  An empty labeled
    group contributes zero supervised loss.
    """
    lab_x, lab_y = labeled
    k = disc.k
    groups = [np.asarray(g, dtype=np.float64).reshape(-1, disc.feature_dim)
              for g in (lab_x, unlabeled, fake)]
    n_lab, n_unl, n_fake = (g.shape[0] for g in groups)
    n_real = n_lab + n_unl
    if n_fake == 0:
        raise NumericError("discriminator step needs a non-empty fake batch")
    if n_real == 0:
        raise NumericError("discriminator step needs real examples")

    x = np.vstack(groups)
    cache = forward(disc.mlp, x, train=train, rng=rng)
    logits = cache.logits
    p = np.exp(log_softmax(logits))
    dlogits = np.zeros_like(p)

    if n_lab > 0:
        lab_y = np.asarray(lab_y, dtype=np.int64)
        logp = log_softmax(logits[:n_lab])
        l_sup = float(-logp[np.arange(n_lab), lab_y].mean())
        dlogits[:n_lab] = (p[:n_lab] - np.eye(k + 1)[lab_y]) / n_lab
    else:
        l_sup = 0.0

    # Real rows should not look fake: -mean ln(1 - p(fake|x)).
    real = slice(0, n_real)
    l_unsup_real = float(-_log_one_minus_p_fake(logits[real], k).mean())
    q_real = np.exp(log_softmax(logits[real, :k]))  # renormalized over real classes
    d_real = p[real].copy()
    d_real[:, :k] -= q_real
    dlogits[real] += d_real / n_real

    # Fake rows should be flagged: -mean ln p(fake|x).
    fake_rows = slice(n_real, n_real + n_fake)
    logp_fake = log_softmax(logits[fake_rows])
    l_unsup_fake = float(-logp_fake[:, k].mean())
    d_fake = p[fake_rows].copy()
    d_fake[:, k] -= 1.0
    dlogits[fake_rows] += d_fake / n_fake

    grads = backward(disc.mlp, cache, dlogits, need_input_grad=need_input_grad)
    return DLossParts(l_sup, l_unsup_real, l_unsup_fake), grads


@dataclass
class GLossParts:
    l_fm: float
    l_fool: float

    @property
    def total(self) -> float:
        return self.l_fm + self.l_fool


def g_loss(
    disc: DiscriminatorNet,
    gen: GeneratorNet,
    real_features_mean: np.ndarray,
    noise_batch: np.ndarray,
    gen_rng: Rng | None = None,
    disc_rng: Rng | None = None,
    train: bool = True,
) -> tuple[GLossParts, Gradients]:
    """Generator losses and generator gradients, discriminator frozen.

    Feature matching compares the fake-batch mean of the discriminator's
    penultimate activation to ``real_features_mean`` (squared L2);
    fooling is ``-mean ln(1 - p(fake|x))`` over the generated rows.
    """
    k = disc.k
    m_real = np.asarray(real_features_mean, dtype=np.float64)
    gen_cache = forward(gen.mlp, noise_batch, train=train, rng=gen_rng)
    fake = gen_cache.logits  # generator output layer is linear
    disc_cache = forward(disc.mlp, fake, train=train, rng=disc_rng)
    logits = disc_cache.logits
    n_fake = fake.shape[0]

    feats = disc_cache.penultimate
    m_fake = feats.mean(axis=0)
    diff = m_fake - m_real
    l_fm = float(diff @ diff)

    l_fool = float(-_log_one_minus_p_fake(logits, k).mean())
    p = np.exp(log_softmax(logits))
    q_real = np.exp(log_softmax(logits[:, :k]))
    dlogits = p.copy()
    dlogits[:, :k] -= q_real
    dlogits /= n_fake

    dpenult = np.broadcast_to(2.0 * diff / n_fake, feats.shape)
    d_grads = backward(disc.mlp, disc_cache, dlogits,
                       grad_wrt_penultimate=dpenult, need_input_grad=True)
    g_grads = backward(gen.mlp, gen_cache, d_grads.wrt_input)
    return GLossParts(l_fm, l_fool), g_grads


def predict(disc: DiscriminatorNet, features: np.ndarray) -> np.ndarray:
    """Probabilities over the K real classes (fake class marginalized out).

    Equals the K+1 softmax renormalized over the first K entries; computed
    as a softmax over the real logits, which is the identical distribution.
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    cache = forward(disc.mlp, x, train=False)
    probs = np.exp(log_softmax(cache.logits[:, : disc.k]))
    return probs[0] if np.asarray(features).ndim == 1 else probs


def predict_classes(disc: DiscriminatorNet, features: np.ndarray) -> np.ndarray:
    probs = np.atleast_2d(predict(disc, features))
    return probs.argmax(axis=1)


def train(
    source: FeatureSource,
    view: SemiSupervisedView,
    config: TrainConfig,
) -> tuple[GeneratorNet, DiscriminatorNet, list[EpochLog]]:
    """Alternating adversarial training, deterministic in (inputs, seed).

    Per batch: a discriminator Adam step on labeled/unlabeled/fake rows,
    then a generator Adam step on fresh noise against the updated, frozen
    discriminator.  Epoch losses are unweighted means over batches; epoch
    accuracies come from :func:`predict` on the labeled train rows and the
    validation split.
    """
    bundle = view.bundle
    k = len(bundle.vocab)
    if k < 1:
        raise ConfigError("training needs at least one class")
    d = feature_dim(source)

    train_items = bundle.split_items("train")
    if not train_items:
        raise ConfigError("training needs a non-empty train split")
    x_train = feature_matrix(source, train_items)
    y_train = np.array([u.label for u in train_items], dtype=np.int64)
    labeled_mask = np.array([u.id in view.labeled_ids for u in train_items])

    val_items = bundle.split_items("validation")
    x_val = feature_matrix(source, val_items)
    y_val = np.array([u.label for u in val_items], dtype=np.int64)

    root = Rng(config.seed)
    gen = make_generator(config.noise, d, root.split("init-generator"),
                         hidden=config.g_hidden, dropout=config.dropout)
    disc = make_discriminator(d, k, root.split("init-discriminator"),
                              hidden=config.d_hidden, dropout=config.dropout)
    noise_rng = root.split("noise")
    gen_drop = root.split("dropout-generator")
    disc_drop = root.split("dropout-discriminator")

    opt_d = AdamState(disc.mlp.parameters(), lr=config.lr)
    opt_g = AdamState(gen.mlp.parameters(), lr=config.lr if config.g_lr is None else config.g_lr)

    n = len(train_items)
    logs: list[EpochLog] = []
    for epoch in range(config.epochs):
        order = np.array(root.split(f"shuffle-epoch-{epoch}").permutation(n))
        sums = np.zeros(5)  # l_sup, l_unsup_real, l_unsup_fake, l_fm, l_fool
        n_batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            lab = idx[labeled_mask[idx]]
            unl = idx[~labeled_mask[idx]]
            batch_tag = f"epoch {epoch} batch {n_batches}"
            try:
                noise = sample_noise(config.batch_size, config.noise, noise_rng)
                fake_cache = forward(gen.mlp, noise, train=True, rng=gen_drop)
                parts_d, grads_d = d_loss(
                    disc, (x_train[lab], y_train[lab]), x_train[unl],
                    fake_cache.logits, rng=disc_drop, train=True,
                )
                adam_step(disc.mlp.parameters(), grads_d.flat(), opt_d)

                real_cache = forward(disc.mlp, x_train[idx], train=True, rng=disc_drop)
                m_real = real_cache.penultimate.mean(axis=0)
                noise2 = sample_noise(config.batch_size, config.noise, noise_rng)
                parts_g, grads_g = g_loss(disc, gen, m_real, noise2,
                                          gen_rng=gen_drop, disc_rng=disc_drop, train=True)
                adam_step(gen.mlp.parameters(), grads_g.flat(), opt_g)
            except NumericError as exc:
                raise NumericError(f"{exc} ({batch_tag})") from exc

            sums += (parts_d.l_sup, parts_d.l_unsup_real, parts_d.l_unsup_fake,
                     parts_g.l_fm, parts_g.l_fool)
            n_batches += 1

        l_sup, l_unsup_real, l_unsup_fake, l_fm, l_fool = sums / n_batches
        train_acc = _accuracy(disc, x_train[labeled_mask], y_train[labeled_mask])
        val_acc = _accuracy(disc, x_val, y_val)
        logs.append(EpochLog(
            epoch=epoch,
            l_sup=l_sup, l_unsup_real=l_unsup_real, l_unsup_fake=l_unsup_fake,
            l_d=l_sup + l_unsup_real + l_unsup_fake,
            l_fm=l_fm, l_fool=l_fool, l_g=l_fm + l_fool,
            train_accuracy=train_acc, validation_accuracy=val_acc,
        ))
    return gen, disc, logs


def _accuracy(disc: DiscriminatorNet, x: np.ndarray, y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    return float((predict_classes(disc, x) == y).mean())


def _net_dims(mlp: MLP) -> list[int]:
    return list(mlp.spec.layer_dims)


def save_checkpoint(gen: GeneratorNet, disc: DiscriminatorNet, config: TrainConfig,
                    path: str, extra: dict | None = None) -> None:
    """Write a GBNB checkpoint; see the README for the byte layout.

    Parameters are serialized float32 in a fixed order: generator layers
    (W row-major then b, in layer order), then discriminator layers.
    """
    noise = asdict(gen.noise)
    cfg = asdict(config)
    cfg.update(extra or {})
    header = {
        "dim": disc.feature_dim,
        "k": disc.k,
        "generator_dims": _net_dims(gen.mlp),
        "discriminator_dims": _net_dims(disc.mlp),
        "noise": noise,
        "dropout": config.dropout,
        "config": cfg,
        "seed": config.seed,
    }
    write_checkpoint(gen, disc, header, path)


def write_checkpoint(gen: GeneratorNet, disc: DiscriminatorNet, header: dict, path: str) -> None:
    """Write nets under an explicit header (used to round-trip checkpoints)."""
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", GBNB_MAGIC, GBNB_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for param in gen.mlp.parameters() + disc.mlp.parameters():
            check_finite(param, "checkpoint parameter")
            fh.write(np.asarray(param, dtype="<f4").tobytes(order="C"))


def load_checkpoint(path: str) -> tuple[GeneratorNet, DiscriminatorNet, dict]:
    """Read a GBNB checkpoint back into float32 nets plus its JSON header."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, hlen = struct.unpack_from("<4sII", blob, 0)
    if magic != GBNB_MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != GBNB_VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    if len(blob) < 12 + hlen:
        raise CheckpointError(f"{path}: truncated JSON header")
    try:
        header = json.loads(blob[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: malformed header: {exc}") from exc

    try:
        dim = int(header["dim"])
        k = int(header["k"])
        g_dims = [int(v) for v in header["generator_dims"]]
        d_dims = [int(v) for v in header["discriminator_dims"]]
        noise = NoiseSpec(**header["noise"])
        dropout = float(header.get("dropout", 0.0))
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise CheckpointError(f"{path}: invalid header field: {exc}") from exc
    if g_dims[0] != noise.dim or g_dims[-1] != dim:
        raise CheckpointError(f"{path}: generator dims {g_dims} do not map noise to features")
    if d_dims[0] != dim or d_dims[-1] != k + 1:
        raise CheckpointError(
            f"{path}: discriminator dims {d_dims} do not match dim {dim} and k {k}"
        )

    offset = 12 + hlen
    def read_layers(dims: list[int], what: str) -> list:
        nonlocal offset
        from .nn import DenseLayer  # local import keeps module load cheap
        layers = []
        for d_in, d_out in zip(dims[:-1], dims[1:]):
            need = 4 * (d_out * d_in + d_out)
            if offset + need > len(blob):
                raise CheckpointError(f"{path}: truncated {what} parameters at byte {offset}")
            w = np.frombuffer(blob, dtype="<f4", count=d_out * d_in, offset=offset)
            offset += 4 * d_out * d_in
            b = np.frombuffer(blob, dtype="<f4", count=d_out, offset=offset)
            offset += 4 * d_out
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise CheckpointError(f"{path}: non-finite {what} parameter")
            layers.append(DenseLayer(w.reshape(d_out, d_in).copy(), b.copy()))
        return layers

    g_layers = read_layers(g_dims, "generator")
    d_layers = read_layers(d_dims, "discriminator")
    if offset != len(blob):
        raise CheckpointError(f"{path}: {len(blob) - offset} trailing bytes after parameters")

    gen = GeneratorNet(MLP(MLPSpec(tuple(g_dims), dropout_rate=dropout), g_layers), noise)
    disc = DiscriminatorNet(MLP(MLPSpec(tuple(d_dims), dropout_rate=dropout), d_layers), k)
    return gen, disc, header
