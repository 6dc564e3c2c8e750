"""Minimal deterministic feed-forward network engine.

Fixed topology only: dense layers, leaky-ReLU hidden activations followed
by inverted dropout, linear output.  Parameters are stored float32 (the
same precision the checkpoint format holds); every computation upcasts to
float64, so gradients are reproducible and match finite differences
tightly.  Reverse-mode gradients are hand-written per layer.

Any non-finite intermediate raises :class:`NumericError` instead of
propagating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .rng import Rng

LEAKY_SLOPE = 0.2

Matrix = np.ndarray  # 2-D, row-major


def check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {what}")
    return arr


@dataclass(frozen=True)
class MLPSpec:
    layer_dims: tuple[int, ...]
    dropout_rate: float = 0.0
    leaky_slope: float = LEAKY_SLOPE

    def __post_init__(self) -> None:
        if len(self.layer_dims) < 2 or any(d < 1 for d in self.layer_dims):
            raise ValueError(f"need >= 2 positive layer dims, got {self.layer_dims}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")


class DenseLayer:
    """Affine map with weight ``W`` (out x in) and bias ``b`` (out)."""

    def __init__(self, w: np.ndarray, b: np.ndarray):
        self.w = w
        self.b = b


class MLP:
    def __init__(self, spec: MLPSpec, layers: list[DenseLayer]):
        self.spec = spec
        self.layers = layers

    @property
    def d_in(self) -> int:
        return self.spec.layer_dims[0]

    @property
    def d_out(self) -> int:
        return self.spec.layer_dims[-1]

    def parameters(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.w)
            out.append(layer.b)
        return out


def init_mlp(spec: MLPSpec, rng: Rng, dtype=np.float32) -> MLP:
    """Glorot-uniform weights, zero biases.

    Layer l consumes ``out*in`` uniforms from ``rng`` in row-major order,
    mapped to ``Uniform(-a, a)`` with ``a = sqrt(6 / (fan_in + fan_out))``.
    """
    layers = []
    for d_in, d_out in zip(spec.layer_dims[:-1], spec.layer_dims[1:]):
        a = np.sqrt(6.0 / (d_in + d_out))
        w = (rng.uniform(d_out * d_in) * 2.0 * a - a).reshape(d_out, d_in)
        layers.append(DenseLayer(w.astype(dtype), np.zeros(d_out, dtype=dtype)))
    return MLP(spec, layers)


@dataclass
class ForwardCache:
    inputs: list[np.ndarray] = field(default_factory=list)  # input to each layer
    pre_acts: list[np.ndarray] = field(default_factory=list)  # z of hidden layers
    masks: list[np.ndarray | None] = field(default_factory=list)  # dropout keep masks
    logits: np.ndarray | None = None

    @property
    def penultimate(self) -> np.ndarray:
        """Activation feeding the final linear layer."""
        return self.inputs[-1]


def forward(mlp: MLP, batch: Matrix, train: bool = False, rng: Rng | None = None) -> ForwardCache:
    """Run the network; train mode applies inverted dropout from ``rng``.

    Dropout masks for the hidden layers are drawn in layer order, one
    uniform per activation row-major; an activation is kept when its
    uniform is >= dropout_rate, then scaled by 1/keep_prob.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != mlp.d_in:
        raise NumericError(f"batch shape {x.shape} does not match input dim {mlp.d_in}")
    check_finite(x, "network input")

    rate = mlp.spec.dropout_rate
    use_dropout = train and rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")

    cache = ForwardCache()
    for li, layer in enumerate(mlp.layers):
        cache.inputs.append(x)
        z = x @ layer.w.astype(np.float64).T + layer.b.astype(np.float64)
        check_finite(z, f"layer {li} pre-activation")
        if li == len(mlp.layers) - 1:
            cache.logits = z
            break
        a = np.where(z > 0.0, z, mlp.spec.leaky_slope * z)
        cache.pre_acts.append(z)
        if use_dropout:
            u = rng.uniform(a.size).reshape(a.shape)
            mask = (u >= rate).astype(np.float64)
            a = a * mask / (1.0 - rate)
            cache.masks.append(mask)
        else:
            cache.masks.append(None)
        x = a
    return cache


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    wrt_input: np.ndarray | None = None

    def flat(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


def backward(
    mlp: MLP,
    cache: ForwardCache,
    grad_wrt_output: Matrix,
    grad_wrt_penultimate: Matrix | None = None,
    need_input_grad: bool = False,
) -> Gradients:
    """Reverse-mode pass from an upstream gradient on the logits.

    ``grad_wrt_penultimate`` lets a loss term attach directly to the
    activation feeding the final layer (feature matching does).  The
    leaky-ReLU subgradient at exactly zero uses the leaky slope.
    """
    delta = np.asarray(grad_wrt_output, dtype=np.float64)
    if cache.logits is None or delta.shape != cache.logits.shape:
        raise NumericError("upstream gradient shape does not match forward logits")

    n_layers = len(mlp.layers)
    d_ws: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    d_bs: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]

    # Final linear layer.
    last = n_layers - 1
    d_ws[last] = delta.T @ cache.inputs[last]
    d_bs[last] = delta.sum(axis=0)
    da = delta @ mlp.layers[last].w.astype(np.float64)
    if grad_wrt_penultimate is not None:
        da = da + np.asarray(grad_wrt_penultimate, dtype=np.float64)

    rate = mlp.spec.dropout_rate
    for li in range(last - 1, -1, -1):
        mask = cache.masks[li]
        if mask is not None:
            da = da * mask / (1.0 - rate)
        z = cache.pre_acts[li]
        dz = da * np.where(z > 0.0, 1.0, mlp.spec.leaky_slope)
        d_ws[li] = dz.T @ cache.inputs[li]
        d_bs[li] = dz.sum(axis=0)
        da = dz @ mlp.layers[li].w.astype(np.float64)

    for li in range(n_layers):
        check_finite(d_ws[li], f"layer {li} weight gradient")
    return Gradients(d_ws, d_bs, wrt_input=da if need_input_grad else None)


def logsumexp(row: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shift-stable log-sum-exp along ``axis``."""
    x = np.asarray(row, dtype=np.float64)
    m = np.max(x, axis=axis, keepdims=True)
    out = m.squeeze(axis) + np.log(np.sum(np.exp(x - m), axis=axis))
    return out


def log_softmax(logits: Matrix) -> np.ndarray:
    x = np.asarray(logits, dtype=np.float64)
    return x - logsumexp(x, axis=1)[:, None]


def softmax(logits: Matrix) -> np.ndarray:
    return np.exp(log_softmax(logits))


def softmax_xent(logits: Matrix, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over rows and its gradient w.r.t. the logits."""
    targets = np.asarray(targets, dtype=np.int64)
    n, c = np.asarray(logits).shape
    if n == 0:
        raise NumericError("cross-entropy over an empty batch")
    if targets.shape != (n,) or targets.min(initial=0) < 0 or targets.max(initial=-1) >= c:
        raise NumericError(f"targets must be {n} class indices below {c}")
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(n), targets].mean())
    grad = np.exp(logp)
    grad[np.arange(n), targets] -= 1.0
    grad /= n
    check_finite(grad, "cross-entropy gradient")
    return loss, grad


class AdamState:
    """Bias-corrected Adam over a fixed parameter list; moments in float64."""

    def __init__(self, params: list[np.ndarray], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros(p.shape, dtype=np.float64) for p in params]
        self.v = [np.zeros(p.shape, dtype=np.float64) for p in params]


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> None:
    """One in-place update; parameters keep their storage dtype."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise NumericError("parameter/gradient/state length mismatch")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise NumericError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        with np.errstate(invalid="ignore", over="ignore"):
            update = state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
            check_finite(update, "adam update")  # rejects any inf/nan the errstate hid
            p -= update.astype(p.dtype)
        check_finite(p, "updated parameter")  # float32 storage can overflow
