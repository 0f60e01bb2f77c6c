"""Minimal dense-network numerics: affine layers, backprop, Adam, init.

Everything here is plain numpy. Layers are small, so hand-derived gradients
are used instead of an autodiff tape; `finite_diff_check` is the safety net.
All routines run in float32 (training default) or float64 (verification),
selected by the dtype of the parameters.
"""

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "none")

DTYPES = {"single": np.float32, "double": np.float64}


def precision_dtype(precision):
    """Map a precision name ('single' or 'double') to a numpy dtype."""
    try:
        return DTYPES[precision]
    except KeyError:
        raise ValueError(f"unknown precision {precision!r}, expected one of {sorted(DTYPES)}") from None


def sigmoid(x):
    """Numerically stable logistic function."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x):
    """log(1 + e^x) without overflow."""
    return np.logaddexp(0.0, x)


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "none"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("layer weight/bias shapes are inconsistent")

    @property
    def in_size(self):
        return self.weights.shape[1]

    @property
    def out_size(self):
        return self.weights.shape[0]


@dataclass
class Mlp:
    layers: list[DenseLayer] = field(default_factory=list)

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_size != nxt.in_size:
                raise ValueError(
                    f"layer sizes do not chain: {prev.out_size} -> {nxt.in_size}"
                )

    @property
    def in_size(self):
        return self.layers[0].in_size

    @property
    def out_size(self):
        return self.layers[-1].out_size

    @property
    def dtype(self):
        return self.layers[0].weights.dtype

    def astype(self, dtype):
        return Mlp(
            [
                DenseLayer(l.weights.astype(dtype), l.bias.astype(dtype), l.activation)
                for l in self.layers
            ]
        )


def init_mlp(sizes, activations, seed, dtype=np.float32):
    """Build an Mlp with He-scaled weights for relu layers, Xavier otherwise.

    Biases start at zero. Deterministic for a given seed.
    """
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output size")
    if len(activations) != len(sizes) - 1:
        raise ValueError("one activation per layer required")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(sizes, sizes[1:], activations):
        if act == "relu":
            std = np.sqrt(2.0 / fan_in)
        else:
            std = np.sqrt(2.0 / (fan_in + fan_out))
        w = rng.normal(0.0, std, size=(fan_out, fan_in)).astype(dtype)
        b = np.zeros(fan_out, dtype=dtype)
        layers.append(DenseLayer(w, b, act))
    return Mlp(layers)


def _apply_activation(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "sigmoid":
        return sigmoid(z)
    return z


def forward(mlp, x):
    """Run the forward pass.

    Returns (y, cache); the cache holds each layer's input and pre-activation
    and must be handed back to `backward` unchanged.
    """
    x = np.asarray(x, dtype=mlp.dtype)
    if x.ndim != 2 or x.shape[1] != mlp.in_size:
        raise ValueError(f"input shape {x.shape} does not match mlp input size {mlp.in_size}")
    cache = []
    for layer in mlp.layers:
        z = x @ layer.weights.T + layer.bias
        cache.append((x, z))
        x = _apply_activation(z, layer.activation)
    return x, cache


def backward(mlp, cache, dy):
    """Backpropagate dLoss/dY through the mlp.

    Returns (grads, dx) where grads is a list of (dW, db) per layer in
    forward order and dx is the gradient w.r.t. the original input.
    """
    if len(cache) != len(mlp.layers):
        raise ValueError("cache does not match mlp (stale or wrong model)")
    dy = np.asarray(dy, dtype=mlp.dtype)
    grads = [None] * len(mlp.layers)
    for idx in range(len(mlp.layers) - 1, -1, -1):
        layer = mlp.layers[idx]
        x, z = cache[idx]
        if dy.shape != (x.shape[0], layer.out_size):
            raise ValueError(f"gradient shape {dy.shape} does not match layer {idx} output")
        if layer.activation == "relu":
            dz = dy * (z > 0)
        elif layer.activation == "sigmoid":
            s = sigmoid(z)
            dz = dy * s * (1.0 - s)
        else:
            dz = dy
        grads[idx] = (dz.T @ x, dz.sum(axis=0))
        dy = dz @ layer.weights
    return grads, dy


@dataclass
class AdamState:
    m: list  # first moments, one array per parameter
    v: list  # second moments
    step: int
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params, learning_rate):
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        step=0,
        learning_rate=learning_rate,
    )


def adam_step(params, grads, state):
    """One Adam update with bias correction.

    Mutates `state` (moments and step counter) and returns the updated
    parameter arrays; the inputs are left untouched.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state length mismatch")
    state.step += 1
    t = state.step
    out = []
    for k, (p, g) in enumerate(zip(params, grads)):
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for parameter {k}")
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g
        m_hat = state.m[k] / (1.0 - state.beta1**t)
        v_hat = state.v[k] / (1.0 - state.beta2**t)
        out.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps))
    return out, state


def finite_diff_check(loss_fn, params, h=1e-5, max_coords=None, seed=0):
    """Compare analytic gradients against central finite differences.

    `loss_fn(params) -> (loss, grads)` must be pure. Checks every coordinate,
    or a random sample of `max_coords` of them, and returns the maximum
    relative error |analytic - fd| / max(|analytic|, |fd|, 1e-8).

    Use float64 parameters; float32 rounding drowns the h^2 truncation term.
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]
    _, grads = loss_fn(params)
    coords = [(k, idx) for k, p in enumerate(params) for idx in np.ndindex(p.shape)]
    if max_coords is not None and max_coords < len(coords):
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in picks]
    worst = 0.0
    for k, idx in coords:
        orig = params[k][idx]
        params[k][idx] = orig + h
        up, _ = loss_fn(params)
        params[k][idx] = orig - h
        down, _ = loss_fn(params)
        params[k][idx] = orig
        fd = (up - down) / (2.0 * h)
        analytic = float(grads[k][idx])
        err = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-8)
        worst = max(worst, err)
    return worst
