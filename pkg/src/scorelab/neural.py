"""Dense networks with manual backpropagation, optimizers, and gradient checks.

Deliberately small: affine layers with ReLU/Sigmoid/Identity activations,
forward caches sufficient for exact reverse-mode gradients, SGD and AdamW
updates, a hyper-network head that generates the parameters of a target
network from a semantic embedding, and a central finite-difference checker.

Training runs are single threads of control; identical seeds and inputs
produce bit-identical parameters.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DomainError, ShapeError, StaleCacheError, TrainingError

__all__ = [
    "Activation",
    "DenseNet",
    "ForwardCache",
    "HyperHead",
    "OptimKind",
    "Optimizer",
    "grad_check",
    "rel_error",
    "GRAD_CHECK_LOSSES",
]


class Activation(str, Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"


def _act(name: Activation, z: np.ndarray) -> np.ndarray:
    if name is Activation.RELU:
        return np.maximum(z, 0.0)
    if name is Activation.SIGMOID:
        return 1.0 / (1.0 + np.exp(-z))
    return z


def _act_grad(name: Activation, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name is Activation.RELU:
        return (z > 0.0).astype(np.float64)  # subgradient 0 at z == 0
    if name is Activation.SIGMOID:
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass(eq=False)
class ForwardCache:
    net: "DenseNet"
    x: np.ndarray           # (B, in)
    pre: list               # pre-activations per layer
    act: list               # activations per layer
    squeeze: bool           # input was 1-D


class DenseNet:
    """Fully-connected network. Weights are (out, in); biases are (out,).

    Hidden layers default to ReLU and the final layer to Identity, so
    regression outputs are unconstrained.
    """

    def __init__(self, dims, activations=None, seed: int = 0):
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ShapeError(f"bad layer dims {dims}")
        self.dims = list(int(d) for d in dims)
        n_layers = len(self.dims) - 1
        if activations is None:
            activations = [Activation.RELU] * (n_layers - 1) + [Activation.IDENTITY]
        activations = [Activation(a) for a in activations]
        if len(activations) != n_layers:
            raise ShapeError("one activation per layer required")
        self.activations = activations
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for i in range(n_layers):
            fan_in = self.dims[i]
            scale = np.sqrt(2.0 / fan_in) if activations[i] is Activation.RELU else np.sqrt(1.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(self.dims[i + 1], fan_in)))
            self.biases.append(np.zeros(self.dims[i + 1]))

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"W{i}"] = w
            out[f"b{i}"] = b
        return out

    def forward(self, x) -> tuple[np.ndarray, ForwardCache]:
        """Affine + activation composition; cache is sufficient for backward."""
        a = np.asarray(x, dtype=np.float64)
        squeeze = a.ndim == 1
        if squeeze:
            a = a[None, :]
        if a.ndim != 2 or a.shape[1] != self.dims[0]:
            raise ShapeError(f"input shape {np.shape(x)} incompatible with first dim {self.dims[0]}")
        cache = ForwardCache(net=self, x=a, pre=[], act=[], squeeze=squeeze)
        for w, b, act in zip(self.weights, self.biases, self.activations):
            z = a @ w.T + b
            a = _act(act, z)
            cache.pre.append(z)
            cache.act.append(a)
        return (a[0] if squeeze else a), cache

    def backward(self, cache: ForwardCache, upstream) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """Exact reverse-mode gradients for all weights and biases.

        `upstream` is dLoss/dOutput with the same shape the forward returned.
        Returns (param gradients summed over the batch, dLoss/dInput).
        """
        if cache.net is not self:
            raise StaleCacheError("cache was produced by a different network")
        g = np.asarray(upstream, dtype=np.float64)
        if cache.squeeze:
            g = g[None, :]
        if g.shape != cache.act[-1].shape:
            raise ShapeError(f"upstream shape {g.shape} != output shape {cache.act[-1].shape}")
        grads: dict[str, np.ndarray] = {}
        for i in reversed(range(len(self.weights))):
            z = cache.pre[i]
            a_out = cache.act[i]
            a_in = cache.x if i == 0 else cache.act[i - 1]
            dz = g * _act_grad(self.activations[i], z, a_out)
            grads[f"W{i}"] = dz.T @ a_in
            grads[f"b{i}"] = dz.sum(axis=0)
            g = dz @ self.weights[i]
        dx = g[0] if cache.squeeze else g
        return grads, dx


class OptimKind(str, Enum):
    SGD = "sgd"
    ADAMW = "adamw"


class Optimizer:
    """SGD or AdamW with decoupled weight decay; updates arrays in place."""

    def __init__(
        self,
        kind: OptimKind | str = OptimKind.ADAMW,
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        if lr <= 0.0:
            raise DomainError(f"learning rate must be > 0, got {lr}")
        self.kind = OptimKind(kind)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Apply one update; raises TrainingError on NaN gradients."""
        self.step_count += 1
        for name, p in params.items():
            g = grads[name]
            if g.shape != p.shape:
                raise ShapeError(f"grad shape {g.shape} != param shape {p.shape} for {name}")
            if np.any(np.isnan(g)):
                raise TrainingError(f"NaN gradient in {name}", step=self.step_count)
            if self.kind is OptimKind.SGD:
                p -= self.lr * g
                continue
            m = self._m.setdefault(name, np.zeros_like(p))
            v = self._v.setdefault(name, np.zeros_like(p))
            b1, b2 = self.betas
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            mhat = m / (1.0 - b1**self.step_count)
            vhat = v / (1.0 - b2**self.step_count)
            p -= self.lr * (mhat / (np.sqrt(vhat) + self.eps) + self.weight_decay * p)
        return params


class HyperHead:
    """Maps a semantic embedding to the parameters of a small scoring network.

    The mapper is a DenseNet whose output length equals the parameter count
    of the target network (hidden dims `target_hidden`, scalar output); the
    target network is then evaluated on the representation z.
    """

    def __init__(
        self,
        semantic_dim: int,
        z_dim: int,
        target_hidden: tuple[int, ...] = (16, 8),
        mapper_hidden: tuple[int, ...] = (64,),
        seed: int = 0,
    ):
        self.target_dims = [z_dim] + list(target_hidden) + [1]
        self.target_acts = [Activation.RELU] * len(target_hidden) + [Activation.IDENTITY]
        self.param_count = sum(
            self.target_dims[i + 1] * self.target_dims[i] + self.target_dims[i + 1]
            for i in range(len(self.target_dims) - 1)
        )
        self.mapper = DenseNet(
            [semantic_dim, *mapper_hidden, self.param_count], seed=seed
        )
        # generated parameters start near zero; shrink the mapper output layer
        self.mapper.weights[-1] *= 0.1

    def _unflatten(self, theta: np.ndarray):
        ws, bs, off = [], [], 0
        for i in range(len(self.target_dims) - 1):
            n_out, n_in = self.target_dims[i + 1], self.target_dims[i]
            ws.append(theta[off : off + n_out * n_in].reshape(n_out, n_in))
            off += n_out * n_in
            bs.append(theta[off : off + n_out])
            off += n_out
        return ws, bs

    def forward(self, semantic, z) -> tuple[float, dict]:
        """Generate target parameters from `semantic`, evaluate them on `z`."""
        theta, mcache = self.mapper.forward(np.asarray(semantic, dtype=np.float64))
        ws, bs = self._unflatten(theta)
        a = np.asarray(z, dtype=np.float64)
        if a.shape != (self.target_dims[0],):
            raise ShapeError(f"z shape {a.shape} != ({self.target_dims[0]},)")
        pre, act = [], []
        for w, b, act_kind in zip(ws, bs, self.target_acts):
            zlin = w @ a + b
            a = _act(act_kind, zlin)
            pre.append(zlin)
            act.append(a)
        cache = {"mcache": mcache, "theta": theta, "z": np.asarray(z, dtype=np.float64),
                 "pre": pre, "act": act, "owner": self}
        return float(a[0]), cache

    def backward(self, cache: dict, dy: float) -> tuple[dict[str, np.ndarray], np.ndarray, np.ndarray]:
        """Gradients wrt mapper parameters, the semantic input, and z."""
        if cache.get("owner") is not self:
            raise StaleCacheError("cache was produced by a different head")
        ws, bs = self._unflatten(cache["theta"])
        pre, act = cache["pre"], cache["act"]
        g = np.array([float(dy)])
        dtheta = np.zeros_like(cache["theta"])
        off_end = self.param_count
        for i in reversed(range(len(ws))):
            a_in = cache["z"] if i == 0 else act[i - 1]
            dz = g * _act_grad(self.target_acts[i], pre[i], act[i])
            dw = np.outer(dz, a_in)
            db = dz
            n_out, n_in = ws[i].shape
            off_end -= n_out
            dtheta[off_end : off_end + n_out] = db
            off_end -= n_out * n_in
            dtheta[off_end : off_end + n_out * n_in] = dw.ravel()
            g = ws[i].T @ dz
        mapper_grads, d_semantic = self.mapper.backward(cache["mcache"], dtheta)
        return mapper_grads, d_semantic, g

    def params(self) -> dict[str, np.ndarray]:
        return self.mapper.params()


def _mse_loss(out: np.ndarray, target) -> tuple[float, np.ndarray]:
    d = out - np.asarray(target, dtype=np.float64)
    return float(np.sum(d * d)), 2.0 * d


def _ce_loss(out: np.ndarray, target) -> tuple[float, np.ndarray]:
    z = out - out.max()
    e = np.exp(z)
    q = e / e.sum()
    t = int(target)
    onehot = np.zeros_like(q)
    onehot[t - 1] = 1.0
    return float(-np.log(q[t - 1])), q - onehot


GRAD_CHECK_LOSSES = {"mse": _mse_loss, "ce": _ce_loss}


def rel_error(analytic: float, numeric: float) -> float:
    """Scale-aware difference: |a - n| / max(1, |a|, |n|)."""
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def grad_check(net: DenseNet, loss_id: str, x, target, h: float = 1e-5) -> float:
    """Worst central-difference discrepancy over all parameters of `net`."""
    if loss_id not in GRAD_CHECK_LOSSES:
        raise DomainError(f"unknown loss {loss_id!r}; registered: {sorted(GRAD_CHECK_LOSSES)}")
    loss = GRAD_CHECK_LOSSES[loss_id]

    out, cache = net.forward(x)
    _, dout = loss(out, target)
    grads, _ = net.backward(cache, dout)

    worst = 0.0
    for name, p in net.params().items():
        flat = p.reshape(-1)
        gflat = grads[name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up, _ = loss(net.forward(x)[0], target)
            flat[k] = orig - h
            down, _ = loss(net.forward(x)[0], target)
            flat[k] = orig
            numeric = (up - down) / (2.0 * h)
            worst = max(worst, rel_error(gflat[k], numeric))
    return worst
