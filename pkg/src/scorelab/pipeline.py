"""Toy scoring model and its training/evaluation loops.

The model is an encoder producing a hidden embedding, a level-token
classifier, a learned embedding per level token, and one of four scoring
heads: token-conditioned MLP regression, probability-weighted level
restoration (hard or soft label trained), or a plain linear readout of the
last embedding. Training combines token cross-entropy with score regression
plus optional auxiliary losses; selection of the token embedding is
teacher-forced during training and argmax at evaluation.

One training run is one thread of control; identical configs and seeds give
bit-identical parameters and reports.
"""

import json
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .conversion import GaussianRating, deqa_enhance, deqa_raw_soft_label, qalign_quantize, qalign_quantize_array
from .core import DegenerateInputError, DomainError, EvalReport, TrainingError, ValidationError
from .data import Dataset
from .losses import (
    fidelity_loss,
    fidelity_prob,
    fidelity_prob_grad,
    kl_loss,
    norm_in_norm,
    softmax,
    softmax_vjp,
)
from .metrics import plcc as _plcc, srcc as _srcc
from .neural import Activation, DenseNet, HyperHead, Optimizer

__all__ = [
    "HeadKind",
    "ModelConfig",
    "TrainConfig",
    "ScorerModel",
    "ForwardResult",
    "build_model",
    "model_forward",
    "token_target",
    "batch_loss_and_grads",
    "train_epoch",
    "train",
    "evaluate",
    "compare_heads",
    "save_checkpoint",
    "load_checkpoint",
]

LEVELS = np.arange(1.0, 6.0)

_VAR_FLOOR = 1e-8      # keeps the token-distribution std differentiable
_STD_FLOOR = 1e-2      # floor for the regressed std in the 2-output head


class HeadKind(str, Enum):
    QSCORER = "qscorer"
    QALIGN = "qalign"
    DEQA = "deqa"
    LINEAR = "linear"


@dataclass(frozen=True)
class ModelConfig:
    feature_dim: int
    head: HeadKind = HeadKind.QSCORER
    embed_dim: int = 64
    encoder_hidden: tuple = (64,)
    reg_hidden: tuple = (32, 16)
    num_tokens: int = 5
    fusion: str = "add"            # "add" or "concat"
    head_variant: str = "mlp"      # "mlp" or "hyper"
    hyper_hidden: int = 64
    hyper_target: tuple = (16, 8)
    fidelity_head: bool = False    # build the 2-output (mu, sigma) head
    seed: int = 0

    def __post_init__(self):
        if self.fusion not in ("add", "concat"):
            raise DomainError(f"fusion must be add or concat, got {self.fusion!r}")
        if self.head_variant not in ("mlp", "hyper"):
            raise DomainError(f"head_variant must be mlp or hyper, got {self.head_variant!r}")
        if self.num_tokens not in (1, 5):
            raise DomainError("num_tokens must be 1 or 5")
        if HeadKind(self.head) in (HeadKind.QALIGN, HeadKind.DEQA) and self.num_tokens != 5:
            raise DomainError("restoration heads need the 5-token vocabulary")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    optimizer: str = "adamw"
    lr: float = 3e-3
    betas: tuple = (0.9, 0.999)
    weight_decay: float = 0.0
    lambda_score: float = 1.0
    kl_weight: float = 0.0
    fidelity_weight: float = 0.0
    fidelity_variant: str = "token-dist"   # "token-dist" or "mlp-head"
    nin_weight: float = 0.0
    rank_weight: float = 0.0
    rank_margin: float = 0.1
    teacher_forcing: bool = True
    seed: int = 0
    sigma_fallback: float | None = None

    def __post_init__(self):
        if self.fidelity_variant not in ("token-dist", "mlp-head"):
            raise DomainError(f"unknown fidelity variant {self.fidelity_variant!r}")


@dataclass(frozen=True, eq=False)
class ForwardResult:
    token_logits: np.ndarray
    token: int
    z: np.ndarray
    y_hat: float


class ScorerModel:
    """Encoder + token classifier + token embeddings + scoring head."""

    def __init__(self, config: ModelConfig):
        self.config = config
        root = np.random.SeedSequence(config.seed)
        seeds = root.spawn(6)
        e = config.embed_dim
        self.encoder = DenseNet(
            [config.feature_dim, *config.encoder_hidden, e], seed=seeds[0]
        )
        self.classifier = DenseNet([e, config.num_tokens], activations=[Activation.IDENTITY], seed=seeds[1])
        emb_rng = np.random.default_rng(seeds[2])
        self.token_emb = emb_rng.normal(0.0, 1.0 / np.sqrt(e), size=(config.num_tokens, e))
        self.z_dim = e if config.fusion == "add" else 2 * e
        if config.head_variant == "hyper":
            self.reg_head = HyperHead(
                semantic_dim=self.z_dim,
                z_dim=self.z_dim,
                target_hidden=tuple(config.hyper_target),
                mapper_hidden=(config.hyper_hidden,),
                seed=seeds[3],
            )
        else:
            self.reg_head = DenseNet([self.z_dim, *config.reg_hidden, 1], seed=seeds[3])
        self.lin_head = DenseNet([e, 1], activations=[Activation.IDENTITY], seed=seeds[4])
        self.fid_head = (
            DenseNet([self.z_dim, 16, 2], seed=seeds[5]) if config.fidelity_head else None
        )

    def fuse(self, h: np.ndarray, emb: np.ndarray) -> np.ndarray:
        if self.config.fusion == "add":
            return h + emb
        return np.concatenate([h, emb], axis=-1)

    def trainable_params(self) -> dict[str, np.ndarray]:
        """Parameters with gradient flow for the configured head."""
        head = HeadKind(self.config.head)
        out = {f"enc.{k}": v for k, v in self.encoder.params().items()}
        if head in (HeadKind.QSCORER, HeadKind.QALIGN, HeadKind.DEQA) and self.config.num_tokens > 1:
            out.update({f"cls.{k}": v for k, v in self.classifier.params().items()})
        if head is HeadKind.QSCORER:
            out["emb"] = self.token_emb
            out.update({f"reg.{k}": v for k, v in self.reg_head.params().items()})
            if self.fid_head is not None:
                out.update({f"fid.{k}": v for k, v in self.fid_head.params().items()})
        if head is HeadKind.LINEAR:
            out.update({f"lin.{k}": v for k, v in self.lin_head.params().items()})
        return out

    def all_params(self) -> dict[str, np.ndarray]:
        out = {f"enc.{k}": v for k, v in self.encoder.params().items()}
        out.update({f"cls.{k}": v for k, v in self.classifier.params().items()})
        out["emb"] = self.token_emb
        out.update({f"reg.{k}": v for k, v in self.reg_head.params().items()})
        out.update({f"lin.{k}": v for k, v in self.lin_head.params().items()})
        if self.fid_head is not None:
            out.update({f"fid.{k}": v for k, v in self.fid_head.params().items()})
        return out


def build_model(feature_dim: int, head: HeadKind | str = HeadKind.QSCORER, seed: int = 0, **kwargs) -> ScorerModel:
    return ScorerModel(ModelConfig(feature_dim=feature_dim, head=HeadKind(head), seed=seed, **kwargs))


def token_target(mos: float, num_tokens: int = 5) -> int:
    """Level-token index supervising the classifier (interval of the MOS)."""
    if num_tokens == 1:
        return 1
    return qalign_quantize(mos)


def _token_targets(mos: np.ndarray, num_tokens: int) -> np.ndarray:
    if num_tokens == 1:
        return np.ones(mos.shape[0], dtype=np.int64)
    return qalign_quantize_array(mos)


def _head_scores(model: ScorerModel, fwd: dict) -> np.ndarray:
    head = HeadKind(model.config.head)
    if head is HeadKind.QSCORER:
        return fwd["Y"][:, 0]
    if head is HeadKind.LINEAR:
        return fwd["Ylin"][:, 0]
    # probability-weighted restoration; levels and unit-interval midpoints coincide
    return fwd["q"] @ LEVELS


def _forward_batch(model: ScorerModel, X: np.ndarray, forced_tokens: np.ndarray | None) -> dict:
    head = HeadKind(model.config.head)
    H, enc_cache = model.encoder.forward(X)
    logits, cls_cache = model.classifier.forward(H)
    if forced_tokens is None:
        tokens = np.argmax(logits, axis=1) + 1
    else:
        tokens = np.asarray(forced_tokens, dtype=np.int64)
    Z = model.fuse(H, model.token_emb[tokens - 1])
    fwd = {
        "H": H, "enc_cache": enc_cache,
        "logits": logits, "cls_cache": cls_cache,
        "tokens": tokens, "Z": Z,
        "q": softmax(logits) if model.config.num_tokens > 1 else np.ones((X.shape[0], 1)),
    }
    if head is HeadKind.QSCORER:
        if model.config.head_variant == "hyper":
            ys, caches = [], []
            for b in range(X.shape[0]):
                y_b, c_b = model.reg_head.forward(Z[b], Z[b])
                ys.append(y_b)
                caches.append(c_b)
            fwd["Y"] = np.asarray(ys)[:, None]
            fwd["reg_cache"] = caches
        else:
            fwd["Y"], fwd["reg_cache"] = model.reg_head.forward(Z)
        if model.fid_head is not None:
            fwd["Fid"], fwd["fid_cache"] = model.fid_head.forward(Z)
    if head is HeadKind.LINEAR:
        fwd["Ylin"], fwd["lin_cache"] = model.lin_head.forward(H)
    return fwd


def model_forward(model: ScorerModel, features, forced_token: int | None = None) -> ForwardResult:
    """Single-sample forward pass.

    The token embedding is selected by the forced (ground-truth) index when
    given, otherwise by argmax over the classifier logits.
    """
    X = np.asarray(features, dtype=np.float64)[None, :]
    forced = None if forced_token is None else np.array([forced_token])
    fwd = _forward_batch(model, X, forced)
    y = float(_head_scores(model, fwd)[0])
    return ForwardResult(
        token_logits=fwd["logits"][0],
        token=int(fwd["tokens"][0]),
        z=fwd["Z"][0],
        y_hat=y,
    )


def _resolve_sigmas(std: np.ndarray, fallback: float | None) -> np.ndarray:
    sig = np.asarray(std, dtype=np.float64).copy()
    missing = np.isnan(sig)
    if np.any(missing):
        if fallback is None:
            raise DomainError(
                "samples lack a rating std and no sigma_fallback is configured"
            )
        sig[missing] = fallback
    if np.any(sig <= 0.0):
        raise DomainError("rating std must be > 0 for soft-label losses")
    return sig


def _enhanced_labels(mos: np.ndarray, sig: np.ndarray) -> np.ndarray:
    rows = []
    for m, s in zip(mos, sig):
        raw = deqa_raw_soft_label(GaussianRating(mu=float(m), sigma=float(s)))
        rows.append(deqa_enhance(raw, float(m)).probs)
    return np.stack(rows)


def _ordered_pairs(mos: np.ndarray) -> list[tuple[int, int]]:
    """(higher, lower) index pairs with a strict MOS gap, within a batch."""
    n = mos.shape[0]
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if mos[i] > mos[j]:
                pairs.append((i, j))
            elif mos[j] > mos[i]:
                pairs.append((j, i))
    return pairs


def batch_loss_and_grads(
    model: ScorerModel, X: np.ndarray, mos: np.ndarray, std: np.ndarray, cfg: TrainConfig
) -> tuple[dict, dict]:
    """Loss components and exact gradients for one mini-batch.

    Returns (components, grads) where components holds the unweighted means
    of each active loss plus the weighted "total" that the gradients match.
    """
    mcfg = model.config
    head = HeadKind(mcfg.head)
    if head is HeadKind.LINEAR and (cfg.kl_weight > 0.0 or cfg.fidelity_weight > 0.0):
        raise DomainError("the linear head has no trained token distribution for KL/fidelity losses")
    if (
        cfg.fidelity_weight > 0.0
        and cfg.fidelity_variant == "mlp-head"
        and head is not HeadKind.QSCORER
    ):
        raise DomainError("the mlp-head fidelity variant needs the regression head's fused embedding")
    B = X.shape[0]
    targets = _token_targets(mos, mcfg.num_tokens)
    fwd = _forward_batch(model, X, targets if cfg.teacher_forcing else None)
    logits, q, tokens, Z = fwd["logits"], fwd["q"], fwd["tokens"], fwd["Z"]
    y_pred = _head_scores(model, fwd)

    components: dict[str, float] = {}
    total = 0.0
    dlogits = np.zeros_like(logits)
    dq = np.zeros_like(q)
    dy = np.zeros(B)
    dY = np.zeros((B, 1)) if "Y" in fwd else None
    dYlin = np.zeros((B, 1)) if "Ylin" in fwd else None
    dFid = np.zeros_like(fwd["Fid"]) if "Fid" in fwd else None

    use_ce = head in (HeadKind.QSCORER, HeadKind.QALIGN) and mcfg.num_tokens > 1
    if use_ce:
        idx = targets - 1
        picked = np.clip(q[np.arange(B), idx], 1e-300, None)
        components["ce"] = float(np.mean(-np.log(picked)))
        onehot = np.zeros_like(q)
        onehot[np.arange(B), idx] = 1.0
        dlogits += (q - onehot) / B
        total += components["ce"]

    if head in (HeadKind.QSCORER, HeadKind.LINEAR):
        resid = y_pred - mos
        components["score"] = float(np.mean(resid * resid))
        dy += cfg.lambda_score * 2.0 * resid / B
        total += cfg.lambda_score * components["score"]

    kl_w = 1.0 if head is HeadKind.DEQA else cfg.kl_weight
    if kl_w > 0.0 and mcfg.num_tokens > 1:
        sig = _resolve_sigmas(std, cfg.sigma_fallback)
        P = _enhanced_labels(mos, sig)
        vals = 0.0
        for b in range(B):
            lv = kl_loss(P[b], q[b])
            vals += lv.value
            dq[b] += kl_w * lv.grad / B
        components["kl"] = vals / B
        total += kl_w * components["kl"]

    if cfg.nin_weight > 0.0:
        lv = norm_in_norm(mos, y_pred)
        components["nin"] = lv.value
        dy += cfg.nin_weight * lv.grad
        total += cfg.nin_weight * lv.value

    if cfg.rank_weight > 0.0:
        pairs = _ordered_pairs(mos)
        if pairs:
            acc = 0.0
            for hi, lo in pairs:
                raw = y_pred[lo] - y_pred[hi] + cfg.rank_margin
                if raw > 0.0:
                    acc += raw
                    dy[hi] -= cfg.rank_weight / len(pairs)
                    dy[lo] += cfg.rank_weight / len(pairs)
            components["rank"] = acc / len(pairs)
            total += cfg.rank_weight * components["rank"]

    if cfg.fidelity_weight > 0.0:
        sig = _resolve_sigmas(std, cfg.sigma_fallback)
        if cfg.fidelity_variant == "mlp-head":
            if dFid is None:
                raise DomainError("fidelity variant mlp-head needs a model built with fidelity_head=True")
            mu_hat = fwd["Fid"][:, 0]
            raw_s = fwd["Fid"][:, 1]
            soft = np.logaddexp(0.0, raw_s)          # softplus keeps sigma positive
            s_hat = soft + _STD_FLOOR
            ds_draw = 1.0 / (1.0 + np.exp(-raw_s))   # d softplus / d raw
        else:
            c2 = LEVELS**2
            mu_hat = q @ LEVELS
            var = np.maximum(q @ c2 - mu_hat**2, _VAR_FLOOR)
            s_hat = np.sqrt(var)
        pairs = [(i, j) for i in range(B) for j in range(i + 1, B)]
        if pairs:
            acc = 0.0
            w = cfg.fidelity_weight / len(pairs)
            dmu = np.zeros(B)
            ds = np.zeros(B)
            for i, j in pairs:
                p_gt = fidelity_prob(float(mos[i]), float(sig[i]), float(mos[j]), float(sig[j]))
                p_hat, g4 = fidelity_prob_grad(mu_hat[i], s_hat[i], mu_hat[j], s_hat[j])
                lv = fidelity_loss(p_gt, min(max(p_hat, 0.0), 1.0))
                acc += lv.value
                dp = lv.grad[0]
                dmu[i] += w * dp * g4[0]
                ds[i] += w * dp * g4[1]
                dmu[j] += w * dp * g4[2]
                ds[j] += w * dp * g4[3]
            components["fidelity"] = acc / len(pairs)
            total += cfg.fidelity_weight * components["fidelity"]
            if cfg.fidelity_variant == "mlp-head":
                dFid[:, 0] += dmu
                dFid[:, 1] += ds * ds_draw
            else:
                # back through mu = q.c and s = sqrt(q.c^2 - mu^2)
                dvar = ds / (2.0 * s_hat)
                dq += dmu[:, None] * LEVELS[None, :]
                dq += dvar[:, None] * (LEVELS**2)[None, :]
                dq += (dvar * (-2.0 * mu_hat))[:, None] * LEVELS[None, :]

    # route the score-prediction gradient into the producing head
    if head is HeadKind.QSCORER:
        dY[:, 0] += dy
    elif head is HeadKind.LINEAR:
        dYlin[:, 0] += dy
    else:
        dq += dy[:, None] * LEVELS[None, :]

    if mcfg.num_tokens > 1 and np.any(dq):
        dlogits += softmax_vjp(q, dq)

    grads: dict[str, np.ndarray] = {}
    dH = np.zeros_like(fwd["H"])
    e = mcfg.embed_dim

    if head is HeadKind.QSCORER:
        if mcfg.head_variant == "hyper":
            reg_grads: dict[str, np.ndarray] = {}
            dZ = np.zeros_like(Z)
            for b in range(B):
                g_b, dsem_b, dz_b = model.reg_head.backward(fwd["reg_cache"][b], dY[b, 0])
                for k, v in g_b.items():
                    reg_grads[k] = reg_grads.get(k, 0.0) + v
                dZ[b] = dsem_b + dz_b  # semantic input and z are the same vector
        else:
            reg_grads, dZ = model.reg_head.backward(fwd["reg_cache"], dY)
        for k, v in reg_grads.items():
            grads[f"reg.{k}"] = np.asarray(v, dtype=np.float64)
        if model.fid_head is not None:
            if dFid is None:
                dFid = np.zeros((B, 2))
            fid_grads, dZ_fid = model.fid_head.backward(fwd["fid_cache"], dFid)
            for k, v in fid_grads.items():
                grads[f"fid.{k}"] = v
            dZ = dZ + dZ_fid
        demb = np.zeros_like(model.token_emb)
        if mcfg.fusion == "add":
            np.add.at(demb, tokens - 1, dZ)
            dH += dZ
        else:
            np.add.at(demb, tokens - 1, dZ[:, e:])
            dH += dZ[:, :e]
        grads["emb"] = demb

    if head is HeadKind.LINEAR:
        lin_grads, dH_lin = model.lin_head.backward(fwd["lin_cache"], dYlin)
        for k, v in lin_grads.items():
            grads[f"lin.{k}"] = v
        dH += dH_lin

    if head in (HeadKind.QSCORER, HeadKind.QALIGN, HeadKind.DEQA) and mcfg.num_tokens > 1:
        cls_grads, dH_cls = model.classifier.backward(fwd["cls_cache"], dlogits)
        for k, v in cls_grads.items():
            grads[f"cls.{k}"] = v
        dH += dH_cls

    enc_grads, _ = model.encoder.backward(fwd["enc_cache"], dH)
    for k, v in enc_grads.items():
        grads[f"enc.{k}"] = v

    components["total"] = float(total)
    return components, grads


def train_epoch(
    model: ScorerModel,
    dataset: Dataset,
    cfg: TrainConfig,
    optimizer: Optimizer,
    epoch: int = 0,
) -> dict:
    """One pass over seeded mini-batches; returns mean loss components."""
    X = dataset.feature_matrix()
    mos = dataset.mos_array()
    std = dataset.std_array()
    order = np.random.default_rng((cfg.seed, epoch)).permutation(len(dataset))
    params = model.trainable_params()

    sums: dict[str, float] = {}
    n_batches = 0
    for start in range(0, len(dataset), cfg.batch_size):
        idx = order[start : start + cfg.batch_size]
        if idx.shape[0] < 2:
            continue  # pairwise and batch losses need at least two samples
        components, grads = batch_loss_and_grads(model, X[idx], mos[idx], std[idx], cfg)
        if not np.isfinite(components["total"]):
            raise TrainingError(
                f"non-finite loss in epoch {epoch}, batch {n_batches}", step=n_batches
            )
        optimizer.step(params, grads)
        for k, v in components.items():
            sums[k] = sums.get(k, 0.0) + v
        n_batches += 1
    record = {k: v / max(n_batches, 1) for k, v in sums.items()}
    record["epoch"] = epoch
    return record


def train(model: ScorerModel, dataset: Dataset, cfg: TrainConfig) -> list[dict]:
    """Run the configured number of epochs; returns the loss trace."""
    if HeadKind(model.config.head) is HeadKind.QSCORER and cfg.lambda_score <= 0.0:
        raise DomainError("lambda_score must be > 0 for the regression head")
    optimizer = Optimizer(
        kind=cfg.optimizer,
        lr=cfg.lr,
        betas=tuple(cfg.betas),
        weight_decay=cfg.weight_decay,
    )
    trace = []
    for epoch in range(cfg.epochs):
        trace.append(train_epoch(model, dataset, cfg, optimizer, epoch))
    return trace


def evaluate(model: ScorerModel, dataset: Dataset) -> EvalReport:
    """Inference-mode evaluation: argmax tokens, correlation metrics, accuracy.

    Degenerate (constant) predictions set a flag instead of erroring.
    """
    X = dataset.feature_matrix()
    mos = dataset.mos_array()
    fwd = _forward_batch(model, X, None)
    preds = _head_scores(model, fwd)
    tokens = fwd["tokens"]
    targets = _token_targets(mos, model.config.num_tokens)

    degenerate = False
    try:
        p = _plcc(preds, mos)
        s = _srcc(preds, mos)
    except DegenerateInputError:
        p, s, degenerate = None, None, True
    return EvalReport(
        sample_ids=[smp.id for smp in dataset.samples],
        predictions=[float(v) for v in preds],
        targets=[float(v) for v in mos],
        tokens=[int(t) for t in tokens],
        plcc=p,
        srcc=s,
        token_accuracy=float(np.mean(tokens == targets)),
        degenerate=degenerate,
    )


def compare_heads(
    train_set: Dataset,
    test_set: Dataset,
    cfg: TrainConfig,
    heads=(HeadKind.QSCORER, HeadKind.QALIGN, HeadKind.DEQA, HeadKind.LINEAR),
    plcc_threshold: float = 0.9,
    model_kwargs: dict | None = None,
) -> list[dict]:
    """Train each head with identical seed and budget; tabulate held-out metrics.

    `epochs_to_plcc` is the first epoch (1-based) whose held-out PLCC reaches
    the threshold, or None if never reached.
    """
    rows = []
    for head in heads:
        head = HeadKind(head)
        model = build_model(
            train_set.samples[0].features.shape[0], head=head, seed=cfg.seed,
            **(model_kwargs or {}),
        )
        optimizer = Optimizer(kind=cfg.optimizer, lr=cfg.lr, betas=tuple(cfg.betas), weight_decay=cfg.weight_decay)
        epochs_to_threshold = None
        report = None
        for epoch in range(cfg.epochs):
            train_epoch(model, train_set, cfg, optimizer, epoch)
            report = evaluate(model, test_set)
            if (
                epochs_to_threshold is None
                and report.plcc is not None
                and report.plcc >= plcc_threshold
            ):
                epochs_to_threshold = epoch + 1
        rows.append(
            {
                "head": head.value,
                "plcc": report.plcc,
                "srcc": report.srcc,
                "token_accuracy": report.token_accuracy,
                "epochs_to_plcc": epochs_to_threshold,
            }
        )
    return rows


def save_checkpoint(model: ScorerModel, path) -> None:
    """Serialize config and parameters as versioned JSON (row-major arrays)."""
    payload = {
        "schema_version": 1,
        "model_config": {**asdict(model.config), "head": HeadKind(model.config.head).value},
        "params": {
            name: {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}
            for name, arr in model.all_params().items()
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_checkpoint(path) -> ScorerModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("schema_version") != 1:
        raise ValidationError(f"unsupported checkpoint version {payload.get('schema_version')!r}")
    raw_cfg = payload["model_config"]
    raw_cfg["head"] = HeadKind(raw_cfg["head"])
    for key in ("encoder_hidden", "reg_hidden", "hyper_target", "betas"):
        if key in raw_cfg and isinstance(raw_cfg[key], list):
            raw_cfg[key] = tuple(raw_cfg[key])
    model = ScorerModel(ModelConfig(**raw_cfg))
    params = model.all_params()
    for name, rec in payload["params"].items():
        arr = np.array(rec["data"], dtype=np.float64).reshape(rec["shape"])
        if name not in params:
            raise ValidationError(f"unknown parameter {name!r} in checkpoint")
        if params[name].shape != arr.shape:
            raise ValidationError(f"shape mismatch for {name!r}")
        params[name][...] = arr
    return model
