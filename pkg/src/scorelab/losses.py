"""Training losses with analytic gradients on the prediction side.

Every loss returns a LossValue holding the scalar value and the gradient
with respect to the prediction-side input(s); the gradient layout is
documented per function. Pure functions, concurrent-safe.
"""

from dataclasses import dataclass

import numpy as np

from .core import DegenerateInputError, DomainError, SoftLabel, ValidationError
from .gaussian import normal_cdf, normal_pdf

__all__ = [
    "LossValue",
    "cross_entropy",
    "mse_score",
    "kl_loss",
    "fidelity_prob",
    "fidelity_prob_grad",
    "fidelity_loss",
    "norm_in_norm",
    "ranking_loss",
    "softmax",
    "softmax_vjp",
]

CLAMP_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class LossValue:
    """Scalar loss plus gradient wrt the prediction-side input."""

    value: float
    grad: np.ndarray


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_vjp(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    """Backpropagate a gradient on softmax outputs to the logits."""
    inner = np.sum(dprobs * probs, axis=-1, keepdims=True)
    return probs * (dprobs - inner)


def cross_entropy(logits, target: int) -> LossValue:
    """-log softmax(logits)[target] for a level index in 1..5.

    grad: wrt logits, shape (5,): softmax - onehot.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.shape != (5,):
        raise ValidationError(f"expected 5 logits, got shape {z.shape}")
    if not 1 <= target <= 5:
        raise DomainError(f"target index must be in 1..5, got {target}")
    q = softmax(z)
    onehot = np.zeros(5)
    onehot[target - 1] = 1.0
    value = float(-np.log(max(q[target - 1], CLAMP_EPS)))
    return LossValue(value=value, grad=q - onehot)


def mse_score(pred: float, mos: float) -> LossValue:
    """(pred - mos)^2. grad: wrt pred, shape (1,)."""
    d = float(pred) - float(mos)
    return LossValue(value=d * d, grad=np.array([2.0 * d]))


def kl_loss(target: SoftLabel | np.ndarray, pred_probs) -> LossValue:
    """KL divergence sum_i p_i log(p_i / q_i) of a soft label from a prediction.

    Terms with p_i == 0 are skipped; remaining p and q values are clamped at
    1e-12, which absorbs negative entries of flagged enhanced labels.
    grad: wrt pred_probs, shape (5,): -p/q on clamped-active terms.
    """
    p = np.asarray(target.probs if isinstance(target, SoftLabel) else target, dtype=np.float64)
    q = np.asarray(pred_probs, dtype=np.float64)
    if p.shape != (5,) or q.shape != (5,):
        raise ValidationError("expected 5-vectors")
    active = p != 0.0
    pc = np.clip(p, CLAMP_EPS, None)
    qc = np.clip(q, CLAMP_EPS, None)
    terms = np.where(active, pc * (np.log(pc) - np.log(qc)), 0.0)
    grad = np.where(active & (q > CLAMP_EPS), -pc / qc, 0.0)
    return LossValue(value=float(terms.sum()), grad=grad)


def fidelity_prob(mu_x: float, sigma_x: float, mu_y: float, sigma_y: float) -> float:
    """Probability that item x beats item y under Gaussian ratings."""
    s2 = sigma_x * sigma_x + sigma_y * sigma_y
    if not s2 > 0.0:
        raise DomainError("both rating stds are zero; configure a fallback sigma")
    return float(normal_cdf((mu_x - mu_y) / np.sqrt(s2)))


def fidelity_prob_grad(mu_x, sigma_x, mu_y, sigma_y) -> tuple[float, np.ndarray]:
    """fidelity_prob plus its gradient wrt (mu_x, sigma_x, mu_y, sigma_y)."""
    s2 = sigma_x * sigma_x + sigma_y * sigma_y
    if not s2 > 0.0:
        raise DomainError("both rating stds are zero; configure a fallback sigma")
    s = float(np.sqrt(s2))
    d = (mu_x - mu_y) / s
    p = float(normal_cdf(d))
    phi = float(normal_pdf(d))
    dmu_x = phi / s
    dmu_y = -phi / s
    # d/dsigma through s: dd/ds = -d/s, ds/dsigma_x = sigma_x/s
    dsig_x = phi * (-d / s) * (sigma_x / s)
    dsig_y = phi * (-d / s) * (sigma_y / s)
    return p, np.array([dmu_x, dsig_x, dmu_y, dsig_y])


def fidelity_loss(p: float, p_pred: float) -> LossValue:
    """1 - sqrt(p*p_pred) - sqrt((1-p)(1-p_pred)); zero iff the two agree.

    grad: wrt p_pred, shape (1,). Singular at p_pred in {0, 1}.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= p_pred <= 1.0):
        raise DomainError("fidelity inputs must lie in [0, 1]")
    value = 1.0 - np.sqrt(p * p_pred) - np.sqrt((1.0 - p) * (1.0 - p_pred))
    if 0.0 < p_pred < 1.0:
        g = -0.5 * np.sqrt(p / p_pred) + 0.5 * np.sqrt((1.0 - p) / (1.0 - p_pred))
    else:
        g = 0.0
    return LossValue(value=float(value), grad=np.array([g]))


def norm_in_norm(targets, preds) -> LossValue:
    """Sum of |Q_i - Q_hat_i| over center-then-norm normalized scores.

    Both sides are normalized independently (center, then divide by the
    l2 norm of the centered vector), making the loss invariant to positive
    affine rescaling of either side.
    grad: wrt preds, shape (N,).
    """
    s = np.asarray(targets, dtype=np.float64)
    y = np.asarray(preds, dtype=np.float64)
    if s.shape != y.shape or s.ndim != 1 or s.shape[0] < 2:
        raise ValidationError("need two equal-length series of length >= 2")

    def _normalize(v):
        u = v - v.mean()
        n = float(np.sqrt(np.dot(u, u)))
        if n == 0.0:
            raise DegenerateInputError("constant vector cannot be normalized")
        return u, n

    us, ns = _normalize(s)
    uy, ny = _normalize(y)
    qs = us / ns
    qy = uy / ny
    diff = qy - qs
    value = float(np.sum(np.abs(diff)))
    sign = np.sign(diff)
    # d qy_i / d y_j = (delta_ij - 1/N)/n - u_i u_j / n^3
    grad = (sign - sign.mean()) / ny - uy * np.dot(sign, uy) / ny**3
    return LossValue(value=value, grad=grad)


def ranking_loss(score_hi: float, score_lo: float, margin: float = 0.1) -> LossValue:
    """Pairwise hinge max(0, score_lo - score_hi + margin).

    Caller guarantees the first argument belongs to the higher-MOS item.
    grad: wrt (score_hi, score_lo), shape (2,); zero at the kink.
    """
    if margin < 0.0:
        raise DomainError(f"margin must be >= 0, got {margin}")
    raw = score_lo - score_hi + margin
    if raw > 0.0:
        return LossValue(value=float(raw), grad=np.array([-1.0, 1.0]))
    return LossValue(value=0.0, grad=np.zeros(2))
