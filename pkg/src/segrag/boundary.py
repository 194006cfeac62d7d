"""Trainable same-section classifiers over sentence embedding pairs.

Both variants share one learned linear projection: u = W a + c, v = W b + c.
The "projected" variant scores a pair by the dot product u.v alone. The
"fused" variant feeds [u.v, ||u-v||_2, ||u-v||_1] through a learned 3-to-1
linear layer. Either way the raw score is a logit: sigmoid(raw) is the
probability the two sentences belong to the same section, and the decision
threshold of 0.5 is exactly raw >= 0.

Training is plain minibatch SGD on binary cross-entropy with analytic
gradients; no autograd framework is involved. Parameters live in float64
and serialize as float32, so a saved model reloads bit-identically.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DivergenceError,
    EmptyDatasetError,
    ModelFormatError,
)
from .embedding import EmbeddingProvider, embed_many
from .ioutil import atomic_write_bytes

VARIANT_PROJECTED = "projected"
VARIANT_FUSED = "fused"
VARIANTS = (VARIANT_PROJECTED, VARIANT_FUSED)

_VARIANT_CODES = {VARIANT_PROJECTED: 1, VARIANT_FUSED: 2}
_CODE_VARIANTS = {code: name for name, code in _VARIANT_CODES.items()}

MODEL_MAGIC = b"SEGRAGBM"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<8sHBI")


@dataclass
class BoundaryModel:
    variant: str
    weight: np.ndarray                 # (d, d) projection
    bias: np.ndarray                   # (d,)
    fusion_weight: np.ndarray | None = None   # (3,) for the fused variant
    fusion_bias: float = 0.0

    @property
    def dimension(self) -> int:
        return self.weight.shape[0]

    def copy(self) -> "BoundaryModel":
        return BoundaryModel(
            variant=self.variant,
            weight=self.weight.copy(),
            bias=self.bias.copy(),
            fusion_weight=None if self.fusion_weight is None else self.fusion_weight.copy(),
            fusion_bias=self.fusion_bias,
        )


def init_model(variant: str, dimension: int, seed: int = 42) -> BoundaryModel:
    """Fresh model: projection near identity, fusion layer a plain average."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    if dimension < 1:
        raise ValueError(f"dimension must be positive, got {dimension}")
    rng = np.random.default_rng(seed)
    weight = np.eye(dimension) + rng.normal(0.0, 0.01 / np.sqrt(dimension), (dimension, dimension))
    bias = np.zeros(dimension)
    if variant == VARIANT_FUSED:
        return BoundaryModel(variant, weight, bias, np.full(3, 1.0 / 3.0), 0.0)
    return BoundaryModel(variant, weight, bias)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def project(model: BoundaryModel, embeddings: np.ndarray) -> np.ndarray:
    """Apply the learned projection to embedding rows."""
    return np.asarray(embeddings, dtype=np.float64) @ model.weight.T + model.bias


def _forward(model: BoundaryModel, emb_a: np.ndarray, emb_b: np.ndarray):
    """Projected pairs, raw scores, and (for the fused variant) features."""
    u = project(model, emb_a)
    v = project(model, emb_b)
    dot = np.einsum("nd,nd->n", u, v)
    if model.variant == VARIANT_PROJECTED:
        return u, v, dot, None
    delta = u - v
    dist2 = np.linalg.norm(delta, axis=1)
    dist1 = np.abs(delta).sum(axis=1)
    feats = np.stack([dot, dist2, dist1], axis=1)
    raw = feats @ model.fusion_weight + model.fusion_bias
    return u, v, raw, feats


def raw_scores(model: BoundaryModel, emb_a: np.ndarray, emb_b: np.ndarray) -> np.ndarray:
    """Logits for row-aligned embedding pairs."""
    emb_a = np.atleast_2d(np.asarray(emb_a, dtype=np.float64))
    emb_b = np.atleast_2d(np.asarray(emb_b, dtype=np.float64))
    if emb_a.shape != emb_b.shape:
        raise DimensionMismatchError(emb_a.shape, emb_b.shape, "paired embeddings")
    if emb_a.shape[1] != model.dimension:
        raise DimensionMismatchError(model.dimension, emb_a.shape[1], "model input")
    _, _, raw, _ = _forward(model, emb_a, emb_b)
    return raw


def probabilities(model: BoundaryModel, emb_a: np.ndarray, emb_b: np.ndarray) -> np.ndarray:
    """P(same section) for row-aligned embedding pairs."""
    return _sigmoid(raw_scores(model, emb_a, emb_b))


def same_section(model: BoundaryModel, emb_a: np.ndarray, emb_b: np.ndarray) -> bool:
    """Decision at probability 0.5, evaluated as raw score >= 0."""
    return bool(raw_scores(model, emb_a, emb_b)[0] >= 0.0)


def bce_loss(raw: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy on logits, in the overflow-safe form."""
    raw = np.asarray(raw, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    per = np.maximum(raw, 0.0) - raw * labels + np.log1p(np.exp(-np.abs(raw)))
    return float(per.mean())


def batch_gradients(
    model: BoundaryModel, emb_a: np.ndarray, emb_b: np.ndarray, labels: np.ndarray
) -> tuple[float, dict[str, np.ndarray | float]]:
    """Mean BCE loss and its analytic gradients for one batch.

    Returns gradients keyed like the model fields; fusion entries are
    present only for the fused variant.
    """
    emb_a = np.asarray(emb_a, dtype=np.float64)
    emb_b = np.asarray(emb_b, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = emb_a.shape[0]
    # A diverging model sends scores to infinity; let the loss turn non-finite
    # quietly so the trainer can raise DivergenceError instead of warning.
    with np.errstate(over="ignore", invalid="ignore"):
        u, v, raw, feats = _forward(model, emb_a, emb_b)
        loss = bce_loss(raw, labels)
        g = (_sigmoid(raw) - labels) / n

        if model.variant == VARIANT_PROJECTED:
            grad_u = g[:, None] * v
            grad_v = g[:, None] * u
            grads: dict[str, np.ndarray | float] = {}
        else:
            w1, w2, w3 = model.fusion_weight
            delta = u - v
            dist2 = feats[:, 1]
            # Unit direction of u - v; zero distance contributes no gradient.
            safe = np.where(dist2 > 0.0, dist2, 1.0)
            unit = np.where(dist2[:, None] > 0.0, delta / safe[:, None], 0.0)
            sign = np.sign(delta)
            grad_u = g[:, None] * (w1 * v + w2 * unit + w3 * sign)
            grad_v = g[:, None] * (w1 * u - w2 * unit - w3 * sign)
            grads = {"fusion_weight": g @ feats, "fusion_bias": float(g.sum())}

        grads["weight"] = grad_u.T @ emb_a + grad_v.T @ emb_b
        grads["bias"] = (grad_u + grad_v).sum(axis=0)
    return loss, grads


def train(
    model: BoundaryModel,
    pairs,
    provider: EmbeddingProvider,
    epochs: int = 5,
    batch_size: int = 256,
    lr: float = 1e-3,
    seed: int = 42,
    holdout_fraction: float = 0.02,
    progress=None,
) -> list[dict]:
    """SGD on sentence pairs; leaves the model at its best epoch.

    A deterministic holdout split (derived from the seed, independent of
    pair order within the shuffle) scores each epoch; the checkpoint with
    the highest holdout accuracy wins, earliest epoch on ties. Returns the
    per-epoch history and calls progress(record) after each epoch.

    Raises DivergenceError the moment a batch loss stops being finite.
    """
    if provider.dimension != model.dimension:
        raise DimensionMismatchError(model.dimension, provider.dimension, "training embeddings")
    n = len(pairs)
    if n < 2:
        raise EmptyDatasetError(f"need at least 2 pairs to train, got {n}")

    texts: list[str] = []
    index: dict[str, int] = {}
    for pair in pairs:
        for text in (pair.a, pair.b):
            if text not in index:
                index[text] = len(texts)
                texts.append(text)
    matrix = embed_many(provider, texts).astype(np.float64)
    ia = np.array([index[p.a] for p in pairs])
    ib = np.array([index[p.b] for p in pairs])
    labels = np.array([p.label for p in pairs], dtype=np.float64)

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_holdout = max(1, int(round(holdout_fraction * n)))
    holdout, training = perm[:n_holdout], perm[n_holdout:]
    if training.size == 0:
        raise EmptyDatasetError("holdout split left no training pairs")

    hold_a, hold_b = matrix[ia[holdout]], matrix[ib[holdout]]
    hold_labels = labels[holdout] > 0.5

    best_acc = -1.0
    best_state: BoundaryModel | None = None
    history: list[dict] = []
    for epoch in range(1, epochs + 1):
        order = training[rng.permutation(training.size)]
        total = 0.0
        for batch_index, start in enumerate(range(0, order.size, batch_size)):
            sel = order[start : start + batch_size]
            loss, grads = batch_gradients(model, matrix[ia[sel]], matrix[ib[sel]], labels[sel])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_index)
            model.weight -= lr * grads["weight"]
            model.bias -= lr * grads["bias"]
            if model.variant == VARIANT_FUSED:
                model.fusion_weight -= lr * grads["fusion_weight"]
                model.fusion_bias -= lr * grads["fusion_bias"]
            total += loss * sel.size

        raw = raw_scores(model, hold_a, hold_b)
        acc = float(np.mean((raw >= 0.0) == hold_labels))
        record = {
            "epoch": epoch,
            "train_loss": float(total / order.size),
            "holdout_acc": acc,
        }
        history.append(record)
        if progress is not None:
            progress(record)
        if acc > best_acc:
            best_acc = acc
            best_state = model.copy()

    if best_state is not None:
        model.weight[...] = best_state.weight
        model.bias[...] = best_state.bias
        if model.variant == VARIANT_FUSED:
            model.fusion_weight[...] = best_state.fusion_weight
            model.fusion_bias = best_state.fusion_bias
    return history


def save_model(model: BoundaryModel, path: str) -> None:
    """Serialize to the binary model format (float32, little-endian)."""
    parts = [
        _MODEL_HEADER.pack(
            MODEL_MAGIC, MODEL_VERSION, _VARIANT_CODES[model.variant], model.dimension
        ),
        model.weight.astype("<f4").tobytes(),
        model.bias.astype("<f4").tobytes(),
    ]
    if model.variant == VARIANT_FUSED:
        parts.append(model.fusion_weight.astype("<f4").tobytes())
        parts.append(struct.pack("<f", model.fusion_bias))
    atomic_write_bytes(path, b"".join(parts))


def load_model(path: str) -> BoundaryModel:
    """Read a model file, validating structure and exact size."""
    with open(path, "rb") as handle:
        data = handle.read()
    if len(data) < _MODEL_HEADER.size:
        raise ModelFormatError(f"{path}: file shorter than header")
    magic, version, code, dimension = _MODEL_HEADER.unpack_from(data, 0)
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    variant = _CODE_VARIANTS.get(code)
    if variant is None:
        raise ModelFormatError(f"{path}: unknown variant code {code}")
    if dimension == 0:
        raise ModelFormatError(f"{path}: zero dimension")
    expected = _MODEL_HEADER.size + 4 * (dimension * dimension + dimension)
    if variant == VARIANT_FUSED:
        expected += 4 * 4
    if len(data) != expected:
        raise ModelFormatError(
            f"{path}: size {len(data)} does not match header (expected {expected})"
        )
    offset = _MODEL_HEADER.size
    count = dimension * dimension
    weight = (
        np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        .astype(np.float64)
        .reshape(dimension, dimension)
    )
    offset += 4 * count
    bias = np.frombuffer(data, dtype="<f4", count=dimension, offset=offset).astype(np.float64)
    offset += 4 * dimension
    if variant == VARIANT_FUSED:
        fusion_weight = np.frombuffer(data, dtype="<f4", count=3, offset=offset).astype(np.float64)
        offset += 12
        (fusion_bias,) = struct.unpack_from("<f", data, offset)
        return BoundaryModel(variant, weight, bias, fusion_weight, float(fusion_bias))
    return BoundaryModel(variant, weight, bias)
