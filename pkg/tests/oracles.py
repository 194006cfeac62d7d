"""Independent reference implementations used only to check the package.

Everything here is deliberately written the slow, obvious way so a bug in
the production code cannot hide in a shared shortcut.
"""

import numpy as np

from segrag.boundary import bce_loss, raw_scores


def finite_difference_grads(model, emb_a, emb_b, labels, h=1e-4):
    """Central-difference gradients of the mean BCE loss, per parameter."""

    def loss_for(m):
        return bce_loss(raw_scores(m, emb_a, emb_b), labels)

    grads = {}
    weight = np.zeros_like(model.weight)
    for i in range(model.weight.shape[0]):
        for j in range(model.weight.shape[1]):
            up = model.copy()
            up.weight[i, j] += h
            down = model.copy()
            down.weight[i, j] -= h
            weight[i, j] = (loss_for(up) - loss_for(down)) / (2.0 * h)
    grads["weight"] = weight

    bias = np.zeros_like(model.bias)
    for i in range(model.bias.shape[0]):
        up = model.copy()
        up.bias[i] += h
        down = model.copy()
        down.bias[i] -= h
        bias[i] = (loss_for(up) - loss_for(down)) / (2.0 * h)
    grads["bias"] = bias

    if model.fusion_weight is not None:
        fusion = np.zeros(3)
        for i in range(3):
            up = model.copy()
            up.fusion_weight[i] += h
            down = model.copy()
            down.fusion_weight[i] -= h
            fusion[i] = (loss_for(up) - loss_for(down)) / (2.0 * h)
        grads["fusion_weight"] = fusion
        up = model.copy()
        up.fusion_bias += h
        down = model.copy()
        down.fusion_bias -= h
        grads["fusion_bias"] = (loss_for(up) - loss_for(down)) / (2.0 * h)
    return grads


def worst_relative_gradient_error(analytic, numeric):
    """Largest per-parameter relative error between two gradient dicts."""
    worst = 0.0
    for key, num in numeric.items():
        ana = np.asarray(analytic[key], dtype=np.float64)
        num = np.asarray(num, dtype=np.float64)
        denom = max(float(np.linalg.norm(ana)), float(np.linalg.norm(num)), 1e-12)
        worst = max(worst, float(np.linalg.norm(ana - num)) / denom)
    return worst


def quadratic_lcs(a, b):
    """Textbook full-table longest-common-subsequence length."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            elif table[i - 1][j] >= table[i][j - 1]:
                table[i][j] = table[i - 1][j]
            else:
                table[i][j] = table[i][j - 1]
    return table[m][n]


def rank_oracle(matrix, query_vec):
    """Cosine ranking computed one row at a time, ties broken by entry order."""
    query_vec = np.asarray(query_vec, dtype=np.float64)
    qnorm = float(np.linalg.norm(query_vec))
    sims = []
    for row in np.asarray(matrix, dtype=np.float64):
        scale = float(np.linalg.norm(row)) * qnorm
        sims.append(float(np.dot(row, query_vec)) / scale if scale > 0.0 else 0.0)
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))
    return order, sims
