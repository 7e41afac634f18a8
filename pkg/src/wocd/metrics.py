"""Overlapping NMI between covers, plus summary statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Cover


@dataclass(frozen=True)
class MetricReport:
    onmi: float
    n_pred_communities: int
    n_unassigned: int


def _h(count: float, n: int) -> float:
    """-p log p contribution of a count; 0 log 0 = 0, natural log."""
    if count <= 0:
        return 0.0
    p = count / n
    return -p * np.log(p)


def _nonempty_columns(cover: Cover) -> np.ndarray:
    m = cover.memberships.astype(np.float64)
    return m[:, m.sum(axis=0) > 0]


def _conditional_norm(a: np.ndarray, b: np.ndarray, n: int) -> float:
    """Mean over columns of A of H(A_i|B)/H(A_i), best-match per community.

    A pairwise conditional entropy is admitted only under the
    lack-of-information constraint h(n11)+h(n00) >= h(n10)+h(n01); otherwise
    the unconditional H(A_i) is used. Zero-entropy columns contribute 0
    (their conditional entropy is necessarily 0 as well).
    """
    overlap = a.T @ b  # |A_i ∩ B_j|
    size_a = a.sum(axis=0)
    size_b = b.sum(axis=0)
    total = 0.0
    for i in range(a.shape[1]):
        h_ai = _h(size_a[i], n) + _h(n - size_a[i], n)
        best = h_ai
        for j in range(b.shape[1]):
            n11 = overlap[i, j]
            n10 = size_a[i] - n11
            n01 = size_b[j] - n11
            n00 = n - n11 - n10 - n01
            if _h(n11, n) + _h(n00, n) < _h(n10, n) + _h(n01, n):
                continue
            h_bj = _h(size_b[j], n) + _h(n - size_b[j], n)
            joint = _h(n11, n) + _h(n10, n) + _h(n01, n) + _h(n00, n)
            best = min(best, joint - h_bj)
        if h_ai > 0:
            total += best / h_ai
    return total / a.shape[1]


def onmi(x: Cover, y: Cover) -> float:
    """Overlapping NMI: 1 - [H(X|Y)_norm + H(Y|X)_norm] / 2.

    Each community is a binary variable over the node set; empty communities
    are dropped; either cover being empty yields 0.
    """
    if x.n_nodes != y.n_nodes:
        raise ValueError("covers disagree on the number of nodes")
    n = x.n_nodes
    a = _nonempty_columns(x)
    b = _nonempty_columns(y)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 0.0
    value = 1.0 - 0.5 * (_conditional_norm(a, b, n) + _conditional_norm(b, a, n))
    return float(min(max(value, 0.0), 1.0))


def metric_report(pred: Cover, truth: Cover) -> MetricReport:
    nonempty = int((pred.memberships.sum(axis=0) > 0).sum())
    unassigned = int((~pred.memberships.any(axis=1)).sum())
    return MetricReport(
        onmi=onmi(pred, truth),
        n_pred_communities=nonempty,
        n_unassigned=unassigned,
    )
