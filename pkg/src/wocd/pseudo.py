"""Pseudo-label construction from weak cliques and confidence-based refresh."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cliques import CliqueSet
from .graph import Cover, SampledLabels


@dataclass(frozen=True)
class PseudoConfig:
    r_c: int = 1  # communities retained per clique vote
    tau: float = 0.9  # confidence threshold for the refresh round

    def __post_init__(self):
        if self.r_c < 1:
            raise ValueError("r_c must be >= 1")
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0, 1)")


def construct_pseudo_labels(
    cliques: CliqueSet,
    sampled: SampledLabels,
    n_nodes: int,
    n_communities: int,
    r_c: int,
) -> Cover:
    """Clique-vote pseudo-labels.

    Each clique sums the revealed ground-truth rows of its sampled members,
    keeps the r_c most-voted communities (zero-vote communities are never
    kept; ties break toward the smaller id), and stamps that label onto all
    of its members. Accumulated stamps are binarized at the end, so the
    result is independent of clique order.
    """
    if r_c < 1:
        raise ValueError("r_c must be >= 1")
    if sampled.node_ids.size and sampled.node_ids.max() >= n_nodes:
        raise ValueError("sampled node id out of range")
    if sampled.rows.shape[1] != n_communities:
        raise ValueError("sampled rows do not match the community count")

    sampled_row = np.zeros((n_nodes, n_communities), dtype=np.int64)
    sampled_row[sampled.node_ids] = sampled.rows
    is_sampled = np.zeros(n_nodes, dtype=bool)
    is_sampled[sampled.node_ids] = True

    acc = np.zeros((n_nodes, n_communities), dtype=np.int64)
    comm_ids = np.arange(n_communities)
    for rec in cliques.cliques:
        members = rec.members
        voters = members[is_sampled[members]]
        if voters.size == 0:
            continue
        votes = sampled_row[voters].sum(axis=0)
        if not votes.any():
            continue
        ranked = np.lexsort((comm_ids, -votes))
        label = np.zeros(n_communities, dtype=np.int64)
        for j in ranked[:r_c]:
            if votes[j] > 0:
                label[j] = 1
        acc[members] += label
    return Cover(memberships=(acc > 0).astype(np.uint8))


def refresh_pseudo_labels(c_pred: np.ndarray, sampled: SampledLabels, tau: float) -> Cover:
    """Threshold model predictions into a replacement pseudo cover.

    Sampled nodes are excluded entirely (their true rows drive the other
    loss term); a non-sampled node keeps community k iff its predicted
    probability is >= tau.
    """
    c_pred = np.asarray(c_pred, dtype=np.float64)
    if c_pred.size and (c_pred.min() < 0.0 or c_pred.max() > 1.0):
        raise ValueError("predictions must lie in [0, 1]")
    if not (0.0 < tau < 1.0):
        raise ValueError("tau must be in (0, 1)")
    pseudo = (c_pred >= tau).astype(np.uint8)
    pseudo[sampled.node_ids] = 0
    return Cover(memberships=pseudo)


def pseudo_coverage(cover: Cover, sampled: SampledLabels) -> int:
    """Number of non-sampled nodes carrying at least one pseudo community."""
    labeled = cover.memberships.any(axis=1)
    labeled[sampled.node_ids] = False
    return int(labeled.sum())


def union_covers(a: Cover, b: Cover) -> Cover:
    if a.memberships.shape != b.memberships.shape:
        raise ValueError("cover shapes differ")
    return Cover(memberships=(a.memberships | b.memberships).astype(np.uint8))
