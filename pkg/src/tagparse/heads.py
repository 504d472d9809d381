"""Scoring heads over encoder output: arcs, relation labels, POS and supertags.

Arc scores for dependent i over candidate heads (ROOT at row 0):

    s_i = softmax(H_arc_head @ W_arc @ h_i_arc_dep + H_arc_head @ b_arc)

Relation scores for the arc from predicted head p to dependent i:

    l_i = softmax(h_p_rel_head^T U h_i_rel_dep
                  + W_rel (h_i_rel_head + h_p_rel_head) + b_rel)

`rel_affine_uses_dep` swaps the first operand of the affine term to
h_i_rel_dep (the variant used by the cited biaffine architecture); the
default follows the equation as printed above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .encoder import MODE_JOINT_POS_STAG, MODE_JOINT_STAG, MODE_POS, MODE_STAG, glorot

__all__ = [
    "HeadConfig",
    "HeadFeatures",
    "init_head_params",
    "head_features",
    "arc_logit_matrix",
    "arc_distribution",
    "label_logits",
    "label_logits_pairs",
    "label_distribution",
    "pos_logits",
    "stag_logits",
    "pos_distribution",
    "stag_distribution",
]


@dataclass
class HeadConfig:
    d_arc: int = 500
    d_rel: int = 100
    d_pos: int = 500
    d_stag: int = 500
    mlp_dropout: float = 0.33
    label_on_gold_heads: bool = True
    rel_affine_uses_dep: bool = False

    def __post_init__(self):
        for name in ("d_arc", "d_rel", "d_pos", "d_stag"):
            if getattr(self, name) < 1:
                raise ValueError(f"HeadConfig.{name} must be positive")
        if not 0.0 <= self.mlp_dropout < 1.0:
            raise ValueError("HeadConfig.mlp_dropout must be in [0, 1)")


@dataclass
class HeadFeatures:
    """Depth-1 ReLU MLP projections of the encoder output, one row per token."""

    arc_dep: Tensor | None = None
    arc_head: Tensor | None = None
    rel_dep: Tensor | None = None
    rel_head: Tensor | None = None
    pos: Tensor | None = None
    stag: Tensor | None = None


def init_head_params(rng, config: HeadConfig, feat_dim: int, n_pos: int,
                     n_stags: int, n_rels: int, mode: str) -> dict:
    params: dict = {}

    def mlp(name, width):
        params[f"mlp.{name}.W"] = ad.parameter(glorot(rng, (width, feat_dim)))
        params[f"mlp.{name}.b"] = ad.parameter(np.zeros(width))

    if mode not in (MODE_POS, MODE_STAG):
        for name in ("arc_dep", "arc_head"):
            mlp(name, config.d_arc)
        for name in ("rel_dep", "rel_head"):
            mlp(name, config.d_rel)
        params["biaffine.W_arc"] = ad.parameter(glorot(rng, (config.d_arc, config.d_arc)))
        params["biaffine.b_arc"] = ad.parameter(np.zeros(config.d_arc))
        params["rel.U"] = ad.parameter(
            glorot(rng, (config.d_rel, config.d_rel, n_rels),
                   fan_in=config.d_rel, fan_out=config.d_rel)
        )
        params["rel.W"] = ad.parameter(glorot(rng, (n_rels, config.d_rel)))
        params["rel.b"] = ad.parameter(np.zeros(n_rels))
    if mode in (MODE_POS, MODE_JOINT_POS_STAG):
        mlp("pos", config.d_pos)
        params["out.pos.W"] = ad.parameter(glorot(rng, (n_pos, config.d_pos)))
        params["out.pos.b"] = ad.parameter(np.zeros(n_pos))
    if mode in (MODE_STAG, MODE_JOINT_STAG, MODE_JOINT_POS_STAG):
        mlp("stag", config.d_stag)
        params["out.stag.W"] = ad.parameter(glorot(rng, (n_stags, config.d_stag)))
        params["out.stag.b"] = ad.parameter(np.zeros(n_stags))
    return params


def _mlp(encoded: Tensor, params: dict, name: str) -> Tensor | None:
    if f"mlp.{name}.W" not in params:
        return None
    return ad.relu(ad.add(ad.matmul(encoded, ad.transpose(params[f"mlp.{name}.W"])),
                          params[f"mlp.{name}.b"]))


def head_features(encoded: Tensor, params: dict, mask=None) -> HeadFeatures:
    """Project encoder rows [N, 2H] into every configured feature space.

    `mask` is an optional dropout mask applied once at the module boundary.
    """
    if mask is not None:
        encoded = ad.dropout_with_mask(encoded, mask)
    return HeadFeatures(
        arc_dep=_mlp(encoded, params, "arc_dep"),
        arc_head=_mlp(encoded, params, "arc_head"),
        rel_dep=_mlp(encoded, params, "rel_dep"),
        rel_head=_mlp(encoded, params, "rel_head"),
        pos=_mlp(encoded, params, "pos"),
        stag=_mlp(encoded, params, "stag"),
    )


def arc_logit_matrix(feats: HeadFeatures, params: dict) -> Tensor:
    """Arc scores for all dependents at once: row i-1 holds dependent i's
    scores over the n+1 candidate heads (column 0 = ROOT)."""
    n_plus_1 = feats.arc_head.shape[0]
    bilinear = ad.matmul(ad.matmul(feats.arc_head, params["biaffine.W_arc"]),
                         ad.transpose(feats.arc_dep))  # [heads, deps]
    head_bias = ad.matmul(feats.arc_head, ad.reshape(params["biaffine.b_arc"], (-1, 1)))
    all_scores = ad.add(bilinear, head_bias)  # bias is per candidate head
    deps = ad.slice_axis(all_scores, 1, 1, n_plus_1)
    return ad.transpose(deps)  # [n, n+1]


def arc_distribution(feats: HeadFeatures, i: int, params: dict) -> Tensor:
    """Probability distribution over candidate heads of token i (i >= 1)."""
    if i < 1:
        raise ValueError("arc_distribution: ROOT (i=0) takes no head")
    if i >= feats.arc_dep.shape[0]:
        raise IndexError(f"arc_distribution: token index {i} out of range")
    h_i = ad.reshape(ad.slice_axis(feats.arc_dep, 0, i, i + 1), (-1, 1))
    bilinear = ad.matmul(ad.matmul(feats.arc_head, params["biaffine.W_arc"]), h_i)
    bias = ad.matmul(feats.arc_head, ad.reshape(params["biaffine.b_arc"], (-1, 1)))
    return ad.softmax(ad.reshape(ad.add(bilinear, bias), (-1,)))


def label_logits_pairs(dep: Tensor, dep_head_role: Tensor, head: Tensor,
                       params: dict, rel_affine_uses_dep: bool = False) -> Tensor:
    """Relation scores [N, r] for N (dependent, head) row pairs.

    `dep` holds rel-dep rows of the dependents, `dep_head_role` their
    rel-head rows, and `head` the rel-head rows of their chosen heads.
    """
    d_rel = dep.shape[1]
    r = params["rel.b"].shape[0]
    cols = []
    for k in range(r):
        u_k = ad.reshape(ad.slice_axis(params["rel.U"], 2, k, k + 1), (d_rel, d_rel))
        prod = ad.mul(ad.matmul(head, u_k), dep)
        cols.append(ad.reduce_sum(prod, axis=1, keepdims=True))
    bilinear = ad.concat(cols, axis=1)
    affine_dep = dep if rel_affine_uses_dep else dep_head_role
    affine = ad.matmul(ad.add(affine_dep, head), ad.transpose(params["rel.W"]))
    return ad.add(ad.add(bilinear, affine), ad.reshape(params["rel.b"], (1, -1)))


def label_logits(feats: HeadFeatures, head_ids, params: dict,
                 rel_affine_uses_dep: bool = False) -> Tensor:
    """Relation scores [n, r] for dependents 1..n given their head indices."""
    n_plus_1 = feats.rel_dep.shape[0]
    head_ids = np.asarray(head_ids, dtype=np.int64)
    dep = ad.slice_axis(feats.rel_dep, 0, 1, n_plus_1)
    dep_head_role = ad.slice_axis(feats.rel_head, 0, 1, n_plus_1)
    head = ad.embedding_lookup(feats.rel_head, head_ids)
    return label_logits_pairs(dep, dep_head_role, head, params, rel_affine_uses_dep)


def label_distribution(i: int, p_i: int, feats: HeadFeatures, params: dict,
                       rel_affine_uses_dep: bool = False) -> Tensor:
    """Distribution over relations for the arc from head p_i to token i."""
    n_plus_1 = feats.rel_dep.shape[0]
    if not 1 <= i < n_plus_1:
        raise IndexError(f"label_distribution: token index {i} out of range")
    if not 0 <= p_i < n_plus_1:
        raise IndexError(f"label_distribution: head index {p_i} out of range")
    heads = np.full(n_plus_1 - 1, p_i, dtype=np.int64)
    logits = label_logits(feats, heads, params, rel_affine_uses_dep)
    return ad.softmax(ad.reshape(ad.slice_axis(logits, 0, i - 1, i), (-1,)))


def pos_logits(feats: HeadFeatures, params: dict) -> Tensor:
    return ad.add(ad.matmul(feats.pos, ad.transpose(params["out.pos.W"])),
                  ad.reshape(params["out.pos.b"], (1, -1)))


def stag_logits(feats: HeadFeatures, params: dict) -> Tensor:
    return ad.add(ad.matmul(feats.stag, ad.transpose(params["out.stag.W"])),
                  ad.reshape(params["out.stag.b"], (1, -1)))


def pos_distribution(feats: HeadFeatures, params: dict) -> Tensor:
    return ad.softmax(pos_logits(feats, params), axis=-1)


def stag_distribution(feats: HeadFeatures, params: dict) -> Tensor:
    return ad.softmax(stag_logits(feats, params), axis=-1)
