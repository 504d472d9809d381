"""Training loop: length-bucketed batches, joint loss, early stopping,
jackknifing, and the shuffled-supertag control."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .corpus import Sentence
from .encoder import (
    MODE_JOINT_POS_STAG,
    MODE_JOINT_STAG,
    MODE_PARSER,
    MODE_POS,
    MODE_STAG,
    PARSER_MODES,
    EncoderConfig,
)
from .heads import HeadConfig
from .metrics import joint_correct, las_uas, tag_accuracy
from .model import BatchOutputs, Model
from .optim import AdamState, adam_step
from .vocab import Vocabulary

__all__ = [
    "TrainConfig",
    "EpochReport",
    "TrainResult",
    "joint_loss",
    "train",
    "evaluate_dev",
    "jackknife",
    "FoldProvenance",
    "shuffle_stag_targets",
]


@dataclass
class TrainConfig:
    mode: str = MODE_JOINT_POS_STAG
    batch_size: int = 100
    lr: float = 0.01
    patience: int = 5
    max_epochs: int = 200
    seed: int = 0
    folds: int = 10
    shuffle_stag: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class EpochReport:
    epoch: int
    train_loss: float
    metrics: dict
    dev_score: float

    def to_json(self) -> str:
        return json.dumps(
            {"epoch": self.epoch, "train_loss": round(self.train_loss, 6),
             "dev_score": round(self.dev_score, 4),
             **{k: round(v, 4) for k, v in self.metrics.items()}}
        )


@dataclass
class TrainResult:
    model: Model
    history: list
    best_epoch: int


def joint_loss(outputs: BatchOutputs, sentences: list, vocab: Vocabulary,
               mode: str) -> ad.Tensor:
    """Sum of per-token cross-entropies over the mode's tasks.

    Head/label losses run over parser-family modes; tagging losses skip the
    ROOT row by construction (outputs carry real tokens only).
    """
    if [len(s) for s in outputs.sentences] != [len(s) for s in sentences]:
        raise ValueError("joint_loss: outputs and gold sentences are misaligned")
    parts = []
    if mode in PARSER_MODES:
        for logits, sent in zip(outputs.arc_logits, sentences):
            gold_heads = np.array([t.head for t in sent.tokens])
            if gold_heads.size != logits.shape[0]:
                raise ValueError("joint_loss: arc logits misaligned with sentence")
            parts.append(ad.reduce_sum(ad.cross_entropy_with_logits(logits, gold_heads)))
        rel_ids = np.array([vocab.rel_id(t.rel) for s in sentences for t in s.tokens])
        parts.append(ad.reduce_sum(ad.cross_entropy_with_logits(outputs.label_logits, rel_ids)))
    if mode in (MODE_POS, MODE_JOINT_POS_STAG):
        pos_ids = np.array([vocab.pos_id(t.gold_pos) for s in sentences for t in s.tokens])
        parts.append(ad.reduce_sum(ad.cross_entropy_with_logits(outputs.pos_logits, pos_ids)))
    if mode in (MODE_STAG, MODE_JOINT_STAG, MODE_JOINT_POS_STAG):
        for s in sentences:
            for t in s.tokens:
                if t.stag is None:
                    raise ValueError("joint_loss: supertag targets missing")
        stag_ids = np.array([vocab.stag_id(t.stag) for s in sentences for t in s.tokens])
        parts.append(ad.reduce_sum(ad.cross_entropy_with_logits(outputs.stag_logits, stag_ids)))
    total = parts[0]
    for p in parts[1:]:
        total = ad.add(total, p)
    return total


def make_batches(sentences: list, batch_size: int, rng: np.random.Generator) -> list:
    """Shuffle, group by length, chunk; every batch has one sentence length."""
    order = rng.permutation(len(sentences))
    by_len: dict = {}
    for idx in order:
        by_len.setdefault(len(sentences[idx]), []).append(sentences[idx])
    batches = []
    for _, group in sorted(by_len.items()):
        for lo in range(0, len(group), batch_size):
            batches.append(group[lo : lo + batch_size])
    batch_order = rng.permutation(len(batches))
    return [batches[i] for i in batch_order]


def evaluate_dev(model: Model, dev: list, gold: list | None = None) -> dict:
    """Dropout-free predictions scored against gold annotations."""
    gold = gold if gold is not None else dev
    pred = model.predict(dev)
    metrics: dict = {}
    if model.mode in PARSER_MODES:
        uas, las = las_uas(pred, gold)
        metrics["uas"], metrics["las"] = uas, las
    if model.mode in (MODE_POS, MODE_JOINT_POS_STAG):
        metrics["pos_acc"] = tag_accuracy(pred, gold, "pos")
    if model.mode in (MODE_STAG, MODE_JOINT_STAG, MODE_JOINT_POS_STAG):
        metrics["stag_acc"] = tag_accuracy(pred, gold, "stag")
    if model.mode in (MODE_JOINT_STAG, MODE_JOINT_POS_STAG):
        metrics["joint_correct"] = joint_correct(
            pred, gold,
            require_pos=model.mode == MODE_JOINT_POS_STAG,
            require_stag=True,
        )
    return metrics


def dev_criterion(mode: str, metrics: dict) -> float:
    return {
        MODE_POS: metrics.get("pos_acc", 0.0),
        MODE_STAG: metrics.get("stag_acc", 0.0),
        MODE_PARSER: metrics.get("las", 0.0),
        MODE_JOINT_STAG: metrics.get("joint_correct", 0.0),
        MODE_JOINT_POS_STAG: metrics.get("joint_correct", 0.0),
    }[mode]


def train(train_corpus: list, dev_corpus: list, config: TrainConfig,
          enc_config: EncoderConfig, head_config: HeadConfig | None = None,
          vocab: Vocabulary | None = None, pretrained: dict | None = None,
          log=None) -> TrainResult:
    """Optimize until the dev criterion stalls for `patience` epochs.

    Returns the model restored to its best dev epoch plus the full history.
    """
    if not train_corpus or not dev_corpus:
        raise ValueError("train: empty corpus")
    head_config = head_config or HeadConfig()
    vocab = vocab or Vocabulary.from_corpus(train_corpus)
    rng = np.random.default_rng(config.seed)
    if config.shuffle_stag:
        train_corpus = shuffle_stag_targets(train_corpus, seed=config.seed)
    model = Model(vocab, config.mode, enc_config, head_config, rng, pretrained)
    state = AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    best_score, best_epoch, best_params = -np.inf, 0, None
    history, stall = [], 0
    for epoch in range(1, config.max_epochs + 1):
        total_loss, total_tokens = 0.0, 0
        for batch in make_batches(train_corpus, config.batch_size, rng):
            ad.zero_grads(model.params)
            loss = joint_loss(model.forward(batch, rng), batch, vocab, config.mode)
            grads = ad.gradients(loss, model.params)
            adam_step(model.params, grads, state)
            total_loss += float(loss.value)
            total_tokens += sum(len(s) for s in batch)
        metrics = evaluate_dev(model, dev_corpus)
        score = dev_criterion(config.mode, metrics)
        report = EpochReport(epoch, total_loss / max(total_tokens, 1), metrics, score)
        history.append(report)
        if log is not None:
            log(report)
        if score > best_score:
            best_score, best_epoch = score, epoch
            best_params = {k: p.value.copy() for k, p in model.params.items()}
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    if best_params is not None:
        for k, p in model.params.items():
            p.value[...] = best_params[k]
    return TrainResult(model=model, history=history, best_epoch=best_epoch)


@dataclass
class FoldProvenance:
    sentence_index: int
    fold: int
    predicted_by_fold: int
    trained_on: tuple


def fold_spans(n: int, k: int) -> list:
    """Contiguous fold index ranges; the first n % k folds get the extra item."""
    base, extra = divmod(n, k)
    spans, lo = [], 0
    for f in range(k):
        hi = lo + base + (1 if f < extra else 0)
        spans.append((lo, hi))
        lo = hi
    return spans


def jackknife(corpus: list, config: TrainConfig, enc_config: EncoderConfig,
              head_config: HeadConfig | None = None, k: int | None = None) -> tuple:
    """Predict tags for every sentence with a model never trained on its fold.

    Returns (corpus copy with predictions filled, provenance records).
    Order is preserved; `config.mode` decides whether predicted POS or
    supertags are written.
    """
    k = k if k is not None else config.folds
    if k < 2:
        raise ValueError("jackknife: need k >= 2")
    if len(corpus) < k:
        raise ValueError(f"jackknife: corpus of {len(corpus)} sentences is smaller than k={k}")
    spans = fold_spans(len(corpus), k)
    out = [s.copy() for s in corpus]
    provenance = []
    for f, (lo, hi) in enumerate(spans):
        held_out = corpus[lo:hi]
        rest = corpus[:lo] + corpus[hi:]
        trained_on = tuple(g for g in range(k) if g != f)
        result = train(rest, rest, config, enc_config, head_config)
        pred = result.model.predict(held_out)
        for offset, sent in enumerate(pred):
            idx = lo + offset
            if config.mode == MODE_POS:
                for tok, p in zip(out[idx].tokens, sent.tokens):
                    tok.pred_pos = p.pred_pos
            else:
                for tok, p in zip(out[idx].tokens, sent.tokens):
                    tok.stag = p.stag
            provenance.append(FoldProvenance(idx, f, f, trained_on))
    return out, provenance


def shuffle_stag_targets(corpus: list, seed: int) -> list:
    """Globally permute the supertag column; the multiset is preserved."""
    rng = np.random.default_rng(seed)
    flat = [t.stag for s in corpus for t in s.tokens]
    perm = rng.permutation(len(flat))
    shuffled = [flat[i] for i in perm]
    out, pos = [], 0
    for s in corpus:
        copy = s.copy()
        for t in copy.tokens:
            t.stag = shuffled[pos]
            pos += 1
        out.append(copy)
    return out
