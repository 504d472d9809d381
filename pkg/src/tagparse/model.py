"""Full model: encoder + scoring heads for one mode, with save/load.

Forward passes run over buckets of same-length sentences so the LSTM loop
is shared across the batch. Tagger modes see T rows per sentence; parser
modes see T+1 with the zero ROOT row at index 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .corpus import Sentence
from .decoder import ScoreMatrix, assign_labels, chu_liu_edmonds, enforce_tree, greedy_heads
from .encoder import (
    MODE_JOINT_POS_STAG,
    MODE_JOINT_STAG,
    MODE_POS,
    MODE_STAG,
    PARSER_MODES,
    EncoderConfig,
    bilstm_stack,
    char_cnn,
    init_encoder_params,
    make_dropout_masks,
)
from .heads import (
    HeadConfig,
    HeadFeatures,
    arc_logit_matrix,
    head_features,
    init_head_params,
    label_logits_pairs,
    pos_logits,
    stag_logits,
)
from .serialize import load_tensors, save_tensors
from .vocab import Vocabulary

__all__ = ["Model", "BatchOutputs"]


@dataclass
class BatchOutputs:
    """Per-bucket head outputs, aligned to the sentences that produced them."""

    sentences: list
    arc_logits: list | None = None    # per sentence: Tensor [T, T+1]
    label_logits: Tensor | None = None  # [total tokens, r], sentence-major order
    pos_logits: Tensor | None = None    # [total tokens, n_pos]
    stag_logits: Tensor | None = None   # [total tokens, n_stags]
    rel_dep: Tensor | None = None       # projection rows kept for re-labeling
    rel_head: Tensor | None = None      # decoded arcs at prediction time


class Model:
    def __init__(self, vocab: Vocabulary, mode: str, enc_config: EncoderConfig,
                 head_config: HeadConfig, rng: np.random.Generator,
                 pretrained: dict | None = None):
        self.vocab = vocab
        self.mode = mode
        self.enc_config = enc_config
        self.head_config = head_config
        self.params = init_encoder_params(rng, vocab, enc_config, mode, pretrained)
        self.params.update(
            init_head_params(rng, head_config, feat_dim=2 * enc_config.hidden,
                             n_pos=vocab.n_pos, n_stags=vocab.n_stags,
                             n_rels=vocab.n_rels, mode=mode)
        )

    @property
    def with_root(self) -> bool:
        return self.mode in PARSER_MODES

    # ----- input assembly -------------------------------------------------

    def _token_pos_name(self, tok) -> str:
        return tok.pred_pos if tok.pred_pos is not None else tok.gold_pos

    def _char_table(self, forms: list) -> tuple:
        """Char-CNN vector per unique form; returns (Tensor [U, F], index map)."""
        unique = sorted(set(forms))
        rows = [
            ad.reshape(
                char_cnn(self.vocab.char_ids(f), self.params["emb.char"],
                         self.params["cnn.filters"], self.params["cnn.bias"]),
                (1, -1),
            )
            for f in unique
        ]
        return ad.concat(rows, axis=0), {f: i for i, f in enumerate(unique)}

    def _input_batch(self, sentences: list) -> Tensor:
        batch, seq = len(sentences), len(sentences[0])
        forms = [t.form for s in sentences for t in s.tokens]
        char_table, char_idx = self._char_table(forms)
        word_ids = np.array([[self.vocab.word_id(t.form) for t in s.tokens]
                             for s in sentences])
        parts = [ad.embedding_lookup(self.params["emb.word"], word_ids)]
        if "emb.pos" in self.params:
            pos_ids = np.array([[self.vocab.pos_id(self._token_pos_name(t))
                                 for t in s.tokens] for s in sentences])
            parts.append(ad.embedding_lookup(self.params["emb.pos"], pos_ids))
        if "emb.stag" in self.params:
            stag_ids = np.array([[self.vocab.stag_id(t.stag or "") for t in s.tokens]
                                 for s in sentences])
            parts.append(ad.embedding_lookup(self.params["emb.stag"], stag_ids))
        char_rows = np.array([[char_idx[t.form] for t in s.tokens] for s in sentences])
        parts.append(ad.embedding_lookup(char_table, char_rows))
        mat = ad.concat(parts, axis=2)  # [B, T, d_in]
        if self.with_root:
            root = Tensor(np.zeros((batch, 1, mat.shape[2])))
            mat = ad.concat([root, mat], axis=1)
        del seq
        return mat

    # ----- forward --------------------------------------------------------

    def forward(self, sentences: list, rng: np.random.Generator | None = None) -> BatchOutputs:
        """Head outputs for one bucket; pass `rng` to enable training dropout."""
        if not sentences:
            raise ValueError("forward: empty bucket")
        lengths = {len(s) for s in sentences}
        if len(lengths) != 1:
            raise ValueError(f"forward: bucket mixes sentence lengths {sorted(lengths)}")
        (seq,) = lengths
        if seq == 0:
            raise ValueError("forward: empty sentence")
        batch = len(sentences)
        rows = seq + 1 if self.with_root else seq
        inputs = self._input_batch(sentences)
        masks = None
        mlp_mask = None
        if rng is not None:
            masks = make_dropout_masks(rng, self.enc_config, batch, rows,
                                       self.enc_config.input_dim(self.mode))
            p = self.head_config.mlp_dropout
            if p > 0:
                mlp_mask = (rng.random((batch * rows, 2 * self.enc_config.hidden)) >= p) / (1 - p)
        encoded = bilstm_stack(inputs, self.params, self.enc_config, masks)
        flat = ad.reshape(encoded, (batch * rows, 2 * self.enc_config.hidden))
        feats = head_features(flat, self.params, mlp_mask)
        out = BatchOutputs(sentences=list(sentences))
        if self.mode in PARSER_MODES:
            out.arc_logits = [
                arc_logit_matrix(self._sentence_feats(feats, b, rows), self.params)
                for b in range(batch)
            ]
            out.rel_dep, out.rel_head = feats.rel_dep, feats.rel_head
            head_rows = self._head_rows(sentences, rows, rng is not None, out.arc_logits)
            dep_rows = np.concatenate(
                [b * rows + 1 + np.arange(seq) for b in range(batch)]
            )
            out.label_logits = label_logits_pairs(
                ad.embedding_lookup(feats.rel_dep, dep_rows),
                ad.embedding_lookup(feats.rel_head, dep_rows),
                ad.embedding_lookup(feats.rel_head, head_rows),
                self.params,
                self.head_config.rel_affine_uses_dep,
            )
        token_rows = (
            np.concatenate([b * rows + 1 + np.arange(seq) for b in range(batch)])
            if self.with_root
            else np.arange(batch * rows)
        )
        if self.mode in (MODE_POS, MODE_JOINT_POS_STAG):
            out.pos_logits = pos_logits(
                HeadFeatures(pos=ad.embedding_lookup(feats.pos, token_rows)), self.params
            )
        if self.mode in (MODE_STAG, MODE_JOINT_STAG, MODE_JOINT_POS_STAG):
            out.stag_logits = stag_logits(
                HeadFeatures(stag=ad.embedding_lookup(feats.stag, token_rows)), self.params
            )
        return out

    @staticmethod
    def _sentence_feats(feats: HeadFeatures, b: int, rows: int) -> HeadFeatures:
        lo, hi = b * rows, (b + 1) * rows
        return HeadFeatures(
            arc_dep=ad.slice_axis(feats.arc_dep, 0, lo, hi),
            arc_head=ad.slice_axis(feats.arc_head, 0, lo, hi),
        )

    def _head_rows(self, sentences, rows, training, arc_logits) -> np.ndarray:
        """Global feature-row index of each token's head for label scoring.

        Training conditions on gold heads when `label_on_gold_heads` is on;
        otherwise (and always at inference) on the current arc argmax.
        """
        use_gold = training and self.head_config.label_on_gold_heads
        out = []
        for b, sent in enumerate(sentences):
            if use_gold:
                heads = [t.head for t in sent.tokens]
            else:
                heads = list(np.argmax(arc_logits[b].value, axis=1))
            out.append(b * rows + np.asarray(heads, dtype=np.int64))
        return np.concatenate(out)

    # ----- prediction -----------------------------------------------------

    def predict(self, sentences: list, use_mst: bool = False) -> list:
        """Fill predicted columns on copies of the input sentences."""
        by_len: dict = {}
        for pos, sent in enumerate(sentences):
            by_len.setdefault(len(sent), []).append(pos)
        results: list = [None] * len(sentences)
        for _, positions in sorted(by_len.items()):
            bucket = [sentences[p] for p in positions]
            outs = self.forward(bucket)
            for local, pos in enumerate(positions):
                results[pos] = self._fill_sentence(bucket[local], outs, local)
                if self.mode in PARSER_MODES:
                    self._fill_parse(results[pos], outs, local, use_mst)
        return results

    def _fill_sentence(self, sent, outs: BatchOutputs, local: int) -> Sentence:
        filled = sent.copy()
        seq = len(sent)
        lo = local * seq
        if outs.pos_logits is not None:
            ids = np.argmax(outs.pos_logits.value[lo : lo + seq], axis=1)
            names = self.vocab._inverse(self.vocab.pos)
            for tok, pid in zip(filled.tokens, ids):
                tok.pred_pos = names[int(pid)]
        if outs.stag_logits is not None:
            ids = np.argmax(outs.stag_logits.value[lo : lo + seq], axis=1)
            names = self.vocab._inverse(self.vocab.stags)
            for tok, sid in zip(filled.tokens, ids):
                tok.stag = names[int(sid)]
        return filled

    def _fill_parse(self, filled: Sentence, outs: BatchOutputs, local: int,
                    use_mst: bool) -> None:
        seq = len(filled)
        probs = ad.softmax(outs.arc_logits[local], axis=-1).value
        sm = ScoreMatrix.from_distributions(probs)
        heads = chu_liu_edmonds(sm) if use_mst else enforce_tree(sm, greedy_heads(sm))
        # labels condition on the final decoded head of each token
        rows = seq + 1
        lo = local * rows
        dep_rows = lo + 1 + np.arange(seq)
        head_rows = lo + np.asarray(heads[1:], dtype=np.int64)
        logits = label_logits_pairs(
            ad.embedding_lookup(outs.rel_dep, dep_rows),
            ad.embedding_lookup(outs.rel_head, dep_rows),
            ad.embedding_lookup(outs.rel_head, head_rows),
            self.params,
            self.head_config.rel_affine_uses_dep,
        )
        labels = assign_labels(heads, ad.softmax(logits, axis=-1).value)
        names = self.vocab._inverse(self.vocab.rels)
        for i, tok in enumerate(filled.tokens, start=1):
            tok.head = int(heads[i])
            tok.rel = names[int(labels[i])]

    # ----- persistence ------------------------------------------------------

    def save(self, path) -> None:
        meta = {
            "mode": self.mode,
            "encoder": asdict(self.enc_config),
            "heads": asdict(self.head_config),
            "vocab": self.vocab.to_json(),
        }
        save_tensors(path, self.params, meta)

    @classmethod
    def load(cls, path) -> "Model":
        tensors, meta = load_tensors(path)
        vocab = Vocabulary.from_json(meta["vocab"])
        enc_config = EncoderConfig(**meta["encoder"])
        head_config = HeadConfig(**meta["heads"])
        model = cls.__new__(cls)
        model.vocab = vocab
        model.mode = meta["mode"]
        model.enc_config = enc_config
        model.head_config = head_config
        model.params = {k: ad.parameter(v) for k, v in tensors.items()}
        return model
