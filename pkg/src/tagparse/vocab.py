"""Token/character/tag/relation inventories with reserved ids.

Ids are dense, assigned in first-seen order after the reserved entries,
and survive JSON round trips unchanged.
"""

from __future__ import annotations

import json

__all__ = ["Vocabulary", "PAD", "UNK", "ROOT", "BASE_RELATIONS"]

PAD = "<pad>"
UNK = "<unk>"
ROOT = "<root>"

# deep syntactic roles of substitution sites plus co-head and adjunct labels
BASE_RELATIONS = ["0", "1", "2", "3", "4", "CO", "adj"]


class Vocabulary:
    def __init__(self):
        self.words = {PAD: 0, UNK: 1, ROOT: 2}
        self.chars = {PAD: 0, UNK: 1}
        self.pos = {UNK: 0}
        self.stags = {UNK: 0}
        self.rels = {label: i for i, label in enumerate(BASE_RELATIONS)}

    @classmethod
    def from_corpus(cls, sentences) -> "Vocabulary":
        v = cls()
        for sent in sentences:
            for tok in sent.tokens:
                v._intern(v.words, tok.form)
                for ch in tok.form:
                    v._intern(v.chars, ch)
                v._intern(v.pos, tok.gold_pos)
                if tok.pred_pos is not None:
                    v._intern(v.pos, tok.pred_pos)
                if tok.stag is not None:
                    v._intern(v.stags, tok.stag)
                v._intern(v.rels, tok.rel)
        return v

    @staticmethod
    def _intern(table: dict, key: str) -> int:
        if key not in table:
            table[key] = len(table)
        return table[key]

    # lookup helpers; unseen items map to UNK where one is reserved
    def word_id(self, form: str) -> int:
        return self.words.get(form, self.words[UNK])

    def char_ids(self, form: str) -> list:
        unk = self.chars[UNK]
        return [self.chars.get(ch, unk) for ch in form]

    def pos_id(self, tag: str) -> int:
        return self.pos.get(tag, self.pos[UNK])

    def stag_id(self, tag: str) -> int:
        return self.stags.get(tag, self.stags[UNK])

    def rel_id(self, label: str) -> int:
        if label not in self.rels:
            raise KeyError(f"unknown relation label {label!r}; inventory: {sorted(self.rels)}")
        return self.rels[label]

    def rel_name(self, rel_id: int) -> str:
        return self._inverse(self.rels)[rel_id]

    def pos_name(self, pos_id: int) -> str:
        return self._inverse(self.pos)[pos_id]

    def stag_name(self, stag_id: int) -> str:
        return self._inverse(self.stags)[stag_id]

    @staticmethod
    def _inverse(table: dict) -> dict:
        return {i: s for s, i in table.items()}

    @property
    def n_pos(self) -> int:
        return len(self.pos)

    @property
    def n_stags(self) -> int:
        return len(self.stags)

    @property
    def n_rels(self) -> int:
        return len(self.rels)

    def to_json(self) -> str:
        return json.dumps(
            {
                "words": self.words,
                "chars": self.chars,
                "pos": self.pos,
                "stags": self.stags,
                "rels": self.rels,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        data = json.loads(text)
        v = cls()
        v.words = {k: int(i) for k, i in data["words"].items()}
        v.chars = {k: int(i) for k, i in data["chars"].items()}
        v.pos = {k: int(i) for k, i in data["pos"].items()}
        v.stags = {k: int(i) for k, i in data["stags"].items()}
        v.rels = {k: int(i) for k, i in data["rels"].items()}
        return v
