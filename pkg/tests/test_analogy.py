"""Analogy evaluation: constructed-embedding exactness and chance behavior."""

import numpy as np
import pytest

from tagparse.analogy import (
    AnalogyEquation,
    analogy_eval,
    build_consistent_embeddings,
    read_equations,
    top_frequent_supertags,
)
from tagparse.corpus import Sentence, Token
from tagparse.vocab import Vocabulary


def test_consistent_construction_is_perfect():
    emb, equations, candidates = build_consistent_embeddings(8, n_extra=20)
    pct, avg_rank = analogy_eval(emb, equations, candidates)
    assert pct == 100.0
    assert avg_rank == 1.0


def test_random_embeddings_score_near_chance():
    rng = np.random.default_rng(0)
    n_tags, trials, hits, total = 40, 300, 0, 0
    for _ in range(trials):
        emb = rng.normal(size=(n_tags, 16))
        ids = rng.choice(n_tags, size=4, replace=False)
        eq = AnalogyEquation(*map(int, ids))
        pct, _ = analogy_eval(emb, [eq], list(range(n_tags)))
        hits += pct == 100.0
        total += 1
    chance = 1 / (n_tags - 3)
    sigma = np.sqrt(chance * (1 - chance) / total)
    assert abs(hits / total - chance) < 3 * sigma + 1e-12


def test_scale_invariance():
    rng = np.random.default_rng(1)
    emb = rng.normal(size=(20, 8))
    eqs = [AnalogyEquation(0, 1, 2, 5), AnalogyEquation(3, 4, 6, 7)]
    base = analogy_eval(emb, eqs, list(range(20)))
    scaled = analogy_eval(emb * 37.5, eqs, list(range(20)))
    assert base == scaled


def test_answer_excluded_from_pool_rejected():
    emb, equations, candidates = build_consistent_embeddings(2)
    pool = [i for i in candidates if i != equations[0].d]
    with pytest.raises(ValueError):
        analogy_eval(emb, equations, pool)


def test_zero_norm_candidate_ranks_last_with_warning():
    emb, equations, candidates = build_consistent_embeddings(2, n_extra=3)
    emb[equations[0].d] = 0.0  # zero out the answer row
    with pytest.warns(UserWarning):
        pct, avg_rank = analogy_eval(emb, [equations[0]], candidates)
    assert pct == 0.0
    assert avg_rank == len(candidates) - 3


def test_top_frequent_supertags_orders_by_count():
    sents = [Sentence([Token("a", "DT", None, "tA", 0, "root"),
                       Token("b", "NN", None, "tB", 1, "adj"),
                       Token("c", "NN", None, "tB", 1, "adj")])]
    vocab = Vocabulary.from_corpus(sents)
    top = top_frequent_supertags(sents, vocab, k=2)
    assert top[0] == vocab.stags["tB"]
    assert top[1] == vocab.stags["tA"]


def test_read_equations(tmp_path):
    sents = [Sentence([Token(w, "NN", None, t, 0, "root")])
             for w, t in [("a", "t27"), ("b", "t81"), ("c", "t109"), ("d", "t99")]]
    vocab = Vocabulary.from_corpus(sents)
    path = tmp_path / "eq.txt"
    path.write_text("# analogy list\nt27 t81 t109 t99\n", encoding="utf-8")
    (eq,) = read_equations(path, vocab)
    assert eq == AnalogyEquation(vocab.stags["t27"], vocab.stags["t81"],
                                 vocab.stags["t109"], vocab.stags["t99"])
    path.write_text("t27 t81\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_equations(path, vocab)
