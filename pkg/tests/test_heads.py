"""Scoring-head checks against direct loop transcriptions of the equations."""

import numpy as np
import pytest

import tagparse.autodiff as ad
from tagparse.autodiff import Tensor
from tagparse.heads import (
    HeadConfig,
    HeadFeatures,
    arc_distribution,
    arc_logit_matrix,
    init_head_params,
    head_features,
    label_distribution,
    label_logits,
    pos_distribution,
    stag_distribution,
)


def softmax_np(x):
    e = np.exp(x - x.max())
    return e / e.sum()


def make_feats(rng, n_plus_1, d_arc=None, d_rel=None, d_pos=None, d_stag=None):
    f = HeadFeatures()
    if d_arc:
        f.arc_dep = Tensor(rng.normal(size=(n_plus_1, d_arc)))
        f.arc_head = Tensor(rng.normal(size=(n_plus_1, d_arc)))
    if d_rel:
        f.rel_dep = Tensor(rng.normal(size=(n_plus_1, d_rel)))
        f.rel_head = Tensor(rng.normal(size=(n_plus_1, d_rel)))
    if d_pos:
        f.pos = Tensor(rng.normal(size=(n_plus_1, d_pos)))
    if d_stag:
        f.stag = Tensor(rng.normal(size=(n_plus_1, d_stag)))
    return f


class TestArcScores:
    def test_zero_params_give_uniform(self):
        rng = np.random.default_rng(0)
        feats = make_feats(rng, 6, d_arc=5)
        params = {"biaffine.W_arc": Tensor(np.zeros((5, 5))),
                  "biaffine.b_arc": Tensor(np.zeros(5))}
        s = arc_distribution(feats, 2, params)
        np.testing.assert_allclose(s.value, np.full(6, 1 / 6), atol=1e-15)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        feats = make_feats(rng, 7, d_arc=4)
        params = {"biaffine.W_arc": Tensor(rng.normal(size=(4, 4))),
                  "biaffine.b_arc": Tensor(rng.normal(size=4))}
        for i in range(1, 7):
            assert abs(arc_distribution(feats, i, params).value.sum() - 1.0) < 1e-9

    def test_root_rejected(self):
        rng = np.random.default_rng(2)
        feats = make_feats(rng, 4, d_arc=3)
        params = {"biaffine.W_arc": Tensor(np.eye(3)), "biaffine.b_arc": Tensor(np.zeros(3))}
        with pytest.raises(ValueError):
            arc_distribution(feats, 0, params)

    @pytest.mark.parametrize("trial", range(5))
    def test_matches_direct_loop(self, trial):
        # 5-token sentence, ROOT included: H is 6 x d
        rng = np.random.default_rng(10 + trial)
        d = 4
        feats = make_feats(rng, 6, d_arc=d)
        w = rng.normal(size=(d, d))
        b = rng.normal(size=d)
        params = {"biaffine.W_arc": Tensor(w), "biaffine.b_arc": Tensor(b)}
        H = feats.arc_head.value
        D = feats.arc_dep.value
        for i in range(1, 6):
            scores = np.array([H[j] @ (w @ D[i]) + H[j] @ b for j in range(6)])
            want = softmax_np(scores)
            got = arc_distribution(feats, i, params).value
            np.testing.assert_allclose(got, want, atol=1e-12, rtol=0)
            got_mat = ad.softmax(arc_logit_matrix(feats, params), axis=-1).value
            np.testing.assert_allclose(got_mat[i - 1], want, atol=1e-12, rtol=0)

    def test_permuting_candidates_permutes_distribution(self):
        rng = np.random.default_rng(3)
        feats = make_feats(rng, 6, d_arc=4)
        params = {"biaffine.W_arc": Tensor(rng.normal(size=(4, 4))),
                  "biaffine.b_arc": Tensor(rng.normal(size=4))}
        base = arc_distribution(feats, 2, params).value
        perm = np.array([0, 3, 2, 5, 4, 1])  # fixes ROOT, shuffles the rest
        permuted = HeadFeatures(arc_dep=feats.arc_dep,
                                arc_head=Tensor(feats.arc_head.value[perm]))
        shuffled = arc_distribution(permuted, 2, params).value
        np.testing.assert_allclose(shuffled, base[perm], atol=1e-12)

    def test_head_independent_score_shift_keeps_argmax(self):
        rng = np.random.default_rng(4)
        feats = make_feats(rng, 6, d_arc=4)
        params = {"biaffine.W_arc": Tensor(rng.normal(size=(4, 4))),
                  "biaffine.b_arc": Tensor(rng.normal(size=4))}
        logits = arc_logit_matrix(feats, params).value
        shifted = logits + 7.5  # same constant for every candidate head
        assert np.array_equal(np.argmax(logits, axis=1), np.argmax(shifted, axis=1))
        np.testing.assert_allclose(
            np.apply_along_axis(softmax_np, 1, logits),
            np.apply_along_axis(softmax_np, 1, shifted),
            atol=1e-9,
        )


class TestLabelScores:
    def make_params(self, rng, d_rel, r, zero=False):
        def val(shape):
            return np.zeros(shape) if zero else rng.normal(size=shape)

        return {"rel.U": Tensor(val((d_rel, d_rel, r))),
                "rel.W": Tensor(val((r, d_rel))),
                "rel.b": Tensor(np.zeros(r))}

    def test_one_hot_bias_dominates(self):
        rng = np.random.default_rng(5)
        feats = make_feats(rng, 5, d_rel=4)
        params = self.make_params(rng, 4, 3, zero=True)
        params["rel.b"] = Tensor(np.array([0.0, 10.0, 0.0]))
        for i in range(1, 5):
            l = label_distribution(i, 0, feats, params)
            assert np.argmax(l.value) == 1

    def test_sums_to_one(self):
        rng = np.random.default_rng(6)
        feats = make_feats(rng, 5, d_rel=4)
        params = self.make_params(rng, 4, 3)
        assert abs(label_distribution(2, 4, feats, params).value.sum() - 1.0) < 1e-9

    def test_head_out_of_range_rejected(self):
        rng = np.random.default_rng(7)
        feats = make_feats(rng, 5, d_rel=4)
        params = self.make_params(rng, 4, 3)
        with pytest.raises(IndexError):
            label_distribution(2, 9, feats, params)

    @pytest.mark.parametrize("uses_dep", [False, True])
    @pytest.mark.parametrize("trial", range(5))
    def test_matches_triple_loop_oracle(self, uses_dep, trial):
        rng = np.random.default_rng(30 + trial)
        d_rel, r = 4, 3
        feats = make_feats(rng, 5, d_rel=d_rel)
        params = self.make_params(rng, d_rel, r)
        params["rel.b"] = Tensor(rng.normal(size=r))
        U, W, b = params["rel.U"].value, params["rel.W"].value, params["rel.b"].value
        RD, RH = feats.rel_dep.value, feats.rel_head.value
        for i in range(1, 5):
            p_i = (i + 1) % 5
            scores = np.zeros(r)
            for k in range(r):
                bilinear = 0.0
                for a in range(d_rel):
                    for c in range(d_rel):
                        bilinear += RH[p_i, a] * U[a, c, k] * RD[i, c]
                first = RD[i] if uses_dep else RH[i]
                scores[k] = bilinear + W[k] @ (first + RH[p_i]) + b[k]
            want = softmax_np(scores)
            got = label_distribution(i, p_i, feats, params, rel_affine_uses_dep=uses_dep)
            np.testing.assert_allclose(got.value, want, atol=1e-12, rtol=0)


class TestTagHeads:
    def test_zero_weights_give_uniform(self):
        rng = np.random.default_rng(8)
        feats = make_feats(rng, 4, d_pos=5, d_stag=5)
        params = {"out.pos.W": Tensor(np.zeros((6, 5))), "out.pos.b": Tensor(np.zeros(6)),
                  "out.stag.W": Tensor(np.zeros((9, 5))), "out.stag.b": Tensor(np.zeros(9))}
        np.testing.assert_allclose(pos_distribution(feats, params).value, 1 / 6, atol=1e-15)
        np.testing.assert_allclose(stag_distribution(feats, params).value, 1 / 9, atol=1e-15)

    def test_temperature_drives_max_to_one(self):
        rng = np.random.default_rng(9)
        feats = make_feats(rng, 4, d_pos=5)
        w = rng.normal(size=(6, 5))
        for scale, bound in [(1.0, 0.999), (1000.0, 1e-9)]:
            params = {"out.pos.W": Tensor(w * scale), "out.pos.b": Tensor(np.zeros(6))}
            probs = pos_distribution(feats, params).value
            assert np.all(probs.max(axis=1) > 1.0 - bound) or scale == 1.0
        params = {"out.pos.W": Tensor(w * 1000.0), "out.pos.b": Tensor(np.zeros(6))}
        assert np.all(pos_distribution(feats, params).value.max(axis=1) > 1 - 1e-9)

    @pytest.mark.parametrize("trial", range(5))
    def test_matches_transcription_oracle(self, trial):
        rng = np.random.default_rng(40 + trial)
        feats = make_feats(rng, 4, d_pos=5, d_stag=3)
        params = {"out.pos.W": Tensor(rng.normal(size=(6, 5))),
                  "out.pos.b": Tensor(rng.normal(size=6)),
                  "out.stag.W": Tensor(rng.normal(size=(7, 3))),
                  "out.stag.b": Tensor(rng.normal(size=7))}
        got_pos = pos_distribution(feats, params).value
        got_stag = stag_distribution(feats, params).value
        for k in range(4):
            want = softmax_np(params["out.pos.W"].value @ feats.pos.value[k]
                              + params["out.pos.b"].value)
            np.testing.assert_allclose(got_pos[k], want, atol=1e-12, rtol=0)
            want = softmax_np(params["out.stag.W"].value @ feats.stag.value[k]
                              + params["out.stag.b"].value)
            np.testing.assert_allclose(got_stag[k], want, atol=1e-12, rtol=0)


def test_all_outputs_finite_on_finite_inputs():
    rng = np.random.default_rng(50)
    config = HeadConfig(d_arc=6, d_rel=4, d_pos=5, d_stag=5)
    params = init_head_params(rng, config, feat_dim=8, n_pos=5, n_stags=7, n_rels=4,
                              mode="joint-pos-stag")
    encoded = Tensor(rng.normal(size=(5, 8)) * 100)
    feats = head_features(encoded, params)
    assert np.all(np.isfinite(arc_logit_matrix(feats, params).value))
    assert np.all(np.isfinite(label_logits(feats, [0, 2, 1, 0], params).value))
    assert np.all(np.isfinite(pos_distribution(feats, params).value))
    assert np.all(np.isfinite(stag_distribution(feats, params).value))


def test_mlp_widths_match_config():
    rng = np.random.default_rng(51)
    config = HeadConfig()
    params = init_head_params(rng, config, feat_dim=16, n_pos=5, n_stags=7, n_rels=4,
                              mode="joint-pos-stag")
    assert params["mlp.arc_dep.W"].shape == (500, 16)
    assert params["mlp.rel_head.W"].shape == (100, 16)
    assert params["mlp.pos.W"].shape == (500, 16)
    assert params["mlp.stag.W"].shape == (500, 16)
    assert params["rel.U"].shape == (100, 100, 4)
