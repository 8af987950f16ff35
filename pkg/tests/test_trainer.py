"""Trainer: vocabulary, sampling, the SGD step, and full training runs."""

import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import oracles
from embias.errors import DataError, MissingWordsError
from embias.trainer import (
    CbowEmbedder,
    TrainingConfig,
    _draw_negatives,
    build_vocab,
    cbow_step,
    fit_corpus,
    negative_sampling_distribution,
    subsample_keep_probability,
    train,
)

TINY = TrainingConfig(dim=16, window=2, negatives=3, epochs=2, min_count=1, seed=3)


def random_corpus(rng, n_tokens=10_000, n_types=50, sentence_len=10):
    words = [f"t{i}" for i in range(n_types)]
    picks = rng.integers(0, n_types, size=n_tokens)
    sentences = [
        [words[j] for j in picks[i:i + sentence_len]]
        for i in range(0, n_tokens, sentence_len)
    ]
    return sentences


class TestConfig:
    def test_defaults_are_valid(self):
        cfg = TrainingConfig()
        assert cfg.dim == 100 and cfg.window == 5 and cfg.negatives == 5
        assert cfg.epochs == 5 and cfg.min_count == 5

    @pytest.mark.parametrize("field", ["dim", "window", "negatives", "epochs", "min_count"])
    def test_counts_must_be_positive(self, field):
        with pytest.raises(DataError):
            TrainingConfig(**{field: 0})

    def test_lr_ordering_enforced(self):
        with pytest.raises(DataError):
            TrainingConfig(lr_initial=1e-4, lr_min=0.025)
        with pytest.raises(DataError):
            TrainingConfig(lr_min=0.0)

    def test_subsample_threshold_positive(self):
        with pytest.raises(DataError):
            TrainingConfig(subsample_t=0.0)


class TestBuildVocab:
    def test_min_count_one(self):
        vocab = build_vocab([["a", "a", "b"]], min_count=1)
        assert vocab.words == ["a", "b"]
        assert list(vocab.counts) == [2, 1]
        assert vocab.total_tokens == 3

    def test_min_count_two_drops_rare(self):
        vocab = build_vocab([["a", "a", "b"]], min_count=2)
        assert vocab.words == ["a"]
        assert list(vocab.counts) == [2]

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(DataError):
            build_vocab([["a", "b"]], min_count=5)

    def test_order_descending_count_ties_lexicographic(self):
        vocab = build_vocab([["c", "c", "c", "b", "b", "a", "a"]], min_count=1)
        assert vocab.words == ["c", "a", "b"]

    def test_counts_match_naive_oracle_on_random_corpus(self):
        sentences = random_corpus(np.random.default_rng(20))
        vocab = build_vocab(sentences, min_count=1)
        expected = oracles.count_tokens(sentences)
        assert {w: int(c) for w, c in zip(vocab.words, vocab.counts)} == expected

    def test_sampling_cdf_reaches_one(self):
        sentences = random_corpus(np.random.default_rng(21), n_tokens=2000)
        vocab = build_vocab(sentences, min_count=1)
        assert vocab.sampling_cdf[-1] == pytest.approx(1.0, abs=1e-9)
        assert (np.diff(vocab.sampling_cdf) > 0).all()


class TestNegativeDistribution:
    def test_three_to_one_hand_value(self):
        vocab = build_vocab([["a", "a", "a", "b"]], min_count=1)
        probs = negative_sampling_distribution(vocab)
        expected_a = 3 ** 0.75 / (3 ** 0.75 + 1)
        assert probs[0] == pytest.approx(expected_a, abs=1e-12)
        assert probs[0] == pytest.approx(0.6951, abs=1e-4)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_uniform_counts_give_uniform_distribution(self):
        vocab = build_vocab([["a", "b", "c", "a", "b", "c"]], min_count=1)
        probs = negative_sampling_distribution(vocab)
        assert np.allclose(probs, 1 / 3, atol=1e-12)

    def test_single_word_vocab(self):
        vocab = build_vocab([["a", "a"]], min_count=1)
        assert list(negative_sampling_distribution(vocab)) == [1.0]


class TestSubsample:
    def test_at_threshold_kept(self):
        assert subsample_keep_probability(1e-3, 1e-3) == 1.0

    def test_hundred_times_threshold(self):
        assert subsample_keep_probability(0.1, 1e-3) == pytest.approx(0.11, abs=1e-12)

    def test_below_threshold_always_one(self):
        for z in (1e-6, 1e-4, 1e-3):
            assert subsample_keep_probability(z, 1e-3) == 1.0

    def test_monotone_decreasing_above_threshold(self):
        zs = np.linspace(2e-3, 1.0, 40)
        ps = [subsample_keep_probability(z, 1e-3) for z in zs]
        assert all(a >= b for a, b in zip(ps, ps[1:]))

    def test_domain_checks(self):
        with pytest.raises(DataError):
            subsample_keep_probability(0.0, 1e-3)
        with pytest.raises(DataError):
            subsample_keep_probability(1.5, 1e-3)
        with pytest.raises(DataError):
            subsample_keep_probability(0.5, 0.0)


def random_model(rng, n_words=5, dim=4):
    syn0 = rng.normal(scale=0.5, size=(n_words, dim))
    syn1 = rng.normal(scale=0.5, size=(n_words, dim))
    return syn0, syn1


class TestCbowStep:
    def test_zero_lr_is_a_pure_loss_evaluation(self):
        rng = np.random.default_rng(30)
        syn0, syn1 = random_model(rng)
        before0, before1 = syn0.copy(), syn1.copy()
        loss = cbow_step(syn0, syn1, [0, 2], 1, np.array([3, 4]), lr=0.0)
        assert math.isfinite(loss) and loss > 0
        assert np.array_equal(syn0, before0)
        assert np.array_equal(syn1, before1)

    def test_gradient_matches_finite_differences(self):
        # 5-word, 4-dim model; context includes a duplicate index so the
        # accumulated update path is exercised too
        rng = np.random.default_rng(31)
        syn0, syn1 = random_model(rng)
        context = np.array([0, 2, 0])
        center, negatives = 1, np.array([3, 4])

        def loss_at(s0, s1):
            return cbow_step(s0.copy(), s1.copy(), context, center, negatives, lr=0.0)

        # lr = 1 turns the parameter delta into the exact negative gradient
        up0, up1 = syn0.copy(), syn1.copy()
        cbow_step(up0, up1, context, center, negatives, lr=1.0)
        analytic0 = -(up0 - syn0)
        analytic1 = -(up1 - syn1)

        eps = 1e-6
        for analytic, target in ((analytic0, syn0), (analytic1, syn1)):
            numeric = np.zeros_like(target)
            other = syn1 if target is syn0 else syn0
            for i in range(target.shape[0]):
                for j in range(target.shape[1]):
                    probe = target.copy()
                    probe[i, j] += eps
                    hi = loss_at(probe, other) if target is syn0 else loss_at(other, probe)
                    probe[i, j] -= 2 * eps
                    lo = loss_at(probe, other) if target is syn0 else loss_at(other, probe)
                    numeric[i, j] = (hi - lo) / (2 * eps)
            denom = np.linalg.norm(numeric)
            assert np.linalg.norm(analytic - numeric) / denom <= 1e-4

    def test_repeated_steps_converge_monotonically(self):
        rng = np.random.default_rng(32)
        syn0, syn1 = random_model(rng, n_words=6, dim=8)
        context = np.array([0, 2])
        center, negatives = 1, np.array([3, 4, 5])

        def sigma():
            h = syn0[context].mean(axis=0)
            return 1.0 / (1.0 + math.exp(-float(syn1[center] @ h)))

        sigmas = []
        for _ in range(300):
            cbow_step(syn0, syn1, context, center, negatives, lr=0.1)
            sigmas.append(sigma())
        tail = sigmas[50:]
        assert sigmas[-1] > 0.99
        assert all(b >= a - 1e-9 for a, b in zip(tail, tail[1:]))

    def test_loss_decreases_across_repeated_steps(self):
        rng = np.random.default_rng(33)
        syn0, syn1 = random_model(rng)
        context = np.array([0, 2])
        losses = [cbow_step(syn0, syn1, context, 1, np.array([3, 4]), lr=0.05)
                  for _ in range(100)]
        assert losses[-1] < losses[0]


class TestDrawNegatives:
    def test_never_returns_center(self):
        rng = np.random.default_rng(40)
        cdf = np.cumsum([0.9, 0.05, 0.05])  # heavy mass on the excluded word
        for _ in range(200):
            idx = _draw_negatives(rng, cdf, k=5, center=0)
            assert (idx != 0).all()
            assert ((idx >= 0) & (idx < 3)).all()

    def test_respects_distribution_support(self):
        rng = np.random.default_rng(41)
        cdf = np.cumsum([0.5, 0.5])
        draws = np.concatenate([_draw_negatives(rng, cdf, 4, center=0) for _ in range(50)])
        assert set(draws) == {1}


class TestTraining:
    def test_identical_seeds_bit_identical(self):
        sentences = random_corpus(np.random.default_rng(50), n_tokens=2000, n_types=20)
        a = train(sentences, TINY)
        b = train(sentences, TINY)
        assert a.words() == b.words()
        assert np.array_equal(a.matrix, b.matrix)

    def test_different_seeds_differ(self):
        sentences = random_corpus(np.random.default_rng(51), n_tokens=2000, n_types=20)
        a = train(sentences, TINY)
        b = train(sentences, TrainingConfig(**{**TINY.to_dict(), "seed": 4}))
        assert not np.array_equal(a.matrix, b.matrix)

    def test_cluster_corpus_separates(self, cluster_corpus, cluster_run):
        _, cluster_a, cluster_b = cluster_corpus
        emb = cluster_run.embeddings
        rows = lambda ws: np.array([emb.vector(w) for w in ws])
        va, vb = rows(cluster_a), rows(cluster_b)
        unit = lambda m: m / np.linalg.norm(m, axis=1, keepdims=True)
        ua, ub = unit(va), unit(vb)
        intra = (np.triu(ua @ ua.T, 1).sum() + np.triu(ub @ ub.T, 1).sum()) / (
            2 * math.comb(len(cluster_a), 2)
        )
        inter = float((ua @ ub.T).mean())
        assert intra > inter

    def test_epoch_losses_decrease(self, cluster_run):
        losses = cluster_run.epoch_losses
        assert len(losses) == 5
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_metadata_stamped(self, cluster_run, cluster_config):
        meta = cluster_run.embeddings.meta
        assert meta.seed == cluster_config.seed
        assert meta.language == "en"
        assert meta.corpus_version == "raw"
        assert "nondeterministic" not in meta.source

    def test_vectors_finite_and_nonzero(self, cluster_run):
        matrix = cluster_run.embeddings.matrix
        assert np.isfinite(matrix).all()
        assert (np.linalg.norm(matrix.astype(np.float64), axis=1) > 0).all()

    def test_retained_counts_respect_min_count(self):
        sentences = [["a"] * 6 + ["b"] * 5 + ["rare"]]
        run = fit_corpus(sentences, TrainingConfig(dim=8, min_count=5, epochs=1))
        assert set(run.vocabulary.words) == {"a", "b"}
        assert (run.vocabulary.counts >= 5).all()
        assert "rare" not in run.embeddings

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            train([], TINY)

    def test_single_word_vocabulary_rejected(self):
        with pytest.raises(DataError):
            train([["a", "a", "a"]], TrainingConfig(min_count=1))

    def test_min_count_filtering_everything_rejected(self):
        with pytest.raises(DataError):
            train([["a", "b", "c"]], TrainingConfig(min_count=2))

    def test_corpus_file_input(self, tmp_path):
        p = tmp_path / "corpus.txt"
        p.write_text("a b a b\nb a b a\n" * 50, encoding="utf-8")
        emb = train(p, TINY)
        assert set(emb.words()) == {"a", "b"}

    def test_learning_rate_schedule(self, monkeypatch):
        import embias.trainer as trainer_mod

        seen = []
        real_step = trainer_mod.cbow_step

        def recording_step(s0, s1, context, center, negatives, lr):
            seen.append(lr)
            return real_step(s0, s1, context, center, negatives, lr)

        monkeypatch.setattr(trainer_mod, "cbow_step", recording_step)
        sentences = random_corpus(np.random.default_rng(52), n_tokens=1500, n_types=15)
        # subsampling off so the very first sentence produces a step: the lr
        # for it is computed before any token is consumed, i.e. lr_initial
        cfg = TrainingConfig(dim=8, window=2, negatives=2, epochs=3, min_count=1,
                             subsample_t=1.0, seed=0)
        fit_corpus(sentences, cfg)

        assert seen, "no update steps recorded"
        assert seen[0] == cfg.lr_initial
        assert all(b <= a + 1e-15 for a, b in zip(seen, seen[1:]))
        assert all(lr >= cfg.lr_min - 1e-15 for lr in seen)

    def test_parallel_mode_flags_nondeterminism(self, monkeypatch):
        monkeypatch.setenv("EMBIAS_THREADS", "2")
        sentences = random_corpus(np.random.default_rng(53), n_tokens=1000, n_types=10)
        run = fit_corpus(sentences, TINY, n_workers=2)
        assert "nondeterministic" in run.embeddings.meta.source
        assert np.isfinite(run.embeddings.matrix).all()

    def test_loss_positive(self, cluster_run):
        assert all(l > 0 for l in cluster_run.epoch_losses)


class TestEstimator:
    def corpus(self):
        return random_corpus(np.random.default_rng(60), n_tokens=1500, n_types=12)

    def params(self):
        return dict(dim=8, window=2, negatives=2, epochs=1, min_count=1, seed=1)

    def test_get_params_roundtrip(self):
        est = CbowEmbedder(**self.params())
        got = est.get_params()
        for k, v in self.params().items():
            assert got[k] == v
        assert clone(est).get_params() == got

    def test_set_params(self):
        est = CbowEmbedder().set_params(dim=12, seed=9)
        assert est.dim == 12 and est.seed == 9

    def test_unfitted_transform_rejected(self):
        with pytest.raises(NotFittedError):
            CbowEmbedder().transform(["a"])

    def test_fit_then_transform(self):
        est = CbowEmbedder(**self.params())
        assert est.fit(self.corpus()) is est
        vectors = est.transform(["t0", "t1"])
        assert vectors.shape == (2, 8)
        assert len(est.epoch_losses_) == 1
        assert "t0" in est.vocabulary_.index

    def test_transform_unknown_word_rejected(self):
        est = CbowEmbedder(**self.params()).fit(self.corpus())
        with pytest.raises(MissingWordsError):
            est.transform(["definitely-not-here"])

    def test_fit_matches_functional_api(self):
        est = CbowEmbedder(**self.params()).fit(self.corpus())
        direct = train(self.corpus(), TrainingConfig(**self.params()))
        assert np.array_equal(est.embedding_.matrix, direct.matrix)
