"""Continuous bag-of-words embedding trainer with negative sampling.

The model keeps two matrices: input vectors (one per vocabulary word, the
exported embeddings) and output vectors (the softmax side, discarded at the
end).  For each center word its context vectors are averaged into h, and the
center plus k sampled negatives are scored against h:

    loss = -log sigmoid(u_center . h) - sum_k log sigmoid(-u_k . h)

Gradients are exact: each output vector moves by lr * (label - sigmoid) * h,
and every context input vector receives the averaged gradient, i.e. the full
gradient with respect to h divided by the context size.

Training follows the familiar word2vec recipe: words rarer than min_count
are dropped; frequent words are randomly subsampled; the context window
shrinks uniformly per position; negatives come from the unigram^0.75
distribution, resampled if they collide with the center word; the learning
rate decays linearly from lr_initial to lr_min over all planned token scans.
Single-threaded training is bit-deterministic for a fixed (corpus, config).
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .embeddings import EmbeddingMeta, EmbeddingSet, lookup_all
from .errors import DataError
from .parallel import resolve_workers

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters; defaults follow the common word2vec baseline."""

    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_min: float = 1e-4
    min_count: int = 5
    subsample_t: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not (self.lr_initial > self.lr_min > 0):
            raise DataError(
                f"need lr_initial > lr_min > 0, got {self.lr_initial} and {self.lr_min}"
            )
        if self.subsample_t <= 0:
            raise DataError(f"subsample_t must be > 0, got {self.subsample_t}")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim, "window": self.window, "negatives": self.negatives,
            "epochs": self.epochs, "lr_initial": self.lr_initial, "lr_min": self.lr_min,
            "min_count": self.min_count, "subsample_t": self.subsample_t, "seed": self.seed,
        }


@dataclass
class Vocabulary:
    """Retained words ordered by descending count (ties lexicographic), with
    the cumulative negative-sampling table."""

    words: list[str]
    counts: np.ndarray
    total_tokens: int
    index: dict[str, int]
    sampling_cdf: np.ndarray

    def __len__(self) -> int:
        return len(self.words)


def build_vocab(sentences: Iterable[Sequence[str]], min_count: int = 5) -> Vocabulary:
    """Count tokens and keep words occurring at least min_count times."""
    counter = Counter()
    for sent in sentences:
        counter.update(sent)
    kept = [(w, c) for w, c in counter.items() if c >= min_count]
    if not kept:
        raise DataError(
            f"no words occur at least min_count={min_count} times; vocabulary is empty"
        )
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in kept]
    counts = np.array([c for _, c in kept], dtype=np.int64)
    probs = _unigram_probs(counts)
    return Vocabulary(
        words=words,
        counts=counts,
        total_tokens=int(counts.sum()),
        index={w: i for i, w in enumerate(words)},
        sampling_cdf=np.cumsum(probs),
    )


def _unigram_probs(counts: np.ndarray) -> np.ndarray:
    weights = counts.astype(np.float64) ** 0.75
    return weights / weights.sum()


def negative_sampling_distribution(vocab: Vocabulary) -> np.ndarray:
    """P(w) proportional to count(w)^0.75, normalized over the vocabulary."""
    return _unigram_probs(vocab.counts)


def subsample_keep_probability(z: float, t: float) -> float:
    """Keep probability for a word of relative frequency z at threshold t:
    min(1, (sqrt(z/t) + 1) * (t/z)).  Words at or below t are always kept."""
    if not (0 < z <= 1):
        raise DataError(f"relative frequency must be in (0, 1], got {z}")
    if t <= 0:
        raise DataError(f"subsample threshold must be > 0, got {t}")
    return min(1.0, (np.sqrt(z / t) + 1.0) * (t / z))


def cbow_step(
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    context: np.ndarray,
    center: int,
    negatives: np.ndarray,
    lr: float,
) -> float:
    """One SGD step on a (context, center) pair; updates both matrices in
    place and returns the loss contribution.

    With lr = 0 the parameters are untouched; with lr = 1 the parameter
    change equals the exact negative gradient, which is what the
    finite-difference tests probe.
    """
    context = np.asarray(context, dtype=np.intp)
    negatives = np.asarray(negatives, dtype=np.intp)
    h = input_vectors[context].mean(axis=0)
    out_idx = np.concatenate(([center], negatives))
    u = output_vectors[out_idx]
    scores = u @ h
    labels = np.zeros(len(out_idx), dtype=scores.dtype)
    labels[0] = 1.0
    # -log sigmoid(x) = log(1 + e^-x), computed without overflow
    loss = float(np.logaddexp(0.0, -scores[0]) + np.logaddexp(0.0, scores[1:]).sum())
    if lr != 0.0:
        g = lr * (labels - expit(scores))
        grad_h = g @ u  # uses the pre-update output vectors
        np.add.at(output_vectors, out_idx, g[:, None] * h[None, :])
        np.add.at(input_vectors, context, grad_h / len(context))
    return loss


def _draw_negatives(rng: np.random.Generator, cdf: np.ndarray, k: int, center: int) -> np.ndarray:
    """k indices from the sampling distribution, never the center word."""
    top = len(cdf) - 1
    idx = np.minimum(np.searchsorted(cdf, rng.random(k), side="right"), top)
    collided = idx == center
    while collided.any():
        redrawn = np.minimum(
            np.searchsorted(cdf, rng.random(int(collided.sum())), side="right"), top
        )
        idx[collided] = redrawn
        collided = idx == center
    return idx


def _train_worker(
    syn0: np.ndarray,
    syn1: np.ndarray,
    sentences: list[np.ndarray],
    keep_prob: np.ndarray,
    cdf: np.ndarray,
    config: TrainingConfig,
    rng: np.random.Generator,
) -> list[float]:
    """Run all epochs over one sentence shard; returns mean loss per epoch.

    Draw order per sentence is fixed (subsampling uniforms, then per kept
    position one window width and one negatives batch), making the whole
    pass a pure function of the RNG stream.
    """
    total_planned = config.epochs * sum(len(s) for s in sentences)
    lr_span = config.lr_initial - config.lr_min
    processed = 0
    epoch_losses = []
    for _ in range(config.epochs):
        loss_sum = 0.0
        steps = 0
        for sent in sentences:
            lr = config.lr_initial - lr_span * (processed / total_planned)
            processed += len(sent)
            kept = sent[rng.random(len(sent)) < keep_prob[sent]]
            for i in range(len(kept)):
                b = int(rng.integers(1, config.window + 1))
                context = np.concatenate((kept[max(0, i - b):i], kept[i + 1:i + b + 1]))
                if len(context) == 0:
                    continue
                center = int(kept[i])
                negatives = _draw_negatives(rng, cdf, config.negatives, center)
                loss_sum += cbow_step(syn0, syn1, context, center, negatives, lr)
                steps += 1
        epoch_losses.append(loss_sum / steps if steps else 0.0)
    return epoch_losses


def _read_sentences(corpus) -> list[list[str]]:
    if isinstance(corpus, (str, Path, os.PathLike)):
        with open(corpus, "r", encoding="utf-8") as fh:
            return [line.split() for line in fh if line.split()]
    return [list(sent) for sent in corpus if sent]


@dataclass
class TrainingRun:
    """A trained embedding set together with its per-epoch mean losses."""

    embeddings: EmbeddingSet
    epoch_losses: list[float]
    vocabulary: Vocabulary


def fit_corpus(
    corpus,
    config: TrainingConfig | None = None,
    language: str | None = None,
    corpus_version: str | None = None,
    n_workers: int | None = None,
) -> TrainingRun:
    """Train on a corpus (path or iterable of token sequences).

    The default single-worker mode is deterministic.  More workers shard
    sentences with unsynchronized shared updates; results then vary between
    runs, which is stamped into the embedding metadata.
    """
    config = config or TrainingConfig()
    sentences = _read_sentences(corpus)
    if not sentences:
        raise DataError("corpus is empty")
    vocab = build_vocab(sentences, config.min_count)
    if len(vocab) < 2:
        raise DataError(
            "vocabulary has a single word; negative sampling needs at least two"
        )

    index = vocab.index
    encoded = []
    for sent in sentences:
        ids = np.array([index[w] for w in sent if w in index], dtype=np.intp)
        if len(ids):
            encoded.append(ids)
    if not encoded:
        raise DataError("corpus is empty after vocabulary filtering")

    freqs = vocab.counts / vocab.total_tokens
    keep_prob = np.minimum(
        1.0, (np.sqrt(freqs / config.subsample_t) + 1.0) * (config.subsample_t / freqs)
    )

    seed = config.seed & _SEED_MASK
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    n = len(vocab)
    syn0 = ((rng.random((n, config.dim)) - 0.5) / config.dim).astype(np.float32)
    syn1 = np.zeros((n, config.dim), dtype=np.float32)

    workers = resolve_workers(n_workers)
    source = "embias cbow trainer"
    if workers == 1:
        epoch_losses = _train_worker(
            syn0, syn1, encoded, keep_prob, vocab.sampling_cdf, config, rng
        )
    else:
        from concurrent.futures import ThreadPoolExecutor

        shards = [encoded[i::workers] for i in range(workers)]
        streams = [np.random.default_rng(np.random.SeedSequence([seed, i + 1]))
                   for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_train_worker, syn0, syn1, shard, keep_prob,
                            vocab.sampling_cdf, config, stream)
                for shard, stream in zip(shards, streams) if shard
            ]
            per_shard = [f.result() for f in futures]
        epoch_losses = [float(np.mean(col)) for col in zip(*per_shard)]
        source = f"embias cbow trainer (nondeterministic: {workers} lock-free workers)"

    meta = EmbeddingMeta(
        language=language, corpus_version=corpus_version, seed=config.seed, source=source
    )
    embeddings = EmbeddingSet.from_words(vocab.words, syn0, meta=meta)
    return TrainingRun(embeddings=embeddings, epoch_losses=epoch_losses, vocabulary=vocab)


def train(
    corpus,
    config: TrainingConfig | None = None,
    language: str | None = None,
    corpus_version: str | None = None,
    n_workers: int | None = None,
) -> EmbeddingSet:
    """Train and return just the embedding set; see fit_corpus."""
    return fit_corpus(corpus, config, language, corpus_version, n_workers).embeddings


class CbowEmbedder(BaseEstimator):
    """Estimator wrapper around the trainer.

    fit(X) trains on X (a corpus path or an iterable of token sequences) and
    exposes embedding_, vocabulary_, and epoch_losses_; transform(words)
    maps words to their trained vectors under the strict OOV policy.
    """

    def __init__(self, dim=100, window=5, negatives=5, epochs=5, lr_initial=0.025,
                 lr_min=1e-4, min_count=5, subsample_t=1e-3, seed=0,
                 language=None, corpus_version=None):
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.lr_initial = lr_initial
        self.lr_min = lr_min
        self.min_count = min_count
        self.subsample_t = subsample_t
        self.seed = seed
        self.language = language
        self.corpus_version = corpus_version

    def _config(self) -> TrainingConfig:
        return TrainingConfig(
            dim=self.dim, window=self.window, negatives=self.negatives,
            epochs=self.epochs, lr_initial=self.lr_initial, lr_min=self.lr_min,
            min_count=self.min_count, subsample_t=self.subsample_t, seed=self.seed,
        )

    def fit(self, X, y=None):
        run = fit_corpus(
            X, self._config(), language=self.language, corpus_version=self.corpus_version
        )
        self.embedding_ = run.embeddings
        self.vocabulary_ = run.vocabulary
        self.epoch_losses_ = run.epoch_losses
        return self

    def transform(self, words) -> np.ndarray:
        check_is_fitted(self, "embedding_")
        vectors, _ = lookup_all(self.embedding_, list(words), policy="strict")
        return vectors
