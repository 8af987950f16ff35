"""Word Embedding Association Test: differential associations, the test
statistic, effect size, permutation p-values, and ensemble aggregation.

Given target word sets X, Y and attribute sets A, B, the differential
association of a word w is

    s(w, A, B) = mean_{a in A} cos(w, a) - mean_{b in B} cos(w, b)

and the test statistic is S = sum_{x in X} s(x) - sum_{y in Y} s(y), so
positive values mean X sits closer to A and Y closer to B.  The effect size
normalizes the mean difference by the population standard deviation of s
over X union Y, which bounds |d| by 2.  Significance comes from a one-sided
permutation test over all equal-size repartitions of X union Y (exact
enumeration when feasible, Monte Carlo otherwise); ties count in favor of
the null (S' >= S_obs, the observed partition included), so p is never 0.

All arithmetic here is double precision regardless of storage precision.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMeta, EmbeddingSet, lookup_all
from .errors import DataError, NumericError
from .parallel import resolve_workers
from .stimuli import StimulusSpec
from .validation import as_float_matrix, as_float_vector, check_same_dim, unit_rows

DEFAULT_EXACT_CAP = 200_000
DEFAULT_MC_SAMPLES = 100_000
MIN_MC_SAMPLES = 100

# Bound on rows materialized at once while enumerating or sampling partitions.
_CHUNK = 1 << 15

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class WeatLabels:
    """Names attached to a comparison: the spec name plus one label per set."""

    name: str
    X: str
    Y: str
    A: str
    B: str

    def to_dict(self) -> dict:
        return {"name": self.name, "X": self.X, "Y": self.Y, "A": self.A, "B": self.B}

    @classmethod
    def from_dict(cls, d: dict) -> "WeatLabels":
        return cls(name=d["name"], X=d["X"], Y=d["Y"], A=d["A"], B=d["B"])


class WeatInput:
    """Validated vector sets for one comparison.

    Targets X and Y must be equal-size non-empty lists (the permutation test
    repartitions their union); attributes A and B must be non-empty; all
    vectors share one dimension and none may be zero.  Rows are stored as
    float64 and the instance is treated as immutable.
    """

    def __init__(self, X, Y, A, B, labels: WeatLabels | None = None):
        self.X = as_float_matrix(X, "X")
        self.Y = as_float_matrix(Y, "Y")
        self.A = as_float_matrix(A, "A")
        self.B = as_float_matrix(B, "B")
        if self.X.shape[0] != self.Y.shape[0]:
            raise DataError(
                f"target sets must be equal size, got |X| = {self.X.shape[0]} "
                f"and |Y| = {self.Y.shape[0]}"
            )
        check_same_dim(("X", self.X), ("Y", self.Y), ("A", self.A), ("B", self.B))
        self.labels = labels or WeatLabels("unnamed", "X", "Y", "A", "B")
        # Normalizing up front rejects zero vectors and turns every cosine
        # into a plain dot product.
        self._unit_targets = unit_rows(np.vstack([self.X, self.Y]), "X union Y")
        self._unit_A = unit_rows(self.A, "A")
        self._unit_B = unit_rows(self.B, "B")

    @property
    def n_targets(self) -> int:
        return self.X.shape[0]

    def association_profile(self) -> np.ndarray:
        """s(w, A, B) for every target word: X rows first, then Y rows."""
        sim_a = self._unit_targets @ self._unit_A.T
        sim_b = self._unit_targets @ self._unit_B.T
        return sim_a.mean(axis=1) - sim_b.mean(axis=1)


def cosine_similarity(u, v) -> float:
    """cos(u, v) in [-1, 1]; both vectors must be nonzero and equal-length."""
    u = as_float_vector(u, "u")
    v = as_float_vector(v, "v")
    if u.shape[0] != v.shape[0]:
        raise DataError(f"dimension mismatch: u has {u.shape[0]}, v has {v.shape[0]}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericError("cosine similarity undefined for a zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def differential_association(w, A, B) -> float:
    """s(w, A, B): mean cosine of w with A minus mean cosine with B."""
    w = as_float_vector(w, "w")
    A = as_float_matrix(A, "A")
    B = as_float_matrix(B, "B")
    check_same_dim(("w", w.reshape(1, -1)), ("A", A), ("B", B))
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise NumericError("cosine similarity undefined for a zero-norm vector")
    wu = w / nw
    sim_a = unit_rows(A, "A") @ wu
    sim_b = unit_rows(B, "B") @ wu
    return float(sim_a.mean() - sim_b.mean())


def test_statistic(inp: WeatInput) -> float:
    """S(X, Y, A, B): summed associations of X minus those of Y."""
    s = inp.association_profile()
    n = inp.n_targets
    return float(s[:n].sum() - s[n:].sum())


def effect_size(inp: WeatInput) -> float:
    """d: mean association difference over the population std of all
    associations.  Bounded by |d| <= 2; undefined when every target has the
    same association value."""
    s = inp.association_profile()
    n = inp.n_targets
    std = float(s.std())  # population convention (divisor 2n)
    if std == 0.0:
        raise NumericError(
            "effect size undefined: all target words have identical associations"
        )
    return float((s[:n].mean() - s[n:].mean()) / std)


@dataclass(frozen=True)
class PermutationOutcome:
    p_value: float
    n_partitions_evaluated: int
    method: str


def _count_exact(s: np.ndarray, n: int, observed_sum: float) -> int:
    """Partitions (incl. the observed one) whose X-side sum is >= observed.

    The observed partition is the first combination in lexicographic order;
    it is skipped during enumeration and counted explicitly, so the p-value
    can never drop to 0 through floating-point jitter on its own tie.
    """
    count = 1
    combos = itertools.combinations(range(2 * n), n)
    next(combos)  # the observed partition (0..n-1)
    while True:
        chunk = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
            dtype=np.intp,
        )
        if chunk.size == 0:
            break
        sums = s[chunk.reshape(-1, n)].sum(axis=1)
        count += int(np.count_nonzero(sums >= observed_sum))
    return count


def _count_sampled(s: np.ndarray, n: int, observed_sum: float,
                   n_draws: int, rng: np.random.Generator) -> int:
    """Uniform repartition draws whose X-side sum is >= observed."""
    m = 2 * n
    count = 0
    remaining = n_draws
    while remaining > 0:
        c = min(remaining, _CHUNK)
        # argpartition of i.i.d. uniforms picks a uniformly random n-subset per row
        keys = rng.random((c, m))
        subsets = np.argpartition(keys, n - 1, axis=1)[:, :n]
        # ascending index order, matching how observed_sum was accumulated, so a
        # re-drawn observed subset reproduces its sum bit for bit and ties count
        subsets.sort(axis=1)
        sums = s[subsets].sum(axis=1)
        count += int(np.count_nonzero(sums >= observed_sum))
        remaining -= c
    return count


def permutation_test(
    inp: WeatInput,
    method: str = "exact",
    n_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    max_exact: int = DEFAULT_EXACT_CAP,
    n_workers: int | None = None,
) -> PermutationOutcome:
    """One-sided p-value for S_obs over equal-size repartitions of X union Y.

    exact: enumerate all C(2n, n) partitions once each (requires the count
    to be within max_exact).  monte_carlo: the observed partition plus
    n_samples uniform draws; reproducible for a fixed (seed, worker count),
    with one RNG stream per worker derived from (seed, worker index).
    """
    if method not in ("exact", "monte_carlo"):
        raise DataError(f"unknown permutation method {method!r}; use 'exact' or 'monte_carlo'")
    s = inp.association_profile()
    n = inp.n_targets
    # Comparing partitions by their X-side sums: S' = 2*sum_subset - total is
    # a monotone map of the subset sum, so the >= ordering is unchanged.
    observed_sum = float(s[:n].sum())

    if method == "exact":
        total = math.comb(2 * n, n)
        if total > max_exact:
            raise DataError(
                f"exact enumeration needs {total} partitions, over the cap of "
                f"{max_exact}; use the monte_carlo method instead"
            )
        count = _count_exact(s, n, observed_sum)
        return PermutationOutcome(
            p_value=count / total, n_partitions_evaluated=total, method="exact"
        )

    if n_samples < MIN_MC_SAMPLES:
        raise DataError(f"monte_carlo needs at least {MIN_MC_SAMPLES} samples, got {n_samples}")
    workers = resolve_workers(n_workers)
    base = seed & _SEED_MASK
    shares = [n_samples // workers + (1 if i < n_samples % workers else 0)
              for i in range(workers)]
    streams = [np.random.default_rng(np.random.SeedSequence([base, i]))
               for i in range(workers)]
    if workers == 1:
        matched = _count_sampled(s, n, observed_sum, n_samples, streams[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_count_sampled, s, n, observed_sum, share, rng)
                for share, rng in zip(shares, streams) if share > 0
            ]
            matched = sum(f.result() for f in futures)
    total = n_samples + 1
    return PermutationOutcome(
        p_value=(matched + 1) / total, n_partitions_evaluated=total, method="monte_carlo"
    )


@dataclass
class WeatResult:
    """Everything one comparison produced, ready for JSON serialization."""

    labels: WeatLabels
    statistic: float
    effect_size: float
    p_value: float
    method: str
    n_partitions_evaluated: int
    per_word: dict[str, float]
    embedding_meta: EmbeddingMeta = field(default_factory=EmbeddingMeta)
    dropped: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.to_dict(),
            "statistic": self.statistic,
            "effect_size": self.effect_size,
            "p_value": self.p_value,
            "method": self.method,
            "n_partitions_evaluated": self.n_partitions_evaluated,
            "per_word": dict(self.per_word),
            "embedding_meta": self.embedding_meta.to_dict(),
            "dropped": {k: list(v) for k, v in self.dropped.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeatResult":
        return cls(
            labels=WeatLabels.from_dict(d["labels"]),
            statistic=float(d["statistic"]),
            effect_size=float(d["effect_size"]),
            p_value=float(d["p_value"]),
            method=d["method"],
            n_partitions_evaluated=int(d["n_partitions_evaluated"]),
            per_word={w: float(v) for w, v in d["per_word"].items()},
            embedding_meta=EmbeddingMeta.from_dict(d.get("embedding_meta", {})),
            dropped={k: list(v) for k, v in d.get("dropped", {}).items()},
        )


def run_weat(
    embeddings: EmbeddingSet,
    spec: StimulusSpec,
    policy: str = "strict",
    method: str = "exact",
    n_samples: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    max_exact: int = DEFAULT_EXACT_CAP,
    n_workers: int | None = None,
) -> WeatResult:
    """Resolve a stimulus spec against an embedding set and run the test.

    Under the skip policy, out-of-vocabulary words are dropped and recorded
    in the result; every set must keep at least one word, and the target
    sets must stay equal-size (the partition test is undefined otherwise).
    """
    resolved: dict[str, tuple[np.ndarray, list[str]]] = {}
    dropped: dict[str, list[str]] = {}
    for role in ("X", "Y", "A", "B"):
        word_set = getattr(spec, role)
        vectors, missing = lookup_all(embeddings, list(word_set.words), policy=policy)
        if vectors.shape[0] == 0:
            raise DataError(
                f"no words of set {word_set.label!r} survive the skip policy"
            )
        resolved[role] = (vectors, missing)
        if missing:
            dropped[word_set.label] = missing

    (x_vec, x_miss), (y_vec, y_miss) = resolved["X"], resolved["Y"]
    if x_vec.shape[0] != y_vec.shape[0]:
        raise DataError(
            f"skip policy left unequal target sets "
            f"({spec.X.label}: {x_vec.shape[0]}, {spec.Y.label}: {y_vec.shape[0]}); "
            "edit the stimulus file or train with a larger vocabulary"
        )

    labels = WeatLabels(
        name=spec.name, X=spec.X.label, Y=spec.Y.label, A=spec.A.label, B=spec.B.label
    )
    inp = WeatInput(
        X=x_vec, Y=y_vec, A=resolved["A"][0], B=resolved["B"][0], labels=labels
    )
    s = inp.association_profile()
    n = inp.n_targets
    statistic = float(s[:n].sum() - s[n:].sum())
    d = effect_size(inp)
    outcome = permutation_test(
        inp, method=method, n_samples=n_samples, seed=seed,
        max_exact=max_exact, n_workers=n_workers,
    )

    surviving_x = [w for w in spec.X.words if w not in set(x_miss)]
    surviving_y = [w for w in spec.Y.words if w not in set(y_miss)]
    per_word = {w: float(v) for w, v in zip(surviving_x + surviving_y, s)}

    return WeatResult(
        labels=labels,
        statistic=statistic,
        effect_size=d,
        p_value=outcome.p_value,
        method=outcome.method,
        n_partitions_evaluated=outcome.n_partitions_evaluated,
        per_word=per_word,
        embedding_meta=embeddings.meta,
        dropped=dropped,
    )


@dataclass
class AggregateResult:
    """Arithmetic means over an ensemble of runs of one comparison."""

    mean_statistic: float
    mean_effect_size: float
    mean_p_value: float
    n_runs: int
    per_run: list[WeatResult]

    @property
    def labels(self) -> WeatLabels:
        return self.per_run[0].labels

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.to_dict(),
            "mean_statistic": self.mean_statistic,
            "mean_effect_size": self.mean_effect_size,
            "mean_p_value": self.mean_p_value,
            "n_runs": self.n_runs,
            "per_run": [r.to_dict() for r in self.per_run],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateResult":
        per_run = [WeatResult.from_dict(r) for r in d["per_run"]]
        return cls(
            mean_statistic=float(d["mean_statistic"]),
            mean_effect_size=float(d["mean_effect_size"]),
            mean_p_value=float(d["mean_p_value"]),
            n_runs=int(d["n_runs"]),
            per_run=per_run,
        )


def aggregate(results: list[WeatResult]) -> AggregateResult:
    """Average statistic, effect size, and p-value over runs that all carry
    the same labels (one spec, many embeddings)."""
    if not results:
        raise DataError("cannot aggregate an empty result list")
    first = results[0].labels
    for r in results[1:]:
        if r.labels != first:
            raise DataError(
                f"cannot aggregate results with different labels: "
                f"{first.name!r} vs {r.labels.name!r}"
            )
    return AggregateResult(
        mean_statistic=float(np.mean([r.statistic for r in results])),
        mean_effect_size=float(np.mean([r.effect_size for r in results])),
        mean_p_value=float(np.mean([r.p_value for r in results])),
        n_runs=len(results),
        per_run=list(results),
    )
