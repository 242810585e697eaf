"""Random tally perturbation ("fuzzing") and posterior tally generation.

The default pipeline turns a posterior pseudocount vector into one
simulated completion of the unaudited ballots:

    fuzz each count with a gamma(shape=count, scale=1) variate
      -> normalize into multinomial probabilities (a Dirichlet sample)
      -> draw a multinomial tally of the nonsample size.

A gamma variate with shape k and scale 1 has mean k and variance k, and
gamma fuzzing is additive: fuzz(5) + fuzz(11) is distributed as
fuzz(16).  Equivalently, every vote's unit weight may be replaced by an
exponential(1) weight; ``weighted_tally`` expresses that view.

Alternative fuzzers are available for study: double-or-nothing (scaled
fair-coin binomial), normal, poisson, negative-binomial (variance 2k),
plus two whole-sample resamplers, shuffle-and-cut and bootstrap, which
bypass the multinomial draw and scale their resampled tally to the
nonsample size instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .election import ElectionError, VoteTally, Contest

GAMMA = "gamma"
DOUBLE_OR_NOTHING = "double-or-nothing"
SHUFFLE_AND_CUT = "shuffle-and-cut"
NORMAL = "normal"
POISSON = "poisson"
NEGATIVE_BINOMIAL = "negative-binomial"
BOOTSTRAP = "bootstrap"

FUZZER_KINDS = (
    GAMMA,
    DOUBLE_OR_NOTHING,
    SHUFFLE_AND_CUT,
    NORMAL,
    POISSON,
    NEGATIVE_BINOMIAL,
    BOOTSTRAP,
)

#: Kinds that fuzz each count independently (additive per-count variates).
PER_COUNT_KINDS = (GAMMA, DOUBLE_OR_NOTHING, NORMAL, POISSON, NEGATIVE_BINOMIAL)

#: Kinds that resample the whole sample and scale, skipping the
#: multinomial draw.
RESAMPLING_KINDS = (SHUFFLE_AND_CUT, BOOTSTRAP)


class FuzzingError(ValueError):
    pass


def _check_kind(kind: str):
    if kind not in FUZZER_KINDS:
        raise FuzzingError(f"unknown fuzzer kind {kind!r}; expected one of {FUZZER_KINDS}")


@dataclass(frozen=True)
class MultinomialProbabilities:
    """Per-choice probabilities; nonnegative, summing to 1 within 1e-12."""

    probs: Mapping[str, float]

    def __post_init__(self):
        values = list(self.probs.values())
        if any(v < 0 for v in values):
            raise FuzzingError("multinomial probabilities must be nonnegative")
        if abs(sum(values) - 1.0) > 1e-12:
            raise FuzzingError(f"probabilities sum to {sum(values)!r}, not 1")


# ---------------------------------------------------------------------------
# Array layer.  The dict-level operations below delegate here; the risk
# engine calls these directly with (trials, t) batches.


def fuzz_batch(alpha: np.ndarray, kind: str, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Fuzz a count vector ``trials`` times; returns a (trials, t) array.

    Per-count kinds fuzz entries independently.  shuffle-and-cut treats
    the (rounded) vector as the sample itself: random half drawn without
    replacement, doubled; with an odd sample size the extra vote goes to
    the tallied half.  bootstrap resamples the (rounded) sample size
    with replacement.
    """
    _check_kind(kind)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise FuzzingError("counts to fuzz must be nonnegative")
    t = alpha.shape[0]
    shape = (trials, t)

    if kind == GAMMA:
        # gamma with shape 0 is exactly 0: zero-count choices stay at zero.
        return rng.gamma(alpha, 1.0, size=shape)
    if kind == NORMAL:
        return rng.normal(alpha, np.sqrt(alpha), size=shape)
    if kind == POISSON:
        return rng.poisson(alpha, size=shape).astype(float)
    if kind == NEGATIVE_BINOMIAL:
        # failures before k successes at p=1/2: mean k, variance 2k
        out = np.zeros(shape)
        pos = alpha > 0
        if pos.any():
            out[:, pos] = rng.negative_binomial(alpha[pos], 0.5, size=(trials, int(pos.sum())))
        return out
    if kind == DOUBLE_OR_NOTHING:
        n = np.rint(alpha).astype(np.int64)
        if not np.allclose(alpha, n):
            raise FuzzingError("double-or-nothing fuzzing requires whole-number counts")
        return 2.0 * rng.binomial(n, 0.5, size=shape)
    if kind == SHUFFLE_AND_CUT:
        counts = np.rint(alpha).astype(np.int64)
        s = int(counts.sum())
        half = (s + 1) // 2
        out = np.empty(shape)
        for i in range(trials):
            out[i] = rng.multivariate_hypergeometric(counts, half)
        return 2.0 * out
    if kind == BOOTSTRAP:
        counts = np.rint(alpha).astype(np.int64)
        s = int(counts.sum())
        if s == 0:
            return np.zeros(shape)
        return rng.multinomial(s, counts / s, size=trials).astype(float)
    raise AssertionError("unreachable")


def multinomial_batch(probs: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial tallies of ``size`` votes for each probability row."""
    if size < 0:
        raise FuzzingError("nonsample size must be nonnegative")
    if size == 0:
        return np.zeros_like(probs)
    return rng.multinomial(size, probs).astype(float)


def normalize_rows(fuzzed: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Rows scaled to sum 1; negatives (normal kind) clamp to 0 first.

    A row that clamps to all-zero falls back to the posterior mean; with
    any positive pseudocount this has probability zero under the gamma
    kind and is vanishingly rare under the normal kind.
    """
    fuzzed = np.clip(fuzzed, 0.0, None)
    sums = fuzzed.sum(axis=1, keepdims=True)
    total = float(alpha.sum())
    if total <= 0:
        raise FuzzingError(
            "all pseudocounts are zero: the posterior is degenerate; use a "
            "jeffreys prior or a nonzero initial sample"
        )
    dead = (sums <= 0).ravel()
    if dead.any():
        fuzzed = fuzzed.copy()
        fuzzed[dead] = alpha / total
        sums = fuzzed.sum(axis=1, keepdims=True)
    return fuzzed / sums


def nonsample_batch(
    alpha: np.ndarray, nonsample_size: int, kind: str, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """(trials, t) test nonsample tallies for one stratum posterior."""
    _check_kind(kind)
    alpha = np.asarray(alpha, dtype=float)
    if nonsample_size < 0:
        raise FuzzingError("nonsample size must be nonnegative")
    if nonsample_size == 0:
        return np.zeros((trials, alpha.shape[0]))
    if float(alpha.sum()) <= 0:
        raise FuzzingError(
            "all pseudocounts are zero: the posterior is degenerate; use a "
            "jeffreys prior or a nonzero initial sample"
        )
    fuzzed = fuzz_batch(alpha, kind, trials, rng)
    if kind in RESAMPLING_KINDS:
        sums = fuzzed.sum(axis=1, keepdims=True)
        dead = (sums <= 0).ravel()
        if dead.any():
            fuzzed = fuzzed.copy()
            fuzzed[dead] = alpha
            sums = fuzzed.sum(axis=1, keepdims=True)
        return fuzzed * (nonsample_size / sums)
    probs = normalize_rows(fuzzed, alpha)
    return multinomial_batch(probs, nonsample_size, rng)


# ---------------------------------------------------------------------------
# Dict-level operations over tallies / hyperparameter maps.


def fuzz_count(k: float, kind: str, rng: np.random.Generator) -> float:
    """One fuzzed variate with expected value k.

    Variance is k for the gamma/double-or-nothing/normal/poisson kinds
    and 2k for negative-binomial.  Only the per-count additive kinds are
    accepted here; shuffle-and-cut and bootstrap resample whole tallies
    and are handled by fuzz_tally.
    """
    if kind in RESAMPLING_KINDS:
        raise FuzzingError(f"{kind!r} fuzzes whole tallies, not individual counts")
    if k < 0:
        raise FuzzingError("count to fuzz must be nonnegative")
    return float(fuzz_batch(np.array([k]), kind, 1, rng)[0, 0])


def fuzz_counts(k: float, kind: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vector of ``size`` independent fuzzed variates for one count."""
    if kind in RESAMPLING_KINDS:
        raise FuzzingError(f"{kind!r} fuzzes whole tallies, not individual counts")
    if k < 0:
        raise FuzzingError("count to fuzz must be nonnegative")
    return fuzz_batch(np.array([k]), kind, size, rng)[:, 0]


def fuzz_tally(counts: Mapping[str, float], kind: str, rng: np.random.Generator,
               contest_id: str = "") -> VoteTally:
    """Fuzz a sample tally (or hyperparameter vector) entrywise.

    Entries may come back non-integral and need not preserve the sum.
    The normal kind may produce negative entries; they are passed
    through unclipped here and only clamped when probabilities are
    formed.
    """
    keys = list(counts)
    alpha = np.array([counts[k] for k in keys], dtype=float)
    if np.any(alpha < 0):
        raise FuzzingError("counts to fuzz must be nonnegative")
    row = fuzz_batch(alpha, kind, 1, rng)[0]
    if kind == NORMAL:
        return VoteTally.signed(contest_id, dict(zip(keys, row.tolist())))
    return VoteTally(contest_id, dict(zip(keys, row.tolist())))


def to_multinomial(fuzzed: VoteTally | Mapping[str, float]) -> MultinomialProbabilities:
    """Normalize a fuzzed tally into multinomial probabilities.

    When the input is a gamma-fuzzed pseudocount vector, the output is a
    Dirichlet sample with those hyperparameters.  Negative entries
    (normal kind) are clamped to 0 first; an all-zero input is rejected
    as a degenerate posterior.
    """
    counts = fuzzed.counts if isinstance(fuzzed, VoteTally) else fuzzed
    clipped = {k: max(0.0, v) for k, v in counts.items()}
    total = sum(clipped.values())
    if total <= 0:
        raise FuzzingError(
            "cannot normalize an all-zero tally; the posterior is degenerate "
            "(use a jeffreys prior or a nonzero initial sample)"
        )
    return MultinomialProbabilities({k: v / total for k, v in clipped.items()})


def draw_multinomial_tally(
    probs: MultinomialProbabilities, size: int, rng: np.random.Generator, contest_id: str = ""
) -> VoteTally:
    """Integer tally of ``size`` simulated votes, multinomially drawn."""
    keys = list(probs.probs)
    p = np.array([probs.probs[k] for k in keys])
    row = multinomial_batch(p[None, :], size, rng)[0]
    return VoteTally(contest_id, dict(zip(keys, row.tolist())))


def generate_test_nonsample_tally(model, rng: np.random.Generator) -> VoteTally:
    """One simulated completion of a stratum's unaudited ballots.

    ``model`` is a stratum generative model (see bayes.StratumModel):
    posterior pseudocounts, a nonsample size, and a fuzzer kind.  For
    the per-count kinds this composes fuzz -> normalize -> multinomial;
    the resampling kinds scale their resampled tally to the nonsample
    size directly.
    """
    counts = model.posterior.pseudocounts
    keys = list(counts)
    alpha = np.array([counts[k] for k in keys], dtype=float)
    row = nonsample_batch(alpha, model.nonsample_size, model.fuzzer, 1, rng)[0]
    return VoteTally(model.posterior.contest_id, dict(zip(keys, row.tolist())))


def weighted_tally(votes, weights, contest: Contest) -> VoteTally:
    """Tally votes with per-vote weights: the vote-level view of fuzzing.

    Giving every vote an exponential(1) weight instead of weight one
    yields the same distribution as gamma-fuzzing the counts.
    """
    if len(votes) != len(weights):
        raise FuzzingError("one weight per vote required")
    counts = {cid: 0.0 for cid in contest.choice_ids()}
    for v, w in zip(votes, weights):
        if v not in counts:
            raise ElectionError(f"vote for undeclared choice {v!r}")
        counts[v] += w
    return VoteTally(contest.id, counts)
