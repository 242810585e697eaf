"""Priors, posterior updates, stratum generative models, and the Monte
Carlo risk measurement at the heart of the stopping rule.

The risk of stopping an audit is the posterior probability that the
reported outcome is wrong.  It is measured by simulation: many test
vote tallies are generated from the per-stratum posteriors (sample
tally + one simulated nonsample completion per stratum, summed across
strata), the outcome rule is applied to each, and the fraction whose
outcome differs from the reported outcome is the risk.

Trials are generated in fixed-size chunks, each from its own generator
spawned off the caller's; results are integer counts, so the estimate
is reproducible for a fixed (seed, trials) no matter how chunks are
scheduled across workers.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from . import fuzzing
from .election import AuditedBallot, CastVoteRecordFile, Contest, ElectionError, VoteTally
from .rules import get_rule

BALLOT_POLLING = "ballot-polling"
COMPARISON_ROW = "comparison-row"

#: Recommended trial count; ~0.001 accuracy on the risk estimate.
DEFAULT_TRIALS = 1_000_000

#: Chunk size for trial generation (one spawned generator per chunk).
TRIAL_CHUNK = 1 << 15


class AuditMathError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparameters:
    """Dirichlet pseudocount vector over a contest's choice space."""

    contest_id: str
    stratum_id: str
    pseudocounts: Mapping[str, float]

    def __post_init__(self):
        for cid, v in self.pseudocounts.items():
            if v < 0:
                raise AuditMathError(f"negative pseudocount for choice {cid!r}")

    def initial_size(self) -> float:
        return sum(self.pseudocounts.values())


def check_neutral(pseudocounts: Mapping[str, float], contest: Contest):
    """Reject priors that weight one candidate over another.

    Biased pseudocounts act like stuffing the ballot box, so every
    candidate-kind choice (for preferential contests, every ordering)
    must carry the same pseudocount.  Non-candidate choices may differ.
    """
    values = {pseudocounts.get(c, 0.0) for c in contest.candidate_choice_ids()}
    if len(values) > 1:
        raise AuditMathError(
            f"prior is not neutral: candidate pseudocounts {sorted(values)} differ"
        )


def make_prior(
    kind: str,
    contest: Contest,
    pseudocounts: Mapping[str, float] | None = None,
    stratum_id: str = "",
) -> Hyperparameters:
    """haldane: all zeros.  jeffreys: 1/2 per choice (initial size t/2).
    custom: caller-supplied pseudocounts, neutrality-checked."""
    ids = contest.choice_ids()
    if kind == "haldane":
        counts = {c: 0.0 for c in ids}
    elif kind == "jeffreys":
        counts = {c: 0.5 for c in ids}
    elif kind == "custom":
        if pseudocounts is None:
            raise AuditMathError("custom prior requires pseudocounts")
        unknown = set(pseudocounts) - set(ids)
        if unknown:
            raise AuditMathError(f"prior names undeclared choices: {sorted(unknown)}")
        counts = {c: float(pseudocounts.get(c, 0.0)) for c in ids}
        check_neutral(counts, contest)
    else:
        raise AuditMathError(f"unknown prior kind {kind!r}")
    return Hyperparameters(contest.id, stratum_id, counts)


def update_posterior(prior: Hyperparameters, sample_tally: VoteTally) -> Hyperparameters:
    """Bayes update: add the sample tally to the pseudocounts."""
    if sample_tally.contest_id != prior.contest_id:
        raise AuditMathError(
            f"tally is for contest {sample_tally.contest_id!r}, "
            f"prior for {prior.contest_id!r}"
        )
    if set(sample_tally.counts) != set(prior.pseudocounts):
        raise AuditMathError("prior and sample tally cover different choice sets")
    return Hyperparameters(
        prior.contest_id,
        prior.stratum_id,
        {c: prior.pseudocounts[c] + sample_tally.counts[c] for c in prior.pseudocounts},
    )


@dataclass(frozen=True)
class ComparisonPriorMatrix:
    """Pseudocounts over (reported choice, actual choice) pairs.

    Neutrality requires all diagonal entries equal.  The ratio of a
    row's off-diagonal mass to its diagonal is a prior scanner error
    rate; 0.5/50 corresponds to one percent.
    """

    contest_id: str
    pseudocounts: Mapping[tuple[str, str], float]

    def __post_init__(self):
        diag = {v for (r, a), v in self.pseudocounts.items() if r == a}
        if len(diag) > 1:
            raise AuditMathError(
                f"comparison prior is not neutral: diagonal values {sorted(diag)} differ"
            )
        for cell, v in self.pseudocounts.items():
            if v < 0:
                raise AuditMathError(f"negative pseudocount for cell {cell}")

    @classmethod
    def uniform(
        cls, contest: Contest, diagonal: float = 50.0, off_diagonal: float = 0.5
    ) -> "ComparisonPriorMatrix":
        ids = contest.choice_ids()
        return cls(
            contest.id,
            {
                (r, a): diagonal if r == a else off_diagonal
                for r, a in product(ids, ids)
            },
        )

    def row(self, reported: str) -> dict[str, float]:
        out = {a: v for (r, a), v in self.pseudocounts.items() if r == reported}
        if not out:
            raise AuditMathError(f"comparison prior has no row for {reported!r}")
        return out


@dataclass(frozen=True)
class StratumModel:
    """Generative model for one stratum's unaudited ballots."""

    stratum_id: str
    kind: str
    posterior: Hyperparameters
    nonsample_size: int
    fuzzer: str = fuzzing.GAMMA

    def __post_init__(self):
        if self.kind not in (BALLOT_POLLING, COMPARISON_ROW):
            raise AuditMathError(f"unknown stratum kind {self.kind!r}")
        if self.nonsample_size < 0:
            raise AuditMathError("nonsample size must be nonnegative")


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo risk measurement for one contest.

    ``risk`` is the fraction of trials whose outcome differed from the
    reported outcome; by construction risk plus the reported outcome's
    win frequency is exactly 1.
    """

    contest_id: str
    trials: int
    upset_count: int
    win_frequencies: Mapping[str, float]

    @property
    def risk(self) -> float:
        return self.upset_count / self.trials

    def to_json(self) -> dict:
        return {
            "contest": self.contest_id,
            "risk": self.risk,
            "trials": self.trials,
            "upsetCount": self.upset_count,
            "winFrequencies": dict(self.win_frequencies),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RiskEstimate":
        return cls(
            contest_id=doc["contest"],
            trials=doc["trials"],
            upset_count=doc["upsetCount"],
            win_frequencies=doc["winFrequencies"],
        )


def derive_generator(seed_digits: str, *labels) -> np.random.Generator:
    """Deterministic numpy generator keyed by the audit seed and labels.

    Keeps engine randomness (trial generation, planning) replayable
    from the public audit seed without consuming the ballot-selection
    counter stream.
    """
    text = "|".join([seed_digits, *map(str, labels)])
    key = int(hashlib.sha256(text.encode("utf-8")).hexdigest(), 16)
    return np.random.default_rng(key)


def _aligned(counts: Mapping[str, float], choice_ids: Sequence[str], what: str) -> np.ndarray:
    unknown = set(counts) - set(choice_ids)
    if unknown:
        raise AuditMathError(f"{what} names undeclared choices: {sorted(unknown)}")
    return np.array([counts.get(c, 0.0) for c in choice_ids], dtype=float)


def measure_risk(
    models: Sequence[StratumModel],
    sample_tallies: Mapping[str, VoteTally],
    contest: Contest,
    trials: int,
    rng: np.random.Generator,
    small_sample: bool = False,
) -> RiskEstimate:
    """Estimate the probability that the reported outcome is wrong.

    Each trial independently generates one test nonsample tally per
    stratum, adds each stratum's actual sample tally, sums across
    strata into one contest-level test vote tally, and applies the
    outcome rule.  ``small_sample=True`` applies the rule to fuzzed
    posterior tallies directly (no multinomial draw, no re-adding of
    the sample), the shortcut valid when the sample is much smaller
    than the nonsample.

    Trials below about 10^6 trade accuracy (~0.001 at 10^6) for speed.
    """
    if not models:
        raise AuditMathError("at least one stratum model is required")
    if trials < 1:
        raise AuditMathError("trials must be >= 1")
    choice_ids = contest.choice_ids()
    rule = get_rule(contest.outcome_rule_id)

    alphas = []
    sample_total = np.zeros(len(choice_ids))
    covered = 0.0
    for model in models:
        if model.posterior.contest_id != contest.id:
            raise AuditMathError(
                f"stratum {model.stratum_id!r} belongs to contest "
                f"{model.posterior.contest_id!r}, not {contest.id!r}"
            )
        alpha = _aligned(model.posterior.pseudocounts, choice_ids,
                         f"stratum {model.stratum_id!r} posterior")
        if model.nonsample_size > 0 and alpha.sum() <= 0:
            raise AuditMathError(
                f"stratum {model.stratum_id!r} has unaudited ballots but an "
                "all-zero posterior; give it a proper (nonzero) prior or an "
                "initial sample"
            )
        tally = sample_tallies.get(model.stratum_id)
        vec = (
            _aligned(tally.counts, choice_ids, f"stratum {model.stratum_id!r} sample")
            if tally is not None
            else np.zeros(len(choice_ids))
        )
        sample_total += vec
        covered += vec.sum() + model.nonsample_size
        alphas.append(alpha)

    n = contest.total_ballots()
    if not small_sample and round(covered) != n:
        raise AuditMathError(
            f"strata do not partition the contest universe: samples plus "
            f"nonsamples cover {covered:g} ballots of {n}"
        )

    n_chunks = -(-trials // TRIAL_CHUNK)
    children = rng.spawn(n_chunks)
    outcome_counts: Counter[str] = Counter()
    done = 0
    for chunk_rng in children:
        m = min(TRIAL_CHUNK, trials - done)
        done += m
        test = np.tile(np.zeros(len(choice_ids)) if small_sample else sample_total, (m, 1))
        for model, alpha in zip(models, alphas):
            if small_sample:
                test += fuzzing.fuzz_batch(alpha, model.fuzzer, m, chunk_rng)
            else:
                test += fuzzing.nonsample_batch(
                    alpha, model.nonsample_size, model.fuzzer, m, chunk_rng
                )
        winners = rule.winners_batch(test, choice_ids, contest.tie_break_order)
        values, counts = np.unique(winners, return_counts=True)
        outcome_counts.update(dict(zip(values.tolist(), counts.tolist())))

    reported = contest.reported_outcome
    upset = trials - outcome_counts.get(reported, 0)
    risk = upset / trials
    frequencies = {reported: 1.0 - risk}
    for outcome, count in sorted(outcome_counts.items()):
        if outcome != reported:
            frequencies[outcome] = count / trials
    return RiskEstimate(contest.id, trials, upset, frequencies)


def stopping_decision(estimate: RiskEstimate, risk_limit: float) -> str:
    """"stop" iff the measured risk is strictly below the risk limit."""
    if not 0 < risk_limit < 1:
        raise AuditMathError("risk limit must lie strictly between 0 and 1")
    return "stop" if estimate.risk < risk_limit else "escalate"


def comparison_strata_from_cvrs(
    cvrs: CastVoteRecordFile,
    audited: Sequence[AuditedBallot],
    prior: ComparisonPriorMatrix,
    contest: Contest,
    fuzzer: str = fuzzing.GAMMA,
) -> tuple[list[StratumModel], dict[str, VoteTally]]:
    """One comparison-row stratum per reported choice in the CVR file.

    A row's population is the ballots the scanner reported for that
    choice; its sample is the audited ballots among them, tallied by
    the *actual* choice seen by hand; its posterior is the prior row
    plus that tally.  Rows for reported choices absent from the CVR
    file would have zero population and are not created.
    """
    by_addr = cvrs.by_address()
    reported_counts: Counter[str] = Counter()
    for rec in cvrs.records:
        if contest.id not in rec.votes:
            raise AuditMathError(
                f"CVR at {rec.address!r} carries no vote for contest {contest.id!r}"
            )
        reported_counts[rec.votes[contest.id]] += 1

    sampled_actuals: dict[str, list[str]] = {}
    for ballot in audited:
        rec = by_addr.get(ballot.address)
        if rec is None:
            raise AuditMathError(
                f"audited ballot {ballot.address!r} has no CVR; "
                "manifest and CVR file disagree"
            )
        reported = rec.votes[contest.id]
        if reported not in reported_counts:
            raise AuditMathError(f"reported choice {reported!r} not in CVR tallies")
        sampled_actuals.setdefault(reported, []).append(ballot.actual[contest.id])

    models: list[StratumModel] = []
    tallies: dict[str, VoteTally] = {}
    choice_ids = contest.choice_ids()
    for reported in sorted(reported_counts):
        row = prior.row(reported)
        actuals = sampled_actuals.get(reported, [])
        counts = {c: 0.0 for c in choice_ids}
        for a in actuals:
            if a not in counts:
                raise ElectionError(f"audited vote for undeclared choice {a!r}")
            counts[a] += 1
        stratum_id = f"{cvrs.collection_id}:reported={reported}"
        posterior = Hyperparameters(
            contest.id, stratum_id, {c: row.get(c, 0.0) + counts[c] for c in choice_ids}
        )
        models.append(
            StratumModel(
                stratum_id=stratum_id,
                kind=COMPARISON_ROW,
                posterior=posterior,
                nonsample_size=reported_counts[reported] - len(actuals),
                fuzzer=fuzzer,
            )
        )
        tallies[stratum_id] = VoteTally(contest.id, counts)
    return models, tallies


def nuts_in_cans_demo(observation: str | None = "nut") -> Fraction:
    """Posterior probability that a majority of three cans contain nuts.

    Six equally likely arrangements (not all empty, not all full) are
    enumerated exactly.  Observing a nut in the first can leaves three
    arrangements, two of which have a nut majority: 2/3.  Observing an
    empty first can gives 1/3; with no observation, 1/2.
    """
    arrangements = [
        bits for bits in product((0, 1), repeat=3) if 0 < sum(bits) < 3
    ]
    if observation == "nut":
        live = [a for a in arrangements if a[0] == 1]
    elif observation == "empty":
        live = [a for a in arrangements if a[0] == 0]
    elif observation is None:
        live = arrangements
    else:
        raise AuditMathError("observation must be 'nut', 'empty', or None")
    majority = [a for a in live if sum(a) >= 2]
    return Fraction(len(majority), len(live))
