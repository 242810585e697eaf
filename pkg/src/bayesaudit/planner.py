"""Workload estimation and sample-allocation planning.

Both tools answer "how much more auditing is needed?" by simulation:
hypothetical extensions of the current sample are drawn from the
posterior mean (a multinomial draw per stratum), the risk is
re-measured on each hypothetical enlarged sample, and the fraction of
extensions that would let the audit stop estimates the probability of
stopping at that sample size.

``plan_allocation`` searches per-jurisdiction additional sample counts
with derivative-free coordinate descent: start every jurisdiction at
its full remaining count, repeatedly shrink one coordinate by the
current step while every contest's projected stop probability stays at
or above the confidence threshold, halve the step when no coordinate
can shrink, and stop when the step falls below one ballot.  Coordinate
order, the initial step (half the largest allocation), and the halving
schedule are engine choices; planning needs ranking fidelity rather
than final-decision precision, so risk is measured with a reduced
trial count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import fuzzing
from .bayes import (
    BALLOT_POLLING,
    AuditMathError,
    Hyperparameters,
    StratumModel,
    measure_risk,
)
from .election import Contest, VoteTally

#: Reduced trial count for inner risk measurements during planning.
PLANNING_TRIALS = 10_000

#: Default probability that a plan completes the audit.
DEFAULT_CONFIDENCE = 0.9

#: Default escalation growth when no plan is requested.
ESCALATION_GROWTH = 0.3

#: Initial sample size heuristic: ten ballots per candidate.
INITIAL_SAMPLE_PER_CANDIDATE = 10


def initial_sample_size(contest: Contest, prior: Hyperparameters) -> int:
    """Ten times the number of candidates, at least the prior's initial
    size, capped by the population."""
    base = INITIAL_SAMPLE_PER_CANDIDATE * len(contest.candidate_ids())
    floor = int(np.ceil(prior.initial_size()))
    return min(max(base, floor), contest.total_ballots())


@dataclass(frozen=True)
class StratumView:
    """Read-only posterior state of one stratum for planning."""

    stratum_id: str
    posterior: Hyperparameters
    sample_tally: VoteTally
    population: int
    jurisdiction: str = ""
    kind: str = BALLOT_POLLING
    fuzzer: str = fuzzing.GAMMA

    def sample_size(self) -> int:
        return int(round(self.sample_tally.total()))

    def remaining(self) -> int:
        return self.population - self.sample_size()


@dataclass(frozen=True)
class ContestView:
    """One contest's audit state as the planner sees it."""

    contest: Contest
    risk_limit: float
    strata: tuple[StratumView, ...]

    def sample_size(self) -> int:
        return sum(s.sample_size() for s in self.strata)

    def population(self) -> int:
        return sum(s.population for s in self.strata)


@dataclass(frozen=True)
class WorkloadProjection:
    contest_id: str
    current_sample_size: int
    #: (future sample size, stop probability, additional ballots) rows.
    entries: tuple[tuple[int, float, int], ...]

    def to_json(self) -> dict:
        return {
            "contest": self.contest_id,
            "currentSampleSize": self.current_sample_size,
            "projections": [
                {"sampleSize": size, "stopProbability": p, "additionalBallots": add}
                for size, p, add in self.entries
            ],
        }


@dataclass(frozen=True)
class AllocationPlan:
    #: Additional ballots to audit, per jurisdiction.
    additional: Mapping[str, int]
    #: Projected stop probability per contest under the plan.
    stop_probabilities: Mapping[str, float]
    #: Contests that cannot reach the risk limit even at full count.
    full_hand_count: tuple[str, ...] = ()

    def total_additional(self) -> int:
        return sum(self.additional.values())

    def to_json(self) -> dict:
        return {
            "additional": dict(self.additional),
            "stopProbabilities": dict(self.stop_probabilities),
            "fullHandCount": list(self.full_hand_count),
            "totalAdditional": self.total_additional(),
        }


def _posterior_mean(posterior: Hyperparameters, choice_ids) -> np.ndarray:
    alpha = np.array([posterior.pseudocounts.get(c, 0.0) for c in choice_ids])
    total = alpha.sum()
    if total <= 0:
        raise AuditMathError(
            f"stratum {posterior.stratum_id!r} has an all-zero posterior; "
            "it cannot be extended"
        )
    return alpha / total


def _split_extension(counts: Sequence[int], add: int, rng: np.random.Generator) -> list[int]:
    """Split ``add`` ballots across strata proportional to remaining room."""
    remaining = np.asarray(counts, dtype=float)
    total = remaining.sum()
    if add > total:
        raise AuditMathError(f"cannot extend by {add}: only {int(total)} ballots remain")
    if add == 0 or total == 0:
        return [0] * len(counts)
    # largest-remainder apportionment, deterministic
    quota = remaining * add / total
    base = np.floor(quota).astype(int)
    short = add - int(base.sum())
    order = np.argsort(-(quota - base))
    for i in order[:short]:
        base[i] += 1
    base = np.minimum(base, np.asarray(counts, dtype=int))
    # any clipped remainder goes to strata with room
    deficit = add - int(base.sum())
    for i in np.argsort(-(np.asarray(counts) - base)):
        if deficit == 0:
            break
        room = counts[i] - base[i]
        take = min(room, deficit)
        base[i] += take
        deficit -= take
    return base.tolist()


def _extend_and_measure(
    view: ContestView,
    per_stratum_add: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Risk after one hypothetical extension of the sample."""
    choice_ids = view.contest.choice_ids()
    models = []
    tallies = {}
    for stratum, add in zip(view.strata, per_stratum_add):
        mean = _posterior_mean(stratum.posterior, choice_ids)
        ext = rng.multinomial(add, mean) if add else np.zeros(len(choice_ids), dtype=int)
        counts = {
            c: stratum.sample_tally.counts.get(c, 0.0) + int(k)
            for c, k in zip(choice_ids, ext)
        }
        posterior = Hyperparameters(
            view.contest.id,
            stratum.stratum_id,
            {
                c: stratum.posterior.pseudocounts.get(c, 0.0) + int(k)
                for c, k in zip(choice_ids, ext)
            },
        )
        models.append(
            StratumModel(
                stratum_id=stratum.stratum_id,
                kind=stratum.kind,
                posterior=posterior,
                nonsample_size=stratum.population - stratum.sample_size() - add,
                fuzzer=stratum.fuzzer,
            )
        )
        tallies[stratum.stratum_id] = VoteTally(view.contest.id, counts)
    estimate = measure_risk(models, tallies, view.contest, trials, rng)
    return estimate.risk


def project_workload(
    view: ContestView,
    future_sizes: Sequence[int],
    inner_reps: int,
    rng: np.random.Generator,
    trials: int = PLANNING_TRIALS,
) -> WorkloadProjection:
    """Estimated stop probability at each candidate future sample size.

    For each future size, ``inner_reps`` hypothetical sample extensions
    are drawn from the current posterior's multinomial and the risk is
    re-measured on each; the stop probability is the fraction of
    extensions whose risk falls below the contest's risk limit.  A
    future size equal to the current sample draws no extension: the
    stop probability is 1 or 0 according to the current risk.
    """
    current = view.sample_size()
    population = view.population()
    entries = []
    for size in sorted(future_sizes):
        if size < current:
            raise AuditMathError(
                f"future size {size} is below the current sample size {current}"
            )
        if size > population:
            raise AuditMathError(
                f"future size {size} exceeds the population {population}"
            )
        add = size - current
        if add == 0:
            risk = _extend_and_measure(view, [0] * len(view.strata), trials, rng)
            stop_probability = 1.0 if risk < view.risk_limit else 0.0
        else:
            room = [s.remaining() for s in view.strata]
            stops = 0
            for _ in range(inner_reps):
                split = _split_extension(room, add, rng)
                risk = _extend_and_measure(view, split, trials, rng)
                stops += risk < view.risk_limit
            stop_probability = stops / inner_reps
        entries.append((size, stop_probability, add))
    return WorkloadProjection(view.contest.id, current, tuple(entries))


def _stop_probabilities(
    views: Sequence[ContestView],
    allocation: Mapping[str, int],
    inner_reps: int,
    trials: int,
    rng: np.random.Generator,
) -> dict[str, float]:
    probs = {}
    for view in views:
        jurisdictions = [s.jurisdiction or s.stratum_id for s in view.strata]
        stops = 0
        for _ in range(inner_reps):
            per_stratum = []
            # allocate each jurisdiction's extension across its strata
            for jur in dict.fromkeys(jurisdictions):
                idx = [i for i, j in enumerate(jurisdictions) if j == jur]
                room = [view.strata[i].remaining() for i in idx]
                add = min(allocation.get(jur, 0), sum(room))
                split = _split_extension(room, add, rng)
                per_stratum.extend(zip(idx, split))
            ordered = [0] * len(view.strata)
            for i, add in per_stratum:
                ordered[i] = add
            risk = _extend_and_measure(view, ordered, trials, rng)
            stops += risk < view.risk_limit
        probs[view.contest.id] = stops / inner_reps
    return probs


def plan_allocation(
    views: Sequence[ContestView],
    remaining: Mapping[str, int],
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
    inner_reps: int = 20,
    trials: int = PLANNING_TRIALS,
) -> AllocationPlan:
    """Minimize total additional ballots across jurisdictions.

    ``remaining`` caps each jurisdiction's additional sample at its
    unsampled ballots.  Contests whose projected stop probability stays
    below the confidence threshold even at the full remaining count are
    marked for a full hand count and their constraint is dropped (the
    jurisdictions they span stay pinned at the full count).
    """
    if not views:
        return AllocationPlan({}, {})
    jurisdictions = list(remaining)
    allocation = {j: int(remaining[j]) for j in jurisdictions}

    probs = _stop_probabilities(views, allocation, inner_reps, trials, rng)
    infeasible = tuple(c for c, p in probs.items() if p < confidence)
    pinned = {
        s.jurisdiction or s.stratum_id
        for view in views
        if view.contest.id in infeasible
        for s in view.strata
    }
    constrained = [v for v in views if v.contest.id not in infeasible]

    step = max(allocation.values(), default=0) // 2
    while step >= 1:
        improved = False
        for jur in jurisdictions:
            if jur in pinned or allocation[jur] == 0:
                continue
            candidate = dict(allocation)
            candidate[jur] = max(0, allocation[jur] - step)
            probs_c = _stop_probabilities(constrained, candidate, inner_reps, trials, rng)
            if all(p >= confidence for p in probs_c.values()):
                allocation = candidate
                probs.update(probs_c)
                improved = True
        if not improved:
            step //= 2

    return AllocationPlan(allocation, probs, infeasible)
