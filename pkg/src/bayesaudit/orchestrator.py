"""Round-based audit orchestration: selection, interpretation intake,
risk measurement, escalation, persistence, and replay.

The audit is staged in rounds.  A round opens with a pull list of
ballot addresses (drawn from the seed-keyed global ballot order, so one
pulled ballot serves every contest on it), closes once every selected
ballot has a recorded hand interpretation, and ends with a per-contest
decision: accept the reported outcome, escalate with new selections, or
finish as a completed hand count.

All state lives in one JSON document with every file reference inlined,
so an exported bundle is self-contained.  Every selection,
interpretation, risk estimate, and decision is recorded, and rounds are
hash-chained; ``replay_audit_record`` re-runs the whole audit from the
seed and the recorded interpretations and verifies that everything
reproduces byte-for-byte.

Interpretation entries never carry the scanner's reported choice; for
comparison collections the engine joins interpretations to CVRs only at
round close, after the hand observations are committed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import fuzzing
from .bayes import (
    BALLOT_POLLING,
    ComparisonPriorMatrix,
    Hyperparameters,
    StratumModel,
    comparison_strata_from_cvrs,
    derive_generator,
    make_prior,
    measure_risk,
    stopping_decision,
    update_posterior,
)
from .election import (
    AuditedBallot,
    Contest,
    ElectionError,
    VoteTally,
    contest_to_json,
    cvr_file_to_json,
    load_contest,
    load_cvr_file,
    load_manifest,
    manifest_to_json,
    parse_address,
    tally,
    validate_cvrs_against_manifest,
)
from .planner import (
    ESCALATION_GROWTH,
    ContestView,
    StratumView,
    initial_sample_size,
    plan_allocation,
    project_workload,
)
from .prng import AuditSeed, PrngStream, global_ballot_order, sample_without_replacement
from .rules import get_rule

AUDITING = "auditing"
ACCEPTED = "accepted"
HAND_COUNT_COMPLETE = "full-hand-count-complete"

#: Escalating past this fraction of the population switches to a full
#: recount, which beats sampling most of the population anyway.
FULL_RECOUNT_THRESHOLD = 0.6


class AuditError(ValueError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CollectionConfig:
    """One collection of cast paper ballots as configured for the audit."""

    id: str
    manifest: "BallotManifest"
    cvrs: "CastVoteRecordFile | None" = None
    hand_tallies: Mapping[str, Mapping[str, float]] | None = None

    def is_comparison(self) -> bool:
        return self.cvrs is not None

    def is_hand_counted(self) -> bool:
        return self.hand_tallies is not None


@dataclass(frozen=True)
class AuditConfig:
    contests: tuple[Contest, ...]
    collections: Mapping[str, CollectionConfig]
    risk_limits: Mapping[str, float]
    prior_kind: str
    prior_pseudocounts: Mapping[str, Mapping[str, float]] | None
    comparison_diagonal: float
    comparison_off_diagonal: float
    fuzzer: str
    trials: int
    escalation: Mapping
    full_recount_threshold: float
    seed: AuditSeed | None
    raw: dict

    def contest(self, contest_id: str) -> Contest:
        for c in self.contests:
            if c.id == contest_id:
                return c
        raise AuditError(f"unknown contest {contest_id!r}")

    def risk_limit(self, contest_id: str) -> float:
        return self.risk_limits[contest_id]

    def prior_for(self, contest: Contest, stratum_id: str = "") -> Hyperparameters:
        counts = None
        if self.prior_pseudocounts:
            counts = self.prior_pseudocounts.get(contest.id)
        if counts is not None:
            return make_prior("custom", contest, counts, stratum_id)
        return make_prior(self.prior_kind, contest, stratum_id=stratum_id)

    def comparison_prior(self, contest: Contest) -> ComparisonPriorMatrix:
        return ComparisonPriorMatrix.uniform(
            contest, self.comparison_diagonal, self.comparison_off_diagonal
        )


def load_config(source, base_dir: str | Path | None = None) -> AuditConfig:
    """Parse and validate an audit configuration document.

    File references inside the document (manifests, CVR files, contest
    definitions, a recorded seed) resolve relative to ``base_dir`` (or
    the config file's directory) and are inlined, so the resulting
    config round-trips self-contained.  All cross-checks run here:
    manifest/CVR consistency, universe sizes, rule ids, reported
    outcomes, risk limits.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        doc = json.loads(path.read_text())
        base = path.parent if base_dir is None else Path(base_dir)
    else:
        doc = dict(source)
        base = Path(base_dir) if base_dir is not None else Path(".")

    def resolve(ref):
        if isinstance(ref, str):
            return json.loads((base / ref).read_text())
        return ref

    contests = tuple(load_contest(resolve(c)) for c in doc["contests"])
    if not contests:
        raise AuditError("config declares no contests")
    if len({c.id for c in contests}) != len(contests):
        raise AuditError("duplicate contest ids")

    collections: dict[str, CollectionConfig] = {}
    inlined_collections = []
    for entry in doc["collections"]:
        manifest = load_manifest(resolve(entry["manifest"]))
        cvrs = load_cvr_file(resolve(entry["cvrs"])) if entry.get("cvrs") else None
        if cvrs is not None:
            findings = validate_cvrs_against_manifest(manifest, cvrs)
            if findings:
                raise AuditError(
                    f"collection {manifest.collection_id!r} fails CVR checks: "
                    + "; ".join(f"{f.kind}: {f.detail}" for f in findings)
                )
        if manifest.collection_id in collections:
            raise AuditError(f"duplicate collection {manifest.collection_id!r}")
        hand = entry.get("handTallies")
        collections[manifest.collection_id] = CollectionConfig(
            id=manifest.collection_id, manifest=manifest, cvrs=cvrs, hand_tallies=hand
        )
        inlined = {"manifest": manifest_to_json(manifest)}
        if cvrs is not None:
            inlined["cvrs"] = cvr_file_to_json(cvrs)
        if hand is not None:
            inlined["handTallies"] = hand
        inlined_collections.append(inlined)

    global_limit = doc.get("riskLimit", 0.05)
    limits = {}
    for contest in contests:
        limits[contest.id] = float(doc.get("riskLimits", {}).get(contest.id, global_limit))
        if not 0 < limits[contest.id] < 1:
            raise AuditError(f"risk limit for {contest.id!r} must lie in (0, 1)")
        rule = get_rule(contest.outcome_rule_id)
        if not rule.validate_outcome(contest.reported_outcome, contest.tie_break_order):
            raise AuditError(
                f"reported outcome {contest.reported_outcome!r} is not a possible "
                f"output of rule {contest.outcome_rule_id!r}"
            )
        for cid, count in contest.universe:
            if cid not in collections:
                raise AuditError(
                    f"contest {contest.id!r} references unknown collection {cid!r}"
                )
            if collections[cid].manifest.total() != count:
                raise AuditError(
                    f"contest {contest.id!r} expects {count} ballots in {cid!r} but "
                    f"the manifest lists {collections[cid].manifest.total()}"
                )

    prior = doc.get("prior", {"kind": "haldane"})
    fuzzer = doc.get("fuzzer", fuzzing.GAMMA)
    if fuzzer not in fuzzing.FUZZER_KINDS:
        raise AuditError(f"unknown fuzzer {fuzzer!r}")
    seed = None
    seed_doc = resolve(doc["seed"]) if doc.get("seed") else None
    if seed_doc:
        seed = AuditSeed(seed_doc["digits"], seed_doc.get("provenance", ""))

    raw = dict(doc)
    raw["contests"] = [contest_to_json(c) for c in contests]
    raw["collections"] = inlined_collections
    if seed_doc:
        raw["seed"] = {"digits": seed.digits, "provenance": seed.provenance}

    comparison = doc.get("comparisonPrior", {})
    return AuditConfig(
        contests=contests,
        collections=collections,
        risk_limits=limits,
        prior_kind=prior.get("kind", "haldane"),
        prior_pseudocounts=prior.get("pseudocounts"),
        comparison_diagonal=float(comparison.get("diagonal", 50.0)),
        comparison_off_diagonal=float(comparison.get("offDiagonal", 0.5)),
        fuzzer=fuzzer,
        trials=int(doc.get("trials", doc.get("numTrials", 1_000_000))),
        escalation=doc.get(
            "escalation", {"policy": "percentage", "growth": ESCALATION_GROWTH}
        ),
        full_recount_threshold=float(
            doc.get("fullRecountThreshold", FULL_RECOUNT_THRESHOLD)
        ),
        seed=seed,
        raw=raw,
    )


class AuditState:
    """Mutable, JSON-round-trippable record of one live audit."""

    def __init__(self, config: AuditConfig, seed: AuditSeed):
        self.config = config
        self.seed = seed
        self.status: dict[str, str] = {c.id: AUDITING for c in config.contests}
        self.final_outcomes: dict[str, str] = {}
        self.rounds: list[dict] = []
        self.replay_log: list[dict] = []
        self.prng_counter = 1

    # -- derived views -----------------------------------------------------

    def current_round(self) -> int:
        return len(self.rounds)

    def sampleable_collections(self) -> list[str]:
        out = []
        for contest in self.config.contests:
            for cid, _ in contest.universe:
                if cid not in out and not self.config.collections[cid].is_hand_counted():
                    out.append(cid)
        return out

    def contests_on_collection(self, collection_id: str) -> list[str]:
        return [
            c.id
            for c in self.config.contests
            if collection_id in c.collection_ids() and self.status[c.id] == AUDITING
        ]

    def selected_addresses(self) -> list[str]:
        out = []
        for rnd in self.rounds:
            out.extend(s["address"] for s in rnd["selections"])
        return out

    def interpreted(self) -> dict[str, dict]:
        out = {}
        for rnd in self.rounds:
            for entry in rnd["interpretations"]:
                out[entry["address"]] = entry
        return out

    def open_selections(self) -> list[dict]:
        done = set(self.interpreted())
        out = []
        for rnd in self.rounds:
            for sel in rnd["selections"]:
                if sel["address"] not in done:
                    out.append(sel)
        return out

    def audited_ballots(self, collection_id: str | None = None) -> list[AuditedBallot]:
        out = []
        for rnd in self.rounds:
            for entry in rnd["interpretations"]:
                if collection_id is not None:
                    if parse_address(entry["address"])[0] != collection_id:
                        continue
                out.append(
                    AuditedBallot(
                        address=entry["address"],
                        actual=entry["actual"],
                        round=rnd["round"],
                        reported=entry.get("reported"),
                    )
                )
        return out

    def sample_count(self, contest: Contest) -> int:
        collections = set(contest.collection_ids())
        return sum(
            1 for address in self.interpreted() if parse_address(address)[0] in collections
        )

    def latest_estimates(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for rnd in self.rounds:
            out.update(rnd.get("riskEstimates", {}))
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "version": 1,
            "config": self.config.raw,
            "configHash": _hash(self.config.raw),
            "seed": {"digits": self.seed.digits, "provenance": self.seed.provenance},
            "status": dict(self.status),
            "finalOutcomes": dict(self.final_outcomes),
            "rounds": self.rounds,
            "replayLog": self.replay_log,
            "prngCounter": self.prng_counter,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "AuditState":
        config = load_config(doc["config"])
        seed = AuditSeed(doc["seed"]["digits"], doc["seed"].get("provenance", ""))
        state = cls(config, seed)
        state.status = dict(doc["status"])
        state.final_outcomes = dict(doc.get("finalOutcomes", {}))
        state.rounds = [dict(r) for r in doc["rounds"]]
        state.replay_log = list(doc.get("replayLog", []))
        state.prng_counter = int(doc.get("prngCounter", 1))
        return state


# ---------------------------------------------------------------------------
# Selection.


def _order_for(state: AuditState) -> list[str]:
    manifests = [
        state.config.collections[cid].manifest for cid in state.sampleable_collections()
    ]
    return global_ballot_order(manifests, state.seed)


def _extend_selection(state: AuditState, targets: Mapping[str, int]) -> list[dict]:
    """Fresh selections bringing each contest up to its target count.

    Walks the seed-keyed global ballot order per contest and unions the
    picks; a ballot pulled for one contest is credited to (and must be
    interpreted for) every auditing contest on it.
    """
    order = _order_for(state)
    previously = state.selected_addresses()
    already = set(previously)
    picked: dict[str, dict] = {}
    for contest_id, target in targets.items():
        contest = state.config.contest(contest_id)
        collections = {
            cid
            for cid in contest.collection_ids()
            if not state.config.collections[cid].is_hand_counted()
        }
        have = sum(1 for a in previously if parse_address(a)[0] in collections)
        have += sum(1 for a in picked if parse_address(a)[0] in collections)
        for address in order:
            if have >= target:
                break
            if address in already or address in picked:
                continue
            if parse_address(address)[0] not in collections:
                continue
            picked[address] = {"address": address}
            have += 1
    for address, sel in picked.items():
        sel["contests"] = state.contests_on_collection(parse_address(address)[0])
    position = {a: i for i, a in enumerate(order)}
    return sorted(picked.values(), key=lambda s: position[s["address"]])


def _sampleable_population(state: AuditState, contest: Contest) -> int:
    return sum(
        count
        for cid, count in contest.universe
        if not state.config.collections[cid].is_hand_counted()
    )


def _open_round(state: AuditState, targets: Mapping[str, int], round_number: int):
    selections = _extend_selection(state, targets)
    state.rounds.append(
        {
            "round": round_number,
            "targets": dict(targets),
            "selections": selections,
            "interpretations": [],
            "riskEstimates": {},
            "decisions": {},
        }
    )


def start_audit(config: AuditConfig) -> AuditState:
    """Open the audit: validate, then draw the round-1 pull list.

    The initial per-contest sample is ten ballots per candidate (at
    least the prior's initial size); a population smaller than that is
    selected whole, making the contest a full hand count.
    """
    if config.seed is None:
        raise AuditError(
            "no audit seed recorded; supply one in the config or record the "
            "ceremony seed first"
        )
    state = AuditState(config, config.seed)
    targets = {}
    for contest in config.contests:
        population = _sampleable_population(state, contest)
        if population == 0:
            continue  # wholly hand-counted; resolved at first round close
        prior = config.prior_for(contest)
        targets[contest.id] = min(initial_sample_size(contest, prior), population)
    _open_round(state, targets, 1)
    return state


def record_interpretations(state: AuditState, entries: Sequence[Mapping]) -> AuditState:
    """Record hand interpretations for selected, not-yet-recorded ballots.

    An entry is {"address": ..., "actual": {contestId: choiceId}} and
    must interpret exactly the contests the ballot was pulled for.
    Entries carry no reported choice; CVR joins happen at round close.
    """
    if not state.rounds:
        raise AuditError("audit has not started")
    rnd = state.rounds[-1]
    open_by_address = {s["address"]: s for s in state.open_selections()}
    for entry in entries:
        address = entry["address"]
        sel = open_by_address.pop(address, None)
        if sel is None:
            if address in state.interpreted():
                raise AuditError(f"ballot {address!r} already recorded")
            raise AuditError(f"ballot {address!r} was not selected")
        actual = dict(entry["actual"])
        expected = set(sel["contests"])
        if set(actual) != expected:
            raise AuditError(
                f"entry for {address!r} must interpret exactly the contests "
                f"{sorted(expected)}; got {sorted(actual)}"
            )
        for contest_id, choice in actual.items():
            contest = state.config.contest(contest_id)
            if choice not in contest.choice_ids():
                raise ElectionError(
                    f"vote for undeclared choice {choice!r} in contest {contest_id!r}"
                )
        rnd["interpretations"].append(
            {"address": address, "actual": actual, "round": rnd["round"]}
        )
    return state


def _join_reported(state: AuditState):
    """Attach CVR-reported choices to interpretations (comparison joins)."""
    for rnd in state.rounds:
        for entry in rnd["interpretations"]:
            if "reported" in entry:
                continue
            collection = state.config.collections[parse_address(entry["address"])[0]]
            if not collection.is_comparison():
                continue
            record = collection.cvrs.by_address().get(entry["address"])
            if record is None:
                raise AuditError(f"no CVR for audited ballot {entry['address']!r}")
            entry["reported"] = {
                cid: record.votes[cid] for cid in entry["actual"] if cid in record.votes
            }


def _contest_strata(
    state: AuditState, contest: Contest
) -> tuple[list[StratumModel], dict[str, VoteTally]]:
    """Generative models and sample tallies, one group per collection."""
    models: list[StratumModel] = []
    tallies: dict[str, VoteTally] = {}
    for collection_id, count in contest.universe:
        collection = state.config.collections[collection_id]
        if collection.is_hand_counted():
            hand = collection.hand_tallies.get(contest.id)
            if hand is None:
                raise AuditError(
                    f"hand-counted collection {collection_id!r} lacks a tally "
                    f"for contest {contest.id!r}"
                )
            hand_tally = VoteTally(
                contest.id, {c: float(hand.get(c, 0.0)) for c in contest.choice_ids()}
            )
            if round(hand_tally.total()) != count:
                raise AuditError(
                    f"hand tally for {collection_id!r} sums to {hand_tally.total():g}, "
                    f"expected {count}"
                )
            prior = state.config.prior_for(contest, collection_id)
            models.append(
                StratumModel(
                    stratum_id=collection_id,
                    kind=BALLOT_POLLING,
                    posterior=update_posterior(prior, hand_tally),
                    nonsample_size=0,
                    fuzzer=state.config.fuzzer,
                )
            )
            tallies[collection_id] = hand_tally
        elif collection.is_comparison():
            audited = state.audited_ballots(collection_id)
            row_models, row_tallies = comparison_strata_from_cvrs(
                collection.cvrs,
                audited,
                state.config.comparison_prior(contest),
                contest,
                fuzzer=state.config.fuzzer,
            )
            models.extend(row_models)
            tallies.update(row_tallies)
        else:
            audited = state.audited_ballots(collection_id)
            votes = [b.actual[contest.id] for b in audited]
            sample = tally(votes, contest)
            prior = state.config.prior_for(contest, collection_id)
            models.append(
                StratumModel(
                    stratum_id=collection_id,
                    kind=BALLOT_POLLING,
                    posterior=update_posterior(prior, sample),
                    nonsample_size=count - len(votes),
                    fuzzer=state.config.fuzzer,
                )
            )
            tallies[collection_id] = sample
    return models, tallies


def _contest_view(state: AuditState, contest: Contest) -> ContestView:
    models, tallies = _contest_strata(state, contest)
    strata = tuple(
        StratumView(
            stratum_id=m.stratum_id,
            posterior=m.posterior,
            sample_tally=tallies[m.stratum_id],
            population=m.nonsample_size + int(round(tallies[m.stratum_id].total())),
            jurisdiction=m.stratum_id.split(":", 1)[0],
            kind=m.kind,
            fuzzer=m.fuzzer,
        )
        for m in models
    )
    return ContestView(contest, state.config.risk_limit(contest.id), strata)


def _escalation_target(state: AuditState, contest: Contest) -> int:
    """Next cumulative sample size for an escalating contest."""
    population = _sampleable_population(state, contest)
    current = state.sample_count(contest)
    policy = state.config.escalation
    growth = float(policy.get("growth", ESCALATION_GROWTH))
    target = max(current + 1, math.ceil(current * (1 + growth)))
    if policy.get("policy") == "planner":
        sizes = sorted(
            {
                min(population, max(current + 1, math.ceil(current * (1 + growth) ** k)))
                for k in (1, 2, 3)
            }
        )
        rng = derive_generator(state.seed.digits, "plan", contest.id, state.current_round())
        projection = project_workload(
            _contest_view(state, contest),
            sizes,
            int(policy.get("innerReps", 12)),
            rng,
            trials=int(policy.get("trials", 10_000)),
        )
        confidence = float(policy.get("confidence", 0.9))
        target = sizes[0]
        for size, stop_probability, _ in projection.entries:
            if stop_probability >= confidence:
                target = size
                break
    if target > state.config.full_recount_threshold * population:
        target = population
    return min(target, population)


def close_round(state: AuditState) -> dict[str, str]:
    """Measure risk and decide stop/escalate/complete per contest.

    Requires every selection of the open round to be recorded.  Returns
    the decision map; escalating contests get fresh selections in a new
    round.
    """
    if not state.rounds:
        raise AuditError("audit has not started")
    missing = [s["address"] for s in state.open_selections()]
    if missing:
        raise AuditError(
            f"round {state.current_round()} is incomplete; missing interpretations "
            f"for: {', '.join(missing[:5])}" + (" ..." if len(missing) > 5 else "")
        )
    _join_reported(state)
    rnd = state.rounds[-1]
    round_number = rnd["round"]
    decisions: dict[str, str] = {}
    targets: dict[str, int] = {}

    for contest in state.config.contests:
        if state.status[contest.id] != AUDITING:
            continue
        models, tallies = _contest_strata(state, contest)
        rng = derive_generator(state.seed.digits, "risk", contest.id, round_number)
        estimate = measure_risk(models, tallies, contest, state.config.trials, rng)
        rnd["riskEstimates"][contest.id] = estimate.to_json()

        if all(m.nonsample_size == 0 for m in models):
            total = VoteTally(contest.id, {c: 0.0 for c in contest.choice_ids()})
            for t in tallies.values():
                total = total.add(t)
            outcome = get_rule(contest.outcome_rule_id).winner(
                total.counts, contest.tie_break_order
            )
            state.status[contest.id] = HAND_COUNT_COMPLETE
            state.final_outcomes[contest.id] = outcome
            decisions[contest.id] = "complete"
        elif stopping_decision(estimate, state.config.risk_limit(contest.id)) == "stop":
            state.status[contest.id] = ACCEPTED
            state.final_outcomes[contest.id] = contest.reported_outcome
            decisions[contest.id] = "stop"
        else:
            decisions[contest.id] = "escalate"
            targets[contest.id] = _escalation_target(state, contest)

    rnd["decisions"] = decisions
    rnd["hash"] = _round_hash(state, rnd)

    if targets:
        _open_round(state, targets, round_number + 1)
    return decisions


def _round_hash(state: AuditState, rnd: dict) -> str:
    prev = ""
    if rnd["round"] >= 2:
        prev = state.rounds[rnd["round"] - 2].get("hash", "")
    content = {k: v for k, v in rnd.items() if k != "hash"}
    return _hash({"prev": prev, "round": content, "config": _hash(state.config.raw)})


def draw_additional(state: AuditState, contest_id: str, count: int) -> list[dict]:
    """Manually draw ``count`` extra ballots for one contest.

    Uses the counter-mode stream continuation (repeat until a fresh
    location turns up); every draw, including rejected repeats, is
    appended to the replay log with its counter value.
    """
    if not state.rounds:
        raise AuditError("audit has not started")
    contest = state.config.contest(contest_id)
    if state.status[contest.id] != AUDITING:
        raise AuditError(f"contest {contest_id!r} is not auditing")
    manifests = [
        state.config.collections[cid].manifest
        for cid in contest.collection_ids()
        if not state.config.collections[cid].is_hand_counted()
    ]
    population = {m.collection_id for m in manifests}
    already = [
        a for a in state.selected_addresses() if parse_address(a)[0] in population
    ]
    stream = PrngStream(state.seed, state.prng_counter)
    trace: list[dict] = []
    picked = sample_without_replacement(stream, manifests, count, already, trace=trace)
    state.prng_counter = stream.counter
    rnd = state.rounds[-1]
    for event in trace:
        state.replay_log.append(
            {"purpose": f"draw:{contest_id}", "round": rnd["round"], **event}
        )
    selections = []
    for address in picked:
        sel = {
            "address": address,
            "contests": state.contests_on_collection(parse_address(address)[0]),
        }
        rnd["selections"].append(sel)
        selections.append(sel)
    return selections


# ---------------------------------------------------------------------------
# Export and replay.


def export_audit_record(state: AuditState) -> dict:
    """Public bundle: config, seed, every selection with its provenance,
    every interpretation, every risk estimate, every decision."""
    return state.to_json()


def export_bytes(state: AuditState) -> bytes:
    return (canonical_json(export_audit_record(state)) + "\n").encode("utf-8")


def _manual_draw_runs(bundle: dict, round_number: int) -> list[tuple[str, int]]:
    """Contiguous (contest, fresh-draw count) runs from the replay log."""
    runs: list[list] = []
    for event in bundle.get("replayLog", []):
        purpose = event.get("purpose", "")
        if not purpose.startswith("draw:") or event.get("round") != round_number:
            continue
        contest_id = purpose[len("draw:"):]
        if runs and runs[-1][0] == contest_id:
            runs[-1][1] += 1 if event.get("fresh") else 0
        else:
            runs.append([contest_id, 1 if event.get("fresh") else 0])
    return [(cid, n) for cid, n in runs if n > 0]


def replay_audit_record(bundle: dict) -> dict:
    """Re-run an exported audit and verify it reproduces byte-for-byte.

    Selections are re-drawn from the seed, manual draws re-executed
    from the replay log, risk estimates re-measured from the recorded
    interpretations, and round hashes re-chained; any deviation
    (including a tampered interpretation, which breaks the hash chain)
    is reported as a mismatch.
    """
    mismatches: list[str] = []
    config = load_config(bundle["config"])
    if _hash(bundle["config"]) != bundle.get("configHash"):
        mismatches.append("config hash does not match the recorded configHash")
    seed = AuditSeed(bundle["seed"]["digits"], bundle["seed"].get("provenance", ""))
    config = dataclasses.replace(config, seed=seed)

    replayed = start_audit(config)
    for recorded in bundle["rounds"]:
        if not replayed.rounds or replayed.rounds[-1]["round"] != recorded["round"]:
            mismatches.append(f"round numbering diverged at round {recorded['round']}")
            break
        for contest_id, n in _manual_draw_runs(bundle, recorded["round"]):
            try:
                draw_additional(replayed, contest_id, n)
            except (AuditError, ValueError) as e:
                mismatches.append(f"round {recorded['round']}: manual draws fail: {e}")
                break
        rnd = replayed.rounds[-1]
        got = [s["address"] for s in rnd["selections"]]
        want = [s["address"] for s in recorded["selections"]]
        if got != want:
            mismatches.append(f"round {recorded['round']}: selections do not reproduce")
            break
        try:
            record_interpretations(replayed, recorded["interpretations"])
        except (AuditError, ElectionError) as e:
            mismatches.append(f"round {recorded['round']}: interpretations rejected: {e}")
            break
        if not recorded.get("decisions") and not recorded.get("hash"):
            break  # round was still open at export time
        close_round(replayed)
        replayed_round = replayed.rounds[recorded["round"] - 1]
        for cid, est in recorded["riskEstimates"].items():
            mine = replayed_round["riskEstimates"].get(cid)
            if canonical_json(mine) != canonical_json(est):
                mismatches.append(
                    f"round {recorded['round']}: risk estimate for {cid!r} does not reproduce"
                )
        if replayed_round["decisions"] != recorded["decisions"]:
            mismatches.append(f"round {recorded['round']}: decisions do not reproduce")
        if replayed_round.get("hash") != recorded.get("hash"):
            mismatches.append(
                f"round {recorded['round']}: hash chain broken (possible tampering)"
            )

    if not mismatches:
        if canonical_json(export_audit_record(replayed)) != canonical_json(bundle):
            mismatches.append("exported bundle does not reproduce byte-for-byte")
    return {"ok": not mismatches, "mismatches": mismatches}


# ---------------------------------------------------------------------------
# Reports (single source of truth for the CLI and the HTTP service).


def status_report(state: AuditState) -> dict:
    estimates = state.latest_estimates()
    contests = []
    for contest in state.config.contests:
        est = estimates.get(contest.id)
        risk = est["risk"] if est else None
        decision = None
        for rnd in reversed(state.rounds):
            if contest.id in rnd.get("decisions", {}):
                decision = rnd["decisions"][contest.id]
                break
        history = [
            {"round": rnd["round"], "risk": rnd["riskEstimates"][contest.id]["risk"]}
            for rnd in state.rounds
            if contest.id in rnd.get("riskEstimates", {})
        ]
        contests.append(
            {
                "id": contest.id,
                "status": state.status[contest.id],
                "risk": risk,
                "riskDisplay": f"{risk * 100:.2f}%" if risk is not None else None,
                "riskLimit": state.config.risk_limit(contest.id),
                "riskLimitDisplay": f"{state.config.risk_limit(contest.id) * 100:.2f}%",
                "decision": decision,
                "reportedOutcome": contest.reported_outcome,
                "finalOutcome": state.final_outcomes.get(contest.id),
                "sampleSize": state.sample_count(contest),
                "population": contest.total_ballots(),
                "winFrequencies": est["winFrequencies"] if est else None,
                "winFrequencyDisplay": (
                    {k: f"{v * 100:.2f}%" for k, v in est["winFrequencies"].items()}
                    if est
                    else None
                ),
                "history": history,
            }
        )
    return {"round": state.current_round(), "contests": contests}


def selections_report(state: AuditState) -> dict:
    """Open pull list.  Never includes CVR-reported choices."""
    return {
        "round": state.current_round(),
        "open": [dict(s) for s in state.open_selections()],
    }


def plan_report(state: AuditState, confidence: float = 0.9, rng=None) -> dict:
    """Sample-allocation plan across collections still under audit."""
    views = []
    remaining: dict[str, int] = {}
    for contest in state.config.contests:
        if state.status[contest.id] != AUDITING:
            continue
        view = _contest_view(state, contest)
        views.append(view)
        for stratum in view.strata:
            jur = stratum.jurisdiction
            room = sum(s.remaining() for s in view.strata if s.jurisdiction == jur)
            remaining[jur] = max(remaining.get(jur, 0), room)
    if rng is None:
        rng = derive_generator(state.seed.digits, "plan", state.current_round())
    plan = plan_allocation(views, remaining, rng, confidence=confidence)
    return plan.to_json()
