"""Core election domain types: contests, choices, tallies, manifests, CVRs.

Everything here is an immutable value type; all derived data (tallies,
validation reports) is produced by pure functions.  Ballot locations are
addressed as ``collection/container/position`` strings, which double as
the stable hash inputs for sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

CANDIDATE = "candidate"
NON_CANDIDATE = "non-candidate"

#: Reserved ids that always denote non-candidate choices.
RESERVED_NON_CANDIDATES = ("undervote", "overvote", "invalid")

#: Separator for preferential choice ids ("Jones>Smith>Berman").
PREFERENCE_SEP = ">"


class ElectionError(ValueError):
    """Invalid election data (unknown choice, malformed manifest, ...)."""


@dataclass(frozen=True)
class Choice:
    """One possible interpretation of a vote.

    For preferential contests the id encodes the full candidate ordering,
    candidate ids joined by ``>`` in decreasing preference.
    """

    id: str
    kind: str = CANDIDATE

    def __post_init__(self):
        if self.kind not in (CANDIDATE, NON_CANDIDATE):
            raise ElectionError(f"unknown choice kind {self.kind!r}")
        if not self.id:
            raise ElectionError("choice id must be non-empty")


@dataclass(frozen=True)
class Contest:
    """A single contest: its choice space, outcome rule, and universe.

    ``tie_break_order`` must be fixed before tabulation or audit and must
    be a permutation of the candidate ids; earliest position wins ties.
    ``universe`` lists (collection id, ballot count) pairs; the audit
    population size is their sum.
    """

    id: str
    choices: tuple[Choice, ...]
    outcome_rule_id: str
    tie_break_order: tuple[str, ...]
    reported_outcome: str
    universe: tuple[tuple[str, int], ...]

    def __post_init__(self):
        ids = [c.id for c in self.choices]
        if len(set(ids)) != len(ids):
            raise ElectionError(f"duplicate choice ids in contest {self.id!r}")
        for c in self.choices:
            if c.id in RESERVED_NON_CANDIDATES and c.kind == CANDIDATE:
                raise ElectionError(
                    f"{c.id!r} is a reserved non-candidate choice id"
                )
        cand = set(self.candidate_ids())
        if set(self.tie_break_order) != cand or len(self.tie_break_order) != len(cand):
            raise ElectionError(
                f"tie_break_order must be a permutation of the candidate ids "
                f"of contest {self.id!r}"
            )
        if self.total_ballots() <= 0:
            raise ElectionError(f"contest {self.id!r} has an empty universe")
        for _, count in self.universe:
            if count < 0:
                raise ElectionError("universe ballot counts must be nonnegative")

    def choice_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.choices)

    def candidate_ids(self) -> tuple[str, ...]:
        """Ids of everyone who could win the contest.

        For preferential contests the candidate-kind choice ids are
        orderings; the candidates are the names appearing inside them.
        """
        seen: list[str] = []
        for c in self.choices:
            if c.kind != CANDIDATE:
                continue
            for part in c.id.split(PREFERENCE_SEP):
                if part not in seen:
                    seen.append(part)
        return tuple(seen)

    def candidate_choice_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.choices if c.kind == CANDIDATE)

    def is_candidate(self, choice_id: str) -> bool:
        return choice_id in self.candidate_ids()

    def total_ballots(self) -> int:
        return sum(count for _, count in self.universe)

    def collection_ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.universe)


@dataclass(frozen=True)
class VoteTally:
    """Counts per choice id for one contest.

    Counts may be non-integral: fuzzed tallies and scaled resamples are
    tallies too.  They must be nonnegative.
    """

    contest_id: str
    counts: Mapping[str, float]

    def __post_init__(self):
        for cid, v in self.counts.items():
            if v < 0:
                raise ElectionError(f"negative count for choice {cid!r}")

    @classmethod
    def signed(cls, contest_id: str, counts: Mapping[str, float]) -> "VoteTally":
        """Construct without the nonnegativity check.

        Only for fuzzed intermediates under signed fuzzers (the normal
        kind passes negative values through unclipped); real tallies are
        always nonnegative.
        """
        obj = cls.__new__(cls)
        object.__setattr__(obj, "contest_id", contest_id)
        object.__setattr__(obj, "counts", dict(counts))
        return obj

    def total(self) -> float:
        return sum(self.counts.values())

    def voteshare(self) -> dict[str, float]:
        tot = self.total()
        if tot <= 0:
            raise ElectionError("voteshare of an all-zero tally is undefined")
        return {cid: v / tot for cid, v in self.counts.items()}

    def add(self, other: "VoteTally") -> "VoteTally":
        if other.contest_id != self.contest_id:
            raise ElectionError("cannot add tallies of different contests")
        keys = set(self.counts) | set(other.counts)
        return VoteTally(
            self.contest_id,
            {k: self.counts.get(k, 0) + other.counts.get(k, 0) for k in keys},
        )


def tally(votes: Sequence[str], contest: Contest) -> VoteTally:
    """Count votes per declared choice; unknown ids are rejected by name."""
    counts = {cid: 0 for cid in contest.choice_ids()}
    for v in votes:
        if v not in counts:
            raise ElectionError(
                f"vote for undeclared choice {v!r} in contest {contest.id!r}"
            )
        counts[v] += 1
    return VoteTally(contest.id, counts)


def format_address(collection: str, container: str, position: int) -> str:
    return f"{collection}/{container}/{position}"


def parse_address(address: str) -> tuple[str, str, int]:
    parts = address.rsplit("/", 2)
    if len(parts) != 3:
        raise ElectionError(f"malformed ballot address {address!r}")
    collection, container, pos = parts
    try:
        position = int(pos)
    except ValueError:
        raise ElectionError(f"malformed ballot address {address!r}") from None
    return collection, container, position


@dataclass(frozen=True)
class BallotManifest:
    """Physical storage description of one collection of cast paper ballots.

    Containers are ordered; each ballot is addressable as
    (container label, 1-based position).  ``styles`` may annotate
    containers with ballot-style labels (unused by the sampler itself).
    """

    collection_id: str
    containers: tuple[tuple[str, int], ...]
    styles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        labels = [label for label, _ in self.containers]
        if len(set(labels)) != len(labels):
            raise ElectionError(
                f"duplicate container labels in manifest {self.collection_id!r}"
            )
        for _, count in self.containers:
            if count < 0:
                raise ElectionError("container ballot counts must be nonnegative")

    def total(self) -> int:
        return sum(count for _, count in self.containers)

    def addresses(self) -> list[str]:
        """All ballot addresses, in manifest order."""
        out = []
        for label, count in self.containers:
            for pos in range(1, count + 1):
                out.append(format_address(self.collection_id, label, pos))
        return out

    def address_at(self, index: int) -> str:
        """1-based index into the manifest order."""
        if not 1 <= index <= self.total():
            raise ElectionError(f"ballot index {index} out of range")
        remaining = index
        for label, count in self.containers:
            if remaining <= count:
                return format_address(self.collection_id, label, remaining)
            remaining -= count
        raise AssertionError("unreachable")

    def contains(self, address: str) -> bool:
        collection, container, position = parse_address(address)
        if collection != self.collection_id:
            return False
        for label, count in self.containers:
            if label == container:
                return 1 <= position <= count
        return False


@dataclass(frozen=True)
class CastVoteRecord:
    """Scanner-reported choices for the ballot at one location."""

    address: str
    votes: Mapping[str, str]
    imprinted_id: str | None = None


@dataclass(frozen=True)
class CastVoteRecordFile:
    collection_id: str
    records: tuple[CastVoteRecord, ...]

    def by_address(self) -> dict[str, CastVoteRecord]:
        return {r.address: r for r in self.records}


@dataclass(frozen=True)
class AuditedBallot:
    """One hand interpretation: actual choice per contest at one location.

    ``reported`` is attached by the engine after recording (comparison
    audits); interpreters never see it.
    """

    address: str
    actual: Mapping[str, str]
    round: int
    reported: Mapping[str, str] | None = None


@dataclass(frozen=True)
class ValidationFinding:
    kind: str
    detail: str


def validate_cvrs_against_manifest(
    manifest: BallotManifest, cvrs: CastVoteRecordFile
) -> list[ValidationFinding]:
    """Pre-audit cross-check of a CVR file against its ballot manifest.

    Returns findings for count mismatches, duplicate locations, and
    out-of-range addresses; an empty report means the file is usable.
    """
    if manifest.collection_id != cvrs.collection_id:
        raise ElectionError(
            "manifest and CVR file belong to different collections: "
            f"{manifest.collection_id!r} vs {cvrs.collection_id!r}"
        )
    findings = []
    if len(cvrs.records) != manifest.total():
        findings.append(
            ValidationFinding(
                "count-mismatch",
                f"manifest lists {manifest.total()} ballots but CVR file has "
                f"{len(cvrs.records)} records",
            )
        )
    seen: set[str] = set()
    for rec in cvrs.records:
        if rec.address in seen:
            findings.append(
                ValidationFinding("duplicate-location", f"address {rec.address!r} repeated")
            )
        seen.add(rec.address)
        if not manifest.contains(rec.address):
            findings.append(
                ValidationFinding("out-of-range", f"address {rec.address!r} not on manifest")
            )
    return findings


# ---------------------------------------------------------------------------
# JSON loading.  Schemas for these documents live in schemas/.


def _read_json(source) -> dict:
    if isinstance(source, (str, Path)):
        return json.loads(Path(source).read_text())
    return source


def load_manifest(source) -> BallotManifest:
    doc = _read_json(source)
    return BallotManifest(
        collection_id=doc["collection"],
        containers=tuple((c["label"], int(c["count"])) for c in doc["containers"]),
        styles=doc.get("styles", {}),
    )


def load_cvr_file(source) -> CastVoteRecordFile:
    doc = _read_json(source)
    return CastVoteRecordFile(
        collection_id=doc["collection"],
        records=tuple(
            CastVoteRecord(
                address=r["address"],
                votes=r["votes"],
                imprinted_id=r.get("imprintedId"),
            )
            for r in doc["records"]
        ),
    )


def load_contest(source) -> Contest:
    doc = _read_json(source)

    def kind_of(c):
        if "kind" in c:
            return c["kind"]
        return NON_CANDIDATE if c["id"] in RESERVED_NON_CANDIDATES else CANDIDATE

    return Contest(
        id=doc["id"],
        choices=tuple(Choice(c["id"], kind_of(c)) for c in doc["choices"]),
        outcome_rule_id=doc["outcomeRule"],
        tie_break_order=tuple(doc["tieBreakOrder"]),
        reported_outcome=doc["reportedOutcome"],
        universe=tuple((u["collection"], int(u["ballots"])) for u in doc["universe"]),
    )


def contest_to_json(contest: Contest) -> dict:
    return {
        "id": contest.id,
        "choices": [{"id": c.id, "kind": c.kind} for c in contest.choices],
        "outcomeRule": contest.outcome_rule_id,
        "tieBreakOrder": list(contest.tie_break_order),
        "reportedOutcome": contest.reported_outcome,
        "universe": [
            {"collection": cid, "ballots": count} for cid, count in contest.universe
        ],
    }


def manifest_to_json(manifest: BallotManifest) -> dict:
    doc = {
        "collection": manifest.collection_id,
        "containers": [{"label": label, "count": count} for label, count in manifest.containers],
    }
    if manifest.styles:
        doc["styles"] = dict(manifest.styles)
    return doc


def cvr_file_to_json(cvrs: CastVoteRecordFile) -> dict:
    records = []
    for r in cvrs.records:
        rec = {"address": r.address, "votes": dict(r.votes)}
        if r.imprinted_id is not None:
            rec["imprintedId"] = r.imprinted_id
        records.append(rec)
    return {"collection": cvrs.collection_id, "records": records}
