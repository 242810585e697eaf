"""Pluggable, deterministic contest-outcome rules.

A rule maps a tally (possibly non-integral: fuzzed tallies are legal
input) plus a pre-committed tie-break order to an outcome value.  The
same tie_break_order must be the one used in the original tabulation.
Tie law used throughout: earliest position in tie_break_order wins;
latest is eliminated first.

Rules are looked up by id in a registry, so additional rules can be
plugged in without touching the engine; the engine treats them as black
boxes applied to test vote tallies.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .election import PREFERENCE_SEP


class RuleError(ValueError):
    pass


class OutcomeRule:
    """Base rule: subclass and override ``winner``.

    ``winners_batch`` evaluates a (m, t) matrix of tallies; the default
    deduplicates identical rows and calls ``winner`` per unique row,
    which is adequate for moderate trial counts.  Rules with a vector
    form should override it.
    """

    id: str = ""

    def winner(self, counts: Mapping[str, float], tie_break_order: Sequence[str]) -> str:
        raise NotImplementedError

    def winners_batch(
        self,
        matrix: np.ndarray,
        choice_ids: Sequence[str],
        tie_break_order: Sequence[str],
    ) -> np.ndarray:
        uniq, inverse = np.unique(matrix, axis=0, return_inverse=True)
        out = np.array(
            [self.winner(dict(zip(choice_ids, row)), tie_break_order) for row in uniq],
            dtype=object,
        )
        return out[inverse]

    def validate_outcome(self, outcome: str, tie_break_order: Sequence[str]) -> bool:
        """Whether ``outcome`` is a possible output of this rule."""
        return outcome in tie_break_order


def _best_candidate(
    counts: Mapping[str, float], tie_break_order: Sequence[str]
) -> str:
    if not tie_break_order:
        raise RuleError("contest has no candidates")
    best = None
    best_count = None
    for cand in tie_break_order:  # earliest position wins exact ties
        c = counts.get(cand, 0.0)
        if best is None or c > best_count:
            best, best_count = cand, c
    return best


class Plurality(OutcomeRule):
    """Largest count among candidates wins; non-candidate entries ignored."""

    id = "plurality"

    def winner(self, counts, tie_break_order):
        return _best_candidate(counts, tie_break_order)

    def winners_batch(self, matrix, choice_ids, tie_break_order):
        col = {cid: i for i, cid in enumerate(choice_ids)}
        try:
            cand_cols = [col[c] for c in tie_break_order]
        except KeyError as e:
            raise RuleError(f"candidate {e.args[0]!r} missing from tally columns") from None
        if not cand_cols:
            raise RuleError("contest has no candidates")
        # argmax returns the first maximum: columns are in tie-break order
        idx = np.argmax(matrix[:, cand_cols], axis=1)
        return np.array(tie_break_order, dtype=object)[idx]


class Approval(Plurality):
    """Most-approved candidate wins; tally entries are approval counts."""

    id = "approval"


class InstantRunoff(OutcomeRule):
    """Repeated elimination of the weakest first-preference candidate.

    Tally keys are preference orderings (candidate ids joined by ">") or
    non-candidate ids, which never count toward the majority threshold.
    A candidate wins on a strict majority of the continuing (non-
    exhausted) weight, or by being the last one standing.  Elimination
    ties drop the candidate latest in tie_break_order.
    """

    id = "irv"

    def winner(self, counts, tie_break_order):
        if not tie_break_order:
            raise RuleError("contest has no candidates")
        candidates = set(tie_break_order)
        rankings: list[tuple[tuple[str, ...], float]] = []
        for key, weight in counts.items():
            if key in candidates:
                rankings.append(((key,), weight))
                continue
            parts = tuple(key.split(PREFERENCE_SEP))
            if all(p in candidates for p in parts):
                rankings.append((parts, weight))
            # anything else (undervote/overvote/invalid/...) carries no preference

        position = {c: i for i, c in enumerate(tie_break_order)}
        continuing = list(tie_break_order)
        while True:
            if len(continuing) == 1:
                return continuing[0]
            alive = set(continuing)
            weights = {c: 0.0 for c in continuing}
            for ranking, w in rankings:
                for cand in ranking:
                    if cand in alive:
                        weights[cand] += w
                        break
            total = sum(weights.values())
            leader = _best_candidate(weights, continuing)
            if weights[leader] > total / 2 and total > 0:
                return leader
            low = min(weights.values())
            # eliminate the tied-lowest candidate latest in tie-break order
            out = max(
                (c for c in continuing if weights[c] == low),
                key=lambda c: position[c],
            )
            continuing.remove(out)


_REGISTRY: dict[str, OutcomeRule] = {}


def register_rule(rule: OutcomeRule):
    if not rule.id:
        raise RuleError("rule must carry a non-empty id")
    _REGISTRY[rule.id] = rule


def get_rule(rule_id: str) -> OutcomeRule:
    try:
        return _REGISTRY[rule_id]
    except KeyError:
        raise RuleError(
            f"unknown outcome rule {rule_id!r}; registered: {sorted(_REGISTRY)}"
        ) from None


def registered_rules() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


for _rule in (Plurality(), Approval(), InstantRunoff()):
    register_rule(_rule)
