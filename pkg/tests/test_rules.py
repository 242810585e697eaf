from itertools import permutations, product

import numpy as np
import pytest

from bayesaudit.rules import (
    InstantRunoff,
    OutcomeRule,
    RuleError,
    get_rule,
    register_rule,
    registered_rules,
)

plurality = get_rule("plurality")
approval = get_rule("approval")
irv = get_rule("irv")


class TestPlurality:
    def test_clear_winner(self):
        counts = {"Jones": 234, "Smith": 3122, "Berman": 43, "Undervote": 2}
        assert plurality.winner(counts, ("Jones", "Smith", "Berman")) == "Smith"

    def test_two_candidate_counts(self):
        assert plurality.winner({"A": 118, "B": 136}, ("A", "B")) == "B"

    def test_tie_goes_to_earliest_in_tie_order(self):
        assert plurality.winner({"A": 5, "B": 5}, ("B", "A")) == "B"
        assert plurality.winner({"A": 5, "B": 5}, ("A", "B")) == "A"

    def test_non_candidates_cannot_win(self):
        counts = {"A": 1, "B": 2, "undervote": 99}
        assert plurality.winner(counts, ("A", "B")) == "B"

    def test_no_candidates_rejected(self):
        with pytest.raises(RuleError):
            plurality.winner({"A": 1}, ())

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        matrix = rng.integers(0, 30, size=(200, 3)).astype(float)
        ids = ("A", "B", "C")
        tie = ("C", "A", "B")
        batch = plurality.winners_batch(matrix, ids, tie)
        for row, got in zip(matrix, batch):
            assert got == plurality.winner(dict(zip(ids, row)), tie)

    def test_exhaustive_against_bruteforce_oracle(self):
        # all integer tallies over 3 choices with counts <= 4, all tie orders
        ids = ("A", "B", "C")
        for counts in product(range(5), repeat=3):
            tally = dict(zip(ids, counts))
            for tie in permutations(ids):
                best = max(tally.values())
                expected = next(c for c in tie if tally[c] == best)
                assert plurality.winner(tally, tie) == expected


class TestApproval:
    def test_most_approved_wins(self):
        assert approval.winner({"X": 10, "Y": 3}, ("X", "Y")) == "X"

    def test_tie_respects_order(self):
        assert approval.winner({"X": 7, "Y": 7}, ("Y", "X")) == "Y"

    def test_zero_approvals_still_resolve(self):
        assert approval.winner({"X": 0, "Y": 0, "Z": 1}, ("X", "Y", "Z")) == "Z"


class TestInstantRunoff:
    def test_first_round_majority(self):
        counts = {
            "Jones>Smith>Berman": 234,
            "Jones>Berman>Smith": 1,
            "Smith>Jones>Berman": 2192,
            "Smith>Berman>Jones": 344,
            "Berman>Smith>Jones": 19,
            "invalid": 2,
        }
        # Smith holds 2536 of 2790 first preferences among valid votes
        assert irv.winner(counts, ("Jones", "Smith", "Berman")) == "Smith"

    def test_single_candidate(self):
        assert irv.winner({"A": 3}, ("A",)) == "A"

    def test_elimination_tie_drops_latest_in_order(self):
        # A and B tie 2-2; B (latest) is eliminated; A wins alone
        assert irv.winner({"A>B": 2, "B>A": 2}, ("A", "B")) == "A"

    def test_transfer_after_elimination(self):
        counts = {"A>C>B": 4, "B>C>A": 3, "C>B>A": 2}
        # C eliminated first; its 2 votes transfer to B: A 4 vs B 5
        assert irv.winner(counts, ("A", "B", "C")) == "B"

    def test_real_weights_accepted(self):
        counts = {"A>B": 2.5, "B>A": 2.4}
        assert irv.winner(counts, ("A", "B")) == "A"

    def test_exhausted_ballots_leave_the_threshold(self):
        # after C is eliminated, C-only ballots exhaust; A has 3 of 5 continuing
        counts = {"A": 3, "B": 2, "C": 2}
        assert irv.winner(counts, ("A", "B", "C")) == "A"

    def test_no_candidates_rejected(self):
        with pytest.raises(RuleError):
            irv.winner({"A": 1}, ())

    def test_batch_dedupes_and_matches_scalar(self):
        rng = np.random.default_rng(11)
        ids = ("A>B", "B>A", "invalid")
        matrix = rng.integers(0, 4, size=(100, 3)).astype(float)
        batch = irv.winners_batch(matrix, ids, ("A", "B"))
        for row, got in zip(matrix, batch):
            assert got == irv.winner(dict(zip(ids, row)), ("A", "B"))


class TestRuleProperties:
    def test_scaling_never_changes_the_winner(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            counts = {c: float(rng.integers(0, 40)) for c in ("A", "B", "C")}
            for rule in (plurality, approval):
                w = rule.winner(counts, ("A", "B", "C"))
                scaled = {c: v * 7.3 for c, v in counts.items()}
                assert rule.winner(scaled, ("A", "B", "C")) == w
        pref = {"A>B>C": 5.0, "B>C>A": 4.0, "C>A>B": 3.0}
        assert irv.winner(pref, ("A", "B", "C")) == irv.winner(
            {k: v * 0.5 for k, v in pref.items()}, ("A", "B", "C")
        )

    def test_determinism_repeated_evaluations(self):
        rng = np.random.default_rng(5)
        counts = {c: float(rng.integers(0, 100)) for c in ("A", "B", "C")}
        outcomes = {plurality.winner(counts, ("A", "B", "C")) for _ in range(1000)}
        assert len(outcomes) == 1


class TestRegistry:
    def test_builtins_registered(self):
        assert set(registered_rules()) >= {"plurality", "approval", "irv"}

    def test_unknown_rule_named_in_error(self):
        with pytest.raises(RuleError, match="borda"):
            get_rule("borda")

    def test_third_party_rule_plugs_in(self):
        class Antiplurality(OutcomeRule):
            id = "antiplurality"

            def winner(self, counts, tie_break_order):
                worst = min(counts.get(c, 0.0) for c in tie_break_order)
                return next(c for c in tie_break_order if counts.get(c, 0.0) == worst)

        register_rule(Antiplurality())
        assert get_rule("antiplurality").winner({"A": 5, "B": 1}, ("A", "B")) == "B"

    def test_reported_outcome_validation(self):
        assert plurality.validate_outcome("A", ("A", "B"))
        assert not plurality.validate_outcome("undervote", ("A", "B"))
