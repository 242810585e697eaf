import json

import numpy as np
import pytest

from bayesaudit.election import parse_address
from bayesaudit.orchestrator import (
    ACCEPTED,
    AUDITING,
    HAND_COUNT_COMPLETE,
    AuditError,
    AuditState,
    canonical_json,
    close_round,
    draw_additional,
    export_audit_record,
    export_bytes,
    load_config,
    plan_report,
    record_interpretations,
    replay_audit_record,
    selections_report,
    start_audit,
    status_report,
)
from bayesaudit.prng import AuditSeed, global_ballot_order
from bayesaudit.election import load_manifest

from audit_harness import (
    answer_open_selections,
    contest_doc,
    manifest_doc,
    polling_config,
    run_audit,
    two_candidate_truth,
)

SEED = "41352106340634031355"


class TestLoadConfig:
    def test_inlines_and_validates(self, tmp_path):
        m = tmp_path / "manifest.json"
        m.write_text(json.dumps(manifest_doc("c1", 100)))
        doc = {
            "contests": [contest_doc(collections=(("c1", 100),))],
            "collections": [{"manifest": "manifest.json"}],
            "seed": {"digits": SEED},
        }
        p = tmp_path / "config.json"
        p.write_text(json.dumps(doc))
        config = load_config(p)
        assert config.raw["collections"][0]["manifest"]["collection"] == "c1"
        assert config.trials == 1_000_000  # default

    def test_universe_count_must_match_manifest(self):
        doc = polling_config(n=100)
        doc["contests"][0]["universe"][0]["ballots"] = 99
        with pytest.raises(AuditError, match="expects 99"):
            load_config(doc)

    def test_risk_limit_bounds(self):
        with pytest.raises(AuditError, match="risk limit"):
            load_config(polling_config(risk_limit=1.5))

    def test_reported_outcome_must_be_possible(self):
        doc = polling_config()
        doc["contests"][0]["reportedOutcome"] = "undervote"
        with pytest.raises(AuditError, match="not a possible"):
            load_config(doc)

    def test_cvr_cross_checks_run_at_load(self):
        doc = polling_config(n=3)
        doc["collections"][0]["cvrs"] = {
            "collection": "c1",
            "records": [
                {"address": "c1/B1/1", "votes": {"race": "A"}},
                {"address": "c1/B1/1", "votes": {"race": "A"}},
                {"address": "c1/B1/2", "votes": {"race": "B"}},
            ],
        }
        with pytest.raises(AuditError, match="duplicate-location"):
            load_config(doc)

    def test_per_contest_risk_limits(self):
        doc = polling_config()
        doc["riskLimits"] = {"race": 0.02}
        assert load_config(doc).risk_limit("race") == 0.02

    def test_num_trials_alias(self):
        doc = polling_config()
        del doc["trials"]
        doc["numTrials"] = 4321
        assert load_config(doc).trials == 4321


class TestStartAudit:
    def test_initial_sample_is_ten_per_candidate(self):
        state = start_audit(load_config(polling_config(n=2000)))
        assert len(state.rounds[0]["selections"]) == 20

    def test_selections_follow_the_global_order_prefix(self):
        config = load_config(polling_config(n=500))
        state = start_audit(config)
        order = global_ballot_order(
            [config.collections["c1"].manifest], AuditSeed(SEED)
        )
        got = [s["address"] for s in state.rounds[0]["selections"]]
        assert got == order[:20]

    def test_shared_ballots_serve_both_contests(self):
        doc = {
            "contests": [
                contest_doc("mayor", (("c1", 400),)),
                contest_doc("question", (("c1", 400),)),
            ],
            "collections": [{"manifest": manifest_doc("c1", 400)}],
            "seed": {"digits": SEED},
            "trials": 5000,
        }
        state = start_audit(load_config(doc))
        selections = state.rounds[0]["selections"]
        assert len(selections) == 20  # one unified pull list
        assert all(set(s["contests"]) == {"mayor", "question"} for s in selections)

    def test_tiny_population_becomes_full_hand_count(self):
        doc = polling_config(n=8, trials=1000)
        state = start_audit(load_config(doc))
        assert len(state.rounds[0]["selections"]) == 8
        truth = {"race": two_candidate_truth(
            [s["address"] for s in state.rounds[0]["selections"]], 5)}
        record_interpretations(state, answer_open_selections(state, truth))
        decisions = close_round(state)
        assert decisions == {"race": "complete"}
        assert state.status["race"] == HAND_COUNT_COMPLETE
        assert state.final_outcomes["race"] == "A"

    def test_missing_seed_rejected(self):
        doc = polling_config()
        del doc["seed"]
        with pytest.raises(AuditError, match="seed"):
            start_audit(load_config(doc))


class TestRecordInterpretations:
    def test_unselected_address_rejected(self):
        state = start_audit(load_config(polling_config()))
        with pytest.raises(AuditError, match="not selected"):
            record_interpretations(state, [{"address": "c1/B1/999", "actual": {"race": "A"}}])

    def test_duplicate_entry_rejected(self):
        state = start_audit(load_config(polling_config()))
        addr = state.rounds[0]["selections"][0]["address"]
        record_interpretations(state, [{"address": addr, "actual": {"race": "A"}}])
        with pytest.raises(AuditError, match="already recorded"):
            record_interpretations(state, [{"address": addr, "actual": {"race": "A"}}])

    def test_unknown_choice_rejected(self):
        state = start_audit(load_config(polling_config()))
        addr = state.rounds[0]["selections"][0]["address"]
        with pytest.raises(Exception, match="undeclared"):
            record_interpretations(state, [{"address": addr, "actual": {"race": "Z"}}])

    def test_non_candidate_interpretations_are_tallied(self):
        doc = polling_config(n=60, trials=2000)
        doc["contests"][0]["choices"].append({"id": "undervote", "kind": "non-candidate"})
        state = start_audit(load_config(doc))
        addrs = [s["address"] for s in state.rounds[0]["selections"]]
        entries = [{"address": a, "actual": {"race": "undervote"}} for a in addrs]
        record_interpretations(state, entries)
        close_round(state)
        est = state.rounds[0]["riskEstimates"]["race"]
        assert est["trials"] == 2000  # measured despite an all-undervote sample

    def test_entry_must_cover_exactly_the_pulled_contests(self):
        doc = {
            "contests": [
                contest_doc("mayor", (("c1", 300),)),
                contest_doc("question", (("c1", 300),)),
            ],
            "collections": [{"manifest": manifest_doc("c1", 300)}],
            "seed": {"digits": SEED},
        }
        state = start_audit(load_config(doc))
        addr = state.rounds[0]["selections"][0]["address"]
        with pytest.raises(AuditError, match="exactly the contests"):
            record_interpretations(state, [{"address": addr, "actual": {"mayor": "A"}}])


def escalation_example_state(trials=400_000):
    """A 254-ballot contest with a 54-ballot hand count of 23 A / 31 B."""
    doc = polling_config(n=254, reported="B", trials=trials, seed=SEED)
    state = start_audit(load_config(doc))
    draw_additional(state, "race", 34)  # 20 initial + 34 manual = 54
    addresses = [s["address"] for s in state.rounds[0]["selections"]]
    truth = {"race": {a: ("A" if i < 23 else "B") for i, a in enumerate(addresses)}}
    record_interpretations(state, answer_open_selections(state, truth))
    return state


class TestCloseRound:
    def test_incomplete_round_lists_missing_addresses(self):
        state = start_audit(load_config(polling_config()))
        missing = state.rounds[0]["selections"][0]["address"]
        with pytest.raises(AuditError, match=missing):
            close_round(state)

    def test_escalation_example_continues_the_audit(self):
        state = escalation_example_state()
        decisions = close_round(state)
        est = state.rounds[0]["riskEstimates"]["race"]
        assert abs(est["risk"] - 0.1148) < 0.01
        assert decisions == {"race": "escalate"}
        assert state.status["race"] == AUDITING
        # 30 percent growth: 54 -> 71 cumulative, so 17 fresh ballots
        assert state.rounds[1]["targets"]["race"] == 71
        assert len(state.rounds[1]["selections"]) == 17

    def test_low_risk_accepts(self):
        doc = polling_config(n=2000, reported="A", trials=20_000)
        state = start_audit(load_config(doc))
        addrs = [s["address"] for s in state.rounds[0]["selections"]]
        truth = {"race": {a: "A" for a in addrs}}  # unanimous sample
        record_interpretations(state, answer_open_selections(state, truth))
        decisions = close_round(state)
        assert decisions == {"race": "stop"}
        assert state.status["race"] == ACCEPTED
        assert state.final_outcomes["race"] == "A"

    def test_full_count_with_wrong_outcome_corrects_it(self):
        doc = polling_config(n=10, reported="B", trials=1000)
        state = start_audit(load_config(doc))
        addrs = [s["address"] for s in state.rounds[0]["selections"]]
        truth = {"race": two_candidate_truth(addrs, 7)}  # A actually wins
        record_interpretations(state, answer_open_selections(state, truth))
        decisions = close_round(state)
        assert decisions == {"race": "complete"}
        assert state.final_outcomes["race"] == "A"
        assert state.rounds[0]["riskEstimates"]["race"]["risk"] == 1.0

    def test_statuses_are_monotone(self):
        truth_rng = np.random.default_rng(12)
        doc = polling_config(n=1500, reported="A", trials=10_000)
        config = load_config(doc)
        addresses = config.collections["c1"].manifest.addresses()
        truth = {"race": two_candidate_truth(addresses, 1100, truth_rng)}
        state = run_audit(doc, truth)
        assert state.status["race"] == ACCEPTED
        seen = set()
        for rnd in state.rounds:
            for cid, decision in rnd["decisions"].items():
                if cid in seen:
                    raise AssertionError("contest decided again after acceptance")
                if decision != "escalate":
                    seen.add(cid)

    def test_full_recount_switch_past_threshold(self):
        # a dead-even tiny contest escalates; past 60% it selects everything
        doc = polling_config(n=40, reported="A", trials=2000)
        config = load_config(doc)
        addresses = config.collections["c1"].manifest.addresses()
        truth = {"race": two_candidate_truth(addresses, 20, np.random.default_rng(1))}
        state = run_audit(doc, truth)
        assert state.status["race"] == HAND_COUNT_COMPLETE
        assert state.sample_count(config.contest("race")) == 40


class TestComparisonAndMixed:
    def _mixed_doc(self, n_cvr=400, n_plain=300, reported="A"):
        cvr_manifest = manifest_doc("cvrcol", n_cvr)
        plain_manifest = manifest_doc("plaincol", n_plain)
        addresses = [
            f"cvrcol/{c['label']}/{i}"
            for c in cvr_manifest["containers"]
            for i in range(1, c["count"] + 1)
        ]
        a_share = 0.6
        records = [
            {"address": a, "votes": {"race": "A" if i < n_cvr * a_share else "B"}}
            for i, a in enumerate(addresses)
        ]
        return {
            "contests": [
                contest_doc("race", (("cvrcol", n_cvr), ("plaincol", n_plain)),
                            reported=reported)
            ],
            "collections": [
                {"manifest": cvr_manifest, "cvrs": {"collection": "cvrcol", "records": records}},
                {"manifest": plain_manifest},
            ],
            "seed": {"digits": SEED},
            "trials": 20_000,
        }

    def test_mixed_contest_builds_both_stratum_kinds(self):
        from bayesaudit.orchestrator import _contest_strata

        doc = self._mixed_doc()
        state = start_audit(load_config(doc))
        truth = {
            "race": {
                a: ("A" if i % 5 < 3 else "B")
                for i, a in enumerate(
                    load_manifest(manifest_doc("cvrcol", 400)).addresses()
                    + load_manifest(manifest_doc("plaincol", 300)).addresses()
                )
            }
        }
        record_interpretations(state, answer_open_selections(state, truth))
        close_round(state)
        models, _ = _contest_strata(state, state.config.contest("race"))
        kinds = {m.kind for m in models}
        assert kinds == {"ballot-polling", "comparison-row"}

    def test_blinding_selections_never_expose_reported_choices(self):
        doc = self._mixed_doc()
        state = start_audit(load_config(doc))
        report = selections_report(state)
        assert json.dumps(report).find("reported") == -1
        for sel in report["open"]:
            assert set(sel) == {"address", "contests"}

    def test_reported_choices_joined_only_at_close(self):
        doc = self._mixed_doc()
        state = start_audit(load_config(doc))
        truth = {"race": {}}
        for sel in state.open_selections():
            truth["race"][sel["address"]] = "A"
        record_interpretations(state, answer_open_selections(state, truth))
        assert all("reported" not in e for e in state.rounds[0]["interpretations"])
        close_round(state)
        joined = [
            e for e in state.rounds[0]["interpretations"]
            if parse_address(e["address"])[0] == "cvrcol"
        ]
        assert joined and all("reported" in e for e in joined)

    def test_hand_counted_collection_is_a_fully_audited_stratum(self):
        doc = polling_config(n=500, reported="A", trials=10_000)
        doc["collections"].append(
            {"manifest": manifest_doc("handcol", 200),
             "handTallies": {"race": {"A": 150, "B": 50}}}
        )
        doc["contests"][0]["universe"].append({"collection": "handcol", "ballots": 200})
        state = start_audit(load_config(doc))
        assert all(
            parse_address(s["address"])[0] == "c1"
            for s in state.rounds[0]["selections"]
        )
        truth = {"race": {s["address"]: "A" for s in state.open_selections()}}
        record_interpretations(state, answer_open_selections(state, truth))
        decisions = close_round(state)
        assert decisions["race"] == "stop"


class TestManualDraws:
    def test_draws_are_logged_with_counters(self):
        state = start_audit(load_config(polling_config(n=300)))
        before = len(state.rounds[0]["selections"])
        added = draw_additional(state, "race", 5)
        assert len(added) == 5
        assert len(state.rounds[0]["selections"]) == before + 5
        log = state.replay_log
        assert all(e["purpose"] == "draw:race" for e in log)
        assert [e["counter"] for e in log] == list(range(1, len(log) + 1))
        assert sum(1 for e in log if e["fresh"]) == 5

    def test_draws_never_repeat_existing_selections(self):
        state = start_audit(load_config(polling_config(n=60)))
        added = draw_additional(state, "race", 30)
        addresses = [s["address"] for s in state.rounds[0]["selections"]]
        assert len(addresses) == len(set(addresses)) == 50


class TestExportReplay:
    def test_replay_reproduces_byte_for_byte(self):
        doc = polling_config(n=800, reported="A", trials=8000)
        addresses = load_config(doc).collections["c1"].manifest.addresses()
        truth = {"race": two_candidate_truth(addresses, 560, np.random.default_rng(3))}
        state = run_audit(doc, truth)
        bundle = export_audit_record(state)
        report = replay_audit_record(json.loads(canonical_json(bundle)))
        assert report == {"ok": True, "mismatches": []}

    def test_replay_covers_manual_draws(self):
        state = escalation_example_state(trials=20_000)
        close_round(state)
        # finish the escalation round so the bundle is closed
        truth = {"race": {s["address"]: "B" for s in state.open_selections()}}
        record_interpretations(state, answer_open_selections(state, truth))
        close_round(state)
        bundle = json.loads(export_bytes(state))
        report = replay_audit_record(bundle)
        assert report["ok"], report["mismatches"]

    def test_tampered_interpretation_breaks_the_chain(self):
        doc = polling_config(n=400, reported="A", trials=5000)
        addresses = load_config(doc).collections["c1"].manifest.addresses()
        truth = {"race": two_candidate_truth(addresses, 300, np.random.default_rng(4))}
        state = run_audit(doc, truth)
        bundle = json.loads(export_bytes(state))
        victim = bundle["rounds"][0]["interpretations"][0]
        victim["actual"]["race"] = "B" if victim["actual"]["race"] == "A" else "A"
        report = replay_audit_record(bundle)
        assert not report["ok"]
        assert any("hash chain" in m for m in report["mismatches"])

    def test_selection_counts_match_interpretations_for_closed_rounds(self):
        doc = polling_config(n=600, reported="A", trials=5000)
        addresses = load_config(doc).collections["c1"].manifest.addresses()
        truth = {"race": two_candidate_truth(addresses, 450, np.random.default_rng(5))}
        state = run_audit(doc, truth)
        bundle = export_audit_record(state)
        for rnd in bundle["rounds"]:
            assert len(rnd["selections"]) == len(rnd["interpretations"])

    def test_state_round_trips_through_json(self):
        state = start_audit(load_config(polling_config(n=120)))
        doc = json.loads(json.dumps(state.to_json()))
        restored = AuditState.from_json(doc)
        assert export_bytes(restored) == export_bytes(state)


class TestReports:
    def test_status_report_shape(self):
        state = escalation_example_state(trials=20_000)
        close_round(state)
        report = status_report(state)
        card = report["contests"][0]
        assert card["status"] == AUDITING and card["decision"] == "escalate"
        assert card["sampleSize"] == 54 and card["population"] == 254
        assert card["riskDisplay"].endswith("%")
        assert card["history"][0]["round"] == 1

    def test_plan_report_runs(self):
        doc = polling_config(n=400, reported="A", trials=4000)
        state = start_audit(load_config(doc))
        truth = {"race": {s["address"]: ("A" if i % 3 else "B")
                          for i, s in enumerate(state.open_selections())}}
        record_interpretations(state, answer_open_selections(state, truth))
        close_round(state)
        if state.status["race"] == AUDITING:
            plan = plan_report(state, confidence=0.8)
            assert set(plan) == {"additional", "stopProbabilities",
                                 "fullHandCount", "totalAdditional"}
            assert plan["additional"]["c1"] <= 400 - 20
