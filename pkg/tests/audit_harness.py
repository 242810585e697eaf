"""Synthetic-election harness: build configs, answer pull lists from a
ground truth, and drive audits to completion."""

from bayesaudit.orchestrator import (
    AuditState,
    close_round,
    load_config,
    record_interpretations,
    start_audit,
)


def manifest_doc(collection, n, box_size=50):
    containers = []
    box, left = 1, n
    while left > 0:
        take = min(box_size, left)
        containers.append({"label": f"B{box}", "count": take})
        left -= take
        box += 1
    return {"collection": collection, "containers": containers}


def contest_doc(contest_id="race", collections=(("c1", 2000),), reported="A",
                tie=("A", "B"), rule="plurality", choices=("A", "B")):
    return {
        "id": contest_id,
        "choices": [{"id": c} for c in choices],
        "outcomeRule": rule,
        "tieBreakOrder": list(tie),
        "reportedOutcome": reported,
        "universe": [{"collection": c, "ballots": n} for c, n in collections],
    }


def polling_config(n=2000, reported="A", seed="41352106340634031355",
                   risk_limit=0.05, trials=10_000, collection="c1", **extra):
    doc = {
        "contests": [contest_doc(collections=((collection, n),), reported=reported)],
        "collections": [{"manifest": manifest_doc(collection, n)}],
        "riskLimit": risk_limit,
        "trials": trials,
        "seed": {"digits": seed, "provenance": "test"},
    }
    doc.update(extra)
    return doc


def two_candidate_truth(addresses, a_count, rng=None):
    """Assign choice A to a_count addresses (shuffled if rng given)."""
    addresses = list(addresses)
    if rng is not None:
        addresses = list(rng.permutation(addresses))
    return {addr: ("A" if i < a_count else "B") for i, addr in enumerate(addresses)}


def answer_open_selections(state: AuditState, truth_by_contest) -> list[dict]:
    """Interpretation entries for every open selection, from ground truth.

    ``truth_by_contest`` maps contest id -> {address -> actual choice}.
    """
    entries = []
    for sel in state.open_selections():
        actual = {}
        for contest_id in sel["contests"]:
            actual[contest_id] = truth_by_contest[contest_id][sel["address"]]
        entries.append({"address": sel["address"], "actual": actual})
    return entries


def run_audit(config_doc, truth_by_contest, max_rounds=200):
    """Drive an audit to completion; returns the final state."""
    state = start_audit(load_config(config_doc))
    for _ in range(max_rounds):
        entries = answer_open_selections(state, truth_by_contest)
        if entries:
            record_interpretations(state, entries)
        decisions = close_round(state)
        if all(d != "escalate" for d in decisions.values()):
            return state
    raise AssertionError(f"audit did not finish within {max_rounds} rounds")
