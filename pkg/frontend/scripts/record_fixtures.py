"""Record dashboard test fixtures from the real audit service.

Every fixture is a verbatim HTTP response body captured through the
FastAPI test client, so the contract tests in ../tests pin the UI to
actual service behavior.  Re-run after changing the service:

    python3 scripts/record_fixtures.py
"""

import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from bayesaudit.orchestrator import (
    close_round,
    draw_additional,
    load_config,
    record_interpretations,
    start_audit,
)
from bayesaudit.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
TOKEN = "fixture-operator-token"

# With this ceremony seed, the 10^6-trial measurement of the 254-ballot
# example (sample 23 A / 31 B, reported winner B) lands at 0.114812,
# displaying as 11.48%.
SEED = "31415926535897932384"


def manifest_doc(collection, n, box=50):
    return {
        "collection": collection,
        "containers": [
            {"label": f"B{i + 1}", "count": min(box, n - i * box)}
            for i in range((n + box - 1) // box)
        ],
    }


def addresses(doc):
    return [f"{doc['collection']}/{c['label']}/{i}"
            for c in doc["containers"] for i in range(1, c["count"] + 1)]


def escalation_example_state():
    """254 ballots, 54 examined (23 A / 31 B), reported winner B."""
    config = load_config({
        "contests": [{
            "id": "mayor",
            "choices": [{"id": "A"}, {"id": "B"}],
            "outcomeRule": "plurality",
            "tieBreakOrder": ["A", "B"],
            "reportedOutcome": "B",
            "universe": [{"collection": "precinct-12", "ballots": 254}],
        }],
        "collections": [{"manifest": manifest_doc("precinct-12", 254)}],
        "riskLimit": 0.05,
        "trials": 1_000_000,
        "seed": {"digits": SEED, "provenance": "20 decimal dice, public ceremony"},
    })
    state = start_audit(config)
    draw_additional(state, "mayor", 34)  # 20 initial + 34 = 54 in round 1
    picked = [s["address"] for s in state.rounds[0]["selections"]]
    record_interpretations(state, [
        {"address": a, "actual": {"mayor": "A" if i < 23 else "B"}}
        for i, a in enumerate(picked)
    ])
    close_round(state)
    return state


def comparison_state():
    """A comparison audit with an open worklist (CVRs loaded, round open)."""
    manifest = manifest_doc("scanner-county", 400)
    records = [
        {"address": a, "votes": {"mayor": "A" if i < 230 else "B"}}
        for i, a in enumerate(addresses(manifest))
    ]
    config = load_config({
        "contests": [{
            "id": "mayor",
            "choices": [{"id": "A"}, {"id": "B"}],
            "outcomeRule": "plurality",
            "tieBreakOrder": ["A", "B"],
            "reportedOutcome": "A",
            "universe": [{"collection": "scanner-county", "ballots": 400}],
        }],
        "collections": [{"manifest": manifest,
                         "cvrs": {"collection": "scanner-county", "records": records}}],
        "riskLimit": 0.05,
        "trials": 50_000,
        "seed": {"digits": SEED, "provenance": "20 decimal dice, public ceremony"},
    })
    return start_audit(config)


def client_for(state, tmp_name):
    path = FIXTURES / tmp_name
    path.write_text(json.dumps(state.to_json(), indent=2))
    return TestClient(create_app(str(path), operator_token=TOKEN)), path


def wait_job(client, job_id):
    while True:
        doc = client.get(f"/jobs/{job_id}").json()
        if doc["status"] != "pending":
            return doc
        time.sleep(0.05)


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)

    # contest card: the escalation example after its first round close
    client, path = client_for(escalation_example_state(), "_state_a.json")
    (FIXTURES / "status.json").write_text(
        json.dumps(client.get("/status").json(), indent=2) + "\n"
    )
    plan_job = client.post("/plan", json={"confidence": 0.9},
                           headers={"X-Operator-Token": TOKEN}).json()
    (FIXTURES / "plan_job.json").write_text(
        json.dumps(wait_job(client, plan_job["jobId"]), indent=2) + "\n"
    )
    path.unlink()

    # open worklist on a comparison audit: must never leak reported choices
    client, path = client_for(comparison_state(), "_state_b.json")
    (FIXTURES / "selections.json").write_text(
        json.dumps(client.get("/selections").json(), indent=2) + "\n"
    )

    # record one interpretation, then a failing round close (incomplete round)
    first = client.get("/selections").json()["open"][0]
    ack = client.post(
        "/interpretations",
        json={"entries": [{"address": first["address"], "actual": {"mayor": "A"}}]},
        headers={"X-Operator-Token": TOKEN},
    ).json()
    (FIXTURES / "interpretation_ack.json").write_text(json.dumps(ack, indent=2) + "\n")
    bad = client.post(
        "/interpretations",
        json={"entries": [{"address": "scanner-county/B1/999", "actual": {"mayor": "A"}}]},
        headers={"X-Operator-Token": TOKEN},
    )
    (FIXTURES / "interpretation_error.json").write_text(
        json.dumps({"statusCode": bad.status_code, "body": bad.json()}, indent=2) + "\n"
    )
    failed = wait_job(
        client,
        client.post("/round/close", headers={"X-Operator-Token": TOKEN}).json()["jobId"],
    )
    (FIXTURES / "round_close_failed.json").write_text(json.dumps(failed, indent=2) + "\n")

    # finish the round for a successful close job
    for sel in client.get("/selections").json()["open"]:
        client.post(
            "/interpretations",
            json={"entries": [{"address": sel["address"], "actual": {"mayor": "A"}}]},
            headers={"X-Operator-Token": TOKEN},
        )
    done = wait_job(
        client,
        client.post("/round/close", headers={"X-Operator-Token": TOKEN}).json()["jobId"],
    )
    (FIXTURES / "round_close_done.json").write_text(json.dumps(done, indent=2) + "\n")
    (FIXTURES / "status_accepted.json").write_text(
        json.dumps(client.get("/status").json(), indent=2) + "\n"
    )
    path.unlink()

    for name in sorted(p.name for p in FIXTURES.glob("*.json")):
        print("recorded", name)


if __name__ == "__main__":
    main()
