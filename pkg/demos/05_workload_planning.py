"""Estimating remaining workload and planning sample allocation.

Mid-audit, two questions matter: "if we pull K more ballots, how
likely is the audit to finish?" and "how should additional sampling be
split across jurisdictions?"  Both are answered by simulating likely
extensions of the current sample from the posterior and re-running the
risk measurement on each.
"""

import numpy as np

from bayesaudit import Hyperparameters, VoteTally
from bayesaudit.election import Choice, Contest
from bayesaudit.planner import ContestView, StratumView, plan_allocation, project_workload

rng = np.random.default_rng(5)

print("=== How much work remains for one contest? ===")
contest = Contest("assembly", (Choice("A"), Choice("B")), "plurality",
                  ("A", "B"), "A", (("county", 4000),))
view = ContestView(
    contest, risk_limit=0.05,
    strata=(StratumView(
        stratum_id="county",
        posterior=Hyperparameters("assembly", "county", {"A": 232.0, "B": 168.0}),
        sample_tally=VoteTally("assembly", {"A": 232, "B": 168}),
        population=4000,
    ),),
)
projection = project_workload(view, future_sizes=[400, 500, 700, 1100], inner_reps=40,
                              rng=rng)
print(f"current sample: {projection.current_sample_size} ballots, risk above the limit")
print(f"{'future size':>12} {'P(stop)':>8} {'extra ballots':>14}")
for size, p, add in projection.entries:
    print(f"{size:>12} {p:>8.2f} {add:>14}")
print()

print("=== Allocating samples across two counties ===")
# contest S is close and lives only in county-1; R is a landslide across both
s_contest = Contest("S", (Choice("A"), Choice("B")), "plurality", ("A", "B"), "A",
                    (("county-1", 3000),))
r_contest = Contest("R", (Choice("A"), Choice("B")), "plurality", ("A", "B"), "A",
                    (("county-1", 3000), ("county-2", 3000)))


def stratum(contest_id, jur, a, b, population):
    return StratumView(
        stratum_id=jur,
        posterior=Hyperparameters(contest_id, jur, {"A": float(a), "B": float(b)}),
        sample_tally=VoteTally(contest_id, {"A": a, "B": b}),
        population=population,
        jurisdiction=jur,
    )


views = [
    ContestView(s_contest, 0.05, (stratum("S", "county-1", 44, 36, 3000),)),
    ContestView(r_contest, 0.05, (stratum("R", "county-1", 62, 18, 3000),
                                  stratum("R", "county-2", 60, 20, 3000))),
]
plan = plan_allocation(
    views, remaining={"county-1": 2920, "county-2": 2920},
    rng=np.random.default_rng(6), confidence=0.9, inner_reps=24, trials=6000,
)
print("additional ballots to pull:")
for jur, count in plan.additional.items():
    print(f"  {jur}: {count}")
print("projected stop probabilities:")
for cid, p in plan.stop_probabilities.items():
    print(f"  contest {cid}: {p:.2f}")
print(f"total additional ballots: {plan.total_additional()}")
print()
print("county-1 carries the close contest, so it absorbs nearly all of")
print("the additional sampling; the landslide needs almost nothing.")
