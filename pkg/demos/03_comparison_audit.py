"""Ballot-polling vs comparison auditing on the same election.

With cast vote records, the audit checks the scanner instead of
re-measuring vote shares: ballots are stratified by their reported
choice, and each stratum only has to confirm that misreads are rare.
Measuring a near-zero error rate takes far fewer ballots than
measuring a near-half vote share, so comparison audits finish sooner.
"""

import numpy as np

from bayesaudit import (
    AuditedBallot,
    CastVoteRecord,
    CastVoteRecordFile,
    Choice,
    ComparisonPriorMatrix,
    Contest,
    Hyperparameters,
    StratumModel,
    VoteTally,
    comparison_strata_from_cvrs,
    measure_risk,
)

n = 10_000
contest = Contest(
    id="measure-7",
    choices=(Choice("yes"), Choice("no")),
    outcome_rule_id="plurality",
    tie_break_order=("yes", "no"),
    reported_outcome="yes",
    universe=(("county", n),),
)

# ground truth: 55/45, and a perfect scanner
records = tuple(
    CastVoteRecord(f"county/B{i // 100 + 1}/{i % 100 + 1}",
                   {"measure-7": "yes" if i < 5500 else "no"})
    for i in range(n)
)
cvrs = CastVoteRecordFile("county", records)

# the same 20-ballot hand sample, read both ways
sampled = [records[i] for i in np.random.default_rng(7).choice(n, 20, replace=False)]
audited = [AuditedBallot(r.address, {"measure-7": r.votes["measure-7"]}, 1)
           for r in sampled]
hand_tally = {"yes": 0, "no": 0}
for b in audited:
    hand_tally[b.actual["measure-7"]] += 1
print(f"hand sample of 20 ballots: {hand_tally}")
print()

print("=== Ballot polling: what do 20 ballots say about vote shares? ===")
polling = measure_risk(
    [StratumModel("county", "ballot-polling",
                  Hyperparameters("measure-7", "county",
                                  {k: float(v) for k, v in hand_tally.items()}),
                  n - 20)],
    {"county": VoteTally("measure-7", hand_tally)},
    contest, trials=100_000, rng=np.random.default_rng(1),
)
print(f"risk: {polling.risk:.3f}  (nowhere near a 5% limit: keep sampling)")
print()

print("=== Comparison: what do the same 20 ballots say about the scanner? ===")
prior = ComparisonPriorMatrix.uniform(contest, diagonal=50, off_diagonal=0.5)
models, tallies = comparison_strata_from_cvrs(cvrs, audited, prior, contest)
for m in models:
    print(f"  stratum {m.stratum_id}: population {m.nonsample_size + int(tallies[m.stratum_id].total())}, "
          f"posterior {dict(m.posterior.pseudocounts)}")
comparison = measure_risk(models, tallies, contest, trials=100_000,
                          rng=np.random.default_rng(2))
print(f"risk: {comparison.risk:.5f}  (the audit can stop immediately)")
print()
print(f"same sample, two questions: shares ({polling.risk:.3f} risk) vs "
      f"scanner honesty ({comparison.risk:.5f} risk)")
