"""Walk through one stopping-rule determination, step by step.

A plurality contest between A and B has 254 cast votes and reported
winner B.  A hand examination of 54 randomly selected ballots found
23 votes for A and 31 for B.  Should the audit stop?

The answer comes from simulation: fuzz the sample tally, turn it into
multinomial probabilities, draw a simulated completion of the 200
unaudited ballots, add the real sample back, and apply the outcome
rule.  Repeat a million times; the fraction of simulated elections
where A wins is the risk of stopping now.
"""

import numpy as np

from bayesaudit import (
    Choice,
    Contest,
    StratumModel,
    VoteTally,
    draw_multinomial_tally,
    fuzz_tally,
    make_prior,
    measure_risk,
    nuts_in_cans_demo,
    stopping_decision,
    to_multinomial,
    update_posterior,
)
from bayesaudit.rules import get_rule

contest = Contest(
    id="council",
    choices=(Choice("A"), Choice("B")),
    outcome_rule_id="plurality",
    tie_break_order=("A", "B"),
    reported_outcome="B",
    universe=(("town", 254),),
)
sample = VoteTally("council", {"A": 23, "B": 31})
nonsample_size = contest.total_ballots() - int(sample.total())

print("=== Bayesian intuition: nuts in cans ===")
print("Three cans, not all empty, not all full; shake one, hear a nut.")
print(f"P(majority of cans hold nuts | first can holds one) = {nuts_in_cans_demo()}")
print()

print("=== A few simulation trials, spelled out ===")
prior = make_prior("haldane", contest)       # all-zero pseudocounts
posterior = update_posterior(prior, sample)  # equals the sample tally
rule = get_rule("plurality")
rng = np.random.default_rng(20180254)
header = f"{'trial':>5} {'fuzzed A':>9} {'fuzzed B':>9} {'p(A)':>6} {'p(B)':>6} " \
         f"{'ns A':>5} {'ns B':>5} {'tot A':>6} {'tot B':>6} winner"
print(header)
for trial in range(1, 6):
    fuzzed = fuzz_tally(posterior.pseudocounts, "gamma", rng, contest.id)
    probs = to_multinomial(fuzzed)
    nonsample = draw_multinomial_tally(probs, nonsample_size, rng, contest.id)
    test_tally = sample.add(nonsample)
    winner = rule.winner(test_tally.counts, contest.tie_break_order)
    print(
        f"{trial:>5} {fuzzed.counts['A']:>9.1f} {fuzzed.counts['B']:>9.1f} "
        f"{probs.probs['A']:>6.3f} {probs.probs['B']:>6.3f} "
        f"{nonsample.counts['A']:>5.0f} {nonsample.counts['B']:>5.0f} "
        f"{test_tally.counts['A']:>6.0f} {test_tally.counts['B']:>6.0f} {winner}"
    )
print()

print("=== The full measurement: one million trials ===")
model = StratumModel(
    stratum_id="town",
    kind="ballot-polling",
    posterior=posterior,
    nonsample_size=nonsample_size,
)
estimate = measure_risk(
    [model], {"town": sample}, contest, trials=1_000_000,
    rng=np.random.default_rng(254),
)
print(f"trials:          {estimate.trials:,}")
print(f"upsets (A wins): {estimate.upset_count:,}")
print(f"risk:            {estimate.risk:.4f}")
for outcome, freq in sorted(estimate.win_frequencies.items()):
    print(f"  win frequency {outcome}: {freq:.4f}")
decision = stopping_decision(estimate, risk_limit=0.05)
print(f"decision at a 5% risk limit: {decision.upper()}")
print()
print("The ~11% chance that a full hand count would crown A is too much")
print("risk to accept, so the audit escalates to a larger sample.")
