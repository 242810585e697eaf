"""Bayesian tabulation-audit engine.

Selects cast paper ballots for hand examination with a reproducible
counter-mode hash generator, accepts round-by-round human
interpretations, and decides by Dirichlet-multinomial Monte Carlo
simulation whether the reported contest outcome is confirmed at a given
risk limit -- for ballot-polling, comparison, and stratified audits
under any pluggable outcome rule.
"""

__version__ = "0.1.0"

from .bayes import (
    ComparisonPriorMatrix,
    Hyperparameters,
    RiskEstimate,
    StratumModel,
    comparison_strata_from_cvrs,
    make_prior,
    measure_risk,
    nuts_in_cans_demo,
    stopping_decision,
    update_posterior,
)
from .election import (
    AuditedBallot,
    BallotManifest,
    CastVoteRecord,
    CastVoteRecordFile,
    Choice,
    Contest,
    VoteTally,
    tally,
    validate_cvrs_against_manifest,
)
from .fuzzing import (
    MultinomialProbabilities,
    draw_multinomial_tally,
    fuzz_count,
    fuzz_tally,
    generate_test_nonsample_tally,
    to_multinomial,
)
from .prng import AuditSeed, PrngStream, global_ballot_order, sample_without_replacement
from .rules import get_rule, register_rule

__all__ = [
    "AuditSeed",
    "AuditedBallot",
    "BallotManifest",
    "CastVoteRecord",
    "CastVoteRecordFile",
    "Choice",
    "ComparisonPriorMatrix",
    "Contest",
    "Hyperparameters",
    "MultinomialProbabilities",
    "PrngStream",
    "RiskEstimate",
    "StratumModel",
    "VoteTally",
    "comparison_strata_from_cvrs",
    "draw_multinomial_tally",
    "fuzz_count",
    "fuzz_tally",
    "generate_test_nonsample_tally",
    "get_rule",
    "global_ballot_order",
    "make_prior",
    "measure_risk",
    "nuts_in_cans_demo",
    "register_rule",
    "sample_without_replacement",
    "stopping_decision",
    "tally",
    "to_multinomial",
    "update_posterior",
    "validate_cvrs_against_manifest",
]
