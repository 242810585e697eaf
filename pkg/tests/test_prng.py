import hashlib
import math

import pytest

from bayesaudit.election import BallotManifest
from bayesaudit.prng import (
    AuditSeed,
    PrngStream,
    SamplingError,
    format_hash_decimal,
    global_ballot_order,
    sample_without_replacement,
)
from conftest import make_manifest

SEED = AuditSeed("107432020578817523419453", "24 decimal dice")

# Known-answer vectors for SHA256("<seed>,<counter>") as 78-digit decimals.
KAT_1 = "097411546950308080061616750587378383961909559564631478751824138412344194481105"
KAT_2 = "031176744492396048120565507363585400255289825756640350739975511058891174407379"


class TestSeed:
    def test_digits_only(self):
        with pytest.raises(SamplingError):
            AuditSeed("12x4")
        with pytest.raises(SamplingError):
            AuditSeed("")
        assert AuditSeed("0012").digits == "0012"


class TestCounterModeStream:
    def test_known_answer_vectors(self):
        s = PrngStream(SEED)
        assert format_hash_decimal(s.next_value()) == KAT_1
        assert format_hash_decimal(s.next_value()) == KAT_2
        assert s.counter == 3

    def test_determinism(self):
        a = PrngStream(SEED).next_value()
        b = PrngStream(SEED).next_value()
        assert a == b

    def test_counter_starts_at_one_and_increments(self):
        s = PrngStream(SEED)
        assert s.counter == 1
        s.next_value()
        assert s.counter == 2

    def test_draw_index_matches_direct_hash_reduction(self):
        expected = (
            int(hashlib.sha256(b"107432020578817523419453,1").hexdigest(), 16) % 254 + 1
        )
        assert PrngStream(SEED).draw_index(254) == expected

    def test_draw_index_population_one(self):
        s = PrngStream(SEED)
        assert all(s.draw_index(1) == 1 for _ in range(5))

    def test_draw_index_rejects_empty_population(self):
        with pytest.raises(SamplingError):
            PrngStream(SEED).draw_index(0)

    def test_two_draws_consume_counters_one_then_two(self):
        s = PrngStream(SEED)
        s.draw_index(10)
        assert s.counter == 2
        s.draw_index(10)
        assert s.counter == 3

    def test_uniformity_population_10(self):
        s = PrngStream(AuditSeed("314159265358979323846264"))
        counts = [0] * 10
        draws = 100_000
        for _ in range(draws):
            counts[s.draw_index(10) - 1] += 1
        sigma = math.sqrt(draws * 0.1 * 0.9)
        for c in counts:
            assert abs(c - draws / 10) < 5 * sigma


class TestSampleWithoutReplacement:
    def test_full_draw_is_a_permutation(self):
        m = make_manifest(n=40, box_size=7)
        picked = sample_without_replacement(PrngStream(SEED), m, 40)
        assert sorted(picked) == sorted(m.addresses())

    def test_zero_draw_is_empty(self):
        m = make_manifest(n=5)
        assert sample_without_replacement(PrngStream(SEED), m, 0) == []

    def test_replay_equality(self):
        m = make_manifest(n=100)
        a = sample_without_replacement(PrngStream(SEED), m, 20)
        b = sample_without_replacement(PrngStream(SEED), m, 20)
        assert a == b

    def test_already_drawn_are_skipped(self):
        m = make_manifest(n=30)
        first = sample_without_replacement(PrngStream(SEED), m, 10)
        stream = PrngStream(SEED)
        sample_without_replacement(stream, m, 10)  # advance identically
        more = sample_without_replacement(stream, m, 15, already_drawn=first)
        assert not set(first) & set(more)
        assert len(more) == 15

    def test_escalation_is_continuation_of_the_stream(self):
        # drawing 10 then 5 more equals drawing 15 in one go
        m = make_manifest(n=60)
        one_shot = sample_without_replacement(PrngStream(SEED), m, 15)
        stream = PrngStream(SEED)
        first = sample_without_replacement(stream, m, 10)
        rest = sample_without_replacement(stream, m, 5, already_drawn=first)
        assert first + rest == one_shot

    def test_exhaustion_rejected(self):
        m = make_manifest(n=8)
        with pytest.raises(SamplingError, match="remain"):
            sample_without_replacement(PrngStream(SEED), m, 9)

    def test_trace_logs_every_attempt_including_repeats(self):
        m = make_manifest(n=3)
        trace = []
        picked = sample_without_replacement(PrngStream(SEED), m, 3, trace=trace)
        fresh = [e for e in trace if e["fresh"]]
        assert [e["address"] for e in fresh] == picked
        assert len(trace) >= 3  # repeats stay in the log
        counters = [e["counter"] for e in trace]
        assert counters == list(range(1, len(trace) + 1))


class TestGlobalBallotOrder:
    def test_single_ballot(self):
        m = BallotManifest("c", (("B1", 1),))
        assert global_ballot_order(m, SEED) == ["c/B1/1"]

    def test_order_ignores_manifest_listing_order(self):
        m1 = make_manifest("east", 20)
        m2 = make_manifest("west", 20)
        assert global_ballot_order([m1, m2], SEED) == global_ballot_order([m2, m1], SEED)

    def test_three_addresses_sort_by_independently_computed_keys(self):
        m = BallotManifest("c", (("B1", 3),))
        keys = {
            a: int(hashlib.sha256(f"{SEED.digits},{a}".encode()).hexdigest(), 16)
            for a in ["c/B1/1", "c/B1/2", "c/B1/3"]
        }
        expected = sorted(keys, key=keys.get)
        assert global_ballot_order(m, SEED) == expected

    def test_duplicate_addresses_rejected(self):
        m = BallotManifest("c", (("B1", 2),))
        with pytest.raises(SamplingError, match="duplicate"):
            global_ballot_order([m, m], SEED)

    def test_prefix_stability_under_escalation(self):
        # deeper prefixes of the same order never reorder earlier picks
        m = make_manifest(n=50)
        order = global_ballot_order(m, SEED)
        assert order[:10] == global_ballot_order(m, SEED)[:10]
        assert len(set(order)) == 50
