"""Deterministic, replayable randomness for ballot selection.

The generator is SHA256 in counter mode: hash the ASCII bytes of
"<seed>,<counter>" and read the digest as a big-endian 256-bit unsigned
integer.  The seed comes from a public ceremony (decimal dice or a
beacon) and the counter starts at 1, so anyone can replay every draw.

Two selection facilities are provided:

* ``sample_without_replacement`` repeatedly reduces hash values modulo
  the population size until a fresh location turns up, so escalation
  draws are a pure continuation of the same stream.  Every draw,
  including rejected repeats, consumes a counter value and can be
  logged.
* ``global_ballot_order`` keys every ballot location by
  SHA256("<seed>,<address>") and sorts ascending; it is used to schedule
  multi-contest audits so one pulled ballot serves every contest on it.

The modulo reduction bias is on the order of 2^-256 and is accepted for
the sake of matching the published procedure bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

from .election import BallotManifest


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class AuditSeed:
    """Decimal seed from a public ceremony; 20+ digits recommended."""

    digits: str
    provenance: str = ""

    def __post_init__(self):
        if not self.digits or not self.digits.isdigit():
            raise SamplingError("audit seed must be a non-empty string of digits 0-9")


@dataclass
class PrngStream:
    """SHA256-in-counter-mode stream; counter is the next value to use."""

    seed: AuditSeed
    counter: int = 1

    def next_value(self) -> int:
        """256-bit unsigned integer for the current counter; advances by 1."""
        value = hash_value(f"{self.seed.digits},{self.counter}")
        self.counter += 1
        return value

    def draw_index(self, population_size: int) -> int:
        """1-based uniform index into a population; consumes one counter."""
        if population_size < 1:
            raise SamplingError("population_size must be >= 1")
        return self.next_value() % population_size + 1


def hash_value(text: str) -> int:
    return int(hashlib.sha256(text.encode("ascii")).hexdigest(), 16)


def format_hash_decimal(value: int) -> str:
    """Fixed-width decimal rendering (78 digits, zero-padded) for display."""
    return str(value).zfill(78)


def _population(manifests: Sequence[BallotManifest] | BallotManifest) -> list[str]:
    if isinstance(manifests, BallotManifest):
        manifests = [manifests]
    addresses: list[str] = []
    for m in manifests:
        addresses.extend(m.addresses())
    if len(set(addresses)) != len(addresses):
        raise SamplingError("duplicate ballot addresses across manifests")
    return addresses


def sample_without_replacement(
    stream: PrngStream,
    manifests: Sequence[BallotManifest] | BallotManifest,
    k: int,
    already_drawn: Iterable[str] = (),
    trace: list | None = None,
) -> list[str]:
    """Draw k fresh ballot addresses, skipping ``already_drawn``.

    Repeats that hit an already-selected location are retried; each
    attempt consumes one counter value.  Pass a ``trace`` list to record
    every (counter, index, address, fresh) attempt for the replay log.
    """
    addresses = _population(manifests)
    drawn = set(already_drawn)
    unknown = drawn - set(addresses)
    if unknown:
        raise SamplingError(f"already_drawn contains unknown addresses: {sorted(unknown)[:3]}")
    if k < 0:
        raise SamplingError("k must be nonnegative")
    if k + len(drawn) > len(addresses):
        raise SamplingError(
            f"cannot draw {k} more ballots: only "
            f"{len(addresses) - len(drawn)} remain of {len(addresses)}"
        )
    picked: list[str] = []
    while len(picked) < k:
        counter = stream.counter
        index = stream.draw_index(len(addresses))
        address = addresses[index - 1]
        fresh = address not in drawn
        if trace is not None:
            trace.append(
                {"counter": counter, "index": index, "address": address, "fresh": fresh}
            )
        if fresh:
            drawn.add(address)
            picked.append(address)
    return picked


def ballot_key(seed: AuditSeed, address: str) -> int:
    return hash_value(f"{seed.digits},{address}")


def global_ballot_order(
    manifests: Sequence[BallotManifest] | BallotManifest, seed: AuditSeed
) -> list[str]:
    """Total order on all ballot addresses: ascending SHA256 ballot key.

    The key of an address depends only on (seed, address), so the order
    is independent of how manifests are listed.  Ballots earlier in the
    order are examined first.
    """
    addresses = _population(manifests)
    return sorted(addresses, key=lambda a: (ballot_key(seed, a), a))
