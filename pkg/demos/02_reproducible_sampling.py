"""Reproducible ballot selection from a public dice ceremony.

Everything random in the audit flows from one seed rolled in public.
The generator is SHA256 in counter mode: hash "<seed>,<counter>" and
read the digest as a 256-bit integer.  Anyone can replay every draw.
"""

from bayesaudit import AuditSeed, BallotManifest, PrngStream, sample_without_replacement
from bayesaudit.prng import format_hash_decimal, global_ballot_order

seed = AuditSeed("107432020578817523419453", provenance="24 decimal dice, roll ceremony")
print(f"ceremony seed: {seed.digits} ({seed.provenance})")
print()

print("=== Counter-mode values ===")
stream = PrngStream(seed)
for _ in range(2):
    counter = stream.counter
    value = stream.next_value()
    print(f'SHA256("{seed.digits},{counter}") =')
    print(f"  {format_hash_decimal(value)}")
print()

print("=== Drawing ballots without replacement ===")
manifest = BallotManifest(
    collection_id="smith-county",
    containers=tuple((f"B{i}", 50) for i in range(1, 6)),  # 5 boxes of 50
)
print(f"population: {manifest.total()} ballots in {len(manifest.containers)} boxes")
stream = PrngStream(seed)
trace = []
first = sample_without_replacement(stream, manifest, 8, trace=trace)
for event in trace:
    note = "" if event["fresh"] else "   (already drawn, retried)"
    print(f"  counter {event['counter']:>3} -> index {event['index']:>3} "
          f"-> {event['address']}{note}")
print(f"round-1 pull list: {first}")

# escalation continues the same stream; no re-seeding, no overlap
more = sample_without_replacement(stream, manifest, 4, already_drawn=first)
print(f"escalation adds:   {more}")
assert not set(first) & set(more)
print()

print("=== Global ballot order for multi-contest audits ===")
other = BallotManifest("jones-city", (("C1", 40), ("C2", 35)))
order = global_ballot_order([manifest, other], seed)
print("ballots are examined in ascending order of SHA256(seed, address);")
print("one pulled ballot serves every contest printed on it.")
for address in order[:6]:
    print(f"  {address}")
print(f"  ... ({len(order)} total)")
