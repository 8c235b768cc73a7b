"""LT codec: Soliton degree distributions, two-step random encoding, and
the peeling (belief-propagation) decoder.

Encoding samples a degree from the distribution, then that many distinct
input indices; the payload is their XOR.  The header stores the packet
seed and degree, so the decoder regenerates the neighbor set instead of
reading a coefficient list.  Decoding repeatedly resolves coded packets
with a single unknown neighbor and substitutes the result everywhere,
which is back-substitution on a sparse system: no row scaling, no matrix
inversion, XOR only.  A stall is a status, not an error; the regular
fixed-degree configuration doubles as a sparse-parity-code demonstrator.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    CodedPacket,
    DecodeStatus,
    InputBlock,
    SchemeId,
    SeedDegree,
    packet_support,
    regenerate_neighbors,
)
from .linalg import OpCounter
from .prng import SplitMix64

_PMF_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass over degrees 1..k, with its cumulative form."""

    k: int
    pmf: tuple[float, ...]
    cdf: tuple[float, ...]
    kind: str = "custom"

    def __post_init__(self):
        if self.k < 1 or len(self.pmf) != self.k:
            raise ValueError("pmf must cover degrees 1..k")
        if any(p < 0 for p in self.pmf):
            raise ValueError("pmf entries must be non-negative")
        if abs(sum(self.pmf) - 1.0) > _PMF_TOLERANCE:
            raise ValueError("pmf must sum to 1")
        if any(b < a - _PMF_TOLERANCE for a, b in zip(self.cdf, self.cdf[1:])):
            raise ValueError("cdf must be monotone")
        if self.cdf[-1] != 1.0:
            raise ValueError("cdf must end at exactly 1")

    def sample_degree(self, u: float) -> int:
        """Inverse-CDF draw: smallest degree whose cumulative mass covers u."""
        return bisect_left(self.cdf, u) + 1

    def mean(self) -> float:
        return sum(d * p for d, p in enumerate(self.pmf, start=1))


def _finish(k: int, weights: list[float], kind: str) -> DegreeDistribution:
    total = sum(weights)
    pmf = tuple(w / total for w in weights)
    acc = 0.0
    cdf = []
    for p in pmf:
        acc += p
        cdf.append(acc)
    cdf[-1] = 1.0
    return DegreeDistribution(k=k, pmf=pmf, cdf=tuple(cdf), kind=kind)


def ideal_soliton(k: int) -> DegreeDistribution:
    """rho(1) = 1/k, rho(d) = 1/(d(d-1)) for d = 2..k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    weights = [1.0 / k] + [1.0 / (d * (d - 1)) for d in range(2, k + 1)]
    return _finish(k, weights, "ideal")


def robust_soliton(k: int, c: float, delta: float) -> DegreeDistribution:
    """Ideal Soliton plus the spike-and-tail term tau, renormalized.

    S = c * ln(k/delta) * sqrt(k); tau(d) = S/(dk) up to the pivot degree
    ceil(k/S) - 1, tau(pivot) = S * ln(S/delta) / k, zero beyond.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if c <= 0 or not 0 < delta < 1:
        raise ValueError("need c > 0 and 0 < delta < 1")
    s = c * math.log(k / delta) * math.sqrt(k)
    if s < 1:
        raise ValueError(f"ripple size S={s:.3f} below 1; increase c or k")
    pivot = math.ceil(k / s)
    if pivot > k:
        raise ValueError(f"pivot degree {pivot} exceeds k={k}")
    weights = [1.0 / k] + [1.0 / (d * (d - 1)) for d in range(2, k + 1)]
    for d in range(1, pivot):
        weights[d - 1] += s / (d * k)
    weights[pivot - 1] += s * math.log(s / delta) / k
    return _finish(k, weights, "robust")


def regular_distribution(k: int, degree: int) -> DegreeDistribution:
    """All mass on one degree; every coded packet combines `degree` inputs."""
    if not 1 <= degree <= k:
        raise ValueError(f"degree {degree} outside 1..{k}")
    pmf = [0.0] * k
    pmf[degree - 1] = 1.0
    return _finish(k, pmf, "regular")


def custom_distribution(k: int, pmf: Sequence[float]) -> DegreeDistribution:
    weights = list(pmf)
    if abs(sum(weights) - 1.0) > _PMF_TOLERANCE:
        raise ValueError("custom pmf must sum to 1")
    return _finish(k, weights, "custom")


def soliton_pmf(kind: str, k: int, **params) -> DegreeDistribution:
    """Dispatch by name: ideal | robust(c, delta) | regular(degree)."""
    if kind == "ideal":
        return ideal_soliton(k)
    if kind == "robust":
        return robust_soliton(k, params["c"], params["delta"])
    if kind == "regular":
        return regular_distribution(k, params["degree"])
    raise ValueError(f"unknown distribution kind {kind!r}")


class LTEncoder:
    """Rateless encoder over one block; one instance per stream."""

    scheme = SchemeId.LT

    def __init__(self, dist: DegreeDistribution, block: InputBlock, seed: int):
        if dist.k != block.k:
            raise ValueError(f"distribution is for k={dist.k}, block has {block.k}")
        self.dist = dist
        self.block = block
        self._rng = SplitMix64(seed)
        self._payload_ints = [
            int.from_bytes(p, "big") for p in block.packets
        ]

    def next_packet(self) -> CodedPacket:
        degree = self.dist.sample_degree(self._rng.next_float())
        packet_seed = self._rng.next_u64()
        neighbors = regenerate_neighbors(packet_seed, degree, self.block.k)
        acc = 0
        for i in neighbors:
            acc ^= self._payload_ints[i]
        payload = acc.to_bytes(self.block.packet_len, "big")
        return CodedPacket(
            self.scheme,
            self.block.k,
            self.block.packet_len,
            SeedDegree(packet_seed, degree),
            payload,
        )


@dataclass
class StallReport:
    """Peeling ran out of degree-1 packets before finishing."""

    undecoded: tuple[int, ...]
    pending_packets: int
    decoded_count: int


@dataclass
class PeelResult:
    block: Optional[InputBlock]
    stall: Optional[StallReport]
    counter: OpCounter

    @property
    def success(self) -> bool:
        return self.block is not None


class PeelingDecoder:
    """Iterative degree-1 resolution with a ripple queue.

    A coded node's residual payload always equals its original payload
    XOR the decoded neighbors already substituted out of it.
    """

    def __init__(self, k: int, packet_len: int):
        self.k = k
        self.packet_len = packet_len
        self.counter = OpCounter()
        self.status = DecodeStatus.NEEDS_MORE
        self.packets_seen = 0
        self.redundant_count = 0
        self._decoded: list[Optional[int]] = [None] * k
        self._decoded_count = 0
        self._pending: dict[int, list] = {}  # pid -> [neighbor set, payload int]
        self._incidence: list[set[int]] = [set() for _ in range(k)]
        self._ripple: deque[int] = deque()
        self._next_pid = 0

    @property
    def decoded_count(self) -> int:
        return self._decoded_count

    @property
    def ripple_size(self) -> int:
        return len(self._ripple)

    def ingest(self, packet: CodedPacket) -> DecodeStatus:
        support = packet_support(packet, self.k)
        payload = int.from_bytes(packet.payload, "big")
        self.packets_seen += 1
        if self.status is not DecodeStatus.NEEDS_MORE:
            self.redundant_count += 1
            return self.status
        remaining = set()
        for i in support:
            v = self._decoded[i]
            if v is None:
                remaining.add(i)
            else:
                payload ^= v
                self.counter.row_xor_count += 1
        if not remaining:
            self.redundant_count += 1
            return self.status
        pid = self._next_pid
        self._next_pid += 1
        self._pending[pid] = [remaining, payload]
        for i in remaining:
            self._incidence[i].add(pid)
        if len(remaining) == 1:
            self._ripple.append(pid)
            self._drain()
        return self.status

    def _drain(self) -> None:
        while self._ripple:
            pid = self._ripple.popleft()
            entry = self._pending.get(pid)
            if entry is None or len(entry[0]) != 1:
                continue
            (i,) = entry[0]
            value = entry[1]
            del self._pending[pid]
            self._incidence[i].discard(pid)
            self._decoded[i] = value
            self._decoded_count += 1
            self.counter.resolve_count += 1
            for other in list(self._incidence[i]):
                oentry = self._pending[other]
                oentry[0].discard(i)
                oentry[1] ^= value
                self.counter.row_xor_count += 1
                if len(oentry[0]) == 1:
                    self._ripple.append(other)
                elif not oentry[0]:
                    del self._pending[other]
                    self.redundant_count += 1
            self._incidence[i].clear()
        if self._decoded_count == self.k:
            self.status = DecodeStatus.DECODABLE

    def decode(self) -> InputBlock:
        if self.status is DecodeStatus.NEEDS_MORE:
            raise RuntimeError("peeling has not resolved all inputs")
        block = InputBlock(
            tuple(v.to_bytes(self.packet_len, "big") for v in self._decoded)
        )
        self.status = DecodeStatus.DECODED
        return block

    def stall_report(self) -> StallReport:
        return StallReport(
            undecoded=tuple(i for i, v in enumerate(self._decoded) if v is None),
            pending_packets=len(self._pending),
            decoded_count=self._decoded_count,
        )


def peel_decode(
    packets: Sequence[CodedPacket], k: int, packet_len: int
) -> PeelResult:
    """Run peeling over a packet set; returns the block or a stall report."""
    dec = PeelingDecoder(k, packet_len)
    for p in packets:
        dec.ingest(p)
    if dec.status is not DecodeStatus.NEEDS_MORE:
        return PeelResult(dec.decode(), None, dec.counter)
    return PeelResult(None, dec.stall_report(), dec.counter)


@dataclass
class OverheadTrial:
    consumed: int
    overhead: float
    aborted: bool
    counter: OpCounter


def lt_overhead_trial(
    dist: DegreeDistribution,
    seed: int,
    packet_len: int = 1,
    cap: Optional[int] = None,
) -> OverheadTrial:
    """Feed a fresh encoder into a peeling decoder until the block decodes;
    returns the packets consumed, with overhead = consumed/k - 1.

    The block payloads are drawn from the trial seed and the decode is
    verified bit-exact.  `cap` defaults to 10k packets.
    """
    k = dist.k
    cap = cap if cap is not None else 10 * k
    rng = SplitMix64(seed ^ 0xB10CDA7A)
    block = InputBlock(
        tuple(
            bytes(rng.next_below(256) for _ in range(packet_len)) for _ in range(k)
        )
    )
    encoder = LTEncoder(dist, block, seed)
    decoder = PeelingDecoder(k, packet_len)
    consumed = 0
    while decoder.status is DecodeStatus.NEEDS_MORE:
        if consumed >= cap:
            return OverheadTrial(consumed, consumed / k - 1.0, True, decoder.counter)
        decoder.ingest(encoder.next_packet())
        consumed += 1
    if decoder.decode() != block:
        raise AssertionError("peeling produced a wrong block")
    return OverheadTrial(consumed, consumed / k - 1.0, False, decoder.counter)
