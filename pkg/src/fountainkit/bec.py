"""Binary-erasure-channel multicast simulator.

A server transmits to N clients; each transmission independently reaches
each client or is erased.  Note the sign convention: `loss_prob` is the
per-packet ERASURE probability (the reception probability is its
complement), which avoids double negatives in reports.

Erasure draws come from one splitmix64 stream per client whose seeds are
a prefix of a master stream, so adding clients never perturbs the
erasures existing clients see, and every session replays bit-identically
from its seed.  Coded sessions run until every client decodes or the
transmission cap / fixed-rate budget runs out; the ARQ baseline resends
every packet until all clients acknowledge it, with ACK frames tallied
separately (lossless by default, optionally erased like data).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .core import CodedPacket, DecodeStatus, InputBlock
from .gf import GF2, GF256
from .linalg import OpCounter
from .lt import DegreeDistribution, LTEncoder, PeelingDecoder, robust_soliton
from .prng import SplitMix64
from .raptor import PrecodeSpec, RaptorDecoder, RaptorEncoder
from .rl import RlConfig, RlEncoder
from .rl import make_decoder as rl_make_decoder
from .rs import VandermondeSpec, make_decoder as rs_make_decoder, rs_encode
from .triangular import BitSubstitutionDecoder, planned_shift_stream, tri_encode

_ACK_STREAM_SALT = 0xAC4AC4AC4AC4AC4A


def default_distribution(k: int, c: float, delta: float) -> DegreeDistribution:
    """Robust Soliton, with c raised to whatever keeps the ripple size S
    at least 1 when k is too small for the requested c."""
    c_floor = 1.0000001 / (math.log(k / delta) * math.sqrt(k))
    return robust_soliton(k, max(c, c_floor), delta)


@dataclass(frozen=True)
class ChannelSpec:
    """Erasure probability per client per transmission, client count, seed."""

    loss_prob: float
    clients: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be within [0, 1]")
        if self.clients < 1:
            raise ValueError("need at least one client")

    def client_streams(self, salt: int = 0) -> list[SplitMix64]:
        master = SplitMix64(self.seed ^ salt)
        return [SplitMix64(master.next_u64()) for _ in range(self.clients)]

    def default_cap(self, k: int) -> int:
        if self.loss_prob >= 1.0:
            return 10 * k
        return math.ceil(10 * k / (1.0 - self.loss_prob))


@dataclass
class SessionReport:
    scheme: str
    k: int
    packet_len: int
    clients: int
    loss_prob: float
    seed: int
    total_transmissions: int
    retransmissions: int
    ack_frames: int
    per_client_received: tuple[int, ...]
    per_client_useful: tuple[int, ...]
    per_client_overhead: tuple[Optional[float], ...]
    all_decoded: bool
    failed_clients: tuple[int, ...]
    fixed_rate_exhausted: bool
    op_counter: OpCounter
    wall_time_s: float

    def mean_overhead(self) -> Optional[float]:
        values = [e for e in self.per_client_overhead if e is not None]
        return sum(values) / len(values) if values else None


@dataclass
class CodecSession:
    """What the simulator needs from a codec: a fresh packet stream and a
    fresh per-client decoder, both deterministic functions of the seed."""

    name: str
    k: int
    packet_len: int
    rateless: bool
    stream_factory: Callable[[], Iterator[CodedPacket]]
    decoder_factory: Callable[[], object]
    block: InputBlock


def make_codec_session(
    scheme: str,
    block: InputBlock,
    seed: int = 0,
    *,
    n: Optional[int] = None,
    systematic: bool = False,
    field_order: int = 256,
    sparsity: float = 1.0,
    dist: Optional[DegreeDistribution] = None,
    soliton_c: float = 0.1,
    soliton_delta: float = 0.5,
    redundant_count: Optional[int] = None,
    row_weight: int = 3,
) -> CodecSession:
    """Bundle one of the five codecs for a simulated session."""
    k, b = block.k, block.packet_len
    if scheme == "rs":
        vspec = VandermondeSpec.default(k, n if n is not None else 2 * k, systematic)
        return CodecSession(
            "rs", k, b, False,
            lambda: iter(rs_encode(block, vspec)),
            lambda: rs_make_decoder(vspec, b),
            block,
        )
    if scheme == "rl":
        spec = GF2 if field_order == 2 else GF256
        config = RlConfig(spec, k, sparsity=sparsity, seed=seed)

        def rl_stream() -> Iterator[CodedPacket]:
            enc = RlEncoder(config, block)
            while True:
                yield enc.next_packet()

        return CodecSession(
            "rl", k, b, True, rl_stream, lambda: rl_make_decoder(config, b), block
        )
    if scheme == "lt":
        lt_dist = dist
        if lt_dist is None:
            lt_dist = default_distribution(k, soliton_c, soliton_delta)

        def lt_stream() -> Iterator[CodedPacket]:
            enc = LTEncoder(lt_dist, block, seed)
            while True:
                yield enc.next_packet()

        return CodecSession(
            "lt", k, b, True, lt_stream, lambda: PeelingDecoder(k, b), block
        )
    if scheme == "raptor":
        pre = PrecodeSpec(
            k=k,
            redundant_count=(
                redundant_count
                if redundant_count is not None
                else math.ceil(0.05 * k) + 4
            ),
            row_weight=row_weight,
            seed=seed,
        )
        r_dist = dist
        if r_dist is None:
            r_dist = default_distribution(
                pre.intermediate_count, soliton_c, soliton_delta
            )

        def raptor_stream() -> Iterator[CodedPacket]:
            enc = RaptorEncoder(block, r_dist, pre, seed)
            while True:
                yield enc.next_packet()

        return CodecSession(
            "raptor", k, b, True, raptor_stream, lambda: RaptorDecoder(k, b), block
        )
    if scheme == "triangular":

        def tri_stream() -> Iterator[CodedPacket]:
            for sv in planned_shift_stream(k, seed):
                yield tri_encode(block, sv)

        return CodecSession(
            "triangular", k, b, True, tri_stream,
            lambda: BitSubstitutionDecoder(k, b), block,
        )
    raise ValueError(f"unknown scheme {scheme!r}")


class Session:
    """One multicast delivery of one block to N clients."""

    def __init__(
        self,
        codec: CodecSession,
        channel: ChannelSpec,
        cap: Optional[int] = None,
    ):
        self.codec = codec
        self.channel = channel
        self.cap = cap if cap is not None else channel.default_cap(codec.k)

    def run(self) -> SessionReport:
        streams = self.channel.client_streams()
        return self._run(
            lambda _t: [
                i
                for i, s in enumerate(streams)
                if s.next_float() >= self.channel.loss_prob
            ]
        )

    def force_pattern(self, pattern: Sequence[Sequence[int]]) -> SessionReport:
        """Replace stochastic erasure with a scripted reception pattern.

        The pattern must last until every client decodes (or the fixed-rate
        budget ends); running out of scripted transmissions first is an
        error."""
        def scripted(t: int) -> list[int]:
            if t >= len(pattern):
                raise ValueError(
                    f"pattern of {len(pattern)} transmissions is shorter than the session"
                )
            return list(pattern[t])

        return self._run(scripted)

    def _run(self, receivers_of, cap: Optional[int] = None) -> SessionReport:
        start = time.perf_counter()
        n_clients = self.channel.clients
        cap = cap if cap is not None else self.cap
        decoders = [self.codec.decoder_factory() for _ in range(n_clients)]
        received = [0] * n_clients
        useful: list[Optional[int]] = [None] * n_clients
        stream = self.codec.stream_factory()
        transmissions = 0
        exhausted = False
        while any(u is None for u in useful) and transmissions < cap:
            packet = next(stream, None)
            if packet is None:
                exhausted = True
                break
            reached = receivers_of(transmissions)
            transmissions += 1
            for i in reached:
                received[i] += 1
                if useful[i] is not None:
                    continue
                status = decoders[i].ingest(packet)
                if status is not DecodeStatus.NEEDS_MORE:
                    useful[i] = received[i]
                    if decoders[i].decode() != self.codec.block:
                        raise AssertionError("decoder returned a wrong block")
        counter = OpCounter()
        for d in decoders:
            counter.merge(d.counter)
        failed = tuple(i for i, u in enumerate(useful) if u is None)
        overheads = tuple(
            (u / self.codec.k - 1.0) if u is not None else None for u in useful
        )
        return SessionReport(
            scheme=self.codec.name,
            k=self.codec.k,
            packet_len=self.codec.packet_len,
            clients=n_clients,
            loss_prob=self.channel.loss_prob,
            seed=self.channel.seed,
            total_transmissions=transmissions,
            retransmissions=max(transmissions - self.codec.k, 0),
            ack_frames=0,
            per_client_received=tuple(received),
            per_client_useful=tuple(u if u is not None else r for u, r in zip(useful, received)),
            per_client_overhead=overheads,
            all_decoded=not failed,
            failed_clients=failed,
            fixed_rate_exhausted=exhausted and bool(failed),
            op_counter=counter,
            wall_time_s=time.perf_counter() - start,
        )


def run_session(
    codec: CodecSession, channel: ChannelSpec, cap: Optional[int] = None
) -> SessionReport:
    return Session(codec, channel, cap).run()


def force_pattern(session: Session, pattern: Sequence[Sequence[int]]) -> SessionReport:
    return session.force_pattern(pattern)


def run_arq_baseline(
    block: InputBlock,
    channel: ChannelSpec,
    lossy_acks: bool = False,
    cap: Optional[int] = None,
    pattern: Optional[Sequence[Sequence[int]]] = None,
) -> SessionReport:
    """Uncoded send-and-acknowledge baseline.

    Every packet is retransmitted until the server holds an ACK from every
    client for it.  ACK frames are lossless unless `lossy_acks`, in which
    case they are erased with the data loss probability and the server
    retransmits packets it believes missing.
    """
    start = time.perf_counter()
    n_clients = channel.clients
    k = block.k
    cap = cap if cap is not None else channel.default_cap(k)
    data_streams = channel.client_streams()
    ack_streams = channel.client_streams(_ACK_STREAM_SALT)
    holds = [[False] * k for _ in range(n_clients)]
    acked = [[False] * k for _ in range(n_clients)]
    received = [0] * n_clients
    done_at: list[Optional[int]] = [None] * n_clients
    transmissions = 0
    ack_frames = 0

    def receivers_of(t: int) -> list[int]:
        if pattern is not None:
            if t >= len(pattern):
                raise ValueError(
                    f"pattern of {len(pattern)} transmissions is shorter than the session"
                )
            return list(pattern[t])
        return [
            i
            for i, s in enumerate(data_streams)
            if s.next_float() >= channel.loss_prob
        ]

    # Round-robin sweeps: each pass sends every packet some client has
    # not yet acknowledged, until all are acknowledged everywhere.
    pending = True
    while pending and transmissions < cap:
        pending = False
        for packet in range(k):
            if all(acked[i][packet] for i in range(n_clients)):
                continue
            if transmissions >= cap:
                break
            pending = True
            reached = receivers_of(transmissions)
            transmissions += 1
            for i in reached:
                received[i] += 1
                holds[i][packet] = True
                if done_at[i] is None and all(holds[i]):
                    done_at[i] = received[i]
                # The client acknowledges every reception.
                ack_frames += 1
                ack_lost = (
                    lossy_acks and ack_streams[i].next_float() < channel.loss_prob
                )
                if not ack_lost:
                    acked[i][packet] = True
    failed = tuple(i for i, d in enumerate(done_at) if d is None)
    overheads = tuple(
        (d / k - 1.0) if d is not None else None for d in done_at
    )
    counter = OpCounter()
    return SessionReport(
        scheme="arq",
        k=k,
        packet_len=block.packet_len,
        clients=n_clients,
        loss_prob=channel.loss_prob,
        seed=channel.seed,
        total_transmissions=transmissions,
        retransmissions=max(transmissions - k, 0),
        ack_frames=ack_frames,
        per_client_received=tuple(received),
        per_client_useful=tuple(
            d if d is not None else r for d, r in zip(done_at, received)
        ),
        per_client_overhead=overheads,
        all_decoded=not failed,
        failed_clients=failed,
        fixed_rate_exhausted=False,
        op_counter=counter,
        wall_time_s=time.perf_counter() - start,
    )
