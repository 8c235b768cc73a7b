"""Erasure-channel sessions: determinism, forced patterns, ARQ baseline."""

import random

import pytest

from fountainkit.bec import (
    ChannelSpec,
    Session,
    force_pattern,
    make_codec_session,
    run_arq_baseline,
    run_session,
)
from fountainkit.core import (
    CodedPacket,
    CoefficientVector,
    InputBlock,
    SchemeId,
)
from fountainkit.linalg import xor_bytes
from fountainkit.rl import rl_success_probability


def block(k, b=4, seed=0):
    rng = random.Random(seed)
    return InputBlock(tuple(bytes(rng.randrange(256) for _ in range(b)) for _ in range(k)))


def xor_packet(indices, payload, k):
    coeffs = tuple(int(j in indices) for j in range(k))
    return CodedPacket(SchemeId.RL, k, len(payload), CoefficientVector(coeffs), payload)


class TestChannelSpec:
    def test_bounds(self):
        with pytest.raises(ValueError):
            ChannelSpec(-0.1, 1)
        with pytest.raises(ValueError):
            ChannelSpec(1.1, 1)
        with pytest.raises(ValueError):
            ChannelSpec(0.5, 0)

    def test_client_streams_are_prefix_stable(self):
        a = [s.next_u64() for s in ChannelSpec(0.1, 2, seed=9).client_streams()]
        b = [s.next_u64() for s in ChannelSpec(0.1, 4, seed=9).client_streams()]
        assert b[:2] == a


class TestCodedSessions:
    def test_lossless_exact_rate_schemes_finish_in_k(self):
        blk = block(8, seed=1)
        for scheme, kwargs in (("rl", {"field_order": 256}), ("triangular", {})):
            codec = make_codec_session(scheme, blk, seed=2, **kwargs)
            report = run_session(codec, ChannelSpec(0.0, 3, seed=3))
            assert report.all_decoded
            assert report.total_transmissions == 8
            assert report.mean_overhead() == 0.0

    def test_total_loss_hits_cap(self):
        blk = block(6, seed=2)
        codec = make_codec_session("lt", blk, seed=4)
        report = run_session(codec, ChannelSpec(1.0, 1, seed=5))
        assert not report.all_decoded
        assert report.total_transmissions == 60  # cap 10k
        assert report.failed_clients == (0,)

    def test_replay_is_bit_identical(self):
        blk = block(10, seed=3)
        reports = [
            run_session(
                make_codec_session("raptor", blk, seed=6), ChannelSpec(0.25, 2, seed=7)
            )
            for _ in range(2)
        ]
        a, b = reports
        assert a.total_transmissions == b.total_transmissions
        assert a.per_client_received == b.per_client_received
        assert a.per_client_useful == b.per_client_useful
        assert a.op_counter == b.op_counter

    def test_every_scheme_survives_loss(self):
        blk = block(8, seed=4)
        for scheme in ("rs", "rl", "lt", "raptor", "triangular"):
            codec = make_codec_session(scheme, blk, seed=8, n=40)
            report = run_session(codec, ChannelSpec(0.3, 2, seed=9))
            assert report.all_decoded, scheme
            assert all(e is not None and e >= 0 for e in report.per_client_overhead)

    def test_rateless_schemes_terminate_under_cap(self):
        for seed in range(12):
            blk = block(6, b=1, seed=seed + 20)
            for scheme in ("rl", "lt", "raptor", "triangular"):
                codec = make_codec_session(scheme, blk, seed=seed)
                report = run_session(codec, ChannelSpec(0.5, 1, seed=seed))
                assert report.all_decoded, (scheme, seed)

    def test_fixed_rate_budget_exhaustion_flagged(self):
        blk = block(4, seed=5)
        codec = make_codec_session("rs", blk, seed=1, n=5)
        report = run_session(codec, ChannelSpec(0.9, 1, seed=11))
        assert not report.all_decoded
        assert report.fixed_rate_exhausted

    def test_rl_mean_receptions_tracks_rank_law(self):
        # Mean packets needed by one client over GF(256) should stay close
        # to k plus the expected surplus implied by the rank law.
        k, trials = 8, 300
        total = 0
        for t in range(trials):
            blk = block(k, b=1, seed=t)
            codec = make_codec_session("rl", blk, seed=t, field_order=256)
            report = run_session(codec, ChannelSpec(0.0, 1, seed=t))
            assert report.all_decoded
            total += report.per_client_useful[0]
        expected = k
        surplus = 0.0
        for extra in range(0, 10):
            surplus += 1.0 - rl_success_probability(256, k, k + extra)
        assert abs(total / trials - (expected + surplus)) < 0.1


class TestForcedPatterns:
    def test_all_receive_equals_lossless(self):
        blk = block(5, seed=6)
        codec = make_codec_session("rl", blk, seed=12, field_order=256)
        stochastic = run_session(codec, ChannelSpec(0.0, 2, seed=13))
        forced = force_pattern(
            Session(codec, ChannelSpec(0.5, 2, seed=13)),
            [[0, 1]] * 10,
        )
        assert forced.all_decoded
        assert forced.total_transmissions == stochastic.total_transmissions

    def test_pattern_too_short_is_an_error(self):
        blk = block(5, seed=7)
        codec = make_codec_session("rl", blk, seed=14, field_order=2)
        session = Session(codec, ChannelSpec(0.5, 2, seed=15))
        with pytest.raises(ValueError):
            session.force_pattern([[0, 1], [0, 1]])

    def test_crossover_coded_beats_arq(self):
        # Two clients each miss a different packet; one XOR packet repairs
        # both, the ARQ baseline resends each missing packet separately.
        blk = block(2, seed=8)
        c1, c2 = blk.packets
        arq = run_arq_baseline(
            blk, ChannelSpec(0.5, 2, seed=16),
            pattern=[[0], [1], [0, 1], [0, 1]],
        )
        assert arq.total_transmissions == 4
        assert arq.retransmissions == 2
        codec = make_codec_session("rl", blk, seed=17, field_order=2)
        codec.stream_factory = lambda: iter(
            [
                xor_packet({0}, c1, 2),
                xor_packet({1}, c2, 2),
                xor_packet({0, 1}, xor_bytes(c1, c2), 2),
            ]
        )
        coded = force_pattern(
            Session(codec, ChannelSpec(0.5, 2, seed=18)), [[0], [1], [0, 1]]
        )
        assert coded.all_decoded
        assert coded.retransmissions == 1


class TestArqBaseline:
    def test_lossless_single_client(self):
        blk = block(7, seed=9)
        report = run_arq_baseline(blk, ChannelSpec(0.0, 1, seed=19))
        assert report.total_transmissions == 7
        assert report.ack_frames == 7
        assert report.all_decoded

    def test_geometric_retransmission_count(self):
        # With one client, each packet needs Geometric(1-p) sends: the mean
        # transmissions per packet approach 1/(1-p).
        loss, k, trials = 0.3, 5, 10_000
        total = 0
        for t in range(trials):
            blk = block(k, b=1, seed=t)
            report = run_arq_baseline(blk, ChannelSpec(loss, 1, seed=t))
            assert report.all_decoded
            total += report.total_transmissions
        per_packet = total / (trials * k)
        assert abs(per_packet - 1 / (1 - loss)) / (1 / (1 - loss)) < 0.05

    def test_transmissions_non_decreasing_in_clients(self):
        # Per-client erasure streams are prefix-stable, so adding clients
        # can only add retransmissions at a fixed seed.
        for seed in range(30):
            blk = block(6, b=1, seed=seed)
            counts = [
                run_arq_baseline(blk, ChannelSpec(0.25, n, seed=seed)).total_transmissions
                for n in (1, 2, 4)
            ]
            assert counts[0] <= counts[1] <= counts[2]

    def test_lossy_acks_trigger_spurious_retransmissions(self):
        loss, k = 0.4, 6
        base = spurious = 0
        for seed in range(200):
            blk = block(k, b=1, seed=seed)
            base += run_arq_baseline(
                blk, ChannelSpec(loss, 1, seed=seed)
            ).total_transmissions
            spurious += run_arq_baseline(
                blk, ChannelSpec(loss, 1, seed=seed), lossy_acks=True
            ).total_transmissions
        assert spurious > base
