"""Fixed-rate Reed-Solomon-style erasure codec over GF(256).

Coding vectors are rows of a Vandermonde matrix built on distinct nonzero
evaluation points, so any k of the n coded packets form an invertible
system.  Headers carry only the row index; the decoder rebuilds the row
from the shared spec.  The optional systematic variant right-multiplies
the generator by the inverse of its first k rows, which turns those rows
into the identity while keeping every k-subset invertible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .core import CodedPacket, InputBlock, LinearDecoder, RowIndex, SchemeId, linear_combine
from .errors import DuplicatePacketError, InsufficientPacketsError
from .gf import GF256, FieldSpec, field
from .linalg import FieldMatrix, OpCounter, invert, solve


def default_points(n: int, spec: FieldSpec = GF256) -> tuple[int, ...]:
    """First n nonzero field elements in generator-power order."""
    gf = field(spec)
    if n > spec.order - 1:
        raise ValueError(f"field of order {spec.order} has only {spec.order - 1} nonzero points")
    return tuple(gf.exp_table[:n])


@dataclass(frozen=True)
class VandermondeSpec:
    """Generator description: n rows [1, a, a^2, ..., a^(k-1)] over GF(256)."""

    k: int
    n: int
    points: tuple[int, ...]
    systematic: bool = False
    spec: FieldSpec = GF256

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ValueError(f"need n >= k >= 1, got k={self.k} n={self.n}")
        if self.n > self.spec.order - 1:
            raise ValueError(
                f"n={self.n} exceeds the {self.spec.order - 1} nonzero points of GF(2^{self.spec.m})"
            )
        if len(self.points) != self.n:
            raise ValueError("one evaluation point per row required")
        if len(set(self.points)) != self.n:
            raise ValueError("evaluation points must be distinct")
        if any(not 0 < a < self.spec.order for a in self.points):
            raise ValueError("evaluation points must be nonzero field elements")

    @classmethod
    def default(cls, k: int, n: int, systematic: bool = False) -> "VandermondeSpec":
        return cls(k=k, n=n, points=default_points(n), systematic=systematic)


def vandermonde_row(vspec: VandermondeSpec, index: int) -> list[int]:
    gf = field(vspec.spec)
    a = vspec.points[index]
    return [gf.pow(a, e) for e in range(vspec.k)]


@lru_cache(maxsize=64)
def _systematic_transform(vspec: VandermondeSpec) -> tuple[tuple[int, ...], ...]:
    head = FieldMatrix.from_rows(
        vspec.spec, [vandermonde_row(vspec, j) for j in range(vspec.k)]
    )
    return tuple(tuple(r) for r in invert(head).to_rows())


def coding_row(vspec: VandermondeSpec, index: int) -> list[int]:
    """Coefficient vector of coded packet `index`."""
    if not 0 <= index < vspec.n:
        raise ValueError(f"row index {index} outside 0..{vspec.n - 1}")
    row = vandermonde_row(vspec, index)
    if not vspec.systematic:
        return row
    gf = field(vspec.spec)
    t = _systematic_transform(vspec)
    out = [0] * vspec.k
    for j, v in enumerate(row):
        if v:
            trow = t[j]
            for i in range(vspec.k):
                if trow[i]:
                    out[i] ^= gf.mul(v, trow[i])
    return out


def rs_encode(block: InputBlock, vspec: VandermondeSpec) -> list[CodedPacket]:
    if block.k != vspec.k:
        raise ValueError(f"block has k={block.k}, spec expects {vspec.k}")
    return [
        CodedPacket(
            SchemeId.RS,
            vspec.k,
            block.packet_len,
            RowIndex(j),
            linear_combine(block.packets, coding_row(vspec, j), vspec.spec),
        )
        for j in range(vspec.n)
    ]


def rs_decode(
    packets: Sequence[CodedPacket],
    vspec: VandermondeSpec,
    counter: Optional[OpCounter] = None,
) -> InputBlock:
    """Exact recovery from any k packets with distinct row indices."""
    seen: set[int] = set()
    chosen: list[CodedPacket] = []
    for p in packets:
        idx = p.header.index
        if idx in seen:
            raise DuplicatePacketError(f"row index {idx} received twice")
        seen.add(idx)
        chosen.append(p)
        if len(chosen) == vspec.k:
            break
    if len(chosen) < vspec.k:
        raise InsufficientPacketsError(
            f"need {vspec.k} distinct packets, have {len(chosen)}"
        )
    m = FieldMatrix.from_rows(
        vspec.spec, [coding_row(vspec, p.header.index) for p in chosen]
    )
    xs = solve(m, [p.payload for p in chosen], counter)
    return InputBlock(tuple(xs))


def make_decoder(vspec: VandermondeSpec, packet_len: int) -> LinearDecoder:
    """Incremental decoder for simulator use; innovation is rank-checked."""
    return LinearDecoder(
        vspec.spec,
        vspec.k,
        packet_len,
        SchemeId.RS,
        lambda p: coding_row(vspec, p.header.index),
    )
