"""Frame format for coded packets.

Layout, all integers big-endian:

    magic 0xEC | version 0x01 | scheme_id u8 | k u32 | B u32 |
    header_kind u8 | header_len u16 | header bytes | payload

Header encodings by kind:

    0  explicit coefficients: k symbols.  Bit-packed one bit per symbol
       (LSB-first within each byte) when every coefficient is 0 or 1,
       otherwise one byte per symbol.  The two encodings are told apart
       by header_len.
    1  seed + degree: u64 seed, u16 degree.  Raptor packets append
       u64 precode_seed, u32 redundant_count, u16 row_weight.
    2  row index: u32.
    3  shift list: u16 count (= k), then count u16 slots; 0xFFFF marks
       an input absent from the packet.

Payload length is B except for shift-list packets, which carry
B + ceil(max_shift / 8) bytes.  A packet-stream file is a plain
concatenation of frames.
"""

from __future__ import annotations

import struct
from typing import Iterator

from .core import (
    CodedPacket,
    CoefficientVector,
    HeaderKind,
    RaptorSeed,
    RowIndex,
    SchemeId,
    SeedDegree,
    ShiftList,
)
from .errors import (
    BadMagicError,
    PacketFormatError,
    TruncatedFrameError,
    UnknownSchemeError,
)

MAGIC = 0xEC
VERSION = 0x01

_ABSENT = 0xFFFF
_FIXED = struct.Struct(">BBBIIBH")  # magic, version, scheme, k, B, kind, header_len


def _encode_header(packet: CodedPacket) -> tuple[int, bytes]:
    h = packet.header
    if isinstance(h, CoefficientVector):
        coeffs = h.coefficients
        if len(coeffs) != packet.k:
            raise PacketFormatError("coefficient vector length must equal k")
        if all(c <= 1 for c in coeffs):
            out = bytearray((packet.k + 7) // 8)
            for j, c in enumerate(coeffs):
                if c:
                    out[j // 8] |= 1 << (j % 8)
            return HeaderKind.COEFFICIENTS, bytes(out)
        if any(not 0 <= c <= 0xFF for c in coeffs):
            raise PacketFormatError("coefficients above one byte are not supported")
        return HeaderKind.COEFFICIENTS, bytes(coeffs)
    if isinstance(h, RaptorSeed):
        return HeaderKind.SEED_DEGREE, struct.pack(
            ">QHQIH", h.seed, h.degree, h.precode_seed, h.redundant_count, h.row_weight
        )
    if isinstance(h, SeedDegree):
        return HeaderKind.SEED_DEGREE, struct.pack(">QH", h.seed, h.degree)
    if isinstance(h, RowIndex):
        return HeaderKind.ROW_INDEX, struct.pack(">I", h.index)
    if isinstance(h, ShiftList):
        if len(h.slots) != packet.k:
            raise PacketFormatError("shift list must have one slot per input")
        vals = [_ABSENT if s is None else s for s in h.slots]
        if any(not 0 <= v <= 0xFFFF for v in vals):
            raise PacketFormatError("shift outside u16 range")
        return HeaderKind.SHIFT_LIST, struct.pack(
            f">H{len(vals)}H", len(vals), *vals
        )
    raise PacketFormatError(f"unknown header type {type(h).__name__}")


def serialize(packet: CodedPacket) -> bytes:
    kind, header = _encode_header(packet)
    expected = _payload_length(packet.packet_len, packet.header)
    if len(packet.payload) != expected:
        raise PacketFormatError(
            f"payload is {len(packet.payload)} bytes, frame needs {expected}"
        )
    fixed = _FIXED.pack(
        MAGIC, VERSION, packet.scheme, packet.k, packet.packet_len, kind, len(header)
    )
    return fixed + header + packet.payload


def _payload_length(b: int, header) -> int:
    if isinstance(header, ShiftList):
        return b + (header.max_shift + 7) // 8
    return b


def _decode_header(scheme: SchemeId, k: int, kind: int, data: bytes):
    if kind == HeaderKind.COEFFICIENTS:
        packed_len = (k + 7) // 8
        if len(data) == packed_len and k > 1:
            coeffs = tuple((data[j // 8] >> (j % 8)) & 1 for j in range(k))
            return CoefficientVector(coeffs)
        if len(data) == k:
            return CoefficientVector(tuple(data))
        raise PacketFormatError(
            f"coefficient header of {len(data)} bytes fits neither packed "
            f"({packed_len}) nor byte ({k}) form"
        )
    if kind == HeaderKind.SEED_DEGREE:
        if scheme == SchemeId.RAPTOR:
            if len(data) != 24:
                raise PacketFormatError("raptor header must be 24 bytes")
            seed, degree, pseed, j, w = struct.unpack(">QHQIH", data)
            return RaptorSeed(seed, degree, pseed, j, w)
        if len(data) != 10:
            raise PacketFormatError("seed+degree header must be 10 bytes")
        seed, degree = struct.unpack(">QH", data)
        return SeedDegree(seed, degree)
    if kind == HeaderKind.ROW_INDEX:
        if len(data) != 4:
            raise PacketFormatError("row index header must be 4 bytes")
        return RowIndex(struct.unpack(">I", data)[0])
    if kind == HeaderKind.SHIFT_LIST:
        if len(data) < 2:
            raise PacketFormatError("shift list header too short")
        (count,) = struct.unpack(">H", data[:2])
        if count != k:
            raise PacketFormatError(f"shift list has {count} slots, expected k={k}")
        if len(data) != 2 + 2 * count:
            raise PacketFormatError("shift list length mismatch")
        vals = struct.unpack(f">{count}H", data[2:])
        slots = tuple(None if v == _ABSENT else v for v in vals)
        if all(s is None for s in slots):
            raise PacketFormatError("shift list with no participants")
        return ShiftList(slots)
    raise PacketFormatError(f"unknown header kind {kind}")


def decode_frame(data: bytes, offset: int = 0) -> tuple[CodedPacket, int]:
    """Parse one frame starting at `offset`; returns the packet and the
    offset just past it."""
    if len(data) - offset < 1:
        raise TruncatedFrameError("empty frame")
    if data[offset] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC:#x}, found {data[offset]:#x}")
    if len(data) - offset < _FIXED.size:
        raise TruncatedFrameError("frame shorter than fixed fields")
    magic, version, scheme_raw, k, b, kind, header_len = _FIXED.unpack_from(
        data, offset
    )
    if version != VERSION:
        raise PacketFormatError(f"unsupported frame version {version}")
    try:
        scheme = SchemeId(scheme_raw)
    except ValueError:
        raise UnknownSchemeError(f"unknown scheme id {scheme_raw}") from None
    pos = offset + _FIXED.size
    if len(data) - pos < header_len:
        raise TruncatedFrameError("frame ends inside header")
    header = _decode_header(scheme, k, kind, data[pos : pos + header_len])
    pos += header_len
    payload_len = _payload_length(b, header)
    if len(data) - pos < payload_len:
        raise TruncatedFrameError("frame ends inside payload")
    payload = data[pos : pos + payload_len]
    return CodedPacket(scheme, k, b, header, payload), pos + payload_len


def deserialize(data: bytes) -> CodedPacket:
    """Parse exactly one frame; trailing bytes are an error."""
    packet, end = decode_frame(data)
    if end != len(data):
        raise PacketFormatError(f"{len(data) - end} trailing bytes after frame")
    return packet


def read_stream(data: bytes) -> Iterator[CodedPacket]:
    """Iterate the frames of a packet-stream file."""
    offset = 0
    while offset < len(data):
        packet, offset = decode_frame(data, offset)
        yield packet


def write_stream(packets) -> bytes:
    return b"".join(serialize(p) for p in packets)
