"""Arithmetic over GF(2^m), 1 <= m <= 16.

Field elements are plain integers in [0, 2^m); a payload byte is one
GF(256) symbol.  Addition is XOR.  Multiplication is available along two
independent routes: a schoolbook shift-and-reduce (`mul_schoolbook`) and a
table-driven form (`mul`) backed by exp/log tables built from the spec's
generator.  Table construction doubles as a primitivity check: the
generator's powers must enumerate every nonzero element exactly once.

The module keeps a small `Symbol` wrapper for call sites that want field
membership checked on every operation; hot paths use the integer API on a
`GF` instance directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import FieldConstructionError, FieldMismatchError


@dataclass(frozen=True)
class FieldSpec:
    """Defining data for GF(2^m).

    m : extension degree (bits per symbol)
    modulus : irreducible polynomial as an (m+1)-bit integer, top bit set
    generator : primitive element used to build the exp/log tables
    """

    m: int
    modulus: int
    generator: int

    def __post_init__(self):
        if not 1 <= self.m <= 16:
            raise FieldConstructionError(f"extension degree {self.m} outside 1..16")
        if self.modulus.bit_length() != self.m + 1:
            raise FieldConstructionError(
                f"modulus {self.modulus:#x} does not have degree {self.m}"
            )
        if not 0 < self.generator < (1 << self.m):
            raise FieldConstructionError(
                f"generator {self.generator} outside field of 2^{self.m} elements"
            )

    @property
    def order(self) -> int:
        return 1 << self.m


#: GF(2), the XOR-only field.
GF2 = FieldSpec(m=1, modulus=0b11, generator=1)

#: GF(256) with the conventional Reed-Solomon erasure polynomial
#: x^8 + x^4 + x^3 + x^2 + 1 and generator 2.
GF256 = FieldSpec(m=8, modulus=0x11D, generator=2)


@dataclass(frozen=True)
class Symbol:
    """A field element bound to its FieldSpec."""

    value: int
    spec: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.spec.order:
            raise ValueError(f"value {self.value} outside GF(2^{self.spec.m})")

    def _check(self, other: "Symbol") -> None:
        if self.spec != other.spec:
            raise FieldMismatchError(
                f"symbols from different fields: GF(2^{self.spec.m}) vs GF(2^{other.spec.m})"
            )

    def __add__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(self.value ^ other.value, self.spec)

    __xor__ = __add__
    __sub__ = __add__

    def __mul__(self, other: "Symbol") -> "Symbol":
        self._check(other)
        return Symbol(field(self.spec).mul(self.value, other.value), self.spec)

    def inverse(self) -> "Symbol":
        return Symbol(field(self.spec).inv(self.value), self.spec)


class GF:
    """Arithmetic context for one FieldSpec, with precomputed exp/log tables."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.m = spec.m
        self.order = spec.order
        self._mask = self.order - 1
        self._exp, self._log = self._build_tables()

    # -- construction -------------------------------------------------

    def mul_schoolbook(self, a: int, b: int) -> int:
        """Polynomial product reduced by the modulus, no tables.

        Kept as the independent reference route; `mul` must agree with it
        on every pair.
        """
        p = 0
        while b:
            if b & 1:
                p ^= a
            b >>= 1
            a <<= 1
            if a & self.order:
                a ^= self.spec.modulus
        return p

    def _build_tables(self) -> tuple[list[int], list[int]]:
        n = self.order - 1
        exp = [0] * n
        log = [-1] * self.order
        x = 1
        for i in range(n):
            if log[x] != -1:
                raise FieldConstructionError(
                    f"generator {self.spec.generator} is not primitive for "
                    f"modulus {self.spec.modulus:#x} (cycle at power {i})"
                )
            exp[i] = x
            log[x] = i
            x = self.mul_schoolbook(x, self.spec.generator)
        if x != 1:
            # A reducible modulus collapses the multiplicative group.
            raise FieldConstructionError(
                f"modulus {self.spec.modulus:#x} is reducible or generator "
                f"{self.spec.generator} is not primitive"
            )
        return exp, log

    # -- operations ----------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        n = self.order - 1
        return self._exp[(self._log[a] + self._log[b]) % n]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        n = self.order - 1
        return self._exp[(n - self._log[a]) % n]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        n = self.order - 1
        return self._exp[(self._log[a] * e) % n]

    @property
    def exp_table(self) -> tuple[int, ...]:
        return tuple(self._exp)

    @property
    def log_table(self) -> dict[int, int]:
        return {v: self._log[v] for v in range(1, self.order)}


@lru_cache(maxsize=None)
def field(spec: FieldSpec) -> GF:
    """Shared GF instance per spec; tables are immutable once built."""
    return GF(spec)


def gf_add(a: Symbol, b: Symbol) -> Symbol:
    return a + b


def gf_mul(a: Symbol, b: Symbol) -> Symbol:
    return a * b


def gf_inv(a: Symbol) -> Symbol:
    return a.inverse()
