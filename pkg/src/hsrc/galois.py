"""Arithmetic in characteristic-2 finite fields.

A :class:`FieldSpec` describes the field with ``2**(t*d)`` elements, viewed
as a degree-``d`` extension of the base field ``F_q`` with ``q = 2**t``.
Elements use a single flat binary-polynomial representation (an ``int``
whose bit ``i`` is the coefficient of ``x**i``) reduced by a primitive
polynomial, so ``w = x`` generates the multiplicative group.

The base field is the subfield generated by ``zeta = w**((2**m - 1)/(q - 1))``
and the fixed ``F_q``-basis of the extension is ``{1, w, ..., w**(d-1)}``.
A base-field symbol is an integer ``s`` in ``[0, q)`` standing for
``sum(bit_a(s) * zeta**a)``; coordinates of an element are the ``d`` symbols
of its expansion in the basis.  For ``q = 2`` coordinates are simply the
bits of the flat representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

MAX_DEGREE = 32
_TABLE_LIMIT = 16

# Exponents of the nonzero terms, highest first.  Every entry is primitive;
# degree 4 is x^4 + x + 1 so that w^4 = w + 1.
PRIMITIVE_POLYNOMIALS: dict[int, tuple[int, ...]] = {
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 10, 6, 1, 0),
    15: (15, 1, 0),
    16: (16, 12, 3, 1, 0),
    17: (17, 3, 0),
    18: (18, 7, 0),
    19: (19, 5, 2, 1, 0),
    20: (20, 3, 0),
    21: (21, 2, 0),
    22: (22, 1, 0),
    23: (23, 5, 0),
    24: (24, 7, 2, 1, 0),
    25: (25, 3, 0),
    26: (26, 6, 2, 1, 0),
    27: (27, 5, 2, 1, 0),
    28: (28, 3, 0),
    29: (29, 2, 0),
    30: (30, 23, 2, 1, 0),
    31: (31, 3, 0),
    32: (32, 22, 2, 1, 0),
}


class FieldError(ValueError):
    """Raised for invalid field construction or mixed-field arithmetic."""


def _poly_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division of a binary polynomial by every polynomial of degree
    1 .. deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    if not poly & 1:
        return False
    # Any factor has a nonzero constant term, since x itself does not divide.
    for divisor in range(3, 1 << (deg // 2 + 1), 2):
        if _poly_mod(poly, divisor) == 0:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return factors


@lru_cache(maxsize=None)
def _check_modulus(modulus: int) -> None:
    m = modulus.bit_length() - 1
    if not is_irreducible(modulus):
        raise FieldError(f"modulus {modulus:#x} is reducible over F_2")
    order = (1 << m) - 1

    def mulmod(a: int, b: int) -> int:
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a >> m:
                a ^= modulus
        return r

    def powmod(e: int) -> int:
        r, a = 1, 2
        while e:
            if e & 1:
                r = mulmod(r, a)
            a = mulmod(a, a)
            e >>= 1
        return r

    if m > 1 and (powmod(order) != 1 or any(powmod(order // p) == 1 for p in _prime_factors(order))):
        raise FieldError(f"x is not a generator modulo {modulus:#x}")


class FieldSpec:
    """The field ``F_{q^d}`` with ``q = 2**t``.

    Instances are interned per ``(t, d)`` by :func:`get_field`; constructing
    one directly validates the modulus (irreducibility and generator
    property), which is cached per modulus.
    """

    def __init__(self, t: int, d: int, modulus: int | None = None):
        if t < 1 or d < 1:
            raise FieldError("t and d must be positive")
        m = t * d
        if m < 2 or m > MAX_DEGREE:
            raise FieldError(f"field degree t*d={m} outside supported range 2..{MAX_DEGREE}")
        if modulus is None:
            modulus = sum(1 << e for e in PRIMITIVE_POLYNOMIALS[m])
        if modulus.bit_length() - 1 != m:
            raise FieldError(f"modulus degree does not match t*d={m}")
        _check_modulus(modulus)
        self.t = t
        self.d = d
        self.m = m
        self.q = 1 << t
        self.size = 1 << m
        self.modulus = modulus
        self._order = self.size - 1
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if m <= _TABLE_LIMIT:
            self._build_tables()
        self.zero = FieldElement(0, self)
        self.one = FieldElement(1, self)
        self.w = FieldElement(2, self)
        self._zeta = self._pow(2, self._order // (self.q - 1)) if t > 1 else 1
        self._zeta_powers = [self._pow(self._zeta, a) for a in range(t)]
        self._build_coordinates()

    # -- raw int arithmetic -------------------------------------------------

    def _build_tables(self) -> None:
        exp = [0] * (2 * self._order)
        log = [0] * self.size
        x = 1
        top = self.size
        for i in range(self._order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & top:
                x ^= self.modulus
        exp[self._order:] = exp[: self._order]
        self._exp, self._log = exp, log

    def _mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        r = 0
        top = self.size
        mod = self.modulus
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= mod
        return r

    def _pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        e %= self._order
        if self._exp is not None:
            return self._exp[(self._log[a] * e) % self._order]
        r = 1
        while e:
            if e & 1:
                r = self._mul(r, a)
            a = self._mul(a, a)
            e >>= 1
        return r

    def _inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        if self._exp is not None:
            return self._exp[(self._order - self._log[a]) % self._order]
        return self._pow(a, self._order - 1)

    # -- coordinates in the F_q-basis {1, w, ..., w^(d-1)} --------------------

    def _build_coordinates(self) -> None:
        t, d, m = self.t, self.d, self.m
        # Column j*t + a of the change of basis is zeta^a * w^j.
        columns = []
        for j in range(d):
            wj = self._pow(2, j)
            for a in range(t):
                columns.append(self._mul(self._zeta_powers[a], wj))
        self._basis_columns = columns
        # Invert over F_2: rows[i] holds which flat bits feed coordinate bit i.
        rows = [sum(((columns[c] >> r) & 1) << c for c in range(m)) for r in range(m)]
        inv = [1 << r for r in range(m)]
        for col in range(m):
            pivot = next(r for r in range(col, m) if (rows[r] >> col) & 1)
            rows[col], rows[pivot] = rows[pivot], rows[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
            for r in range(m):
                if r != col and (rows[r] >> col) & 1:
                    rows[r] ^= rows[col]
                    inv[r] ^= inv[col]
        self._coord_rows = inv
        self._identity_coords = all(c == 1 << i for i, c in enumerate(columns))

    def coordinate_bits(self, value: int) -> int:
        """Flat representation -> packed coordinate bits (symbol j in bits j*t..)."""
        if self._identity_coords:
            return value
        out = 0
        for i, row in enumerate(self._coord_rows):
            if (row & value).bit_count() & 1:
                out |= 1 << i
        return out

    def from_coordinate_bits(self, bits: int) -> int:
        if self._identity_coords:
            return bits
        out = 0
        i = 0
        while bits:
            if bits & 1:
                out ^= self._basis_columns[i]
            bits >>= 1
            i += 1
        return out

    def coordinates(self, x: FieldElement) -> tuple[int, ...]:
        """The ``d`` base-field symbols of ``x`` in the basis ``{1, w, ..., w^(d-1)}``."""
        bits = self.coordinate_bits(self._own(x).value)
        mask = self.q - 1
        return tuple((bits >> (j * self.t)) & mask for j in range(self.d))

    def from_coordinates(self, coords: Sequence[int]) -> FieldElement:
        if len(coords) > self.d:
            raise FieldError(f"expected at most {self.d} coordinates, got {len(coords)}")
        bits = 0
        for j, c in enumerate(coords):
            if not 0 <= c < self.q:
                raise FieldError(f"symbol {c} outside F_{self.q}")
            bits |= c << (j * self.t)
        return FieldElement(self.from_coordinate_bits(bits), self)

    def base_element(self, symbol: int) -> FieldElement:
        """Embed a base-field symbol ``s`` in ``[0, q)`` into this field."""
        if not 0 <= symbol < self.q:
            raise FieldError(f"symbol {symbol} outside F_{self.q}")
        v = 0
        for a in range(self.t):
            if (symbol >> a) & 1:
                v ^= self._zeta_powers[a]
        return FieldElement(v, self)

    def symbol(self, x: FieldElement) -> int:
        """Inverse of :meth:`base_element`; ``x`` must lie in ``F_q``."""
        coords = self.coordinates(x)
        if any(coords[1:]):
            raise FieldError(f"{x!r} is not in the base field F_{self.q}")
        return coords[0]

    def base_field_elements(self) -> list[FieldElement]:
        return [self.base_element(s) for s in range(self.q)]

    # -- element helpers ------------------------------------------------------

    def __call__(self, value: int) -> FieldElement:
        if not 0 <= value < self.size:
            raise FieldError(f"{value} is not a valid element of GF(2^{self.m})")
        return FieldElement(value, self)

    def power(self, j: int) -> FieldElement:
        """``w**j``."""
        return FieldElement(self._pow(2, j), self)

    def elements(self) -> Iterator[FieldElement]:
        for v in range(self.size):
            yield FieldElement(v, self)

    def _own(self, x: FieldElement) -> FieldElement:
        if x.field is not self and x.field != self:
            raise FieldError("field mismatch")
        return x

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return (self.t, self.d, self.modulus) == (other.t, other.d, other.modulus)

    def __hash__(self) -> int:
        return hash((self.t, self.d, self.modulus))

    def __repr__(self) -> str:
        return f"FieldSpec(t={self.t}, d={self.d}, modulus={self.modulus:#x})"


@lru_cache(maxsize=None)
def get_field(t: int, d: int) -> FieldSpec:
    """Interned :class:`FieldSpec` for ``F_{(2^t)^d}`` with the built-in modulus."""
    return FieldSpec(t, d)


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int
    field: FieldSpec

    def _check(self, other: FieldElement) -> FieldSpec:
        f = self.field
        if other.field is not f and other.field != f:
            raise FieldError("field mismatch")
        return f

    def __add__(self, other: FieldElement) -> FieldElement:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return FieldElement(self.value ^ other.value, self._check(other))

    __sub__ = __add__

    def __neg__(self) -> FieldElement:
        return self

    def __mul__(self, other: FieldElement) -> FieldElement:
        if not isinstance(other, FieldElement):
            return NotImplemented
        f = self._check(other)
        return FieldElement(f._mul(self.value, other.value), f)

    def __truediv__(self, other: FieldElement) -> FieldElement:
        if not isinstance(other, FieldElement):
            return NotImplemented
        f = self._check(other)
        return FieldElement(f._mul(self.value, f._inv(other.value)), f)

    def __pow__(self, e: int) -> FieldElement:
        if e < 0:
            return inv(self) ** (-e)
        return FieldElement(self.field._pow(self.value, e), self.field)

    def __bool__(self) -> bool:
        return self.value != 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.value == other.value and (self.field is other.field or self.field == other.field)

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return f"GF(2^{self.field.m})({self.value:#x})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return FieldElement(a.field._inv(a.value), a.field)


def frobenius_q(a: FieldElement, i: int) -> FieldElement:
    """``a ** (q ** i)`` by ``i`` successive q-th powerings."""
    f = a.field
    v = a.value
    for _ in range(i * f.t):
        v = f._mul(v, v)
    return FieldElement(v, f)


class SubspaceBasis:
    """Incrementally maintained echelon basis of an ``F_q``-span.

    Vectors are coordinate tuples in the basis ``{1, w, ..., w^(d-1)}``;
    entries are kept as embedded field values so elimination reuses the
    flat field arithmetic.
    """

    def __init__(self, field: FieldSpec):
        self.field = field
        self._pivots: dict[int, list[int]] = {}
        self._binary = field.t == 1
        self._xor_basis: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self._xor_basis) if self._binary else len(self._pivots)

    def _reduce(self, x: FieldElement) -> int | list[int]:
        f = self.field
        if self._binary:
            v = f.coordinate_bits(f._own(x).value)
            while v:
                top = v.bit_length() - 1
                b = self._xor_basis.get(top)
                if b is None:
                    break
                v ^= b
            return v
        vec = [f.base_element(c).value for c in f.coordinates(x)]
        for col in sorted(self._pivots):
            c = vec[col]
            if c:
                row = self._pivots[col]
                vec = [a ^ f._mul(c, b) for a, b in zip(vec, row)]
        return vec

    def contains(self, x: FieldElement) -> bool:
        r = self._reduce(x)
        return not r if self._binary else not any(r)

    def add(self, x: FieldElement) -> bool:
        """Insert ``x``; returns ``True`` when it was independent of the span."""
        r = self._reduce(x)
        if self._binary:
            if not r:
                return False
            self._xor_basis[r.bit_length() - 1] = r
            return True
        if not any(r):
            return False
        f = self.field
        col = next(i for i, c in enumerate(r) if c)
        scale = f._inv(r[col])
        row = [f._mul(scale, c) for c in r]
        for other in self._pivots.values():
            c = other[col]
            if c:
                for i in range(len(other)):
                    other[i] ^= f._mul(c, row[i])
        self._pivots[col] = row
        return True


def rank_over_base(elements: Iterable[FieldElement], field: FieldSpec | None = None) -> int:
    """Dimension of the ``F_q``-span of ``elements``."""
    elements = list(elements)
    if not elements:
        return 0
    basis = SubspaceBasis(field or elements[0].field)
    for x in elements:
        basis.add(x)
    return basis.rank


def independent_over_base(elements: Sequence[FieldElement]) -> bool:
    """True iff no nontrivial ``F_q``-combination of ``elements`` vanishes.

    More than ``d`` elements are never independent.
    """
    if not elements:
        return True
    f = elements[0].field
    if len(elements) > f.d:
        return False
    basis = SubspaceBasis(f)
    return all(basis.add(x) for x in elements)
