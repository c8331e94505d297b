"""HSRC(n, k): encoding by weakly linearized polynomials, pair repair, decoding.

An object of ``M`` base-field symbols is split into ``k`` coefficients
``p_0 .. p_{k-1}`` of ``F_{q^d}`` (``d = M/k``) and encoded as the values of

    p(X) = p_0 X + p_1 X^q + ... + p_{k-1} X^{q^(k-1)}

at the ``n = q^e - 1`` nonzero points of the ``F_q``-span of
``{1, w, ..., w^(e-1)}``.  Since ``p`` is ``F_q``-linear, the value at
``u*beta + v*gamma`` is ``u*p(beta) + v*p(gamma)``, which is what makes
two-fragment repair possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .galois import MAX_DEGREE, FieldElement, FieldSpec, SubspaceBasis, frobenius_q, get_field


class CodeParameterError(ValueError):
    pass


class RepairInfeasible(Exception):
    pass


class RankDeficientError(ValueError):
    def __init__(self, rank: int, needed: int):
        super().__init__(f"rank deficient: {rank} found, {needed} needed")
        self.rank = rank
        self.needed = needed


class InconsistentFragments(ValueError):
    pass


def log2_exact(q: int) -> int | None:
    if q < 2 or q & (q - 1):
        return None
    return q.bit_length() - 1


def log_exact(value: int, base: int) -> int | None:
    """``e`` with ``base**e == value``, or None."""
    e, acc = 0, 1
    while acc < value:
        acc *= base
        e += 1
    return e if acc == value else None


def validate_shape(q: int, k: int, M: int, n: int) -> tuple[int, int, int]:
    """Check the HSRC parameter bounds; returns ``(t, d, e)``.

    Does not build the field, so it also works for shapes too large for
    the arithmetic backend.
    """
    t = log2_exact(q)
    if t is None:
        raise CodeParameterError(f"q={q} is not a power of 2")
    if k < 2:
        raise CodeParameterError(f"k={k} violates k >= 2")
    if M % k:
        raise CodeParameterError(f"k={k} does not divide M={M}")
    d = M // k
    if k > d:
        raise CodeParameterError(f"k <= M/k violated: k={k}, M/k={d}")
    if n <= k:
        raise CodeParameterError(f"k < n violated: k={k}, n={n}")
    n_max = q**d - 1
    if n > n_max:
        raise CodeParameterError(f"n <= q^(M/k) - 1 violated: n={n}, n_max={n_max}")
    e = log_exact(n + 1, q)
    if e is None:
        raise CodeParameterError(f"n + 1 = {n + 1} is not a power of q={q}")
    return t, d, e


@dataclass(frozen=True)
class CodeParams:
    q: int
    k: int
    M: int
    n: int
    field: FieldSpec
    alphas: tuple[FieldElement, ...]

    @property
    def t(self) -> int:
        return self.field.t

    @property
    def d(self) -> int:
        return self.M // self.k

    @property
    def e(self) -> int:
        return log_exact(self.n + 1, self.q)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {a.value: i for i, a in enumerate(self.alphas, start=1)}

    @property
    def decodable(self) -> bool:
        """Whether the evaluation span (dimension e) can hold k independent points."""
        return self.e >= self.k

    def index_of(self, point: FieldElement) -> int:
        """1-based fragment index of an evaluation point."""
        try:
            return self._index[point.value]
        except KeyError:
            raise CodeParameterError(f"{point!r} is not an evaluation point") from None

    def alpha(self, index: int) -> FieldElement:
        return self.alphas[index - 1]

    def is_point(self, point: FieldElement) -> bool:
        return point.value in self._index

    def __repr__(self) -> str:
        return f"HSRC(n={self.n}, k={self.k}, q={self.q}, M={self.M})"


def new_code(q: int, k: int, M: int, n: int) -> CodeParams:
    t, d, e = validate_shape(q, k, M, n)
    if t * d > MAX_DEGREE:
        raise CodeParameterError(f"field F_{q}^{d} exceeds the supported {MAX_DEGREE} bits")
    field = get_field(t, d)
    # Point i has base-q digits of i as coordinates, lowest digit on 1.
    alphas = []
    for i in range(1, n + 1):
        digits = []
        x = i
        for _ in range(e):
            digits.append(x % q)
            x //= q
        alphas.append(field.from_coordinates(digits))
    return CodeParams(q, k, M, n, field, tuple(alphas))


@dataclass(frozen=True)
class ObjectData:
    """``M`` base-field symbols (ints in ``[0, q)``)."""

    symbols: tuple[int, ...]

    def coefficients(self, code: CodeParams) -> list[FieldElement]:
        if len(self.symbols) != code.M:
            raise CodeParameterError(f"length mismatch: object has {len(self.symbols)} symbols, code needs {code.M}")
        d = code.d
        return [code.field.from_coordinates(self.symbols[i * d:(i + 1) * d]) for i in range(code.k)]

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[FieldElement], code: CodeParams) -> ObjectData:
        symbols: list[int] = []
        for c in coeffs:
            symbols.extend(code.field.coordinates(c))
        return cls(tuple(symbols))

    @classmethod
    def zero(cls, code: CodeParams) -> ObjectData:
        return cls((0,) * code.M)


@dataclass(frozen=True)
class Fragment:
    alpha: FieldElement
    value: FieldElement
    index: int


@dataclass(frozen=True)
class RepairPair:
    """``u*beta + v*gamma`` equals the repaired point."""

    beta: FieldElement
    u: FieldElement
    gamma: FieldElement
    v: FieldElement

    @property
    def target(self) -> FieldElement:
        return self.u * self.beta + self.v * self.gamma

    @property
    def sources(self) -> tuple[FieldElement, FieldElement]:
        return self.beta, self.gamma

    def combine(self, value_beta: FieldElement, value_gamma: FieldElement) -> FieldElement:
        return self.u * value_beta + self.v * value_gamma


def evaluate(coeffs: Sequence[FieldElement], x: FieldElement) -> FieldElement:
    """``sum(coeffs[i] * x**(q**i))``."""
    acc = x.field.zero
    power = x
    for i, c in enumerate(coeffs):
        if i:
            power = frobenius_q(power, 1)
        acc = acc + c * power
    return acc


def encode(o: ObjectData, c: CodeParams) -> list[Fragment]:
    coeffs = o.coefficients(c)
    return [Fragment(a, evaluate(coeffs, a), i) for i, a in enumerate(c.alphas, start=1)]


def repair_pairs(target: FieldElement, available: Iterable[FieldElement], c: CodeParams) -> list[RepairPair]:
    """Every pair of available points that rebuilds ``target``.

    Pairs are deduplicated under swapping (the lower fragment index comes
    first) and sorted by source indices, then by scalar symbols.
    """
    t_idx = c.index_of(target)
    avail = {c.index_of(p) for p in available} - {t_idx}
    f = c.field
    scalars = [f.base_element(s) for s in range(1, c.q)]
    pairs = []
    for bi in sorted(avail):
        beta = c.alpha(bi)
        for u in scalars:
            rest = target - u * beta
            if not rest:
                continue
            for v in scalars:
                gamma = rest / v
                if not c.is_point(gamma):
                    continue
                gi = c.index_of(gamma)
                if gi > bi and gi in avail:
                    pairs.append((bi, gi, f.symbol(u), f.symbol(v), RepairPair(beta, u, gamma, v)))
    pairs.sort(key=lambda p: p[:4])
    return [p[4] for p in pairs]


def repair(
    target: FieldElement,
    available_fragments: Iterable[Fragment],
    c: CodeParams,
    pair: RepairPair | None = None,
) -> Fragment:
    """Rebuild the fragment at ``target`` from two available fragments.

    Uses ``pair`` when given, otherwise the canonically first pair.
    """
    by_value = {fr.alpha.value: fr for fr in available_fragments}
    if pair is None:
        pairs = repair_pairs(target, [c.alpha(fr.index) for fr in by_value.values()], c)
        if not pairs:
            raise RepairInfeasible(f"pair-repair infeasible for fragment {c.index_of(target)}")
        pair = pairs[0]
    elif pair.target != target:
        raise RepairInfeasible("pair does not combine to the target point")
    try:
        vb = by_value[pair.beta.value].value
        vg = by_value[pair.gamma.value].value
    except KeyError:
        raise RepairInfeasible("pair sources are not available") from None
    return Fragment(target, pair.combine(vb, vg), c.index_of(target))


def select_decoding_set(available: Iterable[FieldElement], c: CodeParams) -> list[FieldElement]:
    """Greedy pick, in fragment-index order, of ``k`` independent points."""
    basis = SubspaceBasis(c.field)
    chosen = []
    for idx in sorted({c.index_of(p) for p in available}):
        if basis.add(c.alpha(idx)):
            chosen.append(c.alpha(idx))
            if len(chosen) == c.k:
                return chosen
    raise RankDeficientError(basis.rank, c.k)


def solve(matrix: list[list[FieldElement]], rhs: list[FieldElement]) -> list[FieldElement]:
    """Gauss-Jordan elimination for a square nonsingular system."""
    n = len(matrix)
    a = [row[:] + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise RankDeficientError(col, n)
        a[col], a[pivot] = a[pivot], a[col]
        scale = a[col][col] ** -1
        a[col] = [x * scale for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [row[n] for row in a]


def moore_row(alpha: FieldElement, k: int) -> list[FieldElement]:
    row = [alpha]
    for _ in range(k - 1):
        row.append(frobenius_q(row[-1], 1))
    return row


def decode(fragments: Iterable[Fragment], c: CodeParams) -> ObjectData:
    """Recover the object by solving the k x k system on independent fragments.

    Fragments beyond the chosen k are back-substituted and must agree.
    """
    fragments = list(fragments)
    by_value = {}
    for fr in fragments:
        by_value.setdefault(fr.alpha.value, fr)
    points = select_decoding_set([fr.alpha for fr in by_value.values()], c)
    matrix = [moore_row(p, c.k) for p in points]
    coeffs = solve(matrix, [by_value[p.value].value for p in points])
    chosen = {p.value for p in points}
    for fr in fragments:
        if fr.alpha.value in chosen and fr is by_value[fr.alpha.value]:
            continue
        if evaluate(coeffs, fr.alpha) != fr.value:
            raise InconsistentFragments(f"inconsistent fragments: fragment {fr.index} disagrees")
    return ObjectData.from_coefficients(coeffs, c)


def exclusive_pair_count(target: FieldElement, available: Iterable[FieldElement], c: CodeParams) -> int:
    """Largest number of pairwise disjoint repair pairs for ``target``.

    A maximum matching in the graph whose edges are the repair pairs.  For
    ``q = 2`` the pairs are already disjoint, so this is just their count.
    """
    pairs = repair_pairs(target, available, c)
    if c.q == 2:
        return len(pairs)
    import networkx as nx

    graph = nx.Graph()
    graph.add_edges_from((c.index_of(p.beta), c.index_of(p.gamma)) for p in pairs)
    return len(nx.max_weight_matching(graph, maxcardinality=True))
