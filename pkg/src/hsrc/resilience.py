"""Static resilience of HSRC: exact rank counting and object availability.

With ``n = q^d' - 1`` the evaluation points, written in the ``F_q``-basis,
are every nonzero row of ``F_q^{d'}``.  Losing nodes deletes rows; the
object survives iff the remaining rows have rank at least ``k``.
``R(x, d, r)`` counts ordered choices of ``x`` distinct rows with rank
``r``; dividing by ``C(q^d - 1, x) * x!`` gives the fraction ``rho``.

Counts are exact integers and probabilities exact fractions; floats appear
only at the output boundary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .codec import CodeParameterError, log_exact
from .galois import get_field

SHARD_TRIALS = 10_000


class RankTable:
    """Memoized ``R(x, d, r)`` for all ``0 <= x <= q^d - 1``, built bottom-up in x."""

    def __init__(self, q: int, d: int):
        self.q = q
        self.d = d
        self.rows = q**d - 1
        qd = q**d
        # entries[x][r]; the empty selection has rank 0 and is counted once.
        entries = [[0] * (d + 1) for _ in range(self.rows + 1)]
        entries[0][0] = 1
        for x in range(1, self.rows + 1):
            prev = entries[x - 1]
            row = entries[x]
            for r in range(1, min(x, d) + 1):
                # Independent new row, or a dependent one not yet chosen.
                row[r] = prev[r - 1] * (qd - q ** (r - 1))
                if r < x:
                    row[r] += prev[r] * (q**r - x)
        self.entries = entries

    def count(self, x: int, r: int) -> int:
        if not 0 <= x <= self.rows or not 0 <= r <= self.d:
            return 0
        return self.entries[x][r]

    def total(self, x: int) -> int:
        return math.perm(self.rows, x)


@lru_cache(maxsize=64)
def rank_table(q: int, d: int) -> RankTable:
    return RankTable(q, d)


def rank_count(x: int, d: int, r: int, q: int) -> int:
    return rank_table(q, d).count(x, r)


def rho(x: int, d: int, r: int, q: int) -> Fraction:
    """Fraction of x-row selections of the full matrix with rank exactly r."""
    table = rank_table(q, d)
    if not 0 <= x <= table.rows:
        return Fraction(0)
    return Fraction(table.count(x, r), table.total(x))


def rho_x(x: int, d: int, k: int, q: int) -> Fraction:
    """Probability that x random distinct nodes hold rank >= k."""
    return sum((rho(x, d, r, q) for r in range(k, d + 1)), Fraction(0))


@dataclass(frozen=True)
class AvailabilityModel:
    p_node: float
    n: int
    k: int
    q: int = 2

    def __post_init__(self):
        if not 0 <= self.p_node <= 1:
            raise ValueError(f"p_node={self.p_node} outside [0, 1]")
        if log_exact(self.n + 1, self.q) is None:
            raise CodeParameterError(f"n + 1 = {self.n + 1} is not a power of q={self.q}")
        if self.k < 1:
            raise CodeParameterError("k must be positive")

    @property
    def d(self) -> int:
        """Columns left after dropping the constant ones: ``log_q(n + 1)``."""
        return log_exact(self.n + 1, self.q)


def _binomial_pmf_exact(n: int, x: int, p: Fraction) -> Fraction:
    return math.comb(n, x) * p**x * (1 - p) ** (n - x)


def p_obj_hsrc(model: AvailabilityModel, exact: bool = False) -> float | Fraction:
    n, k, q, d = model.n, model.k, model.q, model.d
    if exact:
        p = Fraction(model.p_node)
        return sum(
            (rho_x(x, d, k, q) * _binomial_pmf_exact(n, x, p) for x in range(k, n + 1)),
            Fraction(0),
        )
    p = float(model.p_node)
    total = 0.0
    for x in range(k, n + 1):
        r = float(rho_x(x, d, k, q))
        if r:
            total += r * math.comb(n, x) * p**x * (1.0 - p) ** (n - x)
    return min(total, 1.0)


def p_obj_mds(n: int, k: int, p_node: float, exact: bool = False) -> float | Fraction:
    """Binomial tail: any k of n fragments decode."""
    if exact:
        p = Fraction(p_node)
        return sum((_binomial_pmf_exact(n, i, p) for i in range(k, n + 1)), Fraction(0))
    p = float(p_node)
    return min(sum(math.comb(n, i) * p**i * (1.0 - p) ** (n - i) for i in range(k, n + 1)), 1.0)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int
    successes: int


def _coordinate_matrix(model: AvailabilityModel) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of every evaluation point and the F_q multiplication table."""
    q, e = model.q, model.d
    points = []
    for i in range(1, model.n + 1):
        points.append([(i // q**j) % q for j in range(e)])
    coords = np.array(points, dtype=np.int64).reshape(model.n, e)
    t = log_exact(q, 2)
    base = get_field(t, 1) if t > 1 else get_field(1, 2)
    table = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        ea = base.base_element(a)
        for b in range(q):
            table[a, b] = base.symbol(ea * base.base_element(b))
    return coords, table


def _batch_rank(rows: np.ndarray, mul: np.ndarray, inverse: np.ndarray) -> np.ndarray:
    """Rank over F_q of each matrix in a (batch, rows, cols) symbol array."""
    rows = rows.copy()
    batch, nrows, ncols = rows.shape
    rank = np.zeros(batch, dtype=np.int64)
    live = np.ones((batch, nrows), dtype=bool)
    idx = np.arange(batch)
    for col in range(ncols):
        has = (rows[:, :, col] != 0) & live
        found = has.any(axis=1)
        pivot = np.argmax(has, axis=1)
        prow = rows[idx, pivot]  # (batch, ncols)
        scale = inverse[prow[:, col]]
        prow = mul[scale[:, None], prow]
        prow[~found] = 0
        factors = rows[:, :, col]  # (batch, nrows)
        # Subtract factor * pivot row everywhere (characteristic 2: xor).
        rows ^= mul[factors[:, :, None], prow[:, None, :]]
        live[idx[found], pivot[found]] = False
        rank += found
    return rank


def _simulate_shard(args) -> int:
    seed_seq, size, p_node, coords, mul, inverse, k = args
    rng = np.random.default_rng(seed_seq)
    alive = rng.random((size, coords.shape[0])) < p_node
    rows = np.where(alive[:, :, None], coords[None, :, :], 0)
    return int((_batch_rank(rows, mul, inverse) >= k).sum())


def simulate_p_obj(model: AvailabilityModel, trials: int, seed: int = 0, threads: int = 1) -> MonteCarloEstimate:
    """Sample i.i.d. node availability and test rank >= k on the survivors.

    Trials run in fixed-size shards, each seeded from ``seed`` by
    ``SeedSequence.spawn``, so results do not depend on ``threads``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    coords, mul = _coordinate_matrix(model)
    q = model.q
    inverse = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inverse[a] = int(np.nonzero(mul[a] == 1)[0][0])
    sizes = [SHARD_TRIALS] * (trials // SHARD_TRIALS)
    if trials % SHARD_TRIALS:
        sizes.append(trials % SHARD_TRIALS)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(s, size, model.p_node, coords, mul, inverse, model.k) for s, size in zip(seeds, sizes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            successes = sum(pool.map(_simulate_shard, jobs))
    else:
        successes = sum(map(_simulate_shard, jobs))
    p_hat = successes / trials
    return MonteCarloEstimate(p_hat, math.sqrt(p_hat * (1 - p_hat) / trials), trials, successes)


@dataclass(frozen=True)
class ProfileRow:
    x: int
    rho_x: Fraction
    mds: int


@dataclass(frozen=True)
class RetrievalProfile:
    n: int
    k: int
    q: int
    rows: tuple[ProfileRow, ...]
    decodable_subsets: int

    def row(self, x: int) -> ProfileRow:
        return self.rows[x]


def retrieval_profile(n: int, k: int, q: int = 2) -> RetrievalProfile:
    d = log_exact(n + 1, q)
    if d is None:
        raise CodeParameterError(f"n + 1 = {n + 1} is not a power of q={q}")
    rows = tuple(ProfileRow(x, rho_x(x, d, k, q), int(x >= k)) for x in range(n + 1))
    subsets = math.comb(n, k) * rows[k].rho_x if k <= n else Fraction(0)
    assert subsets.denominator == 1
    return RetrievalProfile(n, k, q, rows, int(subsets))
