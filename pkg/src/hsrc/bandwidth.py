"""Repair traffic model for HSRC versus erasure codes and MSR regenerating codes.

All quantities are in units of one fragment (``B/k``) and are computed as
exact fractions.  Below ``(n+1)/2`` available fragments the expected
download count is only bounded from above; results carry that flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence


class RgcInfeasible(ValueError):
    pass


def diversity(n: int) -> int:
    """Number of mutually exclusive repair pairs per fragment, ``(n-1)/2``."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"diversity needs odd n = q^e - 1, got n={n}")
    return (n - 1) // 2


def pair_probability(x: int, n: int) -> Fraction:
    """``p_2 = 1 - (1 - (x/n)^2)^delta``: some pair fully available.

    Treats the two members of each pair as independently available with
    probability ``x/n``, i.e. sampling with replacement.
    """
    return 1 - (1 - Fraction(x, n) ** 2) ** diversity(n)


def exact_pair_probability(x: int, n: int) -> Fraction:
    """Exact chance that a missing fragment has an available pair when ``x``
    of the other ``n - 1`` fragments are available uniformly at random.

    Inclusion-exclusion over the ``delta`` disjoint pairs.
    """
    delta = diversity(n)
    others = n - 1
    if not 0 <= x <= others:
        raise ValueError(f"x={x} outside 0..{others}")
    total = math.comb(others, x)
    hit = 0
    for j in range(1, delta + 1):
        if 2 * j > x:
            break
        hit += (-1) ** (j + 1) * math.comb(delta, j) * math.comb(others - 2 * j, x - 2 * j)
    return Fraction(hit, total)


class DownloadEstimate(NamedTuple):
    value: Fraction
    exact: bool


def expected_downloads(x: int, n: int, k: int) -> DownloadEstimate:
    """``D_x``: 2 once ``x >= (n+1)/2``; otherwise the bound ``2 p_2 + k (1 - p_2)``."""
    if not 0 <= x <= n:
        raise ValueError(f"x={x} outside 0..{n}")
    if 2 * x >= n + 1:
        return DownloadEstimate(Fraction(2), True)
    p2 = pair_probability(x, n)
    return DownloadEstimate(2 * p2 + k * (1 - p2), False)


class AggregateCosts(NamedTuple):
    prl: Fraction
    seq: Fraction


def sequential_cost(x: int, n: int, k: int, upper: int | None = None) -> Fraction:
    """``sum(D_i for i in x..upper)``; ``upper`` defaults to ``n`` as printed."""
    upper = n if upper is None else upper
    return sum((expected_downloads(i, n, k).value for i in range(x, upper + 1)), Fraction(0))


def aggregate_costs(x: int, n: int, k: int) -> AggregateCosts:
    """Total downloads to rebuild all ``n - x`` missing fragments, in parallel
    (``(n - x) D_x``) and sequentially (``sum_{i=x}^{n} D_i``)."""
    if not 0 <= x <= n:
        raise ValueError(f"x={x} outside 0..{n}")
    return AggregateCosts((n - x) * expected_downloads(x, n, k).value, sequential_cost(x, n, k))


class StrategyTotals(NamedTuple):
    egr: int
    eclazy: int
    x_c: int


def strategy_totals(n: int, k: int, x_th: int) -> StrategyTotals:
    """Eager pair repair ``2(n - x_th)``, lazy EC ``k + n - x_th - 1`` and the
    crossover threshold ``x_c = n + 1 - k``."""
    if not k <= x_th <= n:
        raise ValueError(f"x_th={x_th} outside {k}..{n}")
    return StrategyTotals(2 * (n - x_th), k + n - x_th - 1, n + 1 - k)


@dataclass(frozen=True)
class RgcPoint:
    alpha: Fraction
    beta: Fraction
    beta_coop: Fraction
    d_contact: int
    t_coop: int

    @property
    def repair_bandwidth(self) -> Fraction:
        """Download from live nodes for one repair, ``d * beta``."""
        return self.d_contact * self.beta


def rgc_baselines(B, k: int, d_contact: int, t_coop: int = 1) -> RgcPoint:
    """Minimum-storage point of (collaborative) regenerating codes.

    ``beta = B / (k (d - k + t))``; ``t = 1`` is the classical MSR point.
    """
    if d_contact < k:
        raise RgcInfeasible(f"regeneration needs d >= k live nodes (d={d_contact}, k={k})")
    if t_coop < 1:
        raise ValueError("t_coop must be >= 1")
    B = Fraction(B)
    beta = B / (k * (d_contact - k + t_coop))
    return RgcPoint(B / k, beta, beta, d_contact, t_coop)


def traffic_table(
    n: int,
    k: int,
    d_contacts: Sequence[int] = (),
    open_sequential: bool = False,
) -> list[dict[str, object]]:
    """Per-lost-fragment traffic for each lazy threshold ``k <= x_th < n``.

    Columns are fractions of ``B/k``.  ``is_bound`` marks rows where the
    parallel and sequential figures rest on the ``D_x`` upper bound.
    ``open_sequential`` adds ``gamma_seq_open`` with the sum stopping at
    ``n - 1``.
    """
    rows = []
    for x_th in range(k, n):
        missing = n - x_th
        costs = aggregate_costs(x_th, n, k)
        totals = strategy_totals(n, k, x_th)
        row: dict[str, object] = {
            "x_th": x_th,
            "gamma_egr": Fraction(totals.egr, missing),
            "gamma_prl": costs.prl / missing,
            "gamma_seq": costs.seq / missing,
            "gamma_eclazy": Fraction(totals.eclazy, missing),
        }
        for d in d_contacts:
            point = rgc_baselines(k, k, d)
            row[f"gamma_msrgc_d{d}"] = point.repair_bandwidth / point.alpha
        if open_sequential:
            row["gamma_seq_open"] = sequential_cost(x_th, n, k, n - 1) / missing
        row["is_bound"] = int(not expected_downloads(x_th, n, k).exact)
        rows.append(row)
    return rows
