"""Parallel pair repair under unit link capacity.

Every live node can upload one fragment per time slot and every repairing
node (one newcomer per missing fragment) can download one.  A repair
finishes in the slot where the second fragment of its pair arrives.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .codec import CodeParams, RepairPair, repair_pairs
from .galois import FieldElement

# Full-copy replenishment and erasure-code repair of the seven-loss
# HSRC(15,3) scenario, in slots; reported for comparison only.
HYBRID_REPLICA_SLOTS = 7
ERASURE_CODE_MIN_SLOTS = 9


@dataclass(frozen=True)
class Transfer:
    slot: int
    target: FieldElement
    source: FieldElement


@dataclass
class RepairTask:
    target: FieldElement
    candidates: list[RepairPair]
    assigned_pair: RepairPair | None = None
    downloads: list[tuple[int, FieldElement]] = field(default_factory=list)

    @property
    def fetched(self) -> set[int]:
        return {s.value for _, s in self.downloads}

    def remaining(self) -> list[FieldElement]:
        if self.assigned_pair is None:
            return []
        got = self.fetched
        return [s for s in self.assigned_pair.sources if s.value not in got]

    @property
    def done(self) -> bool:
        return self.assigned_pair is not None and not self.remaining()


@dataclass
class RepairSchedule:
    code: CodeParams
    transfers: list[Transfer]
    pairs: dict[int, RepairPair | None]
    available: frozenset[int] | None = None
    infeasible: list[FieldElement] = field(default_factory=list)

    @property
    def makespan(self) -> int:
        return max((t.slot for t in self.transfers), default=0)

    @property
    def slots(self) -> list[list[Transfer]]:
        out: list[list[Transfer]] = [[] for _ in range(self.makespan)]
        for t in self.transfers:
            out[t.slot - 1].append(t)
        return out

    def completion_slot(self, target: FieldElement) -> int | None:
        slots = [t.slot for t in self.transfers if t.target == target]
        return max(slots) if len(slots) == 2 else None

    def completed_by(self, slot: int) -> int:
        return sum(1 for v in self.pairs if (c := self.completion_slot(self.code.field(v))) is not None and c <= slot)

    def rows(self) -> list[tuple[int, int, int]]:
        """``(slot, downloader index, uploader index)`` in slot order."""
        idx = self.code.index_of
        return sorted((t.slot, idx(t.target), idx(t.source)) for t in self.transfers)


def _choose_pair(task: RepairTask, load: Counter, c: CodeParams) -> RepairPair:
    got = task.fetched
    options = [p for p in task.candidates if got <= {s.value for s in p.sources}]

    def cost(p: RepairPair):
        new = [s for s in p.sources if s.value not in got]
        loads = [load[s.value] + 1 for s in new]
        return (max(loads, default=0), sum(loads))

    return min(options, key=cost)


def _rebalance(tasks: list[RepairTask], load: Counter, rounds: int = 50) -> None:
    """Best-response moves: a task switches pair while that strictly lowers
    the demand it meets.  Sum of L(L+1)/2 over uploaders strictly drops with
    every move, so this terminates."""
    for _ in range(rounds):
        moved = False
        for t in tasks:
            for s in t.remaining():
                load[s.value] -= 1
            got = t.fetched

            def cost(p: RepairPair) -> int:
                return sum(load[s.value] + 1 for s in p.sources if s.value not in got)

            options = [p for p in t.candidates if got <= {s.value for s in p.sources}]
            best = min(options, key=cost)
            if cost(best) < cost(t.assigned_pair):
                t.assigned_pair = best
                moved = True
            for s in t.remaining():
                load[s.value] += 1
        if not moved:
            return


def _slot_matching(requests: list[tuple[int, list[int]]]) -> dict[int, int]:
    """Maximum matching of tasks to uploaders covering every max-degree vertex.

    Such a matching always exists in a bipartite graph, so each slot lowers
    the largest outstanding demand by one.  Returns uploader -> task.
    """
    demand = Counter(up for _, ups in requests for up in ups)
    top = max([len(ups) for _, ups in requests] + list(demand.values()), default=0)
    big = 4 * (len(requests) + 1)
    graph = nx.Graph()
    for task, ups in requests:
        for up in ups:
            weight = big + (len(ups) == top) + (demand[up] == top)
            graph.add_edge(("task", task), ("up", up), weight=weight)
    owner = {}
    for a, b in nx.max_weight_matching(graph, maxcardinality=True):
        if a[0] == "up":
            a, b = b, a
        owner[b[1]] = a[1]
    return owner


def schedule_repairs(
    missing: Iterable[FieldElement],
    available: Iterable[FieldElement],
    c: CodeParams,
) -> RepairSchedule:
    """Greedy slot-by-slot schedule.

    Each slot, tasks that have not started re-pick the pair whose sources
    carry the least pending demand; then a maximum matching assigns free
    uploaders to repairing nodes, covering every task and uploader that
    still has the largest outstanding demand.
    """
    avail = sorted({c.index_of(p) for p in available})
    missing_idx = sorted({c.index_of(p) for p in missing} - set(avail))
    live = [c.alpha(i) for i in avail]
    tasks: list[RepairTask] = []
    infeasible = []
    for i in missing_idx:
        target = c.alpha(i)
        cands = repair_pairs(target, live, c)
        if cands:
            tasks.append(RepairTask(target, cands))
        else:
            infeasible.append(target)

    transfers: list[Transfer] = []
    slot = 0
    while any(not t.done for t in tasks):
        slot += 1
        load: Counter = Counter()
        started = [t for t in tasks if t.downloads and not t.done]
        fresh = [t for t in tasks if not t.downloads]
        for t in started + fresh:
            t.assigned_pair = _choose_pair(t, load, c)
            for s in t.remaining():
                load[s.value] += 1
        _rebalance(started + fresh, load)
        pending = [(n, t) for n, t in enumerate(tasks) if not t.done]
        pending.sort(key=lambda it: (-len(it[1].remaining()), it[0]))
        requests = []
        for n, t in pending:
            ups = sorted((s.value for s in t.remaining()), key=lambda v: (-load[v], c.index_of(c.field(v))))
            requests.append((n, ups))
        owner = _slot_matching(requests)
        for up, n in sorted(owner.items(), key=lambda it: it[1]):
            task = tasks[n]
            source = c.field(up)
            task.downloads.append((slot, source))
            transfers.append(Transfer(slot, task.target, source))

    pairs = {t.target.value: t.assigned_pair for t in tasks}
    return RepairSchedule(c, transfers, pairs, frozenset(c.alpha(i).value for i in avail), infeasible)


def makespan_lower_bound(missing_count: int, available_count: int) -> int:
    if missing_count == 0:
        return 0
    return max(2, -(-2 * missing_count // available_count))


def schedule_from_table(
    table: Sequence[Mapping[FieldElement, FieldElement | None]],
    c: CodeParams,
    available: Iterable[FieldElement] | None = None,
) -> RepairSchedule:
    """Build a schedule from explicit slot rows ``{target: source}``.

    The pair of each task is inferred from its downloaded sources; tasks
    whose sources form no repair pair keep ``None`` and fail verification.
    """
    transfers = []
    fetched: dict[int, list[FieldElement]] = {}
    for slot, row in enumerate(table, start=1):
        for target, source in row.items():
            fetched.setdefault(target.value, [])
            if source is None:
                continue
            transfers.append(Transfer(slot, target, source))
            fetched[target.value].append(source)
    pairs: dict[int, RepairPair | None] = {}
    for tv, sources in fetched.items():
        target = c.field(tv)
        match = repair_pairs(target, sources, c) if len(sources) == 2 else []
        pairs[tv] = match[0] if match else None
    avail = None if available is None else frozenset(p.value for p in available)
    return RepairSchedule(c, transfers, pairs, avail)


@dataclass(frozen=True)
class ScheduleCheck:
    valid: bool
    violations: list[str]


def verify_schedule(s: RepairSchedule, c: CodeParams) -> ScheduleCheck:
    """Capacity, pair validity and completion checks; violations are returned, not raised."""
    problems: list[str] = []
    idx = c.index_of
    for slot, transfers in enumerate(s.slots, start=1):
        ups = Counter(t.source.value for t in transfers)
        downs = Counter(t.target.value for t in transfers)
        for v, count in sorted(ups.items()):
            if count > 1:
                problems.append(f"uplink capacity exceeded: node {idx(c.field(v))} uploads {count} in slot {slot}")
        for v, count in sorted(downs.items()):
            if count > 1:
                problems.append(f"downlink capacity exceeded: repair of {idx(c.field(v))} downloads {count} in slot {slot}")
    targets = set(s.pairs)
    for t in s.transfers:
        if t.target.value not in targets:
            problems.append(f"transfer to unscheduled target {idx(t.target)}")
        if t.source.value in targets:
            problems.append(f"source {idx(t.source)} is itself missing")
        if s.available is not None and t.source.value not in s.available:
            problems.append(f"source {idx(t.source)} is not available")
    for tv, pair in sorted(s.pairs.items()):
        target = c.field(tv)
        got = sorted(t.source.value for t in s.transfers if t.target.value == tv)
        if pair is None:
            problems.append(f"fragment {idx(target)}: downloads do not form a repair pair")
            continue
        if pair.u * pair.beta + pair.v * pair.gamma != target:
            problems.append(f"fragment {idx(target)}: pair does not sum to the target")
        if got != sorted(x.value for x in pair.sources):
            problems.append(f"fragment {idx(target)}: downloaded {len(got)} fragments, not its pair")
    return ScheduleCheck(not problems, problems)
