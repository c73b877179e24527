"""Offline optimum for small instances.

On one machine, running an assigned set in release order without unforced
idling minimises its completion time, so the optimum reduces to choosing a
job-to-machine assignment. ``exact_opt`` searches assignments by branch and
bound; ``brute_force_opt`` enumerates all of them and sequences each machine
by a subset dynamic program over orderings, sharing no code with the former.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .engine import simulate
from .core import (
    EVENT_TOL,
    IMMEDIATE,
    PUSHED,
    InvalidArgument,
    InvalidInstance,
    Instance,
    Job,
    PolicyParams,
    ScheduleTrace,
    StartReason,
    StartRecord,
    validate_instance,
)

DEFAULT_NODE_BUDGET = 10_000_000


@dataclass(frozen=True)
class OptResult:
    value: float
    exact: bool
    trace: ScheduleTrace | None
    nodes_explored: int
    upper: float | None = None


@dataclass(frozen=True)
class RatioResult:
    alg: float
    opt: OptResult
    ratio: float
    certified: bool


def _release_key(j: Job) -> tuple[float, int]:
    return (j.release, j.id)


def single_machine_makespan(jobs: Iterable[Job]) -> float:
    t = 0.0
    for j in sorted(jobs, key=_release_key):
        t = max(t, j.release) + j.proc
    return t


def lower_bound(inst: Instance) -> float:
    jobs = inst.jobs
    if not jobs:
        return 0.0
    best = max(j.release + j.proc for j in jobs)
    for r in sorted({j.release for j in jobs}):
        work = sum(j.proc for j in jobs if j.release >= r)
        best = max(best, r + work / inst.m)
    return best


def _sequence(jobs: list[Job], machine: int) -> list[StartRecord]:
    out = []
    t = 0.0
    prev = None
    for j in sorted(jobs, key=_release_key):
        if j.release >= t - EVENT_TOL or prev is None:
            reason = StartReason(IMMEDIATE)
        else:
            reason = StartReason(PUSHED, prev)
        s = max(t, j.release)
        t = s + j.proc
        out.append(StartRecord(j.id, machine, s, t, 0.0, reason))
        prev = j.id
    return out


def schedule_from_assignment(inst: Instance, groups: list[list[Job]], policy: PolicyParams | None = None) -> ScheduleTrace:
    """Offline trace that runs each group on its own machine in release order."""
    records = []
    for k, group in enumerate(groups):
        records.extend(_sequence(group, k))
    records.sort(key=lambda r: (r.start, r.machine))
    span = max((r.completion for r in records), default=0.0)
    return ScheduleTrace(inst, policy, tuple(records), tuple(() for _ in range(inst.m)), span)


class _Search:
    def __init__(self, inst: Instance, budget: int):
        self.m = inst.m
        self.order = sorted(inst.jobs, key=lambda j: (-j.proc, j.release, j.id))
        self.budget = budget
        self.nodes = 0
        self.root_lb = lower_bound(inst)
        self.loads: list[list[Job]] = [[] for _ in range(self.m)]
        self.comp = [0.0] * self.m
        self.best = float("inf")
        self.best_groups: list[list[Job]] | None = None
        self.exhausted = False

    @staticmethod
    def _with(group: list[Job], job: Job) -> float:
        keys = [_release_key(j) for j in group]
        i = bisect.bisect(keys, _release_key(job))
        return single_machine_makespan(group[:i] + [job] + group[i:])

    def greedy(self) -> None:
        groups: list[list[Job]] = [[] for _ in range(self.m)]
        comp = [0.0] * self.m
        for j in sorted(self.order, key=_release_key):
            k = min(range(self.m), key=lambda i: (max(comp[i], j.release), i))
            groups[k].append(j)
            comp[k] = max(comp[k], j.release) + j.proc
        self.best = max(comp)
        self.best_groups = groups

    def bound(self, depth: int) -> float:
        lb = max(self.root_lb, max(self.comp))
        for j in self.order[depth:]:
            lb = max(lb, min(self._with(self.loads[k], j) for k in range(self.m)))
            if lb >= self.best - EVENT_TOL:
                break
        return lb

    def run(self, depth: int = 0) -> None:
        if self.exhausted or self.best <= self.root_lb + EVENT_TOL:
            return
        self.nodes += 1
        if self.nodes > self.budget:
            self.exhausted = True
            return
        if depth == len(self.order):
            span = max(self.comp)
            if span < self.best - EVENT_TOL:
                self.best = span
                self.best_groups = [list(g) for g in self.loads]
            return
        if self.bound(depth) >= self.best - EVENT_TOL:
            return
        job = self.order[depth]
        opened = False
        children = []
        for k in range(self.m):
            if not self.loads[k]:
                if opened:
                    continue
                opened = True
            children.append((self._with(self.loads[k], job), k))
        children.sort()
        for c, k in children:
            if c >= self.best - EVENT_TOL:
                break
            keys = [_release_key(j) for j in self.loads[k]]
            i = bisect.bisect(keys, _release_key(job))
            self.loads[k].insert(i, job)
            old = self.comp[k]
            self.comp[k] = c
            self.run(depth + 1)
            self.comp[k] = old
            self.loads[k].pop(i)
            if self.exhausted:
                return


def exact_opt(inst: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> OptResult:
    if node_budget <= 0:
        raise InvalidArgument(f"node budget must be positive, got {node_budget}")
    problems = validate_instance(inst)
    if problems:
        raise InvalidInstance(problems)
    if not inst.jobs:
        return OptResult(0.0, True, schedule_from_assignment(inst, [[] for _ in range(inst.m)]), 0, 0.0)
    search = _Search(inst, node_budget)
    search.greedy()
    search.run()
    if search.exhausted:
        return OptResult(search.root_lb, False, None, search.nodes, search.best)
    trace = schedule_from_assignment(inst, search.best_groups)
    return OptResult(trace.makespan, True, trace, search.nodes, trace.makespan)


def _subset_completion(jobs: list[Job]) -> np.ndarray:
    """Minimum completion over all orderings of every subset (bitmask-indexed)."""
    n = len(jobs)
    best = np.full(1 << n, np.inf)
    best[0] = 0.0
    for mask in range(1, 1 << n):
        b = np.inf
        for i in range(n):
            if mask >> i & 1:
                c = max(best[mask ^ (1 << i)], jobs[i].release) + jobs[i].proc
                if c < b:
                    b = c
        best[mask] = b
    return best


def brute_force_opt(inst: Instance) -> float:
    """Optimum by enumerating all ``m ** n`` assignments; use for n <= 8 only."""
    jobs = list(inst.jobs)
    n, m = len(jobs), inst.m
    if n == 0:
        return 0.0
    best = _subset_completion(jobs)
    assign = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64)
    bits = 1 << np.arange(n, dtype=np.int64)
    span = np.zeros(len(assign))
    for k in range(m):
        masks = ((assign == k) * bits).sum(axis=1)
        span = np.maximum(span, best[masks])
    return float(span.min())


def ratio(inst: Instance, params: PolicyParams, node_budget: int = DEFAULT_NODE_BUDGET) -> RatioResult:
    """Algorithm makespan over the optimum, or over a lower bound when uncertified."""
    alg = simulate(inst, params).makespan
    opt = exact_opt(inst, node_budget)
    return RatioResult(alg, opt, alg / opt.value, opt.exact)

