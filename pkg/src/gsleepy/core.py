"""Domain types shared by the simulator, the offline solver and the analysis tools.

Times are plain floats. Two event times closer than ``EVENT_TOL`` are treated as
the same instant by the simulator; inequality checks on traces are allowed a
slack of ``TAU``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

TAU = 1e-9
EVENT_TOL = 1e-12

IMMEDIATE = "Immediate"
PUSHED = "Pushed"
LOCKED = "Locked"


class InvalidArgument(ValueError):
    pass


class InvalidInstance(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Job:
    id: int
    release: float
    proc: float


@dataclass(frozen=True)
class Instance:
    m: int
    jobs: tuple[Job, ...]

    def __init__(self, m: int, jobs: Iterable[Job]):
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "jobs", tuple(jobs))

    @property
    def n(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    @classmethod
    def from_pairs(cls, m: int, pairs: Iterable[tuple[float, float]], first_id: int = 1) -> Instance:
        """Build an instance from ``(release, proc)`` pairs, numbering jobs from ``first_id``."""
        return cls(m, [Job(first_id + i, float(r), float(p)) for i, (r, p) in enumerate(pairs)])


@dataclass(frozen=True)
class PolicyParams:
    alpha: float
    lam: float = 1.0

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise InvalidArgument(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.lam < 1:
            raise InvalidArgument(f"lambda must be >= 1, got {self.lam}")

    @property
    def dynamic(self) -> bool:
        return self.lam != 1.0


@dataclass(frozen=True)
class StartReason:
    tag: str
    by: int | None = None

    def __str__(self) -> str:
        return self.tag if self.by is None else f"{self.tag}({self.by})"


@dataclass(frozen=True)
class StartRecord:
    job_id: int
    machine: int
    start: float
    completion: float
    alpha_j: float
    reason: StartReason


@dataclass(frozen=True)
class ScheduleTrace:
    """One complete schedule.

    ``policy`` is ``None`` for offline schedules. ``locks[k]`` lists the
    half-open lock intervals of machine ``k``; every lock covers all machines,
    so the per-machine lists coincide for simulated traces.
    """

    instance: Instance
    policy: PolicyParams | None
    starts: tuple[StartRecord, ...]
    locks: tuple[tuple[tuple[float, float], ...], ...]
    makespan: float = field(default=0.0)

    def record(self, job_id: int) -> StartRecord:
        for rec in self.starts:
            if rec.job_id == job_id:
                return rec
        raise KeyError(job_id)

    def by_id(self) -> dict[int, StartRecord]:
        return {rec.job_id: rec for rec in self.starts}


def validate_instance(inst: Instance) -> list[str]:
    """Return every invariant violation of ``inst``; an empty list means valid."""
    problems = []
    if not isinstance(inst.m, int) or inst.m < 1:
        problems.append(f"machine count must be >= 1, got {inst.m}")
    seen = set()
    for j in inst.jobs:
        if not isinstance(j.id, int) or j.id < 0:
            problems.append(f"job {j.id}: id must be a non-negative integer")
        if j.id in seen:
            problems.append(f"job {j.id}: duplicate id")
        seen.add(j.id)
        if not j.proc > 0:
            problems.append(f"job {j.id}: non-positive processing time {j.proc}")
        if not j.release >= 0:
            problems.append(f"job {j.id}: negative release time {j.release}")
    return problems


def scale_instance(inst: Instance, c: float) -> Instance:
    if not c > 0:
        raise InvalidArgument(f"scale factor must be positive, got {c}")
    return Instance(inst.m, [Job(j.id, j.release * c, j.proc * c) for j in inst.jobs])


def makespan(trace: ScheduleTrace) -> float:
    ids = {rec.job_id for rec in trace.starts}
    missing = [j.id for j in trace.instance.jobs if j.id not in ids]
    if missing or len(trace.starts) != trace.instance.n:
        raise ValueError(f"incomplete trace, missing jobs {missing}")
    return max((rec.completion for rec in trace.starts), default=0.0)


def busy_intervals_disjoint(trace: ScheduleTrace, tol: float = EVENT_TOL) -> bool:
    per_machine: dict[int, list[tuple[float, float]]] = {}
    for rec in trace.starts:
        per_machine.setdefault(rec.machine, []).append((rec.start, rec.completion))
    for spans in per_machine.values():
        spans.sort()
        for (_, c0), (s1, _) in zip(spans, spans[1:]):
            if s1 < c0 - tol:
                return False
    return True


# -- serialization -----------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict[str, Any]:
    return {"m": inst.m, "jobs": [{"id": j.id, "r": j.release, "p": j.proc} for j in inst.jobs]}


def instance_from_dict(data: dict[str, Any]) -> Instance:
    try:
        m = data["m"]
        jobs = [Job(int(d["id"]), float(d["r"]), float(d["p"])) for d in data["jobs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance document: {exc!r}") from exc
    if not isinstance(m, int):
        raise ValueError(f"malformed instance document: m={m!r}")
    return Instance(m, jobs)


def trace_to_dict(trace: ScheduleTrace, include_instance: bool = True) -> dict[str, Any]:
    policy = None
    if trace.policy is not None:
        policy = {"alpha": trace.policy.alpha, "lambda": trace.policy.lam}
    out: dict[str, Any] = {
        "policy": policy,
        "makespan": trace.makespan,
        "starts": [
            {
                "id": r.job_id,
                "machine": r.machine,
                "s": r.start,
                "C": r.completion,
                "alpha_j": r.alpha_j,
                "reason": {"tag": r.reason.tag, "by": r.reason.by},
            }
            for r in trace.starts
        ],
        "locks": [[[a, b] for a, b in machine] for machine in trace.locks],
    }
    if include_instance:
        out["instance"] = instance_to_dict(trace.instance)
    return out


def trace_from_dict(data: dict[str, Any], instance: Instance | None = None) -> ScheduleTrace:
    """Rebuild a trace; ``instance`` is required when the document does not embed one."""
    try:
        embedded = instance_from_dict(data["instance"]) if data.get("instance") else None
        if instance is None:
            instance = embedded
        elif embedded is not None and embedded != instance:
            raise InvalidArgument("trace was produced for a different instance")
        if instance is None:
            raise InvalidArgument("trace carries no instance and none was supplied")
        pol = data.get("policy")
        policy = PolicyParams(float(pol["alpha"]), float(pol["lambda"])) if pol else None
        starts = tuple(
            StartRecord(
                int(d["id"]), int(d["machine"]), float(d["s"]), float(d["C"]), float(d["alpha_j"]),
                StartReason(d["reason"]["tag"], d["reason"]["by"]),
            )
            for d in data["starts"]
        )
        locks = tuple(tuple((float(a), float(b)) for a, b in machine) for machine in data["locks"])
        span = float(data["makespan"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed trace document: {exc!r}") from exc
    ids = {j.id for j in instance.jobs}
    if {r.job_id for r in starts} != ids or len(starts) != len(ids):
        raise InvalidArgument("trace jobs do not match the instance")
    return ScheduleTrace(instance, policy, starts, locks, span)


def dumps(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2) + "\n"
