"""Efficiency functionals on traces and structural analysis of the last locking chain.

All interval quantities are integrals of piecewise-constant indicators, so
they are computed exactly from the sorted list of trace breakpoints.
"""

from __future__ import annotations

import bisect
from dataclasses import asdict, dataclass, field

from .core import EVENT_TOL, LOCKED, TAU, InvalidArgument, ScheduleTrace, StartRecord


@dataclass(frozen=True)
class IntervalReport:
    t1: float
    t2: float
    busy_work: float
    waste: float
    extended_work: float


@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float
    ok: bool
    at: float | None = None
    checked: int = 1


@dataclass(frozen=True)
class ChainReport:
    chain: list[int]
    chain_alpha_max: float
    critical_jobs: list[int]
    early: list[int]
    late: list[int]
    gamma: float
    gamma_prime: float
    link_gaps: list[float] = field(default_factory=list)
    theta_plus: float = 0.0

    @property
    def k(self) -> int:
        return len(self.chain)

    def to_dict(self) -> dict:
        return asdict(self)


class Profile:
    """Breakpoint decomposition of a trace.

    For each elementary segment ``[points[i], points[i+1])`` it stores the
    number of busy machines, the number of idle (neither busy nor locked)
    machines and whether some job is pending, plus cumulative busy and
    wasted machine-time at every breakpoint.
    """

    def __init__(self, trace: ScheduleTrace):
        self.trace = trace
        m = trace.instance.m
        recs = trace.by_id()
        jobs = trace.instance.jobs
        pts = {0.0}
        for j in jobs:
            r = recs[j.id]
            pts.update((j.release, r.start, r.completion))
        for machine in trace.locks:
            for a, b in machine:
                pts.update((a, b))
        self.points = sorted(pts)
        self.busy: list[int] = []
        self.idle: list[int] = []
        self.pending: list[bool] = []
        for a in self.points:
            busy_machines = {r.machine for r in trace.starts if r.start <= a < r.completion}
            idle = 0
            for k in range(m):
                if k in busy_machines:
                    continue
                locks = trace.locks[k] if k < len(trace.locks) else ()
                if not any(x <= a < y for x, y in locks):
                    idle += 1
            self.busy.append(len(busy_machines))
            self.idle.append(idle)
            self.pending.append(any(j.release <= a < recs[j.id].start for j in jobs))
        # Segments shorter than the engine's event tolerance are rounding slivers
        # between events the engine treated as simultaneous; nothing waits in them.
        for i in range(len(self.points) - 1):
            if self.points[i + 1] - self.points[i] <= EVENT_TOL:
                self.pending[i] = False
        self.cum_busy = [0.0]
        self.cum_waste = [0.0]
        for i in range(len(self.points) - 1):
            dt = self.points[i + 1] - self.points[i]
            self.cum_busy.append(self.cum_busy[-1] + self.busy[i] * dt)
            wasted = (m - self.busy[i]) if self.pending[i] else 0
            self.cum_waste.append(self.cum_waste[-1] + wasted * dt)

    def _cumulative(self, cum: list[float], rate, t: float) -> float:
        if t <= self.points[0]:
            return 0.0
        i = bisect.bisect_right(self.points, t) - 1
        if i >= len(self.points) - 1:
            return cum[-1]
        return cum[i] + rate(i) * (t - self.points[i])

    def busy_until(self, t: float) -> float:
        return self._cumulative(self.cum_busy, lambda i: self.busy[i], t)

    def waste_until(self, t: float) -> float:
        m = self.trace.instance.m
        return self._cumulative(self.cum_waste, lambda i: (m - self.busy[i]) if self.pending[i] else 0, t)

    def busy_work(self, t1: float, t2: float) -> float:
        _check_interval(t1, t2)
        return self.busy_until(t2) - self.busy_until(t1)

    def waste(self, t1: float, t2: float) -> float:
        _check_interval(t1, t2)
        return self.waste_until(t2) - self.waste_until(t1)

    def segments(self):
        for i in range(len(self.points) - 1):
            yield self.points[i], self.points[i + 1], i


def _check_interval(t1: float, t2: float) -> None:
    if t1 > t2:
        raise InvalidArgument(f"interval start {t1} exceeds end {t2}")


def busy_work(trace: ScheduleTrace, t1: float, t2: float) -> float:
    _check_interval(t1, t2)
    return sum(max(0.0, min(r.completion, t2) - max(r.start, t1)) for r in trace.starts)


def waste(trace: ScheduleTrace, t1: float, t2: float) -> float:
    return Profile(trace).waste(t1, t2)


def extended_work(trace: ScheduleTrace, t1: float, t2: float) -> float:
    _check_interval(t1, t2)
    started = sum(r.completion - r.start for r in trace.starts if t1 <= r.start < t2)
    straddling = sum(r.completion - t1 for r in trace.starts if r.start < t1 < r.completion)
    return started + straddling


def interval_report(trace: ScheduleTrace, t1: float, t2: float, profile: Profile | None = None) -> IntervalReport:
    profile = profile or Profile(trace)
    return IntervalReport(t1, t2, profile.busy_work(t1, t2), profile.waste(t1, t2), extended_work(trace, t1, t2))


def _alpha(trace: ScheduleTrace) -> float:
    return trace.policy.alpha if trace.policy is not None else 0.0


def check_waste_bound(trace: ScheduleTrace, t1: float, t2: float, profile: Profile | None = None) -> CheckResult:
    """Wasted machine-time against ``(m-1) * alpha * extended_work`` on ``[t1, t2)``."""
    profile = profile or Profile(trace)
    lhs = profile.waste(t1, t2)
    rhs = (trace.instance.m - 1) * _alpha(trace) * extended_work(trace, t1, t2)
    return CheckResult(lhs, rhs, lhs <= rhs + TAU)


def check_waste_bound_all(trace: ScheduleTrace) -> CheckResult:
    """Waste bound on every subinterval whose endpoints are breakpoints; reports the tightest."""
    profile = Profile(trace)
    pts = profile.points
    worst: CheckResult | None = None
    count = 0
    for i, t1 in enumerate(pts):
        for t2 in pts[i + 1:]:
            res = check_waste_bound(trace, t1, t2, profile)
            count += 1
            if worst is None or res.lhs - res.rhs > worst.lhs - worst.rhs:
                worst = CheckResult(res.lhs, res.rhs, res.ok, t1)
    if worst is None:
        return CheckResult(0.0, 0.0, True, 0.0, 0)
    return CheckResult(worst.lhs, worst.rhs, worst.ok, worst.at, count)


def check_leftover(alg_trace: ScheduleTrace, opt_trace: ScheduleTrace, t: float | None = None) -> CheckResult:
    """Left-over inequality ``P_opt(0,x) - P_alg(0,x) <= m x / 4 + W_alg(0,x)`` at every breakpoint ``x <= t``.

    Returns the breakpoint with the smallest slack.
    """
    if alg_trace.instance != opt_trace.instance:
        raise InvalidArgument("traces belong to different instances")
    if t is None:
        t = max(alg_trace.makespan, opt_trace.makespan)
    if t < 0:
        raise InvalidArgument(f"time must be non-negative, got {t}")
    alg, opt = Profile(alg_trace), Profile(opt_trace)
    m = alg_trace.instance.m
    xs = sorted({x for x in alg.points + opt.points if x <= t} | {t})
    worst: CheckResult | None = None
    for x in xs:
        lhs = opt.busy_until(x) - alg.busy_until(x)
        rhs = m * x / 4 + alg.waste_until(x)
        if worst is None or lhs - rhs > worst.lhs - worst.rhs:
            worst = CheckResult(lhs, rhs, lhs <= rhs + TAU, x)
    return CheckResult(worst.lhs, worst.rhs, worst.ok, worst.at, len(xs))


def idle_violations(trace: ScheduleTrace, profile: Profile | None = None) -> list[tuple[int, float]]:
    """Jobs that waited while some machine was neither busy nor locked, with the segment start."""
    profile = profile or Profile(trace)
    recs = trace.by_id()
    out = []
    for j in trace.instance.jobs:
        s = recs[j.id].start
        for a, b, i in profile.segments():
            if a >= j.release and b <= s and b - a > TAU and profile.idle[i] > 0:
                out.append((j.id, a))
                break
    return out


def last_job(trace: ScheduleTrace) -> StartRecord:
    return max(trace.starts, key=lambda r: (r.completion, r.start, r.job_id))


def theta_plus(trace: ScheduleTrace, before: float, profile: Profile | None = None) -> float:
    """End of the last period before ``before`` in which some machine was idle (0 if none)."""
    profile = profile or Profile(trace)
    end = 0.0
    for a, b, i in profile.segments():
        if a >= before:
            break
        if profile.idle[i] > 0 and min(b, before) - a > TAU:
            end = min(b, before)
    return end


def extract_chain(trace: ScheduleTrace, gamma: float | None = None) -> ChainReport:
    if gamma is None:
        from .policies import target_gamma

        gamma = target_gamma(trace.instance.m)
    recs = trace.by_id()
    last = last_job(trace)
    chain = [last]
    while chain[-1].reason.tag == LOCKED and chain[-1].reason.by is not None:
        chain.append(recs[chain[-1].reason.by])
    tail = chain[-1]
    alpha_f = max(r.alpha_j for r in chain)
    gaps = [a.start - b.start for a, b in zip(chain, chain[1:])]
    ids = [r.job_id for r in chain]
    # Jobs in process just before the chain's first job starts: they hold the machines.
    holders = [
        r.job_id for r in trace.starts
        if r.job_id not in ids and r.start < tail.start - TAU and r.completion >= tail.start - TAU
    ]
    critical = ids + sorted(holders)
    r_n = trace.instance.job(last.job_id).release
    early = [j for j in critical if recs[j].start < r_n]
    late = [j for j in critical if recs[j].start >= r_n]
    gamma_prime = gamma - alpha_f * sum(r.completion - r.start for r in chain[1:])
    return ChainReport(
        chain=ids,
        chain_alpha_max=alpha_f,
        critical_jobs=critical,
        early=early,
        late=late,
        gamma=gamma,
        gamma_prime=gamma_prime,
        link_gaps=gaps,
        theta_plus=theta_plus(trace, last.start),
    )


def chain_links_ok(trace: ScheduleTrace, report: ChainReport, tol: float = TAU) -> bool:
    recs = trace.by_id()
    for newer, older in zip(report.chain, report.chain[1:]):
        o = recs[older]
        if abs(recs[newer].start - (o.start + o.alpha_j * (o.completion - o.start))) > tol:
            return False
    return True


def p_n_lower_bound(m: int, alpha: float, gamma: float) -> float | None:
    """Lower bound on the last job's size (in units of the optimum) for a minimal counterexample."""
    den = 0.75 * m - 1 - (m - 1) * alpha
    if den <= 0:
        return None
    return (m * gamma - m / 4 - m * (m - 1) * alpha) / den


@dataclass(frozen=True)
class Diagnosis:
    triggered: bool
    ratio: float
    items: dict[str, dict] = field(default_factory=dict)
    flagged: list[str] = field(default_factory=list)
    message: str = ""


def diagnose_counterexample(alg_trace: ScheduleTrace, opt_value: float, gamma: float) -> Diagnosis:
    ratio = alg_trace.makespan / opt_value
    if alg_trace.makespan <= (1 + gamma) * opt_value + TAU:
        return Diagnosis(False, ratio, message="no violation; diagnostics skipped")
    last = last_job(alg_trace)
    r_n = alg_trace.instance.job(last.job_id).release
    p_n = last.completion - last.start
    items: dict[str, dict] = {}
    delay = last.start - r_n
    items["delay"] = {"ok": delay > gamma * opt_value, "value": delay, "bound": gamma * opt_value}
    idle = idle_violations(alg_trace)
    items["no_idle"] = {"ok": not idle, "violations": idle}
    bound = p_n_lower_bound(alg_trace.instance.m, _alpha(alg_trace), gamma)
    if bound is None:
        items["p_n_bound"] = {"ok": True, "applicable": False}
    else:
        items["p_n_bound"] = {"ok": p_n / opt_value > bound, "value": p_n / opt_value, "bound": bound}
    flagged = [name for name, item in items.items() if not item["ok"]]
    msg = "ratio exceeds target; all diagnostics hold" if not flagged else "inconsistent trace: " + ", ".join(flagged)
    return Diagnosis(True, ratio, items, flagged, msg)
