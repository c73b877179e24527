"""Seeded ratio stress tests against the exact optimum.

Each trial draws its instance from ``numpy.random.default_rng([seed, trial])``,
so a trial can be replayed on its own and results do not depend on how
trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import policies
from .core import Instance, PolicyParams
from .engine import simulate
from .instances import DEFAULT_EPS, RandomSpec, gen_case1, gen_case2, gen_one_one_two, gen_random, perturb
from .opt import DEFAULT_NODE_BUDGET, exact_opt, lower_bound

SIZE_DISTRIBUTIONS = (
    ("uniform", 0.1, 1.0),
    ("geometric", 0.5, 4),
    ("two-class", 0.3, 1.0, 0.5),
    ("uniform", 0.5, 1.0),
)
RELEASE_SPANS = (0.0, 0.5, 1.0, 2.0)


def hard_families(m: int) -> list[tuple[str, Instance]]:
    fams = [(f"one-one-two(m={m})", gen_one_one_two(m))] if m >= 2 else []
    if m >= 2:
        fams.append((f"case1(m={m})", gen_case1(m)))
    if m >= 6:
        for a in (1 / (4 * m * m), 0.9 / (2 * (m - 1))):
            fams.append((f"case2(m={m},alpha={a:.6g})", gen_case2(m, a)))
    return fams


def pool_instance(seed: int, trial: int, m: int, n_max: int, trials: int, eps: float = DEFAULT_EPS) -> tuple[str, Instance]:
    """Trial ``trial`` of the pool: random instances first, hard families (exact, then jittered) after."""
    rng = np.random.default_rng([seed, trial])
    if trial < trials:
        n = int(rng.integers(1, n_max + 1))
        dist = SIZE_DISTRIBUTIONS[int(rng.integers(len(SIZE_DISTRIBUTIONS)))]
        span = RELEASE_SPANS[int(rng.integers(len(RELEASE_SPANS)))]
        grid = 0.1 if rng.random() < 0.3 else None
        spec = RandomSpec(int(rng.integers(2**63)), n, m, span, dist, grid)
        return f"random(n={n},dist={dist[0]},span={span},grid={grid})", gen_random(spec)
    fams = hard_families(m)
    if not fams:
        spec = RandomSpec(int(rng.integers(2**63)), int(rng.integers(1, n_max + 1)), m)
        return "random", gen_random(spec)
    k = trial - trials
    label, inst = fams[k % len(fams)]
    if k < len(fams):
        return label, inst
    return label + "+jitter", perturb(inst, eps, rng)


@dataclass
class PolicyStats:
    name: str
    params: PolicyParams
    worst_ratio: float = 0.0
    worst_trial: int | None = None
    worst_label: str = ""
    certified: int = 0
    uncertified: int = 0
    worst_bound: float = 0.0


@dataclass
class StressReport:
    trials: int
    worst_ratio: float
    worst_instance: Instance | None
    worst_trial: int | None
    certified_count: int
    per_policy: dict[str, PolicyStats] = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["trial", "label", "n", "policy", "alg", "opt", "ratio", "certified"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: row[c] for c in cols})
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "worst_ratio": self.worst_ratio,
            "worst_trial": self.worst_trial,
            "certified_count": self.certified_count,
            "policies": {
                name: {
                    "alpha": st.params.alpha,
                    "lambda": st.params.lam,
                    "worst_ratio": st.worst_ratio,
                    "worst_trial": st.worst_trial,
                    "worst_label": st.worst_label,
                    "certified": st.certified,
                    "uncertified": st.uncertified,
                    "worst_ratio_upper_bound": st.worst_bound,
                }
                for name, st in self.per_policy.items()
            },
        }


def _run_trial(args) -> list[dict]:
    trial, seed, m, n_max, trials, named, node_budget, lb_only = args
    label, inst = pool_instance(seed, trial, m, n_max, trials)
    if lb_only:
        opt_value, exact = lower_bound(inst), False
    else:
        res = exact_opt(inst, node_budget)
        opt_value, exact = res.value, res.exact
    rows = []
    for name, params in named:
        alg = simulate(inst, params).makespan
        rows.append({
            "trial": trial, "label": label, "n": inst.n, "policy": name,
            "alg": alg, "opt": opt_value, "ratio": alg / opt_value, "certified": exact,
        })
    return rows


def run_stress(
    policy_names: list[str],
    m: int,
    n_max: int = 8,
    trials: int = 1000,
    seed: int = 0,
    node_budget: int = DEFAULT_NODE_BUDGET,
    lower_bound_only: bool = False,
    workers: int = 1,
    hard: int | None = None,
    overrides: dict[str, PolicyParams] | None = None,
) -> StressReport:
    """Run ``trials`` random instances plus ``hard`` hard-family instances for every policy."""
    overrides = overrides or {}
    named = [(name, overrides.get(name) or policies.by_name(name, m)) for name in policy_names]
    if hard is None:
        hard = max(12, trials // 10)
    total = trials + hard
    jobs = [(i, seed, m, n_max, trials, named, node_budget, lower_bound_only) for i in range(total)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            chunks = list(ex.map(_run_trial, jobs, chunksize=max(1, total // (8 * workers))))
    else:
        chunks = [_run_trial(j) for j in jobs]
    rows = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r["trial"], r["policy"]))

    stats = {name: PolicyStats(name, params) for name, params in named}
    worst, worst_trial = 0.0, None
    certified_trials = set()
    for r in rows:
        st = stats[r["policy"]]
        if r["certified"]:
            st.certified += 1
            certified_trials.add(r["trial"])
            if r["ratio"] > st.worst_ratio:
                st.worst_ratio, st.worst_trial, st.worst_label = r["ratio"], r["trial"], r["label"]
            if r["ratio"] > worst:
                worst, worst_trial = r["ratio"], r["trial"]
        else:
            st.uncertified += 1
            st.worst_bound = max(st.worst_bound, r["ratio"])
    worst_inst = None
    if worst_trial is not None:
        worst_inst = pool_instance(seed, worst_trial, m, n_max, trials)[1]
    return StressReport(total, worst, worst_inst, worst_trial, len(certified_trials), stats, rows)
