"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from gsleepy.conditions import GENERAL_IDS, check_m3, check_recommended
from gsleepy.core import (
    PolicyParams,
    busy_intervals_disjoint,
    dumps,
    scale_instance,
    trace_to_dict,
)
from gsleepy.engine import simulate
from gsleepy.instances import RandomSpec, f_case2, gen_case1, gen_case2, gen_one_one_two, gen_random
from gsleepy.metrics import Profile, check_leftover, check_waste_bound, extended_work, idle_violations
from gsleepy.opt import brute_force_opt, exact_opt
from gsleepy.policies import POLICY_NAMES, by_name, gsleepy, lpt, sleepy_two
from gsleepy.stress import SIZE_DISTRIBUTIONS, run_stress

TAU = 1e-9


@contextmanager
def criterion(label: str, budget_s: float):
    """Record PASS/FAIL for one criterion, including its runtime budget."""
    t0 = time.perf_counter()
    detail: dict = {}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  {label}: {type(exc).__name__}: {exc}".splitlines()[0])
        raise
    elapsed = time.perf_counter() - t0
    info = " ".join(f"{k}={v}" for k, v in detail.items())
    ok = elapsed < budget_s
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {info} runtime={elapsed:.2f}s (budget {budget_s:g}s)")
    assert ok, f"runtime {elapsed:.1f}s exceeds {budget_s}s"


def _random_instance(seed: int, i: int, n_max: int, m_choices=(1, 2, 3, 4, 6)):
    rng = np.random.default_rng([seed, i])
    m = int(rng.choice(m_choices))
    n = int(rng.integers(1, n_max + 1))
    dist = SIZE_DISTRIBUTIONS[int(rng.integers(len(SIZE_DISTRIBUTIONS)))]
    span = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
    grid = 0.1 if rng.random() < 0.3 else None
    return gen_random(RandomSpec(int(rng.integers(2**63)), n, m, span, dist, grid))


def test_c01_one_one_two_tightness():
    with criterion("C1 one-one-two LPT ratio in [1.499, 1.5] for m=2,3,4", 1) as d:
        for m in (2, 3, 4):
            inst = gen_one_one_two(m, 1e-6)
            opt = exact_opt(inst)
            r = simulate(inst, lpt()).makespan / opt.value
            assert opt.exact and opt.value == pytest.approx(2 + 1e-6, abs=TAU)
            assert abs(r - 3 / (2 + 1e-6)) <= 1e-9
            assert 1.499 <= r <= 1.5
            d[f"m{m}"] = f"{r:.9f}"


def test_c02_sleepy_two_bound():
    bound = (5 - math.sqrt(5)) / 2
    with criterion("C2 sleepy2 m=2 worst certified ratio <= (5-sqrt5)/2 + 1e-6", 300) as d:
        rep = run_stress(["sleepy2"], 2, n_max=8, trials=10_000, seed=2024)
        st = rep.per_policy["sleepy2"]
        d.update(trials=rep.trials, worst=f"{st.worst_ratio:.9f}", label=st.worst_label, uncertified=st.uncertified)
        assert st.uncertified == 0
        assert st.worst_ratio <= bound + 1e-6


def test_c03_m3_static_bound():
    with criterion("C3 gsleepy-static m=3 worst certified ratio <= 1.482 + 1e-6", 300) as d:
        assert gsleepy(3, False) == PolicyParams(0.07066)
        rep = run_stress(["gsleepy-static"], 3, n_max=8, trials=10_000, seed=2024)
        st = rep.per_policy["gsleepy-static"]
        d.update(trials=rep.trials, worst=f"{st.worst_ratio:.9f}", label=st.worst_label, uncertified=st.uncertified)
        assert st.uncertified == 0
        assert st.worst_ratio <= 1.482 + 1e-6


def test_c04_case1_hardness():
    with criterion("C4 case1 m=6 alpha=0.25 static makespan 2.25, OPT 1", 1) as d:
        inst = gen_case1(6)
        alg = simulate(inst, PolicyParams(0.25)).makespan
        opt = exact_opt(inst)
        d.update(alg=alg, opt=opt.value)
        assert abs(alg - 2.25) <= TAU
        assert opt.exact and abs(opt.value - 1) <= TAU
        assert alg / opt.value >= 1.5


def test_c05_case2_hardness():
    with criterion("C5 case2 m=6 alpha=0.1 eps=1e-9 static makespan f(0.1), ratio > 1.5; f >= 1.5 on [0, 0.1]", 10) as d:
        inst = gen_case2(6, 0.1, 1e-9)
        alg = simulate(inst, PolicyParams(0.1)).makespan
        f = f_case2(0.1)
        opt = exact_opt(inst)
        d.update(alg=f"{alg:.9f}", f=f"{f:.9f}", opt=f"{opt.value:.10f}")
        assert abs(alg / f - 1) <= 1e-7
        assert opt.exact and abs(opt.value - (1 + 1e-9)) <= TAU
        assert alg / opt.value > 1.5
        fmin = min(f_case2(float(a)) for a in np.linspace(0.0, 0.1, 10_000))
        d["min_f"] = f"{fmin:.12f}"
        assert fmin >= 1.5 - 1e-12


def test_c06_dynamic_contrast():
    with criterion("C6 gsleepy-dynamic(6) on case2 certified ratio < 1.5", 1) as d:
        inst = gen_case2(6, 0.1, 1e-9)
        alg = simulate(inst, gsleepy(6, True)).makespan
        opt = exact_opt(inst)
        d.update(ratio=f"{alg / opt.value:.9f}")
        assert opt.exact and alg / opt.value < 1.5


def test_c07_conditions():
    with criterion("C7 conditions 1-15 for m=4..1000 and m=3 list at (0.07066, 0.4817)", 10) as d:
        failing = [m for m in range(4, 1001) if not check_recommended(m).all_pass(GENERAL_IDS)]
        m3 = check_m3("0.07066", "0.4817")
        d.update(general_failures=len(failing), m3_failed=",".join(m3.failed()) or "none")
        assert not failing
        assert len(m3.conditions) == 10 and m3.all_pass()


def test_c08_waste_bound():
    with criterion("C8 waste bound on 1000 random instances, all breakpoint subintervals", 120) as d:
        violations = checked = 0
        for i in range(1000):
            inst = _random_instance(8, i, 8)
            name = POLICY_NAMES[i % len(POLICY_NAMES)]
            trace = simulate(inst, by_name(name, inst.m))
            prof = Profile(trace)
            pts = prof.points
            for a in range(len(pts)):
                for b in range(a + 1, len(pts)):
                    checked += 1
                    if not check_waste_bound(trace, pts[a], pts[b], prof).ok:
                        violations += 1
        d.update(subintervals=checked, violations=violations)
        assert violations == 0


def test_c09_leftover():
    with criterion("C9 left-over inequality on 500 random instances (n<=10, exact OPT)", 600) as d:
        violations = checked = 0
        for i in range(500):
            inst = _random_instance(9, i, 10, m_choices=(1, 2, 3, 4))
            opt = exact_opt(inst)
            assert opt.exact
            name = POLICY_NAMES[i % len(POLICY_NAMES)]
            res = check_leftover(simulate(inst, by_name(name, inst.m)), opt.trace)
            checked += res.checked
            violations += not res.ok
        d.update(breakpoints=checked, violations=violations)
        assert violations == 0


def test_c10_oracle_equivalence():
    with criterion("C10 exact_opt equals brute force on 1000 instances (n<=8, m<=4)", 300) as d:
        worst = 0.0
        for i in range(1000):
            inst = _random_instance(10, i, 8, m_choices=(1, 2, 3, 4))
            res = exact_opt(inst)
            assert res.exact
            worst = max(worst, abs(res.value - brute_force_opt(inst)))
        d.update(max_abs_deviation=worst)
        assert worst <= TAU


def test_c11_properties():
    with criterion("C11 scale invariance, no-idle, disjointness, determinism on 200 instances", 120) as d:
        runs = 0
        for i in range(200):
            inst = _random_instance(11, i, 8)
            for name in POLICY_NAMES:
                params = by_name(name, inst.m)
                trace = simulate(inst, params)
                for c in (0.5, 3.0):
                    scaled = simulate(scale_instance(inst, c), params).makespan
                    assert abs(scaled - c * trace.makespan) <= TAU * max(1.0, c * trace.makespan)
                assert idle_violations(trace) == []
                assert busy_intervals_disjoint(trace)
                assert dumps(trace_to_dict(trace)) == dumps(trace_to_dict(simulate(inst, params)))
                runs += 1
        d.update(policy_runs=runs)


def test_note_dynamic_never_reaches_one_and_a_half():
    with criterion("Note gsleepy-dynamic m=4,5,6 (n<=8) never certifies ratio >= 1.5", 300) as d:
        for m in (4, 5, 6):
            rep = run_stress(["gsleepy-dynamic"], m, n_max=8, trials=2000, seed=77)
            st = rep.per_policy["gsleepy-dynamic"]
            d[f"m{m}"] = f"{st.worst_ratio:.6f}"
            assert st.uncertified == 0
            assert st.worst_ratio < 1.5
