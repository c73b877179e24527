import dataclasses

import pytest
from hypothesis import given

from gsleepy.core import IMMEDIATE, InvalidArgument, Instance, PolicyParams
from gsleepy.engine import simulate
from gsleepy.instances import gen_case1, gen_case2, gen_one_one_two
from gsleepy.metrics import (
    Profile,
    busy_work,
    chain_links_ok,
    check_leftover,
    check_waste_bound,
    check_waste_bound_all,
    diagnose_counterexample,
    extended_work,
    extract_chain,
    idle_violations,
    interval_report,
    p_n_lower_bound,
    theta_plus,
    waste,
)
from gsleepy.opt import exact_opt
from gsleepy.policies import by_name, lpt

from conftest import instances


@pytest.fixture
def oot():
    return simulate(gen_one_one_two(2, 1e-6), lpt())


def test_busy_work(oot):
    assert busy_work(oot, 1.0, 1.0) == 0
    assert busy_work(simulate(Instance.from_pairs(1, [(0, 1)]), lpt()), 0, 1) == 1
    assert busy_work(oot, 0, 3) == pytest.approx(4)
    assert Profile(oot).busy_work(0, 3) == pytest.approx(4)
    with pytest.raises(InvalidArgument):
        busy_work(oot, 2, 1)


def test_waste():
    trace = simulate(Instance.from_pairs(2, [(0, 1), (0, 1)]), PolicyParams(0.3))
    assert waste(trace, 0, 0.3) == pytest.approx(0.3)
    assert waste(trace, 0.3, trace.makespan) == 0
    assert waste(simulate(gen_case1(4), lpt()), 0, 1) == 0


def test_extended_work(oot):
    assert extended_work(oot, 0, oot.makespan) == pytest.approx(4)
    assert extended_work(oot, 1.5, 2.0) == pytest.approx(1.5)
    assert extended_work(oot, 0.5, 1.5) == pytest.approx(3)


def test_interval_report(oot):
    rep = interval_report(oot, 0, 3)
    assert (rep.busy_work, rep.waste, rep.extended_work) == pytest.approx((4, 0, 4))


def test_waste_bound_examples(oot):
    assert check_waste_bound_all(oot).ok
    case2 = simulate(gen_case2(6, 0.1, 1e-6), PolicyParams(0.1))
    res = check_waste_bound(case2, 0, case2.makespan)
    assert res.ok and res.lhs > 0


@given(instances())
def test_waste_bound_property(inst):
    for name in ("sleepy2", "gsleepy-static", "gsleepy-dynamic"):
        assert check_waste_bound_all(simulate(inst, by_name(name, inst.m))).ok


@given(instances(n_max=6))
def test_busy_plus_idle_conservation(inst):
    trace = simulate(inst, by_name("gsleepy-static", inst.m))
    prof = Profile(trace)
    assert prof.busy_work(0, trace.makespan) == pytest.approx(sum(j.proc for j in inst.jobs))
    t = trace.makespan / 3
    assert prof.busy_work(0, t) + prof.busy_work(t, trace.makespan) == pytest.approx(prof.busy_work(0, trace.makespan))
    assert prof.waste(0, t) + prof.waste(t, trace.makespan) == pytest.approx(prof.waste(0, trace.makespan))
    assert prof.busy_work(0, t) == pytest.approx(busy_work(trace, 0, t))


def test_leftover_examples(oot):
    opt = exact_opt(gen_one_one_two(2, 1e-6)).trace
    res = check_leftover(oot, opt, 0.0)
    assert res.ok and res.lhs == 0 and res.rhs == 0
    assert check_leftover(oot, opt).ok
    with pytest.raises(InvalidArgument):
        check_leftover(oot, exact_opt(gen_one_one_two(3)).trace)


@given(instances(n_max=6))
def test_leftover_property(inst):
    opt = exact_opt(inst).trace
    for name in ("lpt", "gsleepy-dynamic"):
        assert check_leftover(simulate(inst, by_name(name, inst.m)), opt).ok


def test_chain_single_job():
    trace = simulate(Instance.from_pairs(2, [(0, 1)]), PolicyParams(0.2))
    rep = extract_chain(trace)
    assert rep.chain == [1] and rep.k == 1
    assert trace.record(1).reason.tag == IMMEDIATE


def test_chain_three_unit_jobs():
    trace = simulate(Instance.from_pairs(3, [(0, 1)] * 3), PolicyParams(0.25))
    rep = extract_chain(trace)
    assert rep.chain == [3, 2, 1] and rep.k == 3
    assert rep.link_gaps == pytest.approx([0.25, 0.25])
    assert chain_links_ok(trace, rep)
    assert rep.gamma_prime == pytest.approx(rep.gamma - 0.25 * 2)


def test_chain_case1():
    trace = simulate(gen_case1(6), PolicyParams(0.25))
    rep = extract_chain(trace, gamma=0.5)
    assert rep.k == 6 and rep.link_gaps == pytest.approx([0.25] * 5)
    assert chain_links_ok(trace, rep)
    assert rep.early == [] and rep.critical_jobs[0] == 6


def test_chain_critical_holders():
    trace = simulate(gen_one_one_two(2, 1e-6), lpt())
    rep = extract_chain(trace)
    assert rep.chain == [3]
    assert rep.critical_jobs == [3, 1, 2]
    assert rep.early == [1, 2] and rep.late == [3]


def test_theta_plus():
    trace = simulate(Instance.from_pairs(1, [(0, 1), (2, 1)]), lpt())
    assert theta_plus(trace, 2.0) == 2.0
    assert theta_plus(trace, 1.0) == 0.0


def test_p_n_lower_bound():
    assert p_n_lower_bound(4, 1 / 64, 0.5) == pytest.approx((2 - 1 - 12 / 64) / (3 - 1 - 3 / 64))
    assert p_n_lower_bound(1, 0.5, 0.5) is None


def test_diagnose_skips_when_within_target(oot):
    diag = diagnose_counterexample(oot, 2 + 1e-6, 0.5)
    assert not diag.triggered and "no violation" in diag.message


def test_diagnose_lpt_one_one_two(oot):
    diag = diagnose_counterexample(oot, 2 + 1e-6, 0.4)
    assert diag.triggered and diag.ratio == pytest.approx(1.5)
    assert diag.items["delay"]["ok"]
    assert diag.items["no_idle"]["ok"]


def test_diagnose_flags_idle_fault(oot):
    # Job 3 pretends to wait until 1.5 although machine 1 is free from 1.0.
    recs = list(oot.starts)
    recs[2] = dataclasses.replace(recs[2], start=1.5, completion=3.5)
    bad = dataclasses.replace(oot, starts=tuple(recs), makespan=3.5)
    assert idle_violations(bad)
    diag = diagnose_counterexample(bad, 2 + 1e-6, 0.4)
    assert "no_idle" in diag.flagged


def test_rounding_sliver_is_not_waste():
    # Job 1 completes at 0.2 + 0.4 = 0.6000000000000001, one ulp after job 3 arrives.
    inst = Instance.from_pairs(2, [(0.2, 0.4), (0.0, 0.1), (0.6, 0.1)])
    trace = simulate(inst, lpt())
    assert trace.record(3).start > 0.6
    assert waste(trace, 0, trace.makespan) == 0
