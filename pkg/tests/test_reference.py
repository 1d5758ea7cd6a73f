import numpy as np
import pytest

import corpus
from helpers import mixed
from mixcover.checks import check_solution, verify_infeasibility
from mixcover.generators import planted_mixed
from mixcover.instances import normalize
from mixcover.mpc import solve_reference
from mixcover.report import Status


def test_one_by_one():
    inst = mixed(1, [(1, [1])], [(1, [1])])
    rep = solve_reference(inst, 0.1)
    assert rep.solved
    assert 1.0 - 1e-9 <= rep.x[0] <= 1.5


def test_single_covering_row_two_variables():
    inst = mixed(2, [(1, [1, 0])], [(1, [1, 1])])
    rep = solve_reference(inst, 0.05)
    assert rep.solved
    assert rep.x.sum() >= 1 - 1e-9 and rep.x[0] <= 1 + 5 * 0.05


def test_planted_twenty_by_twenty():
    inst, _ = planted_mixed(20, 10, 10, 4, seed=3)
    inst = normalize(inst)
    rep = solve_reference(inst, 0.1)
    assert rep.solved
    assert check_solution(inst, rep.x, ratio_bound=5 * 0.1).passed


def test_certificate_for_doubled_packing_row():
    inst = mixed(1, [(1, [2])], [(1, [1])])
    rep = solve_reference(inst, 0.1)
    assert rep.status is Status.INFEASIBLE
    assert rep.certificate.margins[0] > 0
    assert verify_infeasibility(inst, rep.certificate)


def test_feasible_instance_never_certified():
    rep = solve_reference(mixed(1, [(1, [1])], [(1, [1])]), 0.1)
    assert rep.certificate is None


def test_empty_covering_support_is_infeasible():
    inst = mixed(2, [(0, [1, 0])], [(1, [1, 0]), (1, [0, 1])])
    rep = solve_reference(inst, 0.1)
    assert rep.status is Status.INFEASIBLE
    assert verify_infeasibility(inst, rep.certificate)


@pytest.mark.parametrize("seed", range(10))
def test_planted_infeasible_certified(seed):
    inst = corpus.infeasible(seed)
    rep = solve_reference(inst, 0.1)
    assert rep.status is Status.INFEASIBLE
    assert verify_infeasibility(inst, rep.certificate)


@pytest.mark.parametrize("k", range(0, 60, 6))
def test_debug_invariants_hold(k):
    inst, _ = corpus.mixed(k)
    rep = solve_reference(inst, 0.1, debug=True)
    assert rep.solved
    assert rep.counters["lambda0_invariant_violations"] == 0
    assert rep.counters["step_violations"] == 0
    assert rep.counters["scaling_precondition_violations"] == 0


def test_warm_start_from_planted_point():
    inst, xs = corpus.mixed(3)
    rep = solve_reference(inst, 0.1, x0=xs)
    assert rep.solved
    assert check_solution(inst, rep.x, ratio_bound=5 * 0.1).passed


def test_rejects_bad_eps_and_start():
    inst = mixed(1, [(1, [1])], [(1, [1])])
    with pytest.raises(ValueError):
        solve_reference(inst, 0.2)
    with pytest.raises(ValueError):
        solve_reference(inst, 0.1, x0=np.array([-1.0]))
