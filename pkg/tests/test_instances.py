import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixcover.checks import check_solution
from mixcover.generators import GeneratorSpec, generate, planted_mixed, random_facility
from mixcover.instances import CoveringInstance, FacilityInstance, InstanceError, MixedInstance, normalize
from mixcover.sparse import SparseConstraintSystem


def _sys(n, rows):
    return SparseConstraintSystem.from_rows(n, rows)


def test_covering_row_scaled_to_unit_rhs():
    inst = normalize(MixedInstance(_sys(2, []), _sys(2, [(4.0, [(0, 2.0)])])))
    assert inst.covering.rhs.tolist() == [1.0]
    assert inst.covering.row(0) == [(0, 0.5)]


def test_zero_rhs_packing_row_fixes_its_columns():
    raw = MixedInstance(_sys(2, [(0.0, [(0, 3.0)])]), _sys(2, [(1.0, [(0, 1.0), (1, 1.0)])]))
    inst = normalize(raw)
    assert inst.m_p == 0 and inst.n == 1
    assert inst.origin.fixed_zero == (0,)
    assert inst.origin.kept_columns.tolist() == [1]
    assert inst.origin.expand(np.array([2.0])).tolist() == [0.0, 2.0]


def test_unit_row_unchanged():
    raw = MixedInstance(_sys(2, []), _sys(2, [(1.0, [(0, 1.0), (1, 1.0)])]))
    assert normalize(raw).covering.row(0) == [(0, 1.0), (1, 1.0)]


def test_vacuous_covering_row_dropped():
    raw = MixedInstance(_sys(1, [(1.0, [(0, 1.0)])]), _sys(1, [(0.0, [(0, 1.0)]), (2.0, [(0, 1.0)])]))
    inst = normalize(raw)
    assert inst.m_c == 1 and inst.origin.dropped_covering_rows == (0,)


def test_covering_row_losing_support_recorded():
    raw = MixedInstance(_sys(2, [(0.0, [(0, 1.0)])]), _sys(2, [(1.0, [(0, 1.0)])]))
    assert normalize(raw).origin.empty_covering_rows == (0,)


def test_duplicate_entries_summed():
    s = _sys(2, [(1.0, [(0, 1.0), (0, 2.0)])])
    assert s.row(0) == [(0, 3.0)]


def test_columns_sorted_by_decreasing_coefficient_ties_by_row():
    s = _sys(1, [(1.0, [(0, 1.0)]), (1.0, [(0, 3.0)]), (1.0, [(0, 1.0)])])
    assert s.column(0) == [(1, 3.0), (0, 1.0), (2, 1.0)]


def test_negative_coefficient_rejected():
    with pytest.raises(ValueError):
        _sys(1, [(1.0, [(0, -1.0)])])


def test_covering_empty_row_rejected_at_validation():
    inst = CoveringInstance(_sys(2, [(1.0, [])]), np.ones(2))
    with pytest.raises(InstanceError):
        inst.validate()


def test_facility_requires_pair_per_client():
    with pytest.raises(InstanceError):
        FacilityInstance.from_pairs([1.0], 2, [[0, 0, 1.0]])


def test_facility_rejects_duplicate_pairs():
    with pytest.raises(InstanceError):
        FacilityInstance.from_pairs([1.0], 1, [[0, 0, 1.0], [0, 0, 2.0]])


def test_facility_pairs_sorted_by_cost_per_client():
    inst = FacilityInstance.from_pairs([1.0, 1.0, 1.0], 2, [[0, 0, 5.0], [1, 2, 1.0], [0, 1, 2.0], [0, 2, 2.0]])
    assert inst.pairs() == [(0, 1, 2.0), (0, 2, 2.0), (0, 0, 5.0), (1, 2, 1.0)]


@st.composite
def mixed_instances(draw):
    n = draw(st.integers(1, 6))
    def rows(k):
        out = []
        for _ in range(k):
            cols = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
            vals = draw(st.lists(st.floats(0.01, 100), min_size=len(cols), max_size=len(cols)))
            out.append((draw(st.sampled_from([0.0, 0.5, 1.0, 3.0])), list(zip(cols, vals))))
        return out
    return MixedInstance(_sys(n, rows(draw(st.integers(0, 4)))), _sys(n, rows(draw(st.integers(1, 4)))))


@given(mixed_instances())
@settings(max_examples=150, deadline=None)
def test_normalize_idempotent(raw):
    once = normalize(raw)
    twice = normalize(once)
    assert once.packing.same_entries(twice.packing) and once.covering.same_entries(twice.covering)
    assert np.all(once.packing.rhs == 1.0) and np.all(once.covering.rhs == 1.0)


@given(mixed_instances())
@settings(max_examples=150, deadline=None)
def test_rows_and_columns_describe_same_entries(raw):
    for s in (raw.packing, raw.covering):
        from_rows = sorted((i, j, v) for i in range(s.m) for j, v in s.row(i))
        from_cols = sorted((i, j, v) for j in range(s.n) for i, v in s.column(j))
        assert from_rows == from_cols
        for j in range(s.n):
            vals = [v for _, v in s.column(j)]
            assert vals == sorted(vals, reverse=True)


def test_check_solution_one_by_one():
    inst = MixedInstance(_sys(1, [(1.0, [(0, 1.0)])]), _sys(1, [(1.0, [(0, 1.0)])]))
    rep = check_solution(inst, [1.0])
    assert rep.passed and rep.min_cover == 1.0 and rep.max_pack == 1.0
    rep = check_solution(inst, [0.5])
    assert not rep.passed and rep.min_cover == 0.5


def test_check_solution_dimension_mismatch():
    inst = MixedInstance(_sys(1, []), _sys(1, [(1.0, [(0, 1.0)])]))
    with pytest.raises(ValueError):
        check_solution(inst, [1.0, 2.0])


@pytest.mark.parametrize("seed", range(10))
def test_planted_solution_passes(seed):
    inst, xs = planted_mixed(50, 25, 25, 4, seed=seed)
    assert check_solution(inst, xs, ratio_bound=0.0).passed


def test_generator_same_seed_same_instance():
    a, xa = generate(GeneratorSpec("mpc-planted-feasible", 30, 20, seed=7))
    b, xb = generate(GeneratorSpec("mpc-planted-feasible", 30, 20, seed=7))
    assert a.packing.same_entries(b.packing) and a.covering.same_entries(b.covering)
    assert np.array_equal(xa, xb)


def test_fl_generator_covers_every_client():
    inst = random_facility(4, 6, 20, seed=3)
    assert inst.nnz == 20
    assert np.all(np.bincount(inst.client, minlength=6) >= 1)


def test_generator_rejects_unknown_kind():
    with pytest.raises(ValueError):
        GeneratorSpec("nonsense")
