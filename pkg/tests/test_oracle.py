import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

import corpus
from mixcover.facility import hochbaum_expand, map_back
from mixcover.oracle import covering_optimum, covering_optimum_by_vertices


def _highs_cover(A, w):
    res = linprog(w, A_ub=-A, b_ub=-np.ones(A.shape[0]), bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def _highs_fl(inst):
    """Direct FL LP: variables x per pair then y per facility."""
    P, n, m = inst.nnz, inst.n_facilities, inst.m_clients
    c = np.concatenate([inst.cost, inst.open_cost])
    rows, rhs = [], []
    for i in range(m):
        r = np.zeros(P + n)
        r[inst.client_ptr[i]:inst.client_ptr[i + 1]] = -1
        rows.append(r)
        rhs.append(-1)
    for p in range(P):
        r = np.zeros(P + n)
        r[p], r[P + inst.facility[p]] = 1, -1
        rows.append(r)
        rhs.append(0)
    res = linprog(c, A_ub=np.array(rows), b_ub=rhs, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def test_small_hand_instance():
    A = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    z, x, u = covering_optimum(A, [3, 1, 1])
    assert z == 2 and covering_optimum_by_vertices(A, [3, 1, 1]) == 2
    assert sum(x) >= 0 and all(v >= 0 for v in u)


@pytest.mark.parametrize("k", range(40))
def test_simplex_matches_vertices_and_highs(k):
    inst = corpus.tiny_cover(k)
    A = inst.A.to_scipy().toarray()
    z, x, u = covering_optimum(inst.A, inst.w)
    assert z == covering_optimum_by_vertices(inst.A, inst.w)
    assert abs(float(z) - _highs_cover(A, inst.w)) <= 1e-7 * max(1.0, float(z))
    # primal and dual certify each other exactly
    xs = np.array([float(v) for v in x])
    assert np.all(A @ xs >= 1 - 1e-12)
    assert sum(u) == z


@pytest.mark.parametrize("k", range(30))
def test_expansion_optimum_equals_direct_lp(k):
    inst = corpus.tiny_fl(k)
    z, xp, _ = covering_optimum(hochbaum_expand(inst).A, hochbaum_expand(inst).w)
    assert abs(float(z) - _highs_fl(inst)) <= 1e-7 * max(1.0, float(z))
    x, y = map_back(inst, [float(v) for v in xp])
    assert abs(inst.cost_of(x, y) - float(z)) <= 1e-9 * max(1.0, float(z))
    assert np.all(inst.coverage(x) >= 1 - 1e-9)
