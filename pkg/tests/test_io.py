import json

import numpy as np
import pytest

from mixcover import io
from mixcover.generators import planted_mixed, random_cover, random_facility
from mixcover.instances import InstanceError


@pytest.mark.parametrize("make", [
    lambda: planted_mixed(20, 5, 6, 3, seed=1)[0],
    lambda: random_cover(15, 9, 3, seed=2, binary=False),
    lambda: random_facility(3, 7, 12, seed=3),
])
def test_round_trip_is_byte_stable(make, tmp_path):
    inst = make()
    p = tmp_path / "a.json"
    io.save_instance(inst, p)
    back = io.load_instance(p)
    q = tmp_path / "b.json"
    io.save_instance(back, q)
    assert p.read_bytes() == q.read_bytes()


@pytest.mark.parametrize("doc", [
    "[]",
    '{"type": "mpc"}',
    '{"type": "mpc", "n": 2, "packing": [{"rhs": 1, "entries": [[5, 1.0]]}], "covering": []}',
    '{"type": "mpc", "n": 2, "packing": [], "covering": [{"rhs": 1, "entries": [[0, -1.0]]}]}',
    '{"type": "mpc", "n": 2, "packing": [], "covering": [{"rhs": 1, "entries": [[0, "x"]]}]}',
    '{"type": "cover", "n": 2, "costs": [1], "rows": []}',
    '{"type": "fl", "facilities": [{"open": 1}], "clients": 2, "pairs": [[0, 0, 1.0]]}',
    '{"type": "fl", "facilities": [{"open": 1}], "clients": 1, "pairs": [[0, 0, 1.0], [0, 0, 2.0]]}',
    '{"type": "lp"}',
])
def test_malformed_documents_rejected(doc):
    with pytest.raises(InstanceError):
        io.instance_from_json(json.loads(doc))


def test_mpc_entries_summed():
    inst = io.instance_from_json({"type": "mpc", "n": 1, "packing": [],
                                  "covering": [{"rhs": 1, "entries": [[0, 1.0], [0, 0.5]]}]})
    assert inst.covering.row(0) == [(0, 1.5)]


def test_facility_solution_sparse_pairs():
    from mixcover.facility import solve_fl_sequential
    inst = random_facility(2, 3, 5, seed=1)
    rep = solve_fl_sequential(inst, 0.1)
    sol = io.solution_to_json(rep, inst)
    x = io.facility_x_from_json(inst, sol["x"])
    assert np.array_equal(x, rep.x)
    assert sol["y"] == rep.y.tolist()
