import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brownkit.errors import DomainError, PreconditionError
from brownkit.generators import GeneratorSpec
from brownkit.paths import (Ensemble, Path, TimeGrid, path_csv_text, read_path_csv, restrict,
                            value_at)


def test_grid_points_from_index():
    g = TimeGrid(0.3, 7)
    assert g.dt == 0.3 / 7
    assert np.array_equal(g.times(), np.array([k * 0.3 / 7 for k in range(8)]))
    assert g.time(7) == 0.3


@pytest.mark.parametrize("horizon,steps", [(0, 4), (-1, 4), (math.inf, 4), (1, 0), (1, 2.5), (1, True)])
def test_grid_rejects_bad_shapes(horizon, steps):
    with pytest.raises(DomainError):
        TimeGrid(horizon, steps)


def test_path_invariants():
    g = TimeGrid(1, 2)
    with pytest.raises(PreconditionError):
        Path(g, [0, 1])
    with pytest.raises(PreconditionError):
        Path(g, [0, np.nan, 1])
    with pytest.raises(PreconditionError):
        Path(g, [0, 1, 2], start_value=1.0)
    p = Path(g, [0.5, 1, 2])
    assert p.start_value == 0.5
    with pytest.raises(ValueError):
        p.values[0] = 3.0


def test_value_at_examples():
    assert value_at(Path(TimeGrid(1, 1), [0, 1]), 0.5) == 0.5
    p = Path(TimeGrid(1, 2), [0, 0.5, 1.2])
    assert value_at(p, 0.75) == pytest.approx(0.85, abs=1e-15)
    for k, t in enumerate(p.times()):
        assert value_at(p, t) == p.values[k]
    for t in (-1e-12, 1.0 + 1e-12, math.nan):
        with pytest.raises(DomainError):
            value_at(p, t)


@settings(max_examples=60, deadline=None)
@given(vals=st.lists(st.floats(-10, 10), min_size=2, max_size=12),
       horizon=st.floats(0.1, 10), u=st.floats(0, 1))
def test_value_at_is_continuous_interpolant(vals, horizon, u):
    p = Path(TimeGrid(horizon, len(vals) - 1), vals)
    t = u * horizon
    v = value_at(p, t)
    k = p.grid.locate(t)
    lo, hi = sorted(p.values[k:k + 2]) if k < p.grid.steps else (p.values[k], p.values[k])
    assert lo - 1e-12 <= v <= hi + 1e-12
    # Lipschitz with the steepest segment's slope
    eps = 1e-9 * horizon
    if t + eps <= horizon:
        slope = np.max(np.abs(np.diff(p.values))) / p.grid.dt
        assert abs(value_at(p, t + eps) - v) <= slope * eps * (1 + 1e-6) + 1e-12


def test_restrict_examples():
    p = Path(TimeGrid(1, 4), [0, 1, 2, 3, 4])
    assert restrict(p, 1.0) is p
    r = restrict(p, 0.5)
    assert r.grid == TimeGrid(0.5, 2) and list(r.values) == [0, 1, 2]
    for t in (0.0, 0.1, 0.25, 0.4, 0.5):
        assert value_at(r, t) == value_at(p, t)
    with pytest.raises(PreconditionError):
        restrict(p, 0.3)
    with pytest.raises(PreconditionError):
        restrict(p, 0.0)


def test_csv_round_trip_is_exact(tmp_path):
    p = Path(TimeGrid(1.0, 3), [0.0, 1 / 3, -2e-17, 1e300])
    text = path_csv_text(p)
    assert text.splitlines()[0] == "t,value"
    assert "\r" not in text
    q = read_path_csv(io.StringIO(text))
    assert np.array_equal(q.values, p.values) and q.grid == p.grid
    p.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_bytes() == text.encode()
    with pytest.raises(PreconditionError):
        read_path_csv(io.StringIO("time,value\n0,0\n1,1\n"))


def test_ensemble_paths_are_pure_functions_of_index(tmp_path):
    spec = GeneratorSpec("ExactIncrement", TimeGrid(1, 64))
    a, b = Ensemble(spec, 5, 10), Ensemble(spec, 5, 20)
    for i in range(10):
        assert np.array_equal(a.path(i).values, b.path(i).values)
    assert not np.array_equal(a.path(0).values, a.path(1).values)
    with pytest.raises(IndexError):
        a.path(10)
    assert len(list(a)) == 10
    a.write_manifest(tmp_path / "m.json")
    m = json.loads((tmp_path / "m.json").read_text())
    assert m["master_seed"] == 5 and m["count"] == 10 and m["grid"] == {"horizon": 1.0, "steps": 64}
    assert m["generator"]["kind"] == "ExactIncrement"
