"""Acceptance criteria at their stated tolerances, one line per criterion."""

import json
import pathlib

import pytest

from brownkit import acceptance

from conftest import ACCEPTANCE_LINES

_RESULTS = {}
_SHARED = {"AC-1": ("AC-1", "AC-2"), "AC-2": ("AC-1", "AC-2")}


def _result(ac_id):
    if ac_id not in _RESULTS:
        for res in acceptance.run(list(_SHARED.get(ac_id, (ac_id,))), echo=None):
            _RESULTS[res.ac_id] = res
    return _RESULTS[ac_id]


@pytest.mark.parametrize("ac_id", acceptance.IDS)
def test_criterion(ac_id):
    res = _result(ac_id)
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    for part in res.parts:
        assert part.sample_size > 0
        if part.generator_spec is not None:
            assert part.master_seed is not None
    assert res.passed, line


def test_frozen_calibration_matches_record():
    path = pathlib.Path(__file__).resolve().parents[1] / "calibration" / "calibration.json"
    if not path.exists():
        pytest.skip("calibration record not in this tree")
    cal = json.loads(path.read_text())
    assert tuple(cal["modulus"]["frozen_band"]) == acceptance.MODULUS_BAND
    assert cal["roughness"]["frozen_threshold"] == acceptance.ROUGHNESS_THRESHOLD
    lo, hi = acceptance.MODULUS_BAND
    q = cal["modulus"]["quantiles"]
    assert lo <= acceptance.NOMINAL_MODULUS_BAND[0] and hi >= acceptance.NOMINAL_MODULUS_BAND[1]
    assert lo <= q["0.005"] and q["0.995"] <= hi
    assert acceptance.ROUGHNESS_THRESHOLD <= cal["roughness"]["quantiles"]["0.001"]
