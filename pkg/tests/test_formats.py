import json
import math

import numpy as np
import pytest

from fockline import formats
from fockline.detection import DetectorModel
from fockline.fock import ModeRegistry, bell_state, to_density
from fockline.scheme import build_fig1_circuit, prepare_inputs
from fockline.verify import random_state


def test_state_round_trip():
    reg = ModeRegistry(["a", "b", "c"])
    s = random_state(reg, ["a", "b", "c"], 3, np.random.default_rng(11))
    data = json.loads(formats.dumps(formats.state_to_json(s)))
    back = formats.state_from_json(data)
    assert back.registry == reg
    assert back.distance(s) < 1e-15


def test_input_state_round_trip_keeps_every_term():
    s = prepare_inputs(0.05 + 0.02j)
    back = formats.state_from_json(json.loads(formats.dumps(formats.state_to_json(s))))
    assert set(back.terms) == set(s.terms)
    assert max(abs(back.terms[k] - v) for k, v in s.terms.items()) <= 1e-15


def test_density_round_trip():
    reg = ModeRegistry(["a", "b"])
    rho = to_density(bell_state(reg, "Psi-", "a", "b"))
    back = formats.density_from_json(json.loads(formats.dumps(formats.density_to_json(rho))))
    assert np.abs(back.matrix - rho.matrix).max() <= 1e-15
    assert back.basis == rho.basis


def test_circuit_round_trip():
    c = build_fig1_circuit()
    data = json.loads(formats.dumps(formats.circuit_to_json(c)))
    assert data["elements"][5]["inputs"] == ["alpha", None]
    assert formats.circuit_from_json(data) == c


def test_detectors_round_trip():
    d = (DetectorModel("D1", "x", 0.5), DetectorModel("D2", "y"))
    assert formats.detectors_from_json(formats.detectors_to_json(d)) == d


def test_schema_errors_name_the_field():
    with pytest.raises(formats.FormatError, match="elements/0/inputs"):
        formats.circuit_from_json({"elements": [{"kind": "BS", "inputs": "a", "outputs": ["c", "d"]}]})
    with pytest.raises(formats.FormatError, match="1/eta"):
        formats.detectors_from_json([{"id": "D1", "path": "x"}, {"id": "D2", "path": "y", "eta": 2}])
    with pytest.raises(formats.FormatError, match="terms/0/amplitude"):
        formats.state_from_json({"paths": ["a"], "terms": [{"occupation": {}, "amplitude": [1]}]})


def test_load_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "elements": [,]\n}')
    with pytest.raises(formats.FormatError, match="line 2"):
        formats.load_json(p)
    with pytest.raises(formats.FormatError, match="cannot read"):
        formats.load_json(tmp_path / "missing.json")


def test_clean_handles_special_values():
    out = formats.clean({"a": math.nan, "b": 1 + 2j, "c": np.float64(0.5), "d": np.arange(2)})
    assert out == {"a": None, "b": [1.0, 2.0], "c": 0.5, "d": [0, 1]}
    assert "NaN" not in formats.dumps({"x": math.nan})
