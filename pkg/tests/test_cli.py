import csv
import io
import json
import math

import pytest

from fockline import cli, formats
from fockline.fock import ModeRegistry, create


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_json(capsys):
    code, out, _ = run(capsys, "run", "--epsilon", "0.05", "--eta", "0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["command"] == "run"
    assert doc["data"]["fidelity"] >= 0.99
    labels = [c["label"] for c in doc["data"]["components"]]
    assert labels[-2:] == ["C_PsiPsi-", "HigherOrder"]


def test_run_is_deterministic(capsys):
    _, first, _ = run(capsys, "run", "--epsilon", "0.07", "--with-rho")
    _, second, _ = run(capsys, "run", "--epsilon", "0.07", "--with-rho")
    assert first == second


def test_run_at_zero_epsilon(capsys):
    code, out, _ = run(capsys, "run", "--epsilon", "0")
    data = json.loads(out)["data"]
    assert code == 0
    assert data["p_coincidence"] == 0
    assert data["fidelity"] is None


def test_run_table_and_csv(capsys):
    _, out, _ = run(capsys, "run", "--format", "table")
    assert "p_coincidence" in out
    _, out, _ = run(capsys, "run", "--format", "csv", "--epsilon", "0")
    rows = list(csv.DictReader(line for line in io.StringIO(out) if not line.startswith("#")))
    assert math.isnan(float(rows[0]["fidelity"]))


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "run", "--eta", "0")[0] == 2
    assert run(capsys, "run", "--epsilon", "abc")[0] == 2
    assert run(capsys, "sweep", "--epsilon", "0.1:0:3")[0] == 2
    assert run(capsys, "verify", "--criterion", "nope")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--coincidence", "loose"])
    assert exc.value.code == 2


def test_single_point_sweep_matches_run(capsys):
    _, swept, _ = run(capsys, "sweep", "--epsilon", "0.05:0.05:1", "--eta", "0.5")
    _, single, _ = run(capsys, "run", "--epsilon", "0.05", "--eta", "0.5", "--format", "csv")
    body = lambda text: [line for line in text.splitlines() if not line.startswith("#")]
    assert body(swept) == body(single)


def test_sweep_grid_order_and_threads(capsys, monkeypatch):
    monkeypatch.setenv("FOCKLINE_THREADS", "3")
    _, out, _ = run(capsys, "sweep", "--epsilon", "0.02:0.1:3", "--eta", "0.5:1:2")
    rows = list(csv.DictReader(line for line in io.StringIO(out) if not line.startswith("#")))
    assert [(float(r["epsilon"]), float(r["eta"])) for r in rows] == [
        (e, h) for e in (0.02, 0.06, 0.1) for h in (0.5, 1.0)
    ]
    monkeypatch.setenv("FOCKLINE_THREADS", "1")
    _, serial, _ = run(capsys, "sweep", "--epsilon", "0.02:0.1:3", "--eta", "0.5:1:2")
    assert serial == out
    monkeypatch.setenv("FOCKLINE_THREADS", "zero")
    assert run(capsys, "sweep", "--epsilon", "0.02:0.1:3")[0] == 2


def test_components_table(capsys):
    code, out, _ = run(capsys, "components", "--epsilon", "0.05")
    assert code == 0
    verdicts = {line.split()[0]: line.split()[-1] for line in out.splitlines()[2:]}
    assert verdicts["C_PsiPsi-"] == "heralds"
    assert verdicts["A"] == "excluded"


def test_circuit_preset_matches_run(capsys):
    args = ("--epsilon", "0.05", "--eta", "0.5")
    _, out, _ = run(capsys, "circuit", "--circuit", "fig1", *args, "--herald", "D2,D3", "--herald", "D1,D4", "--keep", "2',4'")
    herald = json.loads(out)["data"]["herald"]
    _, out, _ = run(capsys, "run", *args)
    data = json.loads(out)["data"]
    assert herald["probability"] == pytest.approx(data["p_coincidence"], rel=1e-12)
    assert herald["fidelity_singlet"] == pytest.approx(data["fidelity"], rel=1e-12)


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_circuit_file_hom(capsys, tmp_path):
    circuit = write(tmp_path, "c.json", {"elements": [{"kind": "BS", "inputs": ["a", "b"], "outputs": ["c", "d"]}]})
    reg = ModeRegistry(["a", "b", "c", "d"])
    state = write(tmp_path, "s.json", formats.state_to_json(create(reg, ("a", "H"), ("b", "H"))))
    dets = write(tmp_path, "d.json", [{"id": "Dc", "path": "c"}, {"id": "Dd", "path": "d"}])
    code, out, _ = run(capsys, "circuit", "--circuit", circuit, "--input", state, "--detectors", dets)
    assert code == 0
    patterns = json.loads(out)["data"]["patterns"]
    assert patterns["Dc+Dd"] == pytest.approx(0, abs=1e-15)
    assert patterns["Dc"] == pytest.approx(0.5)


def test_empty_circuit_clicks_with_certainty(capsys, tmp_path):
    circuit = write(tmp_path, "c.json", {"elements": [], "paths": ["a"]})
    state = write(tmp_path, "s.json", formats.state_to_json(create(ModeRegistry(["a"]), ("a", "V"))))
    dets = write(tmp_path, "d.json", [{"id": "Da", "path": "a"}])
    _, out, _ = run(capsys, "circuit", "--circuit", circuit, "--input", state, "--detectors", dets, "--with-state")
    data = json.loads(out)["data"]
    assert data["patterns"] == {"none": 0.0, "Da": 1.0}
    assert data["output_state"]["terms"][0]["amplitude"] == [1.0, 0.0]


def test_circuit_schema_error(capsys, tmp_path):
    circuit = write(tmp_path, "c.json", {"elements": [{"kind": "BS", "inputs": ["a"], "outputs": ["c", "d", "e"]}]})
    code, _, err = run(capsys, "circuit", "--circuit", circuit)
    assert code == 2
    assert "elements/0/outputs" in err


def test_verify_subset_and_tamper(capsys):
    code, out, _ = run(capsys, "verify", "--criterion", "physics")
    assert code == 0
    assert out.startswith("[PASS] c7")
    # identity beamsplitter removes HOM interference and must be caught
    code, out, _ = run(capsys, "verify", "--criterion", "c7", "--criterion", "golden", "--tamper-bs")
    assert code == 1
    assert out.count("[FAIL]") == 2
