import io
import json

import jsonschema
import numpy as np
import pytest

from curvlab.cli import RunConfig, run
from curvlab.errors import ValidationError
from curvlab.graph_core import graph_to_json
from curvlab.instances import uniform_complete_graph
from curvlab.mapping_rep import hypercube
from curvlab.report import REPORT_SCHEMA, CurvatureReport


def _call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _report(text):
    data = json.loads(text)
    jsonschema.validate(data, REPORT_SCHEMA)
    return data


@pytest.fixture
def files(tmp_path):
    paths = {}
    g = uniform_complete_graph(4)
    paths["graph"] = tmp_path / "graph.json"
    paths["graph"].write_text(json.dumps(graph_to_json(g)))
    mr = hypercube(2, kappa=1.0)
    paths["cube"] = tmp_path / "cube.json"
    paths["cube"].write_text(json.dumps(graph_to_json(mr.graph)))
    labels = [str(v) for v in mr.graph.vertices]
    mapping = {
        "maps": [{labels[x]: labels[int(mr.maps[k][x])] for x in range(len(labels))} for k in range(mr.n_maps)],
        "c": [[labels[x], k, float(mr.c[x, k])] for x in range(len(labels)) for k in range(mr.n_maps)],
        "inverse": list(mr.inverse),
    }
    paths["mapping"] = tmp_path / "mapping.json"
    paths["mapping"].write_text(json.dumps(mapping))
    paths["qubit"] = tmp_path / "qubit.json"
    paths["qubit"].write_text(json.dumps({"preset": "depolarizing", "n": 2}))
    paths["projections"] = tmp_path / "proj.json"
    paths["projections"].write_text(
        json.dumps({"preset": "commuting_projections", "projections": [np.diag([1, 1, 0, 0]).tolist(), np.diag([1, 0, 1, 0]).tolist()], "alphas": [1, 1]})
    )
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text('{\n  "m": [1,\n')
    paths["dir"] = tmp_path
    return {k: str(v) for k, v in paths.items()}


def test_graph_be(files):
    code, out, _ = _call(["graph", "be", files["graph"]])
    assert code == 0
    data = _report(out)
    assert data["kind"] == "bakry_emery"
    assert data["bound"] == pytest.approx(0.75, abs=1e-10)
    assert data["schema"] == "curvlab/1"


def test_graph_intertwine_variants(files):
    code, out, _ = _call(["graph", "intertwine", "--hodge", "splitting:0.75", files["graph"]])
    assert code == 0 and _report(out)["bound"] == pytest.approx(0.75, abs=1e-8)
    code, out, _ = _call(["graph", "intertwine", files["graph"]])
    assert code == 0 and _report(out)["details"]["hodge"] == "idle"
    code, _, err = _call(["graph", "intertwine", "--hodge", "splitting:abc", files["graph"]])
    assert code == 1 and "splitting" in err
    code, _, _ = _call(["graph", "intertwine", "--hodge", "magic", files["graph"]])
    assert code == 1


def test_graph_mapping(files):
    code, out, _ = _call(["graph", "mapping", "--variant", "involutive", files["cube"], files["mapping"]])
    assert code == 0
    assert _report(out)["bound"] >= 2.0 - 1e-8


def test_graph_ge_search_and_falsify(files):
    code, out, _ = _call(["graph", "ge", "--samples", "20", files["graph"]])
    assert code == 0 and _report(out)["mode"] == {"name": "sampled", "samples": 20, "seed": 0}
    code, out, _ = _call(["graph", "ge", "--falsify", "0.75", "--samples", "50", files["graph"]])
    assert code == 0 and _report(out)["details"]["holds"] is True
    code, out, _ = _call(["graph", "ge", "--falsify", "5", "--samples", "50", files["graph"]])
    assert code == 2
    data = _report(out)
    assert data["witness"]["lhs"] > data["witness"]["rhs"]


def test_qms_commands(files):
    code, out, _ = _call(["qms", "validate", files["qubit"]])
    data = _report(out)
    assert code == 0 and data["details"]["completely_positive"] is True
    assert data["bound"] == pytest.approx(1.0, abs=1e-12)
    code, out, _ = _call(["qms", "be", "--samples", "8", files["qubit"]])
    assert code == 0 and _report(out)["bound"] == pytest.approx(5 / 6, abs=1e-6)
    code, out, _ = _call(["qms", "intertwine", "--hodge", "splitting:0.8333333333333334", "--samples", "16", files["qubit"]])
    assert code == 0 and _report(out)["bound"] == pytest.approx(5 / 6, abs=1e-6)
    code, out, _ = _call(["qms", "intertwine", "--hodge", "product", "--samples", "8", files["projections"]])
    assert code == 0 and _report(out)["bound"] >= 1 - 1e-4
    code, out, _ = _call(["qms", "ge", "--K", "1.0", "--samples", "30", "--estimate", files["qubit"]])
    data = _report(out)
    assert code == 0 and data["details"]["derivative_infimum"] >= 1 - 1e-3
    code, out, _ = _call(["qms", "ge", "--K", "1.2", "--samples", "200", files["qubit"]])
    assert code == 2 and _report(out)["details"]["holds"] is False
    code, out, _ = _call(["qms", "mlsi", "--rate", "2", "--samples", "100", files["qubit"]])
    assert code == 0
    code, out, _ = _call(["qms", "mlsi", "--rate", "2.2", "--samples", "200", files["qubit"]])
    assert code == 2


def test_qms_hodge_from_file(files, tmp_path):
    from curvlab.qms_core import Fodc, depolarizing
    from curvlab.optimize import SearchConfig
    from curvlab.qms_curvature import intertwining_curvature_qms, splitting_hodge_qms
    from curvlab.report import encode_value

    hodge = splitting_hodge_qms(Fodc(depolarizing(2)), 0.7)
    direct = intertwining_curvature_qms(hodge, SearchConfig(samples=8)).bound
    path = tmp_path / "hodge.json"
    path.write_text(json.dumps(encode_value(hodge.matrix)))
    code, out, _ = _call(["qms", "intertwine", "--hodge", f"file:{path}", "--samples", "8", files["qubit"]])
    assert code == 0 and _report(out)["bound"] == pytest.approx(direct, abs=1e-10)
    path.write_text(json.dumps(encode_value(3 * np.eye(12))))
    code, _, err = _call(["qms", "intertwine", "--hodge", f"file:{path}", files["qubit"]])
    assert code == 1 and "certification" in err


def test_reproduce_cases():
    code, out, err = _call(["reproduce", "complete-graph-n4"])
    assert code == 0 and "PASS" in err
    data = _report(out)
    assert data["bound"] == pytest.approx(0.75, abs=1e-8) and data["details"]["pass"] is True
    code, out, err = _call(["reproduce", "depolarizing-n2-intertwining", "--samples", "32"])
    assert code == 0 and _report(out)["bound"] == pytest.approx(5 / 6, abs=1e-6)
    code, out, err = _call(["reproduce", "universal-bound-p3"])
    assert code == 0 and _report(out)["details"]["expected"] == -5.5
    code, out, err = _call(["reproduce", "mlsi-qubit", "--samples", "200"])
    assert code == 0
    code, out, err = _call(["reproduce", "two-point-0.3", "--samples", "200"])
    assert code == 0 and "expected = 0.9686" in err


def test_errors_exit_one(files):
    assert _call(["frobnicate"])[0] == 1
    assert _call([])[0] == 1
    assert _call(["graph", "be", "--bogus", files["graph"]])[0] == 1
    assert _call(["reproduce", "no-such-case"])[0] == 1
    assert _call(["graph", "be", files["dir"] + "/missing.json"])[0] == 1
    assert _call(["graph", "ge", "--samples", "0", files["graph"]])[0] == 1
    assert _call(["graph", "ge", "--tol", "0", files["graph"]])[0] == 1
    code, _, err = _call(["graph", "be", files["bad"]])
    assert code == 1
    assert "bad.json:3:1" in err


def test_help_exits_zero():
    assert _call(["--help"])[0] == 0


def test_output_file_and_round_trip(files, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = _call(["graph", "be", "--output", str(target), files["graph"]])
    assert code == 0 and out == ""
    text = target.read_text()
    data = _report(text)
    assert CurvatureReport.from_dict(data).to_json() + "\n" == text


def test_reports_are_byte_reproducible(files):
    argv = ["graph", "ge", "--samples", "15", "--seed", "7", files["graph"]]
    assert _call(argv)[1] == _call(argv)[1]
    argv = ["qms", "be", "--samples", "4", "--seed", "3", files["qubit"]]
    assert _call(argv)[1] == _call(argv)[1]


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(samples=0)
    with pytest.raises(ValidationError):
        RunConfig(tol=-1.0)


def test_report_non_finite_values_round_trip():
    rep = CurvatureReport("x", float("inf"), {"a": float("-inf"), "b": float("nan")}, None)
    data = json.loads(rep.to_json())
    jsonschema.validate(data, REPORT_SCHEMA)
    back = CurvatureReport.from_dict(data)
    assert back.bound == float("inf") and back.per_site["a"] == float("-inf") and np.isnan(back.per_site["b"])
    assert back.to_json() == rep.to_json()
