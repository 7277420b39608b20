import json
import math
from pathlib import Path

import numpy as np
import pytest

from opnorm.cli import REPORT_KEYS, main, run_bench, iteration_bound
from opnorm.io import write_matrix

GOLDEN = json.loads((Path(__file__).parent / "golden" / "report_schema.json").read_text())


def shape_of(v):
    if isinstance(v, dict):
        return {k: shape_of(x) for k, x in v.items()}
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "bool"
    return type(v).__name__


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def mats(tmp_path):
    write_matrix(np.diag([1.0, 2.0]), tmp_path / "diag12.mtx")
    write_matrix(np.eye(3), tmp_path / "id3.mtx")
    write_matrix(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]), tmp_path / "cols.mtx")
    write_matrix(np.random.default_rng(0).uniform(0.1, 1, (4, 4)), tmp_path / "A.mtx")
    write_matrix(np.array([[1.0, 2.0], [3.0, 1.0]]), tmp_path / "B.tsv", format="tsv")
    return tmp_path


def test_compute_examples(mats, capsys):
    code, rep, _ = run(capsys, "compute", "--p", "2", "--q", "2", str(mats / "diag12.mtx"))
    assert code == 0 and rep["estimate"] == pytest.approx(2.0, rel=1e-9)
    code, rep, _ = run(capsys, "compute", "--p", "2", "--q", "3", str(mats / "id3.mtx"))
    assert code == 0 and rep["estimate"] == pytest.approx(3 ** (1 / 6), rel=1e-9)
    assert rep["bounds"]["lower"] <= rep["estimate"] <= rep["bounds"]["upper"]
    code, rep, _ = run(capsys, "compute", "--p", "2", "--q", "2", str(mats / "B.tsv"))
    assert rep["estimate"] == pytest.approx(math.sqrt((15 + math.sqrt(125)) / 2), rel=1e-9)


def test_compute_range_gate(mats, capsys):
    code, rep, err = run(capsys, "compute", "--p", "3", "--q", "2", str(mats / "A.mtx"))
    assert code == 2 and rep is None
    assert "range" in err and "oracle" in err
    code, _, err = run(capsys, "compute", "--p", "inf", "--q", "2", str(mats / "A.mtx"))
    assert code == 2 and "oracle" in err


def test_compute_max_iter(mats, capsys):
    code, rep, err = run(capsys, "compute", "--p", "2", "--q", "3", "--max-iter", "1", str(mats / "A.mtx"))
    assert code == 3 and rep["converged"] is False and "limit" in err


def test_invalid_inputs(mats, capsys, tmp_path):
    assert run(capsys, "compute", "--p", "2", "--q", "2", str(tmp_path / "missing.mtx"))[0] == 2
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix array real general\n2 2\n1\nx\n")
    code, _, err = run(capsys, "compute", "--p", "2", "--q", "2", str(bad))
    assert code == 2 and "line 4" in err
    assert run(capsys, "compute", "--p", "two", "--q", "2", str(mats / "A.mtx"))[0] == 2
    assert run(capsys, "nosuch")[0] == 2
    neg = tmp_path / "neg.mtx"
    write_matrix(np.array([[1.0, -1.0], [0.0, 1.0]]), neg)
    assert run(capsys, "compute", "--p", "2", "--q", "2", str(neg))[0] == 2


def test_dimension_cap(mats, capsys, monkeypatch):
    monkeypatch.setenv("OPNORM_MAX_DIM", "3")
    code, _, err = run(capsys, "compute", "--p", "2", "--q", "2", str(mats / "A.mtx"))
    assert code == 2 and "OPNORM_MAX_DIM" in err


def test_emit_vector(mats, capsys):
    _, rep, _ = run(capsys, "compute", "--p", "2", "--q", "3", str(mats / "id3.mtx"))
    assert rep["maximizer"] is None
    _, rep, _ = run(capsys, "compute", "--p", "2", "--q", "3", "--emit-vector", str(mats / "id3.mtx"))
    np.testing.assert_allclose(rep["maximizer"], np.full(3, 3 ** (-1 / 3)), rtol=1e-9)


def test_oracle_examples(mats, capsys):
    code, rep, _ = run(capsys, "oracle", "--inf-to-p", "--p", "3", str(mats / "cols.mtx"))
    assert code == 0 and rep["estimate"] == pytest.approx(2 * 2 ** (1 / 3), rel=1e-12)
    assert rep["details"]["exhaustive"] is True and rep["params"]["q"] == "inf"
    _, o, _ = run(capsys, "oracle", "--p", "2", "--q", "2", str(mats / "A.mtx"))
    _, c, _ = run(capsys, "compute", "--p", "2", "--q", "2", str(mats / "A.mtx"))
    assert o["estimate"] == pytest.approx(c["estimate"], abs=1e-8)
    assert o["details"]["exhaustive"] is False
    _, b, _ = run(capsys, "oracle", "--p", "4", "--baseline", str(mats / "A.mtx"))
    assert b["bounds"]["upper"] / b["bounds"]["lower"] <= 4**0.25
    code, r, _ = run(capsys, "oracle", "--p", "3", "--q", "1.5", str(mats / "A.mtx"))
    assert code == 0 and r["bounds"]["upper"] is None
    code, r, _ = run(capsys, "oracle", "--p", "INF", "--q", "2", str(mats / "A.mtx"))
    assert code == 0 and r["details"]["exhaustive"] is True


def test_report_invariants(mats, capsys):
    for argv in (["compute", "--p", "1.5", "--q", "4"], ["oracle", "--p", "2", "--q", "3"], ["oracle", "--p", "2.5", "--baseline"]):
        code, rep, _ = run(capsys, *argv, str(mats / "A.mtx"))
        assert code == 0
        assert tuple(rep) == REPORT_KEYS
        assert rep["bounds"]["lower"] <= rep["estimate"] <= rep["bounds"]["upper"]


def test_golden_schema(mats, capsys, tmp_path):
    _, rep, _ = run(capsys, "compute", "--p", "2", "--q", "3", "--emit-vector", str(mats / "A.mtx"))
    assert shape_of(rep) == GOLDEN["compute"]
    _, rep, _ = run(capsys, "oracle", "--p", "2", "--q", "3", str(mats / "A.mtx"))
    assert shape_of(rep) == GOLDEN["oracle"]
    _, rep, _ = run(capsys, "gen", "gadget", "--builtin", "cycle4", "--C", "10", "--p", "3", "--out", str(tmp_path / "g"))
    assert shape_of(rep) == GOLDEN["gen"]


def test_gen_and_verify(capsys, tmp_path):
    out = tmp_path / "corpus"
    code, rep, _ = run(capsys, "gen", "gadget", "--builtin", "cycle4", "--C", "10", "--p", "3", "--out", str(out))
    assert code == 0
    man = json.loads(Path(rep["manifest"]).read_text())
    assert man["expected_ratio_at_witness"] == pytest.approx(84.0, rel=1e-15)
    assert run(capsys, "verify", rep["manifest"])[0] == 0

    code, rep, _ = run(capsys, "gen", "tensor", "--k", "2", "--builtin", "complete2", "--C", "1", "--p", "3", "--out", str(out))
    man = json.loads(Path(rep["manifest"]).read_text())
    assert man["expected_ratio_at_witness"] == pytest.approx(man["base_value"] ** 2, rel=1e-9)
    assert run(capsys, "verify", rep["manifest"])[0] == 0

    code, rep, _ = run(capsys, "gen", "lift", "--q", "4", "--builtin", "complete2", "--C", "1", "--p", "3", "--out", str(out))
    man = json.loads(Path(rep["manifest"]).read_text())
    assert man["alphas"] == [2, 1, 1]
    assert man["completeness_factor"] == pytest.approx(4 ** (1 / 3 - 1 / 4), rel=1e-15)
    code, v, _ = run(capsys, "verify", rep["manifest"])
    assert code == 0 and v["details"]["passed"] is True


def test_gen_from_edge_list_and_default_C(capsys, tmp_path):
    g = tmp_path / "sq.tsv"
    g.write_text("0\t1\n1\t2\n2\t3\n3\t0\n")
    code, rep, _ = run(capsys, "gen", "gadget", "--graph", str(g), "--p", "2.5", "--out", str(tmp_path))
    assert code == 0
    assert run(capsys, "verify", rep["manifest"])[0] == 0


def test_gen_errors(capsys, tmp_path):
    assert run(capsys, "gen", "gadget", "--builtin", "cycle2", "--p", "3", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "gen", "gadget", "--p", "3", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "gen", "gadget", "--builtin", "cycle4", "--p", "2", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "gen", "lift", "--builtin", "cycle4", "--p", "3", "--out", str(tmp_path))[0] == 2


def test_verify_detects_tampering(capsys, tmp_path):
    _, rep, _ = run(capsys, "gen", "gadget", "--builtin", "cycle4", "--C", "10", "--p", "3", "--out", str(tmp_path))
    path = Path(rep["manifest"])
    doc = json.loads(path.read_text())
    doc["expected_ratio_at_witness"] = 85.0
    path.write_text(json.dumps(doc))
    code, v, err = run(capsys, "verify", str(path))
    assert code == 1 and v["details"]["passed"] is False
    assert "FAIL witness_ratio" in err


def test_bench(capsys):
    res = run_bench(sizes=(2, 4), trials=2)
    assert res["iteration_constant"] > 0
    assert iteration_bound(10.0, 4, 1e-9) == pytest.approx(40 * math.log(40e9) ** 3)
    code, rep, _ = run(capsys, "bench", "--sizes", "2", "3", "--trials", "2")
    assert code == 0 and len(rep["details"]["sizes"]) == 2


def test_no_nan_in_reports(mats, capsys):
    _, rep, _ = run(capsys, "compute", "--p", "2", "--q", "2", str(mats / "A.mtx"))
    text = json.dumps(rep)
    assert "NaN" not in text and "Infinity" not in text
