import json

import numpy as np
import pytest
import yaml

from _gen import random_graph
from canograph.cli import main
from canograph.fileio import (
    FormatError,
    GraphDocument,
    SystemDocument,
    format_scalar,
    graph_to_dict,
    parse_document,
    parse_scalar,
    system_to_dict,
)
from canograph.spectral import eigenvalues_in_window

MODEL_DOC = {
    "kind": "system",
    "alpha": [[0, 1]],
    "beta": [[0, 1]],
    "segments": [{"length": 1.0, "matrix": [[1, 0], [0, 1]]}],
}

STAR_DOC = {
    "kind": "graph",
    "vertices": ["t0", "t1", "t2", "c"],
    "edges": [
        {
            "name": f"e{i}",
            "from": f"t{i}",
            "to": "c",
            "half_length": 0.5,
            "schrodinger": {"pieces": [{"length": 1.0, "potential": 0.0}]},
        }
        for i in range(3)
    ],
    "conditions": {
        "t0": {"preset": "dirichlet"},
        "t1": {"preset": "dirichlet"},
        "t2": {"preset": "dirichlet"},
        "c": {"preset": "kirchhoff"},
    },
}


class TestScalars:
    def test_roundtrip(self):
        for v in (0.0, -1.5, 2 + 3j, 1e-17 - 4.25j, complex(np.pi, -np.e)):
            assert parse_scalar(format_scalar(v)) == complex(v)

    def test_parse_styles(self):
        assert parse_scalar("1+2j") == 1 + 2j
        assert parse_scalar(3) == 3.0
        assert parse_scalar("2.5") == 2.5
        with pytest.raises(FormatError):
            parse_scalar("spam")


class TestSystemDocuments:
    def test_parse_model(self):
        doc = parse_document(MODEL_DOC)
        assert isinstance(doc, SystemDocument)
        dec = eigenvalues_in_window(doc.problem(), (-1.0, 7.0))
        assert np.allclose(dec.eigenvalues, [0, np.pi, 2 * np.pi], atol=1e-10)

    def test_roundtrip_preserves_spectrum(self):
        doc = parse_document(MODEL_DOC)
        serialized = system_to_dict(doc.ham, doc.alpha, doc.beta)
        again = parse_document(json.loads(json.dumps(serialized)))
        d1 = eigenvalues_in_window(doc.problem(), (-1.0, 10.0))
        d2 = eigenvalues_in_window(again.problem(), (-1.0, 10.0))
        assert np.max(np.abs(d1.eigenvalues - d2.eigenvalues)) <= 1e-10

    def test_missing_right_datum(self):
        bad = dict(MODEL_DOC)
        bad.pop("beta")
        with pytest.raises(FormatError):
            parse_document(bad)

    def test_compiled_graph_roundtrip(self):
        from canograph.schrodinger import schrodinger_graph_pipeline

        gdoc = parse_document(STAR_DOC)
        cs = schrodinger_graph_pipeline(gdoc.graph)
        serialized = system_to_dict(cs.ham, cs.alpha, cs.beta)
        again = parse_document(json.loads(json.dumps(serialized)))
        d1 = eigenvalues_in_window(cs.problem(), (0.5, 25.0))
        d2 = eigenvalues_in_window(again.problem(), (0.5, 25.0))
        assert np.max(np.abs(d1.eigenvalues - d2.eigenvalues)) <= 1e-10
        assert d1.multiplicities.tolist() == d2.multiplicities.tolist()

    def test_noncompact_roundtrip(self):
        rng = np.random.default_rng(8)
        g = random_graph(rng, n_vertices=3, n_halflines=1)
        from canograph.graph import compile_noncompact
        from canograph.spectral import MFunction

        cs = compile_noncompact(g)
        serialized = system_to_dict(cs.ham, cs.alpha, cs.beta)
        again = parse_document(json.loads(json.dumps(serialized)))
        m1 = MFunction(cs.problem())
        m2 = MFunction(again.problem())
        for z in (1j, 0.8 + 0.4j):
            assert np.linalg.norm(m1(z) - m2(z)) <= 1e-10


class TestGraphDocuments:
    def test_parse_star(self):
        doc = parse_document(STAR_DOC)
        assert isinstance(doc, GraphDocument)
        assert doc.frame == "schrodinger"
        assert doc.graph.k == 3

    def test_graph_dict_roundtrip(self):
        doc = parse_document(STAR_DOC)
        again = parse_document(graph_to_dict(doc.graph, frame="schrodinger"))
        assert again.graph.k == 3 and again.frame == "schrodinger"

    def test_bad_condition_rejected(self):
        bad = yaml.safe_load(yaml.safe_dump(STAR_DOC))
        bad["conditions"]["c"] = {
            "custom": {
                "b1": [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
                "b2": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            }
        }
        with pytest.raises(FormatError):
            parse_document(bad)

    def test_disconnected_rejected(self):
        bad = yaml.safe_load(yaml.safe_dump(STAR_DOC))
        bad["vertices"].append("zz")
        with pytest.raises(FormatError):
            parse_document(bad)


@pytest.fixture()
def model_file(tmp_path):
    path = tmp_path / "model.yaml"
    path.write_text(yaml.safe_dump(MODEL_DOC))
    return str(path)


@pytest.fixture()
def star_file(tmp_path):
    path = tmp_path / "star.yaml"
    path.write_text(yaml.safe_dump(STAR_DOC))
    return str(path)


class TestCli:
    def test_validate(self, model_file, star_file, capsys):
        assert main(["validate", model_file]) == 0
        assert "order 2" in capsys.readouterr().out
        assert main(["validate", star_file]) == 0
        assert "compiled order 12" in capsys.readouterr().out

    def test_missing_file(self, capsys):
        assert main(["validate", "/nonexistent/x.yaml"]) == 1

    def test_spectrum_rows(self, model_file, tmp_path):
        out = tmp_path / "spec.csv"
        assert main(["spectrum", model_file, "--window", "-1", "10", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,multiplicity,rho_0_0"
        ts = [float(l.split(",")[0]) for l in lines[1:]]
        assert np.allclose(ts, [0, np.pi, 2 * np.pi, 3 * np.pi], atol=1e-9)
        rhos = [float(l.split(",")[2]) for l in lines[1:]]
        assert np.allclose(rhos, 1.0, atol=1e-8)

    def test_spectrum_deterministic(self, model_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["spectrum", model_file, "--window", "-1", "10", "--out", str(a)])
        main(["spectrum", model_file, "--window", "-1", "10", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_mfunction(self, model_file, tmp_path):
        pts = tmp_path / "pts.txt"
        pts.write_text("1j\n0 1\n")
        out = tmp_path / "m.csv"
        assert main(["mfunction", model_file, "--points", str(pts), "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        val = complex(lines[1].split(",")[2])
        assert abs(val - 1j / np.tanh(1)) <= 1e-10

    def test_mfunction_at_eigenvalue_continues(self, model_file, tmp_path, capsys):
        pts = tmp_path / "pts.txt"
        pts.write_text(f"{np.pi!r}\n1j\n")
        out = tmp_path / "m.csv"
        assert main(["mfunction", model_file, "--points", str(pts), "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert "nan" in lines[1]
        assert "warning" in capsys.readouterr().err

    def test_mfunction_empty_points(self, model_file, tmp_path):
        pts = tmp_path / "pts.txt"
        pts.write_text("")
        out = tmp_path / "m.csv"
        assert main(["mfunction", model_file, "--points", str(pts), "--out", str(out)]) == 0
        assert out.read_text().strip().splitlines() == ["re_z,im_z,m_0_0"]

    def test_measure(self, model_file, tmp_path):
        out = tmp_path / "measure.json"
        assert main(["measure", model_file, "--window", "-40", "40", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert abs(doc["a"][0][0]) <= 1e-8
        assert len(doc["atoms"]) == 25
        assert doc["tail_bound"] >= 0

    def test_green(self, model_file, tmp_path):
        out = tmp_path / "green.json"
        assert main(
            ["green", model_file, "--x", "0.25", "--y", "0.75", "--z", "1j", "--out", str(out)]
        ) == 0
        doc = json.loads(out.read_text())
        assert len(doc["g"]) == 2

    def test_resolve(self, model_file, tmp_path):
        h = tmp_path / "h.csv"
        xs = np.linspace(0, 1, 60)
        rows = [f"{float(x)!r},{float(np.sin(np.pi * x))!r},0.0" for x in xs]
        h.write_text("\n".join(rows))
        out = tmp_path / "g.csv"
        assert main(["resolve", model_file, "--h", str(h), "--z", "1j", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("x,g_0,g_1")
        assert len(lines) > 40

    def test_compile_roundtrip(self, star_file, tmp_path):
        compiled = tmp_path / "compiled.json"
        assert main(["compile", star_file, "--out", str(compiled)]) == 0
        system_yaml = tmp_path / "system.yaml"
        system_yaml.write_text(yaml.safe_dump(json.loads(compiled.read_text())))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["spectrum", star_file, "--window", "0.5", "25", "--out", str(a)]) == 0
        assert main(["spectrum", str(system_yaml), "--window", "0.5", "25", "--out", str(b)]) == 0
        ta = np.array([[float(v) for v in l.split(",")[:2]] for l in a.read_text().splitlines()[1:]])
        tb = np.array([[float(v) for v in l.split(",")[:2]] for l in b.read_text().splitlines()[1:]])
        assert ta.shape == tb.shape
        assert np.max(np.abs(ta - tb)) <= 1e-10

    def test_schr2cs_roundtrip(self, star_file, tmp_path):
        converted = tmp_path / "converted.json"
        assert main(["schr2cs", star_file, "--out", str(converted)]) == 0
        doc = json.loads(converted.read_text())
        assert doc["frame"] == "canonical"
        graph_yaml = tmp_path / "converted.yaml"
        graph_yaml.write_text(yaml.safe_dump(doc))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["spectrum", star_file, "--window", "0.5", "25", "--out", str(a)]) == 0
        assert main(["spectrum", str(graph_yaml), "--window", "0.5", "25", "--out", str(b)]) == 0
        # re-orthonormalization of the transported conditions reorders
        # rounding at the last ulp; compare numerically
        ta = np.array([[float(v) for v in l.split(",")[:2]] for l in a.read_text().splitlines()[1:]])
        tb = np.array([[float(v) for v in l.split(",")[:2]] for l in b.read_text().splitlines()[1:]])
        assert ta.shape == tb.shape
        assert np.max(np.abs(ta - tb)) <= 1e-10

    def test_numerical_failure_exit_code(self, tmp_path):
        doc = {
            "kind": "system",
            "alpha": [[0, 1]],
            "beta": [[0, 1]],
            "segments": [{"length": 1.0, "matrix": [[0, 0], [0, 1]]}],
        }
        path = tmp_path / "theta.yaml"
        path.write_text(yaml.safe_dump(doc))
        assert main(["spectrum", str(path), "--window", "0", "5"]) == 2
