import json
import math
import subprocess
import sys

import jsonschema
import pytest

from graphlim.cli import main
from graphlim.serial import SCHEMAS, dumps
from graphlim.verify import CHECKS, verify_all


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {
        "c4.el": "4 4\n0 1\n1 2\n2 3\n0 3\n",
        "k2.el": "2 1\n0 1\n",
        "c5.el": "5 5\n0 1\n1 2\n2 3\n3 4\n0 4\n",
        "c6.el": "6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n0 5\n",
        "loop.el": "2 1\n0 0\n",
        "p3.el": "3 2\n0 1\n1 2\n",
    }.items():
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    lam = tmp_path / "l.json"
    lam.write_text(json.dumps({"k": 2, "vertex": [0, 0], "edge": [[1, 0], [0, 0]]}))
    paths["l.json"] = str(lam)
    target = tmp_path / "h.json"
    target.write_text(json.dumps({"k": 2, "vertex_weights": [1, 1], "edge_weights": [[2, 3], [3, 5]]}))
    paths["h.json"] = str(target)
    return paths


def check_schema(name, text):
    doc = json.loads(text)
    jsonschema.validate(doc, SCHEMAS[name])
    return doc


class TestCount:
    def test_profile(self, files, capsys):
        code, out, _ = run(["count", "--graph", files["c4.el"], "--pattern-l", "2"], capsys)
        assert code == 0
        doc = check_schema("count", out)
        assert doc["i_profiles"]["1"] == {"1|1": 4}
        assert doc["i_profiles"]["2"] == {"1.2|1.2": 4, "1|1.2|2": 8, "1|1|2|2": 4}

    def test_hom_and_t(self, files, capsys):
        code, out, _ = run(["count", "--graph", files["p3.el"], "--into", files["c4.el"]], capsys)
        doc = check_schema("count", out)
        assert (doc["hom"], doc["inj"], doc["ind"]) == (16, 8, 8)
        code, out, _ = run(["count", "--graph", files["k2.el"], "--target", files["h.json"]], capsys)
        doc = check_schema("count", out)
        assert doc["t"] == "13/4" and doc["log_t"] == pytest.approx(math.log(13 / 4))

    def test_loop_input_error(self, files, capsys):
        code, _, err = run(["count", "--graph", files["loop.el"]], capsys)
        assert code == 1 and "line 2" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(["count", "--graph", str(tmp_path / "nope.el")], capsys)
        assert code == 1 and "cannot read" in err

    def test_budget_exceeded(self, files, capsys):
        code, _, err = run(["count", "--graph", files["c6.el"], "--pattern-l", "3", "--max-tuples", "10"], capsys)
        assert code == 1 and "budget" in err


class TestCgf:
    def test_example(self, files, capsys):
        code, out, _ = run(["cgf", "--graph", files["k2.el"], "--k", "2", "--lambda", files["l.json"]], capsys)
        doc = check_schema("cgf", out)
        assert code == 0
        assert abs(doc["f"] - 0.5 * math.log((math.e + 3) / 4)) <= 1e-5
        assert doc["f"] == pytest.approx(doc["f_bridge"], abs=1e-14)

    def test_wrong_k(self, files, capsys):
        code, _, err = run(["cgf", "--graph", files["k2.el"], "--k", "3", "--lambda", files["l.json"]], capsys)
        assert code == 1 and "k=2" in err


class TestCumulant:
    def test_agree(self, files, capsys):
        code, out, _ = run(["cumulant", "--graph", files["c5.el"], "--k", "3", "--pairs", "0-1,1-1,1-2"], capsys)
        doc = check_schema("cumulant", out)
        assert code == 0 and doc["agree"] and doc["direct"] == doc["decomposition"]

    def test_mean(self, files, capsys):
        _, out, _ = run(["cumulant", "--graph", files["c4.el"], "--k", "2", "--pairs", "0-1"], capsys)
        assert json.loads(out)["direct"] == "2/1"

    def test_bad_pairs(self, files, capsys):
        assert run(["cumulant", "--graph", files["c4.el"], "--k", "2", "--pairs", "0-x"], capsys)[0] == 1
        assert run(["cumulant", "--graph", files["c4.el"], "--k", "2", "--pairs", "0-5"], capsys)[0] == 1


class TestCatalog:
    def test_verify_example(self, files, capsys):
        code, out, err = run(["catalog", "--l", "2", "--k", "4", "--verify", "--graph", files["c5.el"]], capsys)
        assert code == 0
        assert "E triangular: true; P|F_l = I: true; rank K = 2" in err
        doc = check_schema("catalog", out)
        assert doc["report"]["ok"] and doc["report"]["graphs"][0]["u_equals_Kw"]

    def test_plain(self, capsys):
        code, out, _ = run(["catalog", "--l", "3"], capsys)
        assert code == 0 and len(check_schema("catalog", out)["patterns"]) == 16

    def test_small_k(self, capsys):
        assert run(["catalog", "--l", "2", "--k", "3"], capsys)[0] == 1
        assert run(["catalog", "--l", "2", "--verify"], capsys)[0] == 1


class TestTaylor:
    def test_random(self, files, capsys):
        argv = ["taylor", "--graph", files["c6.el"], "--k", "2", "--order", "4",
                "--random", "2", "--seed", "3", "--cap", "0.02"]
        code, out, _ = run(argv, capsys)
        doc = check_schema("taylor", out)
        assert code == 0 and len(doc["evaluations"]) == 2
        for ev in doc["evaluations"]:
            assert ev["majorant_dominates"]
        assert run(argv, capsys)[1] == out

    def test_cap_beyond_radius(self, files, capsys):
        code, _, err = run(["taylor", "--graph", files["c6.el"], "--k", "2", "--random", "1", "--cap", "0.05"],
                           capsys)
        assert code == 1 and "radius" in err


class TestDiagnose:
    def test_json(self, capsys):
        code, out, _ = run(["diagnose", "--family", "cycle", "--n", "6:9", "--L", "2", "--random", "1",
                            "--cap", "0.01"], capsys)
        doc = check_schema("diagnose", out)
        assert code == 0 and [r["n"] for r in doc["rows"]] == [6, 7, 8, 9]
        assert all(r["f[0]"] is not None for r in doc["rows"])

    def test_csv(self, capsys):
        code, out, _ = run(["diagnose", "--family", "path", "--n", "4:6", "--L", "1", "--format", "csv"], capsys)
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("n,v,m,") and len(lines) == 4

    def test_bad_range(self, capsys):
        assert run(["diagnose", "--family", "cycle", "--n", "a:b"], capsys)[0] == 1


class TestGen:
    def test_cycle(self, capsys):
        code, out, _ = run(["gen", "cycle", "4"], capsys)
        assert code == 0 and out.splitlines()[0] == "4 4"

    def test_torus_to_file(self, tmp_path, capsys):
        target = tmp_path / "t.el"
        assert run(["gen", "torus", "3x4", "-o", str(target)], capsys)[0] == 0
        assert target.read_text().splitlines()[0] == "12 24"

    def test_random_regular_seeded(self, capsys):
        a = run(["gen", "random_regular", "10", "3", "--seed", "4"], capsys)[1]
        b = run(["gen", "random_regular", "10", "3", "--seed", "4"], capsys)[1]
        assert a == b

    def test_invalid(self, capsys):
        assert run(["gen", "cycle", "2"], capsys)[0] == 1


class TestVerify:
    def test_vacuous_full(self, capsys):
        code, out, _ = run(["verify", "--tier", "full", "--checks", ""], capsys)
        doc = check_schema("verify", out)
        assert code == 0 and doc["ok"] and doc["checks"] == []

    def test_corrupted_oracle(self, tmp_path, capsys):
        bad = tmp_path / "oracles.json"
        bad.write_text(json.dumps({"hom_p3_c4": 17}))
        code, out, _ = run(["verify", "--checks", "oracles,counting_cross_checks", "--oracles", str(bad)], capsys)
        doc = json.loads(out)
        assert code == 2 and doc["failed"] == ["oracles"]
        assert doc["checks"][0]["detail"]["failed"] == ["hom_p3_c4"]

    def test_corrupted_oracle_library(self):
        rep = verify_all("smoke", ["oracles"], oracle_overrides={"catalog_sizes": (1, 3, 17)})
        assert not rep["ok"] and rep["checks"][0]["detail"]["failed"] == ["catalog_sizes"]

    def test_unknown_check(self, capsys):
        assert run(["verify", "--checks", "nope"], capsys)[0] == 1

    def test_unknown_oracle(self, tmp_path, capsys):
        bad = tmp_path / "o.json"
        bad.write_text(json.dumps({"nope": 1}))
        assert run(["verify", "--checks", "", "--oracles", str(bad)], capsys)[0] == 1

    def test_crashing_check_is_a_failure(self, monkeypatch):
        def boom(p, o):
            raise RuntimeError("kaput")

        monkeypatch.setitem(CHECKS, "oracles", boom)
        rep = verify_all("smoke", ["oracles"])
        assert not rep["ok"] and "kaput" in rep["checks"][0]["detail"]["error"]

    def test_timings_opt_in(self):
        rep = verify_all("smoke", ["oracles"], timings=True)
        assert "seconds" in rep["checks"][0]

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "graphlim", "verify", "--checks", "oracles"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["ok"]


def test_dumps_is_deterministic():
    from fractions import Fraction

    doc = {"b": Fraction(1, 3), "a": [b"1|1", 0.1]}
    assert dumps(doc) == '{\n  "a": [\n    "1|1",\n    0.1\n  ],\n  "b": "1/3"\n}\n'
