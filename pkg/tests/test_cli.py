import json
import subprocess
import sys

import pytest

from gasketlab.cli import main
from gasketlab.per2 import bundled_cores, core_to_dict, dump_core


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def core_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cores") / "iib_l2.json"
    dump_core(bundled_cores()["iib_l2"], str(path))
    return str(path)


class TestValidate:
    def test_valid_core(self, capsys, core_file):
        code, out, _ = run_cli(capsys, "validate", core_file, "--deterministic")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert doc["errors"] == []

    def test_bundled_name(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "typeI_min", "--deterministic")
        assert code == 0

    def test_garbage_json(self, capsys, tmp_path):
        bad = tmp_path / "garbage.json"
        bad.write_text("{ not json", encoding="utf-8")
        code, _, err = run_cli(capsys, "validate", str(bad))
        assert code != 0
        assert json.loads(err)["error"] == "SchemaError"

    def test_unknown_field_strict(self, capsys, tmp_path):
        doc = core_to_dict(bundled_cores()["iib_l2"])
        doc["typo_field"] = True
        p = tmp_path / "typo.json"
        p.write_text(json.dumps(doc), encoding="utf-8")
        code, _, err = run_cli(capsys, "validate", str(p))
        assert code == 2
        assert json.loads(err)["error"] == "SchemaError"

    def test_invalid_graph(self, capsys, tmp_path):
        doc = core_to_dict(bundled_cores()["iib_l2"])
        doc["g1"]["rotation"]["a0"] = ["a0", "b0"]
        p = tmp_path / "loop.json"
        p.write_text(json.dumps(doc), encoding="utf-8")
        code, _, err = run_cli(capsys, "validate", str(p))
        assert code != 0
        assert json.loads(err)["error"] == "SchemaError"

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "validate", "no_such_core.json")
        assert code == 2
        assert json.loads(err)["error"] == "FileNotFound"


class TestIterate:
    def test_json_counts(self, capsys, core_file):
        code, out, _ = run_cli(capsys, "iterate", core_file,
                               "--depth", "3", "--deterministic")
        assert code == 0
        doc = json.loads(out)
        counts = [(lv["vertices"], lv["edges"], lv["faces"])
                  for lv in doc["levels"]]
        assert counts == [(3, 2, 1), (4, 4, 2), (6, 8, 4), (10, 16, 8)]

    def test_dot_export(self, capsys, core_file):
        code, out, _ = run_cli(capsys, "iterate", core_file,
                               "--depth", "2", "--format", "dot",
                               "--deterministic")
        assert code == 0
        assert out.count("graph level_") == 3
        assert "color=red" in out

    def test_depth_cap(self, capsys, core_file):
        code, _, err = run_cli(capsys, "iterate", core_file, "--depth", "13")
        assert code == 2


class TestCertify:
    def test_iib_l2_depth3(self, capsys, core_file):
        code, out, _ = run_cli(capsys, "certify", core_file,
                               "--depth", "3", "--deterministic")
        assert code == 0
        cert = json.loads(out)
        assert cert["type"] == "IIB"
        assert cert["critical_distance"] == 2
        assert cert["bipartite"] is True
        assert cert["anchored_cycle_counts"] == {"1": 1, "2": 3, "3": 5}

    def test_deterministic_outputs_identical(self, capsys, core_file):
        _, out1, _ = run_cli(capsys, "certify", core_file,
                             "--depth", "2", "--deterministic")
        _, out2, _ = run_cli(capsys, "certify", core_file,
                             "--depth", "2", "--deterministic")
        assert out1 == out2


class TestEnumerate:
    def test_max_four(self, capsys):
        code, out, _ = run_cli(capsys, "enumerate-cores",
                               "--max-vertices", "4", "--deterministic")
        assert code == 0
        doc = json.loads(out)
        assert doc["count"] == 1
        assert doc["cores"][0]["degree"] == 2


class TestApollonian:
    def test_bound_10_certificate(self, capsys):
        code, out, _ = run_cli(capsys, "apollonian", "--root", "-1,2,2,3",
                               "--bound", "10", "--deterministic")
        assert code == 0
        doc = json.loads(out)
        assert doc["contact_graph"]["bipartite"] is False
        assert doc["contact_graph"]["triangle"] is not None
        assert doc["audits"]["passed"] is True

    def test_svg(self, capsys):
        code, out, _ = run_cli(capsys, "apollonian", "--bound", "10",
                               "--format", "svg", "--deterministic")
        assert code == 0
        assert out.startswith("<svg")

    def test_bad_root(self, capsys):
        code, _, err = run_cli(capsys, "apollonian", "--root", "-1,2,2,4")
        assert code != 0
        assert json.loads(err)["error"] == "InvalidRoot"


class TestCompare:
    def test_verdict(self, capsys, core_file, tmp_path):
        code, out, _ = run_cli(capsys, "certify", core_file, "--depth", "3",
                               "--deterministic",
                               "--output", str(tmp_path / "core.json"))
        assert code == 0
        code, out, _ = run_cli(capsys, "apollonian", "--bound", "30",
                               "--deterministic",
                               "--output", str(tmp_path / "packing.json"))
        assert code == 0
        code, out, _ = run_cli(capsys, "compare",
                               str(tmp_path / "core.json"),
                               str(tmp_path / "packing.json"),
                               "--deterministic")
        assert code == 0
        doc = json.loads(out)
        assert doc["verdict"] == "non-equivalent: bipartite vs odd cycle"


class TestThreads:
    def test_env_var_validated(self, capsys, monkeypatch):
        monkeypatch.setenv("GASKET_LAB_THREADS", "zero")
        code, _, err = run_cli(capsys, "enumerate-cores", "--max-vertices", "4")
        assert code == 2

    def test_threads_flag_accepted(self, capsys):
        code, _, _ = run_cli(capsys, "--threads", "4", "enumerate-cores",
                             "--max-vertices", "4", "--deterministic")
        assert code == 0


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gasketlab.cli", "validate", "iib_l2",
         "--deterministic"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True
