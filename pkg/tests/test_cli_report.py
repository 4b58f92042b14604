from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
import sympy

from bbgkz import cli
from bbgkz.commands import ordered_map, parameter_points, thread_count
from bbgkz.config import ConfigError, LoopSpec, ParameterSpec, RunConfig, Tolerances, load_config
from bbgkz.report import CheckRecord, Report, digest, encode


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- encoding and reports ----------------------------------------------------------------


def test_encode_formats():
    assert encode(Fraction(-3, 4)) == "-3/4"
    assert encode(sympy.Rational(1, 8)) == "1/8"
    assert encode(1 + 2j) == [1.0, 2.0]
    assert encode(np.array([1j, 2])) == [[0.0, 1.0], [2.0, 0.0]]
    assert encode(np.float64(0.5)) == 0.5
    assert encode({"a": (Fraction(1), None)}) == {"a": ["1/1", None]}
    assert encode(sympy.Matrix([[1, sympy.Rational(1, 2)]])) == [["1/1", "1/2"]]
    with pytest.raises(TypeError):
        encode(object())


def test_digest_is_stable():
    assert digest({"x": [1, 2j]}) == digest({"x": [1, 2j]})
    assert digest({"x": [1, 2j]}) != digest({"x": [1, 3j]})


def test_record_requires_known_provenance():
    with pytest.raises(ValueError):
        CheckRecord("c", True, "guess")


def test_report_summary_and_text():
    rep = Report("demo")
    rep.add(CheckRecord("good", True, "trivial", deviation=0.0, tolerance=1e-6))
    rep.add(CheckRecord("bad", False, "derived-oracle", computed=np.eye(2, dtype=complex),
                        expected=np.zeros((2, 2), dtype=complex), deviation=1.0, tolerance=1e-6))
    assert not rep.passed
    assert rep.summary() == {"total": 2, "passed": 1, "failed": ["bad"]}
    text = rep.dumps("text")
    assert "bad" in text and "FAIL" in text and "computed:" in text and "expected:" in text
    assert "1/2 checks passed" in text
    data = json.loads(rep.dumps("json"))
    assert data["pass"] is False and data["checks"][0]["provenance"] == "trivial"


# -- configuration ------------------------------------------------------------------------


def test_config_defaults_and_round_trip():
    cfg = RunConfig.from_dict({"n": 3, "rays": [0, 1, 3], "parameter": [[1, 0], [0, 1], 2, 1],
                               "loops": ["root_swap", {"kind": "circle", "index": 1, "center": [0.5, 0]}],
                               "tolerances": {"pairing": 1e-7}})
    assert cfg.parameter == ParameterSpec("explicit", (1 + 0j, 1j, 2 + 0j, 1 + 0j))
    assert cfg.tolerances.pairing == 1e-7
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_config_n_implies_minimal_fan():
    assert RunConfig.from_dict({"n": 4}).rays == (0, 4)


@pytest.mark.parametrize("data", [
    {"n": 2, "rays": [0, 1]},
    {"n": 2, "bogus": 1},
    {"tolerances": {"pairing": -1}},
    {"tolerances": {"nonsense": 1}},
    {"degree_bound": 1},
    {"n": 2, "parameter": [1, 2]},
    {"loops": [{"kind": "figure8"}]},
    {"parameter": {"source": "explicit"}},
    {"truncation": {"eps": 0.5}},
    [1, 2],
])
def test_config_errors(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    assert load_config(None) == RunConfig()


def test_loop_spec_validation():
    with pytest.raises(ConfigError):
        LoopSpec("small", radius=0)
    with pytest.raises(ConfigError):
        Tolerances(constancy=0)


def test_parameter_points_seeded():
    cfg = RunConfig(n=3, rays=(0, 3), seed=5)
    a, b = parameter_points(cfg), parameter_points(cfg)
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    other = parameter_points(RunConfig(n=3, rays=(0, 3), seed=6))
    assert not np.array_equal(a[0], other[0])


def test_thread_env(monkeypatch):
    monkeypatch.setenv("BBGKZ_THREADS", "3")
    assert thread_count() == 3
    assert ordered_map(lambda v: v * v, range(6)) == [0, 1, 4, 9, 16, 25]
    monkeypatch.delenv("BBGKZ_THREADS")
    assert thread_count() == 1


# -- command line -------------------------------------------------------------------------


def test_verify_all_default_passes(capsys):
    code, out, _ = run(["verify-all"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["pass"] and data["summary"]["failed"] == []
    names = [c["name"] for c in data["checks"]]
    assert "exact_inverse_MG" in names and "monodromy[root_swap]" in names


def test_json_is_byte_identical(tmp_path, capsys, monkeypatch):
    cfg = write(tmp_path, {"n": 3, "rays": [0, 1, 3], "seed": 4})
    first = run(["pair", "--config", cfg], capsys)[1]
    second = run(["pair", "--config", cfg], capsys)[1]
    assert first == second
    serial = run(["verify-all"], capsys)[1]
    monkeypatch.setenv("BBGKZ_THREADS", "3")
    assert run(["verify-all"], capsys)[1] == serial


def test_seed_override_changes_inputs(capsys):
    a = json.loads(run(["roots", "--seed", "1"], capsys)[1])
    b = json.loads(run(["roots", "--seed", "2"], capsys)[1])
    assert a["checks"][0]["inputs_digest"] != b["checks"][0]["inputs_digest"]
    assert run(["roots", "--seed", "-1"], capsys)[0] == 2


def test_degenerate_parameter_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 2, "parameter": {"source": "explicit", "x": [1, 2, 1]}})
    code, _, err = run(["verify-all", "--config", cfg], capsys)
    assert code == 3
    assert "degenerate" in err


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 3, "rays": [0, 2]})
    code, _, err = run(["chi", "--config", cfg], capsys)
    assert code == 2 and "configuration error" in err


def test_check_failure_exit_code(tmp_path, capsys):
    # an impossibly tight closed-form tolerance makes one check fail
    cfg = write(tmp_path, {"n": 3, "tolerances": {"closed_form": 1e-300}})
    code, out, _ = run(["solve", "--config", cfg], capsys)
    assert code == 1
    assert any("closed_form" in name for name in json.loads(out)["summary"]["failed"])


def test_text_format_and_out_file(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 4, "rays": [0, 1, 4]})
    dest = tmp_path / "chi.txt"
    code, out, _ = run(["chi", "--config", cfg, "--format", "text", "--out", str(dest)], capsys)
    assert code == 0 and out == ""
    text = dest.read_text()
    assert "chi_exact" in text and "M: [[\"-4/3\"]]" in text and "G: [[\"-3/4\"]]" in text


def test_pair_text_lists_matrix(capsys):
    code, out, _ = run(["pair", "--format", "text"], capsys)
    assert code == 0
    assert "pairing_matrix[n=2,point=0]" in out
    assert "computed.matrix:" in out and "expected.root_block:" in out


@pytest.mark.parametrize("command", ["roots", "solve", "pair", "gamma", "monodromy"])
def test_subcommands_pass_on_defaults(command, capsys):
    code, out, _ = run([command], capsys)
    assert code == 0
    assert json.loads(out)["command"] == command


def test_monodromy_with_configured_loops(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 3, "loops": [{"kind": "small", "index": 1, "radius": 0.02},
                                             {"kind": "circle", "index": 0}]})
    code, out, _ = run(["monodromy", "--config", cfg], capsys)
    assert code == 0
    assert len(json.loads(out)["checks"]) == 2


def test_console_script_module_entry():
    proc = subprocess.run([sys.executable, "-m", "bbgkz.cli", "chi"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"] is True


def test_sweep_all_fans(tmp_path, capsys):
    cfg = write(tmp_path, {"sweep": [2, 3, 4, 5, 6], "random_points": 2, "paths": 1})
    code, out, _ = run(["verify-all", "--config", cfg], capsys)
    data = json.loads(out)
    assert code == 0, data["summary"]["failed"]
