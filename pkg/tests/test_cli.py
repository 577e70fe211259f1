import dataclasses
import json
import math
import re
import shlex
from pathlib import Path

import jsonschema
import pytest

import qhlab.cli as cli
from qhlab import __version__
from qhlab.bounds import Part, get_bound

README = Path(__file__).resolve().parents[1] / "README.md"
DISK = '{"kind":"ball","params":{"center":[0,0],"radius":1}}'

REPORT_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "config", "result"],
    "properties": {
        "tool": {"const": "qhlab"},
        "version": {"type": "string"},
        "config": {"type": "object", "required": ["command", "seed", "tol"]},
        "result": {"type": "object"},
    },
}

VERIFY_SCHEMA = {
    "type": "object",
    "required": ["pass", "bounds", "skipped_numeric"],
    "properties": {
        "pass": {"type": "boolean"},
        "skipped_numeric": {"type": "array", "items": {"type": "string"}},
        "bounds": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "citation", "samples", "hits", "violations",
                             "max_sharpness_defect", "pass", "violation_count", "seed"],
                "properties": {
                    "name": {"type": "string"},
                    "samples": {"type": "integer", "minimum": 1},
                    "hits": {"type": "integer", "minimum": 0},
                    "violations": {"type": "array"},
                    "max_sharpness_defect": {"type": ["number", "null"]},
                },
            },
        },
    },
}


def readme_commands():
    blocks = re.findall(r"```\n(.*?)```", README.read_text(), flags=re.S)
    return [line for b in blocks for line in b.splitlines() if line.startswith("qhlab ")]


def invoke(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]


# --- README examples ---------------------------------------------------------------

def check_dist_ball_k(doc, text):
    r = doc["result"]
    assert r["value"] == pytest.approx(math.log(2), abs=1e-3)
    assert r["method"] and r["error_bound"] is not None


def check_dist_square(doc, text):
    r = doc["result"]
    assert r["method"] == "numeric"
    assert r["lower"] <= r["value"] <= math.dist([0.2, 0.3], [0.8, 0.6]) / 0.2 + 1e-3


def check_dist_half_strip(doc, text):
    assert doc["result"]["value"] == pytest.approx(math.log(5), abs=1e-15)


def check_dist_rho(doc, text):
    assert doc["result"]["value"] == pytest.approx(2 * math.asinh(4 / 3), abs=1e-14)


def check_geodesic(doc, text):
    header, rows = csv_rows(text)
    assert header == ["x1", "x2", "cumulative_k"]
    assert float(rows[0]["cumulative_k"]) == 0.0
    assert float(rows[-1]["x1"]) == -0.2 and float(rows[-1]["x2"]) == 0.6


def check_verify_all(doc, text):
    r = doc["result"]
    assert r["pass"]
    assert all(b["samples"] == 100_000 and b["violation_count"] == 0 for b in r["bounds"])
    assert "newlem1" in r["skipped_numeric"]


def check_verify_newlem1(doc, text):
    (b,) = doc["result"]["bounds"]
    assert b["name"] == "newlem1" and b["backend"] == "with_numeric" and b["pass"]


def check_profile(doc, text):
    header, rows = csv_rows(text)
    assert header[:6] == ["bin_lo", "bin_hi", "count", "sup_k", "rectified_sup", "t_max"]
    assert len(rows) == 10
    assert sum(int(r["count"]) for r in rows) > 0


def check_sequence(doc, text):
    header, rows = csv_rows(text)
    assert len(rows) == 20
    assert {r["j_exact"] for r in rows} == {repr(math.log(5))}
    last = rows[-1]
    assert float(last["k_hat"]) / float(last["j_exact"]) > 2


def check_constants(doc, text):
    header, rows = csv_rows(text)
    assert header[:2] == ["theta", "a_theta"]
    assert len(rows) == 9


GOLDEN = [
    ("dist", "--metric k --tol", check_dist_ball_k),
    ("dist", "--method numeric", check_dist_square),
    ("dist", "half_strip", check_dist_half_strip),
    ("dist", "--metric rho", check_dist_rho),
    ("geodesic", "", check_geodesic),
    ("verify", "--suite all", check_verify_all),
    ("verify", "--suite newlem1", check_verify_newlem1),
    ("profile", "", check_profile),
    ("sequence", "", check_sequence),
    ("constants", "", check_constants),
]


def _checker(line):
    argv = shlex.split(line)[1:]
    for command, marker, fn in GOLDEN:
        if argv[0] == command and marker in line:
            return fn
    raise AssertionError(f"README example without a golden check: {line}")


def test_every_readme_example_has_a_check():
    lines = readme_commands()
    assert len(lines) == len(GOLDEN)
    assert len({_checker(line) for line in lines}) == len(GOLDEN)


@pytest.mark.parametrize("line", readme_commands())
def test_readme_example(line, capsys):
    argv = shlex.split(line)[1:]
    code, out, err = invoke(argv, capsys)
    assert code == 0, err
    doc = None
    if out.startswith("{"):
        doc = json.loads(out)
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["version"] == __version__
    else:
        assert out.startswith(f"# qhlab {__version__}\n# config {{")
        assert "\r" not in out
    _checker(line)(doc, out)


# --- report structure ------------------------------------------------------------------

def test_verify_report_schema(capsys):
    code, out, _ = invoke(["verify", "--suite", "chordal", "--samples", "500", "--seed", "3"],
                          capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    jsonschema.validate(doc["result"], VERIFY_SCHEMA)
    assert doc["config"]["seed"] == 3


def test_default_seed_recorded(capsys):
    code, out, _ = invoke(["dist", "--domain", DISK, "--points", "0,0;0.5,0", "--metric", "j"],
                          capsys)
    assert code == 0
    assert json.loads(out)["config"]["seed"] == 0


def test_domain_file_recorded_inline(tmp_path, capsys):
    f = tmp_path / "disk.json"
    f.write_text(DISK)
    argv = ["--points", "0,0;0.5,0", "--metric", "j"]
    _, a, _ = invoke(["dist", "--domain-file", str(f)] + argv, capsys)
    _, b, _ = invoke(["dist", "--domain", DISK] + argv, capsys)
    assert a == b


def test_json_floats_use_17_digits():
    text = cli.dumps({"b": 0.1, "a": [1.0 / 3.0, math.inf]})
    assert text == '{"a":[0.33333333333333331,null],"b":0.10000000000000001}'


# --- determinism ----------------------------------------------------------------------

def test_verify_byte_identical_across_workers(tmp_path, monkeypatch, capsys):
    argv = ["verify", "--suite", "rho_j_sandwich", "--samples", "10000", "--seed", "42"]
    outs = []
    for extra, env in (([], None), ([], None), (["--workers", "2"], None), ([], "3")):
        if env is None:
            monkeypatch.delenv(cli.WORKERS_ENV, raising=False)
        else:
            monkeypatch.setenv(cli.WORKERS_ENV, env)
        path = tmp_path / f"r{len(outs)}.json"
        assert cli.run(argv + extra + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert all(o == outs[0] for o in outs)


def test_profile_byte_identical_across_workers(capsys):
    argv = ["profile", "--domain", DISK, "--samples", "60", "--bins", "4", "--seed", "5",
            "--tol", "1e-2"]
    _, a, _ = invoke(argv, capsys)
    _, b, _ = invoke(argv + ["--workers", "2"], capsys)
    assert a == b


# --- exit codes -----------------------------------------------------------------------

def test_exit_2_on_violation(monkeypatch, capsys):
    base = get_bound("rho_j_sandwich")

    def doubled(cfg, params, metrics):
        return [Part("2 j <= rho", 2 * p.lhs, p.rhs)
                for p in base.assertion(cfg, params, metrics) if p.label == "j <= rho"]

    broken = dataclasses.replace(base, assertion=doubled)
    monkeypatch.setattr(cli, "get_bound", lambda name: broken)
    code, out, _ = invoke(["verify", "--suite", "rho_j_sandwich", "--samples", "500"], capsys)
    assert code == 2
    assert json.loads(out)["result"]["pass"] is False


@pytest.mark.parametrize("argv", [
    ["dist", "--domain", DISK, "--domain-file", "x.json", "--points", "0,0;0.5,0"],
    ["dist", "--points", "0,0;0.5,0"],
    ["dist", "--domain", "{not json", "--points", "0,0;0.5,0"],
    ["dist", "--domain", '{"kind":"torus"}', "--points", "0,0;0.5,0"],
    ["dist", "--domain", DISK, "--points", "0,0"],
    ["dist", "--domain", DISK, "--points", "0,0;2,0"],
    ["dist", "--domain", DISK, "--points", "0,0;0.5,0", "--tol", "0"],
    ["dist", "--domain", DISK, "--points", "0,0;0.5,0", "--region", "1,1;0,0"],
    ["dist", "--domain", '{"kind":"rectangle","params":{"lo":[0,0],"hi":[1,1]}}',
     "--points", "0.2,0.2;0.5,0.5", "--metric", "rho"],
    ["dist", "--domain-file", "/nonexistent/domain.json", "--points", "0,0;0.5,0"],
    ["verify", "--suite", "no_such_bound"],
    ["verify", "--samples", "0"],
    ["sequence", "--example", "half_strip", "--n-max", "1"],
    ["geodesic", "--domain", DISK, "--points", "0,0;0.5,0", "--out", "/nonexistent/dir/p.csv"],
    ["frobnicate"],
])
def test_exit_1_on_errors(argv, capsys):
    code, out, err = invoke(argv, capsys)
    assert code == 1
    assert err.startswith("qhlab: error: ")
    assert err.count("\n") == 1


def test_bad_worker_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    code, _, err = invoke(["verify", "--suite", "chordal", "--samples", "10"], capsys)
    assert code == 1 and "QHLAB_WORKERS" in err


def test_main_exits_with_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["constants"])
    assert exc.value.code == 0
    capsys.readouterr()
