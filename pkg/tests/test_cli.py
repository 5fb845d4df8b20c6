import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from riemann_kit.cli import main

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def run(argv, tmp_path):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def write_spec(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return path


def scalar_system(source="0"):
    return {"p": 2, "q": 1, "m": 1, "coefficients": [[["1"]], [["1"]]], "source": [source]}


# ---------------------------------------------------------------- verify

def test_verify_sech_passes(tmp_path):
    code, rep = run(["verify", "--system", "example1", "--family", "sech", "--a", "1,1,1", "--n", "1000",
                     "--seed", "7", "--tol", "1e-5"], tmp_path)
    assert code == 0 and rep["pass"]
    assert rep["n"] == 1000 and rep["seed"] == 7
    assert rep["errata"] == ["sech-source-sqrt"]


def test_verify_negative_control_fails(tmp_path):
    code, rep = run(["verify", "--system", "example1", "--family", "sech", "--n", "50", "--negative-control"],
                    tmp_path)
    assert code == 1 and not rep["pass"]


def test_verify_rejects_decreasing_pressure(tmp_path, capsys):
    code, rep = run(["verify", "--system", "fluid", "--family", "EE0a", "--param",
                     'pressure={"poly": [2, -1]}'], tmp_path)
    assert code == 2 and rep is None
    assert "must be positive" in capsys.readouterr().err


def test_verify_config_errors(tmp_path):
    assert run(["verify", "--system", "fluid", "--family", "nope"], tmp_path)[0] == 2
    assert run(["verify", "--system", "example1", "--family", "sech", "--tol", "-1"], tmp_path)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["verify", "--config", str(bad)], tmp_path)[0] == 2


def test_verify_reads_config_file(tmp_path):
    cfg = write_spec(tmp_path, {"system": "example2", "family": "closed-form", "n": 20, "tol": 1e-6})
    code, rep = run(["verify", "--config", str(cfg)], tmp_path)
    assert code == 0 and rep["residual"]["n"] == 20


# ---------------------------------------------------------------- dispersion / elements

def test_fluid_dispersion_rows(tmp_path):
    code, rep = run(["dispersion", "--system", "fluid", "--param", "kappa=2", "--state", "1,1,0,0,0",
                     "--direction", "1,0,0"], tmp_path)
    assert code == 0
    rows = [(r["root"], r["multiplicity"], r["type"]) for r in rep["roots"]]
    assert [m for _, m, _ in rows] == [1, 3, 1]
    assert np.allclose([r for r, _, _ in rows], [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)
    assert [t for _, _, t in rows] == ["acoustic", "entropic", "acoustic"]


def test_constant_coefficient_dispersion_ignores_state(tmp_path):
    one = run(["dispersion", "--system", "example1", "--state", "0.1,0.2,0.3"], tmp_path)[1]
    two = run(["dispersion", "--system", "example1", "--state", "0.7,-0.4,0.0"], tmp_path)[1]
    assert one["roots"] == two["roots"]


def test_scalar_advection_single_root(tmp_path):
    code, rep = run(["dispersion", "--system", "custom", "--param",
                     "system=" + json.dumps(scalar_system()), "--state", "0.3"], tmp_path)
    assert code == 0
    assert len(rep["roots"]) == 1 and rep["roots"][0]["multiplicity"] == 1
    assert rep["roots"][0]["root"] == pytest.approx(-1.0, abs=1e-14)


def test_degenerate_direction_exits_one(tmp_path):
    sys = {"p": 2, "q": 2, "m": 2, "coefficients": [[["1", "0"], ["0", "0"]], [["1", "0"], ["0", "0"]]],
           "source": ["0", "0"]}
    assert run(["dispersion", "--system", "custom", "--param", "system=" + json.dumps(sys)], tmp_path)[0] == 1


def test_fluid_elements(tmp_path):
    code, rep = run(["elements", "--system", "fluid", "--state", "1,1,0.2,0,0", "--direction", "0,1,0"],
                    tmp_path)
    assert code == 0
    kinds = [e["kind"] for e in rep["elements"] if "residual" in e]
    assert kinds == ["E", "A", "A", "E0", "A0", "H0"]
    assert max(e["residual"] for e in rep["elements"] if "residual" in e) <= 1e-10


# ---------------------------------------------------------------- superpose

def test_superpose_demo_passes(tmp_path):
    spec = tmp_path / "example1_mixed.json"
    shutil.copy(DEMOS / "example1_mixed.json", spec)
    out = tmp_path / "table.csv"
    assert main(["superpose", "--config", str(spec), "--out", str(out)]) == 0
    cert = json.loads(out.with_suffix(".certificate.json").read_text())
    assert cert["status"] == "pass"
    assert cert["reference"]["max"] <= 1e-6
    assert out.read_text().splitlines()[0] == "r1,r2_re,r2_im,u1,u2,u3"


def test_superpose_tau_only_gives_constant_table(tmp_path):
    spec = write_spec(tmp_path, {
        "system": scalar_system(), "components": [{"wave": ["1", "0"], "tau": ["0"]}],
        "grid": {"start": [0.0], "stop": [1.0], "num": [5]}, "f0": [0.25],
    })
    out = tmp_path / "t.csv"
    assert main(["superpose", "--config", str(spec), "--out", str(out)]) == 0
    values = [float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]]
    assert values == [0.25] * 5


def test_superpose_reflection_is_rejected(tmp_path):
    sys = {"p": 2, "q": 2, "m": 2, "coefficients": [[["1", "0"], ["0", "1"]], [["1", "0"], ["0", "1"]]],
           "source": ["1", "0"]}
    spec = write_spec(tmp_path, {
        "system": sys,
        "components": [{"wave": ["1", "0"], "omega": "1", "rotation": [["1", "0"], ["0", "-1"]],
                        "tau": ["0", "0"]}],
        "grid": {"start": [0.0], "stop": [1.0], "num": [3]}, "f0": [0.0, 0.0],
    })
    out = tmp_path / "t.csv"
    assert main(["superpose", "--config", str(spec), "--out", str(out)]) == 1
    cert = json.loads(out.with_suffix(".certificate.json").read_text())
    assert cert["status"] == "fail"
    assert cert["rotation_condition"]["pass"] and not cert["orthogonality"]["pass"]


def test_superpose_expression_error_has_column(tmp_path, capsys):
    spec = write_spec(tmp_path, {
        "system": scalar_system(), "components": [{"wave": ["1", "0"], "tau": ["0 + wobble(u1)"]}],
        "grid": {"start": [0.0], "stop": [1.0], "num": [3]}, "f0": [0.0],
    })
    assert main(["superpose", "--config", str(spec), "--out", str(tmp_path / "t.csv")]) == 2
    assert "column 5" in capsys.readouterr().err


# ---------------------------------------------------------------- report

def test_report_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["report", "--n", "4", "--seed", "3", "--out", str(a)])
    main(["report", "--n", "4", "--seed", "3", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert len(rep["families"]) == 11


def test_threads_do_not_change_report(tmp_path):
    argv = ["verify", "--system", "fluid", "--family", "EA0", "--n", "16", "--seed", "2"]
    one = run([*argv, "--threads", "1"], tmp_path)[1]
    four = run([*argv, "--threads", "4"], tmp_path)[1]
    one.pop("threads", None)
    four.pop("threads", None)
    assert one == four


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("riemann-kit ")
