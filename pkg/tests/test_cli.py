import json
import subprocess
import sys

import pytest

from mopchr.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_polys_constant_index(capsys):
    code, out, _ = run(capsys, "polys", "--system", "charlier:a=1,2", "--index", "0,0", "--emit", "coeffs")
    assert code == 0 and out.strip() == "[1]"


def test_polys_type2_and_type1(capsys):
    code, out, _ = run(capsys, "polys", "--system", "charlier:a=1,2", "--index", "1,1")
    assert code == 0
    coeffs = json.loads(out)
    assert coeffs[-1] == 1 and len(coeffs) == 3
    code, out, _ = run(capsys, "polys", "--system", "charlier:a=1,2", "--index", "1,1", "--type", "I")
    assert code == 0 and len(json.loads(out)) == 2
    code, out, _ = run(capsys, "polys", "--system", "charlier:a=1,2", "--index", "2,1", "--emit", "zeros")
    zs = json.loads(out)
    assert len(zs) == 3 and zs == sorted(zs)


def test_transform_laguerre_all_methods(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, _, _ = run(capsys, "transform", "--family", "laguerre1:alpha=0", "--phi", "roots=0",
                     "--dmax", "20", "--method", "all", "-o", str(path))
    doc = json.loads(path.read_text())
    assert code == 0 and doc["ok"]
    assert set(doc["tables"]) == {"nnrr", "det", "onestep"}
    assert all(v["float"] < 1e-10 for v in doc["max_deviation"].values())
    assert doc["closed_form"]["family"].startswith("laguerre1:alpha=1")
    assert doc["closed_form"]["max_deviation"] == "0"


def test_transform_confluent_phi(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, _, _ = run(capsys, "transform", "--system", "charlier:a=1,2", "--phi", "roots=5;mults=2",
                     "--dmax", "4", "-o", str(path))
    doc = json.loads(path.read_text())
    assert code == 0 and doc["phi"]["phi"]["mults"] == [2]


def test_verify_residuals(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "residuals", "--system", "charlier:a=1,2", "--dmax", "8")
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())
    assert 'value={"exact": "0"' in out


def test_jacobi_and_nnrr(capsys):
    code, out, _ = run(capsys, "jacobi", "--system", "charlier:a=1", "--L", "4")
    doc = json.loads(out)
    assert code == 0 and doc["components"][0]["b"] == ["1", "2", "3", "4"]
    code, out, _ = run(capsys, "nnrr", "--system", "charlier:a=1,2", "--dmax", "3")
    doc = json.loads(out)
    assert code == 0 and len(doc["cells"]) == 10


def test_system_json_file(capsys, tmp_path):
    f = tmp_path / "sys.json"
    f.write_text(json.dumps({"functionals": [{"points": ["0", "1", "3"], "weights": ["1/2", "1/4", "1/4"]}]}))
    code, out, _ = run(capsys, "jacobi", "--system", str(f), "--L", "3")
    doc = json.loads(out)
    assert code == 0 and doc["components"][0]["support_size"] == 3


def test_interlace_csv(capsys, tmp_path):
    csv_path = tmp_path / "z.csv"
    code, _, _ = run(capsys, "interlace", "--system", "charlier:a=1,2", "--dmax", "3", "--csv", str(csv_path))
    assert code == 0
    assert csv_path.read_text().splitlines()[0].startswith("version,family,relation")


@pytest.mark.parametrize("argv", [
    ["polys", "--system", "krawtchouk:p=1/4,2/3;N=2", "--index", "4,0"],
    ["polys", "--system", "nosuchfamily:a=1", "--index", "1"],
    ["polys", "--system", "charlier:a=1,-2", "--index", "1,1"],
    ["polys", "--system", "charlier:a=1,2", "--index", "1"],
    ["transform", "--system", "charlier:a=1,2", "--phi", "zeros=5"],
    ["jacobi", "--system", "/nonexistent/file.json"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["nnrr", "--system", "charlier:a=1,2", "--dmax", "-1"])
    assert exc.value.code == 2


def test_console_script_and_determinism(tmp_path):
    outs = []
    for i, workers in enumerate(("1", "3")):
        p = tmp_path / f"r{i}.json"
        proc = subprocess.run([sys.executable, "-m", "mopchr.cli", "verify", "--suite", "residuals",
                               "--system", "charlier:a=1,2", "--dmax", "8", "--workers", workers,
                               "-o", str(p)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
