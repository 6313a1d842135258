import json
import subprocess
import sys

import pytest

from selfsim import __version__
from selfsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_certify_and_verify(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code, out = run(capsys, "certify", "--x", "cantor", "--y", "pair:1/4", "--out", str(cert))
    assert code == 0 and json.loads(out)["outcome"] == "Empty"
    meta = json.loads(cert.read_text())["meta"]
    assert meta["tool_version"] == __version__ and meta["precision"] == 64 and len(meta["config_digest"]) == 64
    code, out = run(capsys, "verify", str(cert))
    assert code == 0 and json.loads(out)["verified"] is True


def test_tampered_certificate_exit_3(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    run(capsys, "certify", "--x", "cantor", "--y", "pair:1/4", "--out", str(cert))
    data = json.loads(cert.read_text())
    data["leaves"].pop()
    cert.write_text(json.dumps(data))
    code, _ = run(capsys, "verify", str(cert))
    assert code == 3


def test_certify_self_is_unknown(capsys):
    code, out = run(capsys, "certify", "--x", "cantor", "--y", "cantor", "--max-depth", "10")
    body = json.loads(out)
    assert code == 2 and body["outcome"] == "Unknown"
    cells = body["survivors"]
    assert any(_contains(c, 1, 0) for c in cells)


def _contains(cell, a, b):
    L, i, j = cell if isinstance(cell, list) and len(cell) == 3 else cell["cell"]
    h = 2.0**-L
    return i * h <= a <= (i + 1) * h and j * h <= b <= (j + 1) * h


@pytest.mark.parametrize("argv", [
    ["certify", "--x", "cantor", "--y", "pair:1/0"],
    ["certify", "--x", "cantor"],
    ["rank", "--ratios", "1/3,abc"],
    ["certify", "--x", "cantor", "--y", "cantor", "--max-depth", "0"],
])
def test_invalid_config_exit_64(capsys, argv):
    assert main(argv) == 64


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "rank.toml"
    cfg.write_text('ratios = "1/2,1/4,1/8"\n')
    code, out = run(capsys, "rank", "--config", str(cfg))
    assert json.loads(out)["rank"] == 1
    code, out = run(capsys, "rank", "--config", str(cfg), "--ratios", "1/3,1/4,1/5")
    assert json.loads(out)["rank"] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"nope": 1}')
    assert main(["rank", "--config", str(bad)]) == 64


def test_span_and_dioph(capsys):
    _, out = run(capsys, "span", "--r", "1/12", "--basis", "1/2,1/3")
    assert json.loads(out)["coefficients"] == ["2", "1"]
    _, out = run(capsys, "dioph", "--gammas", "log2,log3", "--c", "2", "--N", "500")
    assert json.loads(out)["violations"] == []


def test_renorm_csv(tmp_path, capsys):
    csv = tmp_path / "theta.csv"
    code, _ = run(capsys, "renorm", "--f", "1/3,0", "--N", "16", "--csv", str(csv))
    rows = [l.split(",") for l in csv.read_text().splitlines() if not l.startswith(("#", "n,"))]
    assert code == 0 and {r[3] for r in rows} == {"0"}


def test_determinism(tmp_path, capsys):
    for cmd in (
        ["certify", "--x", "cantor", "--y", "pair:1/5"],
        ["cpstep", "--cantor-depth", "6", "--steps", "20", "--seed", "9"],
        ["multirot", "--lambdas", "1/3", "--kind", "random", "--seed", "5", "--length", "50"],
        ["boxdim", "--cantor-depth", "8"],
    ):
        a, b = tmp_path / "a", tmp_path / "b"
        main(cmd + ["--out", str(a)])
        main(cmd + ["--out", str(b)])
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes(), cmd


def test_seed_recorded(capsys):
    _, out = run(capsys, "cpstep", "--steps", "3", "--seed", "11")
    assert json.loads(out.splitlines()[0])["meta"]["seed"] in (11, "11")


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "selfsim.cli", "rank", "--ratios", "1/3,1/4,1/5"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["rank"] == 3


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("SELFSIM_PRECISION", "96")
    _, out = run(capsys, "rank", "--ratios", "1/2")
    assert json.loads(out)["meta"]["precision"] == 96
