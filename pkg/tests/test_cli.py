import json
import math
from pathlib import Path

import pytest

from depin.cli import parse_kernel_spec, read_config_file, run


def test_parse_kernel_specs(tmp_path):
    k = parse_kernel_spec("geometric:p=0.5,n_max=32")
    assert k.family == "geometric" and k.n_max == 32
    k = parse_kernel_spec("srw:n_max=16")
    assert k.period == 2
    k = parse_kernel_spec("power:alpha=3,s=1,n_max=100,defect=0.25")
    assert k.defect_mass == 0.25
    path = tmp_path / "k.csv"
    path.write_text("s=1,k_inf=0.0,alpha=2.0\n1,1.0\n", encoding="utf-8")
    assert parse_kernel_spec(f"file:{path}").n_max == 1
    with pytest.raises(ValueError):
        parse_kernel_spec("bessel:nu=0")
    with pytest.raises(ValueError):
        parse_kernel_spec("power:alpha=3")


def test_pure_subcommand(capsys):
    code = run(["pure", "--kernel", "geometric:p=0.5", "--h", "-1"])
    out = capsys.readouterr().out
    assert code == 0
    b = float(out.split("b=")[1].split()[0])
    assert b == pytest.approx(math.log(0.5 + 0.5 * math.exp(-1)) + 1, abs=1e-10)


def test_pure_asymptotics_flag(capsys):
    code = run(["pure", "--kernel", "power:alpha=3,s=1,n_max=1000",
                "--h", "-0.5", "--asymptotics"])
    assert code == 0
    assert "order=first" in capsys.readouterr().out


def test_fe_beta0_stderr_zero(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["fe", "--kernel", "geometric:p=0.5,n_max=64", "--beta", "0",
                "--h", "-1", "--N", "4096", "--replicas", "1", "--seed", "7",
                "--out", str(out)])
    assert code == 0
    lines = (out / "fe.csv").read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "N,beta,h,mean,stderr,replicas,seed"
    row = [ln for ln in lines if not ln.startswith("#")][1].split(",")
    assert float(row[4]) == 0.0
    assert (out / "fe.gp").exists()


def test_fe_csv_reproducible(tmp_path):
    args = ["fe", "--kernel", "geometric:p=0.5,n_max=64", "--law", "gaussian",
            "--beta", "1", "--h=-0.5,-0.2", "--N", "256,512",
            "--replicas", "4", "--seed", "3"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert (a / "fe.csv").read_bytes() == (b / "fe.csv").read_bytes()


def test_phi_subcommand(tmp_path):
    out = tmp_path / "o"
    code = run(["phi", "--kernel", "geometric:p=0.5,n_max=48", "--beta", "1",
                "--m-grid", "0.2:0.8:0.2", "--N", "128", "--replicas", "3",
                "--seed", "5", "--out", str(out)])
    assert code == 0
    lines = [ln for ln in (out / "phi.csv").read_text().splitlines()
             if not ln.startswith("#")]
    assert lines[0] == "m,epsilon,value,stderr,feasible"
    assert len(lines) == 5
    assert all(ln.endswith(",1") for ln in lines[1:])


def test_hc_subcommand(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["hc", "--kernel", "geometric:p=0.5,n_max=64", "--beta", "0",
                "--N-list", "1024,2048,4096", "--replicas", "1", "--seed", "3",
                "--tol", "1e-3", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "hc.json").read_text())
    assert abs(payload["hc"]) < 5e-3
    assert payload["config"]["command"] == "hc"


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kernel = geometric:p=0.5\nh = -1\n# comment\n", encoding="utf-8")
    code = run(["pure", "--config", str(cfg)])
    assert code == 0
    b_file = float(capsys.readouterr().out.split("b=")[1].split()[0])
    # flags override config entries
    code = run(["pure", "--config", str(cfg), "--h", "-2"])
    assert code == 0
    b_flag = float(capsys.readouterr().out.split("b=")[1].split()[0])
    assert b_flag > b_file
    assert read_config_file(cfg) == {"kernel": "geometric:p=0.5", "h": "-1"}


def test_exit_codes(tmp_path, capsys):
    assert run(["pure", "--h", "-1"]) == 2                  # missing required
    assert run(["pure", "--kernel", "geometric:p=0.5",
                "--h", "oops"]) == 2                        # malformed value
    assert run(["frobnicate"]) == 2                         # unknown command
    assert run(["pure", "--kernel", "file:/no/such/file.csv", "--h", "-1"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("just garbage\n", encoding="utf-8")
    assert run(["pure", "--config", str(bad), "--kernel", "geometric:p=0.5",
                "--h", "-1"]) == 1
    capsys.readouterr()


def test_verify_subcommand(capsys):
    code = run(["verify", "--N", "10", "--draws", "4", "--seed", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert "all oracle checks passed" in out


def test_smooth_small_run(tmp_path, capsys):
    out = tmp_path / "o"
    code = run(["smooth", "--kernel", "power:alpha=3,s=1,n_max=256",
                "--law", "gaussian", "--beta", "1", "--N-list", "256,512",
                "--replicas", "8", "--seed", "11", "--tol", "0.02",
                "--scan-gaps", "0.4,0.3,0.22,0.16,0.12,0.09", "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "smooth.json").read_text())
    for key in ("hc", "hc_err", "exponent", "exponent_err", "envelope_ok",
                "points", "config"):
        assert key in payload
    assert (out / "smooth_points.csv").exists()
    assert (out / "smooth.gp").exists()
