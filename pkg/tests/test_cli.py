import json
import logging

import pytest

from hdtorus.cli import load_config, main, read_tau_csv
from hdtorus.errors import ConfigError
from hdtorus.torus import TorusSpec


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)

    return write


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_load_config_examples(files, caplog):
    path = files("h.json", {"family": "hamming", "r": 2, "n": 10})
    cfg = load_config("rw", path)
    assert cfg.spec.omega == 10 and cfg.spec.V == 1024
    bad = files("so.json", {"family": "spread_out", "r": 2, "n": 2, "L": 1})
    with pytest.raises(ConfigError, match=r"r >= 2L\+1"):
        load_config("rw", bad)
    with caplog.at_level(logging.INFO, logger="hdtorus"):
        cfg = load_config("pc", path)
    assert cfg.params["lambda"] == 0.25
    assert "lambda" in caplog.text


def test_precedence_and_validation(files):
    path = files("c.json", {"spec": {"family": "nn", "r": 4, "n": 1}, "p": 0.3, "samples": 100})
    cfg = load_config("mc", path, {"p": 0.6})
    assert cfg.params["p"] == 0.6 and cfg.params["samples"] == 100
    assert cfg.spec == TorusSpec.cycle(4)
    with pytest.raises(ConfigError, match="colour"):
        load_config("mc", files("u.json", {"spec": {"family": "nn", "r": 4, "n": 1}, "colour": 1}))
    with pytest.raises(ConfigError, match="p"):
        load_config("mc", path, {"p": 1.5})
    with pytest.raises(ConfigError, match="needs p"):
        load_config("oracle", files("s.json", {"family": "nn", "r": 4, "n": 1}))
    with pytest.raises(ConfigError, match="malformed"):
        load_config("rw", files("m.json", "{not json"))


def test_yaml(files):
    path = files("c.yaml", "spec:\n  family: hamming\n  r: 3\n  n: 2\np: 0.2\n")
    cfg = load_config("oracle", path)
    assert cfg.spec.V == 9 and cfg.params["p"] == 0.2


def test_oracle_and_rw(files, capsys):
    c4 = files("cycle4.json", {"family": "nearest_neighbor", "r": 4, "n": 1})
    code, out, _ = run_cli(["oracle", "--spec", c4, "--p", "0.5"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["chi"] == 2.5625
    assert doc["header"]["seed"] == 0 and len(doc["header"]["config_hash"]) == 16
    nc = files("ncube10.json", {"family": "hamming", "r": 2, "n": 10})
    code, out, _ = run_cli(["rw", "--spec", nc], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and "beta_triangle" in res and res["infrared"]["margin"] >= 1
    _, out2, _ = run_cli(["rw", "--spec", nc, "--mu", "0.1"], capsys)
    assert json.loads(out2)["result"]["mu_omega"] == pytest.approx(1.0)


def test_exit_codes(files, capsys):
    c4 = files("cycle4.json", {"family": "nearest_neighbor", "r": 4, "n": 1})
    assert run_cli(["pc", "--spec", c4, "--lambda", "0.25"], capsys)[0] == 3
    bad = files("so.json", {"family": "spread_out", "r": 2, "n": 2, "L": 1})
    assert run_cli(["rw", "--spec", bad], capsys)[0] == 2
    big = files("big.json", {"family": "nearest_neighbor", "r": 3, "n": 3})
    assert run_cli(["oracle", "--spec", big, "--p", "0.5"], capsys)[0] == 4
    sing = files("sing.json", {"family": "nearest_neighbor", "r": 4, "n": 1})
    assert run_cli(["rw", "--spec", sing, "--mu-omega", "1.0"], capsys)[0] == 0
    assert run_cli(["bootstrap", "--spec", sing, "--p", "0.5", "--lambda", "0.25", "--samples", "50"], capsys)[0] == 3


def test_singularity_exit(files, tmp_path, capsys):
    c4 = files("cycle4.json", {"family": "nearest_neighbor", "r": 4, "n": 1})
    tau = tmp_path / "tau.csv"
    tau.write_text("x_index,tau\n0,1\n1,-0.5\n2,-1\n3,-0.5\n")  # tau_hat(0) = -1, so 1 + p Omega tau_hat(0) = 0 at p = 1/2
    code, _, err = run_cli(["bootstrap", "--spec", c4, "--p", "0.5", "--lambda", "2", "--tau", str(tau)], capsys)
    assert code == 5 and "dual index 0" in err


def test_mc_outputs_deterministic(files, tmp_path, capsys):
    c4 = files("cycle4.json", {"family": "nearest_neighbor", "r": 4, "n": 1})
    outs = []
    for i, workers in enumerate(("1", "2")):
        out = tmp_path / f"run{i}.csv"
        code, _, _ = run_cli(["mc", "--spec", c4, "--p", "0.5", "--samples", "1500", "--seed", "8",
                              "--workers", workers, "--out", str(out)], capsys)
        assert code == 0
        outs.append((out.read_bytes(), out.with_suffix(".json").read_bytes()))
    assert outs[0] == outs[1]
    text = outs[0][0].decode()
    assert text.startswith("# tool: hdtorus")
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header == "x_index,tau,tau_stderr,pi0,pi0_stderr"
    tau, se = read_tau_csv(tmp_path / "run0.csv", TorusSpec.cycle(4))
    assert tau[0] == 1.0 and se[0] == 0.0
    summary = json.loads(outs[0][1])["result"]
    assert {"chi", "cmax_mean", "tail"} <= set(summary)
    # the triangle command accepts that table
    code, out, _ = run_cli(["triangle", "--spec", c4, "--p", "0.5", "--tau", str(tmp_path / "run0.csv")], capsys)
    assert code == 0 and json.loads(out)["result"]["Tprime"] >= 1


def test_window_csv(files, capsys):
    nc = files("ncube8.json", {"family": "hamming", "r": 2, "n": 8})
    code, out, _ = run_cli(["window", "--spec", nc, "--lambda", "0.5", "--pc", "0.1",
                            "--eps=-0.5,0,0.5", "--budget", "200"], capsys)
    assert code == 0
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert rows[0] == "epsilon,p,chi,chi_se,cmax,cmax_se"
    assert [float(r.split(",")[0]) for r in rows[1:]] == [-0.5, 0.0, 0.5]


def test_pc_command(files, capsys):
    nc = files("ncube8.json", {"family": "hamming", "r": 2, "n": 8})
    code, out, _ = run_cli(["pc", "--spec", nc, "--lambda", "0.5", "--budget", "1000", "--seed", "2"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["interval"][0] <= res["p_c"] <= res["interval"][1]
    assert res["pOmega"] == pytest.approx(res["p_c"] * 8)
