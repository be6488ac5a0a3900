import csv
import math

import pytest

from shearspec.cli import main

COUETTE = "[profile]\nexpr = x2\nh = 1\n"
TANH2 = "[profile]\nexpr = tanh(2*(x2+1))\nh = 2\n"
TANH_HALF = "[profile]\nexpr = tanh(0.5*(x2+1))\nh = 2\n"
CUBIC = "[profile]\nexpr = 1 + x2 + ((1+x2)^3)/2\nh = 2\n"


@pytest.fixture
def run(tmp_path, capsys):
    def _run(cmd, text, *extra):
        cfg = tmp_path / "run.ini"
        cfg.write_text(text)
        out = tmp_path / "out"
        code = main([cmd, "--config", str(cfg), "--out", str(out), *extra])
        return code, capsys.readouterr().out, out
    return _run


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_check_couette(run):
    code, out, _ = run("check", COUETTE)
    assert code == 0 and "inflections: none" in out


def test_check_tanh(run):
    code, out, _ = run("check", TANH2)
    assert code == 0
    line = [ln for ln in out.splitlines() if ln.startswith("inflection:")][0]
    assert "x20 = -1.0" in line and "U''' <0" in line


def test_check_not_monotone(run):
    assert run("check", "[profile]\nexpr = sin(10*x2)\nh = 1\n")[0] == 2


def test_bad_config_exit_2(run):
    assert run("check", COUETTE + "[physics]\nfoo = 1\n")[0] == 2


def test_neutral_couette(run):
    code, out, path = run("neutral", COUETTE)
    assert code == 0
    kv = dict(ln.split("=", 1) for ln in out.splitlines())
    assert float(kv["k_minus"]) == pytest.approx(1.915008048154537, abs=1e-8)
    assert kv["inflections"] == "0"
    assert (path / "neutral_modes.csv").exists() and (path / "effective_config.ini").exists()


def test_neutral_tanh_half(run):
    code, out, _ = run("neutral", TANH_HALF)
    kv = dict(ln.split("=", 1) for ln in out.splitlines())
    assert kv["inflection[0].k_C"] == "none"
    S = [float(v) for v in kv["inflection[0].S"].split(",")]
    assert len(S) == 1 and S[0] > float(kv["k_minus"])


def test_neutral_tanh2_two_roots(run):
    code, out, _ = run("neutral", TANH2 + "[physics]\ng = 1.1\n")
    kv = dict(ln.split("=", 1) for ln in out.splitlines())
    assert len(kv["inflection[0].S"].split(",")) == 2
    assert kv["inflection[0].classification"] == "two_roots"


def test_trace_couette(run):
    code, _, path = run("trace", COUETTE)
    rows = read_csv(path / "branches.csv")
    labels = {r["label"] for r in rows}
    assert labels == {"c_plus", "c_minus_lower"}
    last = [r for r in rows if r["label"] == "c_minus_lower"][-1]
    assert last["termination"].startswith("reached_segment")
    assert float(last["k"]) == pytest.approx(1.915008048154537, abs=1e-7)
    assert float(last["Re c"]) == pytest.approx(-1.0, abs=1e-9)


def test_trace_tanh_connected(run):
    code, _, path = run("trace", TANH2)
    rows = [r for r in read_csv(path / "branches.csv") if r["label"] == "c_minus_lower"]
    assert rows[-1]["termination"].startswith("reached_segment")
    assert abs(float(rows[-1]["Re c"])) < 1e-7
    assert max(float(r["Im c"]) for r in rows) > 0.1


def test_trace_cubic(run):
    code, _, path = run("trace", CUBIC)
    rows = [r for r in read_csv(path / "branches.csv") if r["label"] == "inflection_branch"]
    ks = [float(r["k"]) for r in rows]
    k0 = ks[0]
    assert all(k >= k0 for k in ks) and max(ks) == pytest.approx(5.0)
    assert all(float(r["Im c"]) > 0 for r in rows[1:])


def test_census_and_scan(run):
    code, out, path = run("census", TANH2 + "[census]\nk_list = 0.3, 1.0\n")
    assert code == 0
    rows = read_csv(path / "census.csv")
    assert [r["index"] for r in rows] == ["0", "1"]
    code, out, path = run("scan", COUETTE + "[census]\nk_list = 1.0\n")
    rows = read_csv(path / "scan.csv")
    assert len(rows) == 41 * 6
    r = rows[5]
    k, c = float(r["k"]), complex(float(r["c_R"]), float(r["c_I"]))
    exact = k / math.tanh(k) * c * c + c - 1.0
    assert complex(float(r["ReF"]), float(r["ImF"])) == pytest.approx(exact, rel=1e-9)


def test_deterministic_across_threads(run, tmp_path):
    text = TANH2 + "[census]\nk_list = 0.3, 1.0, 2.5\n"
    _, _, path = run("census", text, "--threads", "4")
    a = (path / "census.csv").read_bytes()
    _, _, path = run("census", text, "--threads", "1")
    assert (path / "census.csv").read_bytes() == a
    # re-running from the emitted effective config reproduces the output
    eff = (path / "effective_config.ini").read_text()
    _, _, path = run("census", eff, "--threads", "2")
    assert (path / "census.csv").read_bytes() == a


def test_verify_passes(run):
    code, out, path = run("verify", TANH2 + "[census]\nk_list = 0.5, 1.5\n")
    assert code == 0
    assert "census_branch k=0.5" in out and "census_branch k=1.5" in out
    assert (path / "verify.txt").read_text().count("PASS") >= 10


def test_verify_loose_tolerance_fails(run):
    code, out, _ = run("verify", COUETTE + "[solver]\nrtol = 1e-2\natol = 1e-2\n")
    assert code == 1
    assert "FAIL" in out
