from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import pytest

from locc_ledger.cli import main
from locc_ledger.errors import ConfigError
from locc_ledger.report import fmt_real, to_csv
from locc_ledger.scenarios import COLUMNS, Scenario, builtin, load_scenarios, run_scenario

ROOT = Path(__file__).resolve().parents[1]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fmt_real():
    assert fmt_real(-0.0) == "0"
    assert fmt_real(-1e-15) == "0"
    assert fmt_real(1 / 3) == "0.333333333"
    assert fmt_real(None) == ""


def test_builtin_ex1(capsys):
    rows = run_scenario(builtin("ex1-full-info"))
    assert [r.trial for r in rows] == ["0", "aggregate"]
    r = rows[0]
    assert (r.I_total, r.E_f, r.E_i, r.n_bits) == pytest.approx((2, 1, 3, 6))
    assert abs(r.gap) < 1e-7 and r.saturated
    chain = run_scenario(builtin("ex1-bxor-chain"))[0]
    assert (chain.I_total, chain.E_distilled) == pytest.approx((1, 2))


def test_run_is_byte_identical(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"scenarios": [{"name": "ex1-bxor-chain"}, {"name": "hashing-48"}]}))
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        assert main(["run", str(cfg), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = _rows(outs[0].decode())
    assert list(rows[0].keys()) == list(COLUMNS)
    assert all(r["runtime"] == "" for r in rows)


def test_only_and_unknown(tmp_path, capsys):
    cfg = ROOT / "scenarios" / "catalogue.json"
    assert main(["run", str(cfg), "--only", "ec-five-qubit"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert {r["scenario"] for r in rows} == {"ec-five-qubit"}
    assert rows[0]["I_total"] == "4" and rows[0]["gap"] == "0"
    assert main(["run", str(cfg), "--only", "nope"]) == 2


def test_catalogue_config_loads():
    names = [s.name for s in load_scenarios(ROOT / "scenarios" / "catalogue.json")]
    for needed in ("ex1-full-info", "ex1-bxor-chain", "ex2-bxor-chain", "ex3-qutrit-partial", "ec-bitflip3"):
        assert needed in names


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    bad.write_text(json.dumps({"scenarios": [{"name": "x", "protocol": "teleport"}]}))
    assert main(["run", str(bad)]) == 2
    bad.write_text(json.dumps({"scenarios": [{"name": "x", "protocol": "bxor_chain", "params": {"n_copies": 2}}]}))
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(ConfigError):
        Scenario("x", "bxor_chain", backend="gpu")


def test_verify_bound_cli(capsys):
    assert main(["verify-bound", "--trials", "0"]) == 0
    assert capsys.readouterr().out.strip() == ",".join(COLUMNS)
    assert main(["verify-bound", "--trials", "3", "--dims", "64x64"]) == 2
    assert main(["verify-bound", "--trials", "12", "--dims", "2,3", "--seed", "5"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 13 and rows[-1]["trial"] == "aggregate"


def test_sweep_cli(capsys):
    p = "0.9,0.0333333333333333,0.0333333333333333,0.0333333333333334"
    assert main(["sweep", "breeding", "--n", "24", "--p", p, "--margin", "10", "--trials", "3"]) == 0
    out = capsys.readouterr()
    assert len(_rows(out.out)) == 4 and "identified=" in out.err
    assert main(["sweep", "hashing", "--n", "24", "--p", p, "--margin", "10", "--trials", "3"]) == 2
    assert main(["sweep", "hashing", "--n", "24", "--p", "0.5,0.5", "--trials", "3"]) == 2


def test_report_json_with_transcripts(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"scenarios": [{"name": "ex1-two-copy"}]}))
    out = tmp_path / "r.json"
    assert main(["report", "--format", "json", "--out", str(out), "--scenarios", str(cfg), "--transcripts"]) == 0
    body = json.loads(out.read_text())
    assert body["columns"] == list(COLUMNS)
    tr = body["rows"][0]["transcripts"]
    # 4 labels x 4 equiprobable outcome pairs for Alice
    assert len(tr) == 16 and sum(t["p"] for t in tr) == pytest.approx(1)
    assert main(["report", "--transcripts", "--scenarios", str(cfg)]) == 2  # csv cannot carry them


def test_ensemble_scenarios(tmp_path):
    s = Scenario.from_dict(
        {"name": "u", "ensemble": {"constructor": "uniform_bell_ensemble", "params": {"d": 2, "copies": 1}},
         "protocol": "computational"}
    )
    (r, _) = run_scenario(s)
    assert r.I_total == pytest.approx(1) and r.backend == "matrix"
    rnd = Scenario.from_dict(
        {"name": "r", "ensemble": {"constructor": "random_pure_ensemble", "params": {"dA": 2, "dB": 3, "size": 2}},
         "protocol": "random_protocol", "trials": 3, "seed": 4}
    )
    a, b = run_scenario(rnd), run_scenario(rnd)
    assert to_csv(a) == to_csv(b) and len(a) == 4
    with pytest.raises(ConfigError):
        Scenario.from_dict({"name": "z", "ensemble": {}, "protocol": "bxor_chain"})


def test_timing_fills_runtime():
    rows = run_scenario(builtin("ex1-two-copy"), timing=True)
    assert all(r.runtime is not None and r.runtime >= 0 for r in rows)


def test_zero_trials():
    assert run_scenario(Scenario("z", "bxor_chain", {"n_copies": 3}, trials=0)) == []
