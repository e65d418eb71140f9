import csv

import pytest

from epsflow.cli import EXIT_VERIFY, main
from epsflow.suites import Check


@pytest.fixture
def conf(tmp_path):
    p = tmp_path / "run.conf"
    p.write_text("Nr = 33\nNz = 32\nT = 0.05\n")
    return p


def test_run_and_resume(conf, tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(conf), "--output", str(out)]) == 0
    assert (out / "diagnostics.csv").exists()
    conf.write_text("Nr = 33\nNz = 32\nT = 0.1\n")
    assert main(["run", str(conf), "--output", str(out), "--resume", str(out / "final.epsf")]) == 0


def test_config_error_exit_code(tmp_path):
    p = tmp_path / "bad.conf"
    p.write_text("epsilon = 2.5\n")
    assert main(["run", str(p)]) == 2


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["verify", "nonsense"])
    assert info.value.code == 2


def test_verify_hardy_writes_report(tmp_path):
    assert main(["verify", "hardy", "--output", str(tmp_path)]) == 0
    with open(tmp_path / "verify_hardy.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100 and all(r["passed"] == "1" for r in rows)


def test_verify_violation_exit_code(monkeypatch, caplog):
    import epsflow.cli as cli
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [Check("hardy", "forced", 2.0, 1.0)])
    assert main(["verify", "hardy"]) == EXIT_VERIFY
    assert "violated: hardy / forced" in caplog.text


def test_verify_maxprinciple_below_one_is_informational(tmp_path):
    assert main(["verify", "maxprinciple", "--eps", "0.5", "--nu", "1", "--quick",
                 "--output", str(tmp_path)]) == 0
    with open(tmp_path / "verify_maxprinciple.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["asserted"] == "0" for r in rows)


def test_sweep_cli(conf, tmp_path):
    assert main(["sweep", str(conf), "--eps", "0,1.5", "--output", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "summary.csv").exists()
    assert main(["sweep", str(conf), "--eps", "1,2", "--output", str(tmp_path / "s2")]) == 2
