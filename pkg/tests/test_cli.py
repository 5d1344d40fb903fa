import subprocess

import pytest

from vandamp.cli import main

CONFIG = """
[problem]
family = quadratic
dimension = 2

[damping]
K = 2
alpha = 0.5

[source]
family = power_decay
c = 0.5
beta = 1.75

[integrator]
t_end = 5000
"""


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "s.cfg"
    p.write_text(CONFIG)
    return p


def test_run_writes_csv(config, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["run", str(config), "--csv", str(out)]) == 0
    assert out.read_text().startswith("t,E,Etilde,p,speed,dist_V,gradnorm_Vp,I_nu_1.0\n")
    assert '"theorem1"' in capsys.readouterr().out


def test_fit_on_emitted_csv(config, tmp_path, capsys):
    out = tmp_path / "s.csv"
    main(["run", str(config), "--csv", str(out)])
    capsys.readouterr()
    assert main(["fit", str(out), "--nu", "1.0"]) == 0
    assert "consistent" in capsys.readouterr().out


def test_classify_prints_report(config, capsys):
    assert main(["classify", str(config)]) == 0
    out = capsys.readouterr().out
    assert "nu_max = 1.5" in out and "probe scenario: no" in out


def test_lemma1_command(capsys):
    assert main(["lemma1", "--K", "2", "--alpha", "0", "--tau", "3"]) == 0
    out = capsys.readouterr().out
    assert "lhs = 0.5" in out and "PASS" in out


def test_bad_config_lists_errors(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(CONFIG.replace("alpha = 0.5", "alpha = 1.0") + "[diagnostics]\nnu = 3\n")
    assert main(["classify", str(p)]) == 1
    err = capsys.readouterr().err
    assert err.count("config error") >= 2


def test_missing_csv_is_io_error(tmp_path):
    assert main(["fit", str(tmp_path / "nope.csv"), "--nu", "1"]) == 3


def test_suite_command(tmp_path, capsys):
    assert main(["suite", "lemma1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "lemma1_summary.json").exists()
    assert "120/120" in capsys.readouterr().out


def test_console_script_installed():
    res = subprocess.run(["vandamp", "lemma1", "--K", "1", "--alpha", "0.5", "--tau", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "PASS" in res.stdout
