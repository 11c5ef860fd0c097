import pytest

from nlsball.cli import EXIT_IO, EXIT_NUMERICAL, EXIT_USAGE, main
from nlsball.io import read_profile


def _data_lines(path):
    return path.read_text().splitlines()


def test_groundstate_writes_profile(tmp_path):
    rc = main(["groundstate", "--d", "2", "--alpha", "4", "--b", "1", "--out-dir", str(tmp_path)])
    assert rc == 0
    p = read_profile(tmp_path / "groundstate.profile.txt")
    assert p.mass == pytest.approx(1.9061038041, rel=1e-8)
    assert (tmp_path / "groundstate.csv").exists()
    assert (tmp_path / "groundstate.config.txt").exists()


def test_sweep_deterministic(tmp_path):
    argv = ["sweep", "--d", "1", "--alpha", "6", "--b-lo", "0.5", "--b-hi", "10", "--step", "0.5"]
    assert main(argv + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out-dir", str(tmp_path / "b")]) == 0
    a = _data_lines(tmp_path / "a" / "sweep.csv")
    b = _data_lines(tmp_path / "b" / "sweep.csv")
    assert a == b
    assert len(a) == 1 + 20


def test_seed_profile_continuation(tmp_path):
    assert main(["groundstate", "--b", "1", "--out-dir", str(tmp_path)]) == 0
    seed = tmp_path / "groundstate.profile.txt"
    out = tmp_path / "c"
    assert main(["groundstate", "--b", "3", "--seed-profile", str(seed), "--out-dir", str(out)]) == 0
    assert read_profile(out / "groundstate.profile.txt").b == 3.0


def test_evolve_and_perturb(tmp_path):
    assert main(["evolve", "--b", "1", "--t-end", "0.05", "--h", "0.01", "--out-dir", str(tmp_path)]) == 0
    lines = _data_lines(tmp_path / "evolve.csv")
    assert lines[0] == "t,mass,energy,linf,drift"
    assert len(lines) == 1 + 6
    rc = main(["perturb", "--b", "0", "--alpha", "6", "--amplitude", "0.99", "--t-end", "0.1",
               "--h", "0.005", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert "StableOscillation" in (tmp_path / "perturb.csv").read_text()


def test_converge_commands(tmp_path):
    assert main(["converge-large", "--b-list", "10,25", "--out-dir", str(tmp_path)]) == 0
    rows = _data_lines(tmp_path / "converge-large.csv")
    errs = [float(r.split(",")[1]) for r in rows[1:]]
    assert errs[0] > errs[1]
    assert main(["converge-small", "--b-list=-2,-2.3", "--out-dir", str(tmp_path)]) == 0


def test_branch_command(tmp_path):
    rc = main(["branch", "--alpha", "6", "--b-lo", "1", "--b-hi", "6", "--out-dir", str(tmp_path)])
    assert rc == 0
    b_star = float(_data_lines(tmp_path / "branch.csv")[1].split(",")[0])
    assert b_star == pytest.approx(3.2945, abs=2e-3)


def test_usage_exit_code(tmp_path, capsys):
    assert main(["groundstate", "--alpha", "-1", "--b", "1", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    assert "alpha" in capsys.readouterr().err
    assert main(["groundstate", "--b", "-5", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def test_numerical_exit_code(tmp_path, capsys):
    # The mass maximum lies near b = 3.29, outside [5, 8].
    rc = main(["branch", "--alpha", "6", "--b-lo", "5", "--b-hi", "8", "--out-dir", str(tmp_path)])
    assert rc == EXIT_NUMERICAL
    assert "NoInteriorMax" in capsys.readouterr().err


def test_io_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a profile\n")
    rc = main(["groundstate", "--b", "1", "--seed-profile", str(bad), "--out-dir", str(tmp_path)])
    assert rc == EXIT_IO
    rc = main(["groundstate", "--b", "1", "--config", str(tmp_path / "missing.cfg"), "--out-dir", str(tmp_path)])
    assert rc == EXIT_IO


def test_plot_option(tmp_path):
    pytest.importorskip("matplotlib")
    rc = main(["sweep", "--b-lo", "0", "--b-hi", "1", "--step", "0.5", "--plot", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "sweep.svg").read_text().lstrip().startswith("<?xml")
