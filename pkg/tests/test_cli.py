import sys
import types
from pathlib import Path

import pytest

from genlab.cli import main
import genlab.fixtures as fixtures_pkg


@pytest.fixture
def points_file(tmp_path):
    p = tmp_path / "pts.txt"
    p.write_text("metric abs\nreal:0/1\nreal:3/1\nreal:6/1\n")
    return str(p)


@pytest.fixture
def class_file(tmp_path):
    p = tmp_path / "cls.txt"
    p.write_text(
        "metric abs\n"
        "hypothesis evens\nfamily: lattice offset=0 step=2\n"
        "hypothesis mult3\nfamily: lattice offset=0 step=3\n"
    )
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_cover_exact(points_file, capsys):
    code, out = run_cli(capsys, "cover", "--points", points_file, "--radius", "1")
    assert code == 0
    assert "row radius=1/1 mode=exact value=3 points=3" in out


def test_cover_modes(points_file, capsys):
    for mode, value in (("greedy", 3), ("packing", 3)):
        code, out = run_cli(capsys, "cover", "--points", points_file,
                            "--radius", "1", "--mode", mode)
        assert code == 0 and f"value={value}" in out


def test_cover_empty_file(tmp_path, capsys):
    p = tmp_path / "empty.txt"
    p.write_text("")
    code, out = run_cli(capsys, "cover", "--points", str(p), "--radius", "1")
    assert code == 0 and "value=0" in out


def test_cover_discrete_atoms(tmp_path, capsys):
    p = tmp_path / "atoms.txt"
    p.write_text("metric discrete\n" + "".join(f"atom:{i}\n" for i in range(5)))
    code, out = run_cli(capsys, "cover", "--points", str(p), "--radius", "1/2")
    assert code == 0 and "value=5" in out


def test_cover_missing_file(capsys):
    code, _ = run_cli(capsys, "cover", "--points", "/nope/missing", "--radius", "1")
    assert code == 2


def test_dim_formula(class_file, capsys):
    code, out = run_cli(capsys, "dim", "--class-file", class_file,
                        "--eps", "1/2", "--eps-prime", "1/2")
    assert code == 0 and "kind=finite d=0" in out


def test_dim_brute_ground(class_file, tmp_path, capsys):
    g = tmp_path / "ground.txt"
    g.write_text("".join(f"real:{6 * k}/1\n" for k in range(-2, 3)))
    code, out = run_cli(capsys, "dim", "--class-file", class_file,
                        "--eps", "1/2", "--eps-prime", "1/2",
                        "--mode", "brute", "--ground-set", str(g), "--max-len", "4")
    assert code == 0 and "kind=lower_bound d=0" in out


def test_dim_formula_rejects_intensional(capsys):
    code, _ = run_cli(capsys, "dim", "--fixture", "weighted_metric",
                      "--eps", "3/5", "--eps-prime", "3/5", "--mode", "formula")
    assert code == 2


def test_play_deterministic(tmp_path, class_file, capsys):
    argv = [
        "play", "--class-file", class_file,
        "--generator", "gen:uniform d_star=1",
        "--adversary", "adv:enumeration member=evens seed=4",
        "--eps", "1/2", "--eps-prime", "1/2", "--r", "1/2",
        "--horizon", "8",
    ]
    out1 = tmp_path / "a.txt"
    out2 = tmp_path / "b.txt"
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()
    text = out1.read_text()
    assert "verdict judge=limit kind=eventually_correct" in text


def test_play_fixture_with_judges(capsys):
    code, out = run_cli(
        capsys, "play", "--fixture", "two_hypotheses",
        "--generator", "gen:uniform d_star=9",
        "--adversary", "adv:trap",
        "--eps", "3/10", "--eps-prime", "3/5", "--r", "1",
        "--horizon", "12", "--uus-override", "--d-star", "9",
    )
    assert code == 0
    assert "verdict judge=uniform" in out and "committed=" in out


def test_play_registry_miss(class_file, capsys):
    code, _ = run_cli(capsys, "play", "--class-file", class_file,
                      "--generator", "gen:wat", "--adversary", "adv:enumeration",
                      "--eps", "1/2", "--eps-prime", "1/2", "--r", "1/2")
    assert code == 2


def test_fixture_list_and_show(capsys):
    code, out = run_cli(capsys, "fixture", "list")
    assert code == 0 and "row name=prime_reals" in out
    code, out = run_cli(capsys, "fixture", "show", "two_hypotheses")
    assert code == 0 and "param=eps" in out and "member=even_tail" in out
    code, _ = run_cli(capsys, "fixture", "show", "nope")
    assert code == 2


def test_tournament_deterministic(tmp_path, capsys):
    argv = [
        "tournament", "--fixture", "two_hypotheses",
        "--generators", "gen:uniform d_star=9,gen:erm",
        "--adversaries", "adv:trap",
        "--eps", "3/10", "--eps-prime", "3/5", "--r", "1",
        "--horizon", "10", "--seeds", "2", "--uus-override",
    ]
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert "summary" in a.read_text()


def test_verify_exit_codes(monkeypatch, capsys):
    from genlab.fixtures import RegimeRow

    stub = types.ModuleType("stub_fixture")
    stub.run_regimes = lambda: [RegimeRow("stub", "always", "pass", True)]
    monkeypatch.setitem(fixtures_pkg._FIXTURE_MODULES, "stub", "stub_fixture")
    monkeypatch.setitem(sys.modules, "stub_fixture", stub)
    code, out = run_cli(capsys, "verify", "stub")
    assert code == 0 and "result=pass" in out and "failures=0" in out

    stub.run_regimes = lambda: [RegimeRow("stub", "always", "pass", False, "boom")]
    code, out = run_cli(capsys, "verify", "stub")
    assert code == 1 and "result=FAIL" in out


def test_verify_unknown_fixture(capsys):
    code, _ = run_cli(capsys, "verify", "bogus")
    assert code == 2
