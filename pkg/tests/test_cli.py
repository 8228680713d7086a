from pathlib import Path

import pytest
from click.testing import CliRunner

from sepkit.cli import CliConfig, main

FIX = Path(__file__).resolve().parents[1] / "src" / "sepkit" / "fixtures"


@pytest.fixture
def run():
    runner = CliRunner()
    return lambda *args: runner.invoke(main, [str(a) for a in args])


@pytest.mark.parametrize("logic,name,code", [
    ("sl+1", "sl_more_expressive", 0),
    ("isl+2", "isl_more_expressive", 0),
    ("isl+1", "wrong_frame", 1),
])
def test_check(run, logic, name, code):
    r = run("check", "--logic", logic, FIX / f"{name}.drv")
    assert r.exit_code == code, r.output
    assert ("accepted" if code == 0 else "rejected") in r.output


def test_check_parse_error(run, tmp_path):
    p = tmp_path / "bad.drv"
    p.write_text('(rule Free :conclusion "{emp} free(x {emp}")')
    assert run("check", p).exit_code == 2


def test_oracle_axiom_soundness(run):
    r = run("oracle", "--suite", "axiom-soundness", "--logic", "nc+2", "--values", "3")
    assert r.exit_code == 0
    assert "failures=0" in r.output


def test_oracle_mutation_exits_nonzero(run):
    r = run("oracle", "--suite", "axiom-soundness", "--mutate", "free-post")
    assert r.exit_code == 1
    assert "status=fail" in r.output


def test_oracle_report_file(run, tmp_path):
    out = tmp_path / "rep.json"
    r = run("oracle", "--suite", "expressiveness", "--report", out)
    assert r.exit_code == 0 and out.exists()


def test_seed_env_var(monkeypatch):
    from sepkit.cli import _seed
    monkeypatch.setenv("SEPKIT_SEED", "17")
    assert _seed(0) == 17
    monkeypatch.delenv("SEPKIT_SEED")
    assert _seed(4) == 4


def test_eval_assert(run):
    r = run("eval", "--assert", "emp")
    assert r.exit_code == 0
    assert "({x=0, y=0}, [])" in r.output
    assert "# 16 memories" in r.output


def test_eval_forward_free(run):
    r = run("eval", "--run", "free(x)", "--from", "x |-> 1", "--model", "1")
    lines = [l for l in r.output.splitlines() if l.startswith("(")]
    assert lines and all(l.endswith("[])") for l in lines)
    assert "abort" not in r.output


def test_eval_backward_free(run):
    r = run("eval", "--backward", "free(x)", "--to", "emp", "--model", "1")
    lines = [l for l in r.output.splitlines() if l.startswith("(")]
    assert lines and all(l.count("↦") == 1 for l in lines)


def test_eval_parse_error(run):
    assert run("eval", "--assert", "x |-> ").exit_code == 2


def test_domain_defaults():
    cfg = CliConfig(values=2).domain()
    assert cfg.locations == (1,)
    assert CliConfig().domain().locations == (1, 2)
