import json
import random

import pytest

from sepkit.checker import LogicId, check_derivation, triple_valid
from sepkit.domain import DomainConfig
from sepkit.harness import (ADJ_ATOMS, MUTATIONS, SUITES, DerivationGenerator, SuiteReport,
                            commands_up_to, frame_pool, run_suite, suite_adjunction,
                            suite_expressiveness, suite_preservation,
                            suite_random_derivations)
from sepkit.syntax import parse_command, show_assertion


def test_report_lines_are_stable():
    r = SuiteReport("demo")
    r.add("a", True)
    r.add("b", False, "why")
    r.skip("c", "gated")
    r.wall_time = 3.5
    assert r.lines() == ['suite=demo case=b status=fail detail="why"',
                         "suite=demo summary cases=2 failures=1 skipped=1"]
    assert json.loads(json.dumps(r.summary()))["failures"] == 1


def test_frame_pool_is_universal(cfg, cfg2):
    from sepkit.assertions import is_universal_frame
    pool1, pool2 = frame_pool(cfg), frame_pool(cfg2)
    assert all(is_universal_frame(R, cfg) for R in pool1)
    assert not any("!->" in show_assertion(R) for R in pool1)
    assert any("!->" in show_assertion(R) for R in pool2)


def test_commands_up_to_depth():
    atoms = [parse_command(a) for a in ("free(x)", "x := 1")]
    assert len(commands_up_to(atoms, 1)) == 2
    assert len(commands_up_to(atoms, 2)) == 2 + 2 * 4 + 2


def test_preservation_on_small_domain():
    rep = suite_preservation(DomainConfig(values=(0, 1), locations=(1,)), max_frames=6)
    assert rep.ok and rep.cases > 100 and rep.skipped > 0


def test_adjunction_small():
    rep = suite_adjunction(DomainConfig(values=(0, 1), locations=(1,)), depth=2)
    assert rep.ok and rep.cases == 2 * len(commands_up_to(ADJ_ATOMS, 2))


def test_generator_builds_accepted_derivations(cfg):
    for logic in (LogicId("sl+", 1), LogicId("isl+", 2), LogicId("sil+", 1), LogicId("nc+", 2)):
        c = cfg.with_model(logic.model)
        g = DerivationGenerator(logic, c, random.Random(3))
        for _ in range(5):
            d, used = g.derivation(4)
            assert check_derivation(d, logic, c)
            assert triple_valid(d.conclusion, logic, c)


def test_random_suite_is_deterministic(cfg):
    a = suite_random_derivations(cfg, seed=5, n=16)
    b = suite_random_derivations(cfg, seed=5, n=16)
    assert [r.case for r in a.results] == [r.case for r in b.results]
    assert a.lines(True) == b.lines(True)


def test_expressiveness(cfg):
    assert suite_expressiveness(cfg).ok


@pytest.mark.parametrize("name", ["free-post", "load-post", "alloc-reuse", "frame-no-compat",
                                  "cons-flip", "no-alloc-guard", "broken-compat",
                                  "backward-star-once"])
def test_cheap_mutations_fail(cfg, name):
    m = MUTATIONS[name]
    rep = run_suite(m.suite, cfg, mutation=name)
    assert rep.failures, name


def test_every_mutation_targets_a_suite():
    assert {m.suite for m in MUTATIONS.values()} <= set(SUITES)
    assert len(MUTATIONS) >= 5
