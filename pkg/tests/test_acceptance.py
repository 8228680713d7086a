"""Acceptance criteria 1-8.  Each test prints one ``criterion N: PASS|FAIL`` line."""

import time

import pytest

from sepkit.domain import DomainConfig
from sepkit.harness import (MUTATIONS, run_suite, suite_adjunction, suite_axiom_soundness,
                            suite_compat_equiv, suite_expressiveness, suite_normalization,
                            suite_preservation, suite_random_derivations)

DEFAULT = DomainConfig()
REDUCED = DomainConfig(values=(0, 1), locations=(1,))


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail, budget=None, elapsed=None):
        timing = f" {elapsed:.1f}s/{budget}s" if budget else ""
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {title}{timing} ({detail})")
    return emit


def _run(report, n, title, rep, budget):
    ok = rep.ok and rep.wall_time < budget
    detail = f"cases={rep.cases} failures={len(rep.failures)}"
    if rep.failures:
        detail += f" first={rep.failures[0].case}"
    report(n, title, ok, detail, budget, rep.wall_time)
    assert rep.ok, rep.lines()[:5]
    assert rep.wall_time < budget


def test_criterion_1_axiom_soundness(report):
    _run(report, 1, "axiom soundness", suite_axiom_soundness(None, DEFAULT), 60)


def test_criterion_2_frame_preservation(report):
    _run(report, 2, "frame preservation", suite_preservation(DEFAULT), 120)


def test_criterion_3_compat_equivalence(report):
    rep = suite_compat_equiv(DEFAULT, seed=0, n_pairs=600)
    assert rep.cases >= 500
    _run(report, 3, "compatibility equivalence", rep, 60)


def test_criterion_4_normalization(report):
    _run(report, 4, "normalization", suite_normalization(REDUCED, k=3), 300)


def test_criterion_5_expressiveness(report):
    _run(report, 5, "expressiveness fixtures", suite_expressiveness(DEFAULT), 5)


def test_criterion_6_random_derivations(report):
    rep = suite_random_derivations(DEFAULT, seed=0, n=200)
    assert rep.cases == 200
    _run(report, 6, "soundness metamorphic suite", rep, 120)


def test_criterion_7_mutation_controls(report):
    t0 = time.perf_counter()
    caught = {}
    for name, m in sorted(MUTATIONS.items()):
        caught[name] = len(run_suite(m.suite, DEFAULT, mutation=name).failures)
    missed = [k for k, v in caught.items() if not v]
    ok = len(caught) >= 5 and not missed
    report(7, "mutation controls", ok,
           f"mutations={len(caught)} missed={missed or 'none'}", elapsed=time.perf_counter() - t0)
    assert ok, caught


def test_criterion_8_backward_adjunction(report):
    _run(report, 8, "backward adjunction", suite_adjunction(DEFAULT, depth=3), 120)
