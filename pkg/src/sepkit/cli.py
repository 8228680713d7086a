"""Command-line entry point: ``sepkit check | oracle | eval``."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import click

from .assertions import eval_assertion, to_dnf
from .checker import CheckerOptions, LogicId, check_derivation
from .domain import DEFAULT_SPARES, DomainConfig
from .drvfile import DrvSyntaxError, load_derivation
from .harness import MUTATIONS, SUITES, run_suite
from .semantics import SemanticsKind, run_backward, run_forward
from .syntax import ParseError, parse_assertion, parse_command, show_assertion


@dataclass
class CliConfig:
    values: int = 3
    locations: Optional[tuple] = None
    program_vars: tuple = ("x", "y")
    logical_vars: tuple = ()
    model: int = 1
    seed: int = 0
    report: Optional[str] = None

    def domain(self) -> DomainConfig:
        locs = self.locations
        if locs is None:
            # default {1,2}, clipped to what the value range can hold
            locs = tuple(l for l in (1, 2) if l < self.values) or (0,)
        lv = self.logical_vars or tuple(p + "'" for p in self.program_vars) + DEFAULT_SPARES
        return DomainConfig(tuple(range(self.values)), locs, self.program_vars, lv, self.model)


def _split(text: Optional[str]) -> tuple:
    if not text:
        return ()
    return tuple(t for t in text.replace(",", " ").split() if t)


def _seed(seed: int) -> int:
    env = os.environ.get("SEPKIT_SEED")
    return int(env) if env not in (None, "") else seed


def domain_options(f):
    opts = [
        click.option("--values", type=click.IntRange(1, 6), default=3, show_default=True,
                     help="number of integer values 0..n-1 (null is added)"),
        click.option("--locations", default=None, help="location list, e.g. '1,2'"),
        click.option("--vars", "program_vars", default="x,y", show_default=True,
                     help="program variables"),
        click.option("--logical-vars", default=None, help="logical variables (primed)"),
        click.option("--model", type=click.IntRange(1, 2), default=None,
                     help="heap model; defaults to the logic's model, else 1"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _cli_config(values, locations, program_vars, logical_vars, model, seed=0, report=None):
    locs = tuple(int(x) for x in _split(locations)) if locations else None
    return CliConfig(values, locs, _split(program_vars), _split(logical_vars), model or 1,
                     _seed(seed), report)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Finite-domain workbench for separation-style program logics."""


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--logic", default=None, help="logic id such as sl+1 or isl+2; overrides the file")
@click.option("--catalogue", type=click.Choice(["repaired", "literal"]), default="repaired",
              show_default=True)
@domain_options
def check(path, logic, catalogue, values, locations, program_vars, logical_vars, model):
    """Check a derivation file.  Exit 0 if accepted, 1 if rejected, 2 on parse errors."""
    try:
        d, file_logic = load_derivation(path)
        lid = LogicId.parse(logic) if logic else file_logic or LogicId("sl+", model or 1)
        cc = _cli_config(values, locations, program_vars, logical_vars, model or lid.model)
        cfg = cc.domain().with_model(lid.model)
    except (DrvSyntaxError, ParseError, ValueError) as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(2)
    v = check_derivation(d, lid, cfg, CheckerOptions(catalogue=catalogue))
    click.echo(f"{lid}: {v}")
    sys.exit(0 if v else 1)


@main.command()
@click.option("--suite", type=click.Choice(SUITES + ("all",)), default="all", show_default=True)
@click.option("--logic", default=None, help="restrict axiom soundness to one logic")
@click.option("--mutate", type=click.Choice(sorted(MUTATIONS)), default=None,
              help="run with an intentionally broken variant")
@click.option("--seed", type=int, default=0, show_default=True, help="overridden by SEPKIT_SEED")
@click.option("--report", type=click.Path(dir_okay=False), default=None,
              help="write the JSON summary here")
@click.option("--verbose", is_flag=True, help="list passing and skipped cases too")
@domain_options
def oracle(suite, logic, mutate, seed, report, verbose, values, locations, program_vars,
           logical_vars, model):
    """Run re-verification suites.  Exit status is nonzero iff a suite fails."""
    cc = _cli_config(values, locations, program_vars, logical_vars, model, seed, report)
    cfg = cc.domain()
    lid = LogicId.parse(logic) if logic else None
    names = SUITES if suite == "all" else (suite,)
    if mutate and suite == "all":
        names = (MUTATIONS[mutate].suite,)
    reports = []
    for name in names:
        rep = run_suite(name, cfg, logic=lid, seed=cc.seed, mutation=mutate)
        reports.append(rep)
        for line in rep.lines(verbose):
            click.echo(line)
    if report:
        with open(report, "w", encoding="utf-8") as fh:
            json.dump([r.summary() for r in reports], fh, indent=2)
    sys.exit(0 if all(r.ok for r in reports) else 1)


def _listing(S, cfg: DomainConfig) -> list:
    vs = tuple(v for v in cfg.program_vars) + tuple(v for v in S.minimize().vars
                                                    if v not in cfg.program_vars)
    return [str(m) for m in S.memories(vs)]


@main.command("eval")
@click.option("--assert", "assertion", default=None, help="assertion to evaluate")
@click.option("--run", "run_cmd", default=None, help="command to run forward")
@click.option("--from", "from_", default=None, help="precondition for --run")
@click.option("--backward", "bw_cmd", default=None, help="command to run backward")
@click.option("--to", "to", default=None, help="postcondition for --backward")
@click.option("--isl", is_flag=True, help="use the error-tagged forward semantics")
@click.option("--dnf", is_flag=True, help="print the DNF rendering of --assert")
@domain_options
def eval_(assertion, run_cmd, from_, bw_cmd, to, isl, dnf, values, locations, program_vars,
          logical_vars, model):
    """Evaluate an assertion, or run a command forward or backward."""
    cfg = _cli_config(values, locations, program_vars, logical_vars, model).domain()
    try:
        if assertion is not None:
            a = parse_assertion(assertion)
            if dnf:
                click.echo(show_assertion(to_dnf(a, cfg).assertion()))
                return
            _print_set(eval_assertion(a, cfg), cfg)
        elif run_cmd is not None:
            P = eval_assertion(parse_assertion(from_ or "emp"), cfg)
            c = parse_command(run_cmd)
            if isl:
                out = run_forward(c, P, SemanticsKind.FORWARD_ISL)
                click.echo("[ok]")
                _print_set(out.ok, cfg)
                click.echo("[er]")
                _print_set(out.er, cfg)
            else:
                _print_set(run_forward(c, P, SemanticsKind.FORWARD_SL), cfg)
        elif bw_cmd is not None:
            Q = eval_assertion(parse_assertion(to or "emp"), cfg)
            _print_set(run_backward(parse_command(bw_cmd), Q), cfg)
        else:
            raise click.UsageError("one of --assert, --run or --backward is required")
    except (ParseError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)


def _print_set(S, cfg):
    rows = _listing(S, cfg)
    for r in rows:
        click.echo(r)
    if getattr(S, "abort", False):
        click.echo("abort")
    click.echo(f"# {len(rows)} memories")


if __name__ == "__main__":
    main()
