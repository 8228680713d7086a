#!/usr/bin/env python3
"""Run every suite at the default domain and write a JSON summary.

    python3 scripts/run_oracle.py [--out report.json] [--seed N] [--mutations]
"""

import argparse
import json
import sys

from sepkit.domain import DomainConfig
from sepkit.harness import MUTATIONS, SUITES, run_suite


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="oracle_report.json")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mutations", action="store_true", help="also run every mutation control")
    args = ap.parse_args(argv)

    cfg = DomainConfig()
    summary, ok = [], True
    for name in SUITES:
        rep = run_suite(name, cfg, seed=args.seed)
        print("\n".join(rep.lines()), flush=True)
        summary.append(rep.summary())
        ok &= rep.ok
    if args.mutations:
        for name, m in sorted(MUTATIONS.items()):
            rep = run_suite(m.suite, cfg, seed=args.seed, mutation=name)
            caught = bool(rep.failures)
            print(f"mutation={name} suite={m.suite} caught={caught} failures={len(rep.failures)}")
            summary.append({"mutation": name, **rep.summary()})
            ok &= caught
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
