#!/usr/bin/env python3
"""List the axiom instances of the literal catalogue that fail validation,
one line per failing schema with a sample counterexample."""

import sys

from sepkit.domain import DomainConfig
from sepkit.harness import suite_axiom_soundness


def main():
    rep = suite_axiom_soundness(None, DomainConfig(), catalogue="literal")
    seen = {}
    for f in rep.failures:
        key = "/".join(f.case.split("/")[:2])
        seen.setdefault(key, (0, f.detail))
        seen[key] = (seen[key][0] + 1, seen[key][1])
    for key, (n, example) in sorted(seen.items()):
        print(f"{key}: {n} failing instances, e.g. {example}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
