"""Fuzz the equivalent conditions on seeded random models and tally the patterns.

Run with ``python3 demos/fuzz_conditions.py [count]``.
"""

import sys
from collections import Counter

from tauarb import is_honest, random_instance, validate_after_theorem, validate_before_theorem

count = int(sys.argv[1]) if len(sys.argv) > 1 else 300

before, after = Counter(), Counter()
for seed in range(count):
    space, F, tau = random_instance(seed)
    r = validate_before_theorem(space, F, tau)
    before[(r.b, r.c, r.d, r.e)] += 1

    space, F, tau = random_instance(seed, honest=True)
    if is_honest(F, tau).holds:
        r = validate_after_theorem(space, F, tau)
        after[(r.b, r.c, r.d, r.e)] += 1


def table(title, counts):
    print(title)
    for pattern, n in counts.most_common():
        mark = "" if len(set(pattern)) == 1 else "   <- conditions disagree"
        print("  ", "".join("T" if x else "F" for x in pattern), n, mark)


table(f"before tau, {count} models (b c d e)", before)
table(f"after tau, {sum(after.values())} honest models (b c d e)", after)
