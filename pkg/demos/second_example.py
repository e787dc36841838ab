"""The frozen-down-branch tree: compare the before-tau and after-tau conditions
as the weight split ``lam`` and the up factor vary.

Run with ``python3 demos/second_example.py``.
"""

from fractions import Fraction

from tauarb import (
    after_part,
    azema_supermartingales,
    format_fraction,
    na_check,
    progressive_enlargement,
    second_model,
    stop_at,
    validate_after_theorem,
    validate_before_theorem,
)


def flags(r):
    return "".join("T" if x else "F" for x in (r.b, r.c, r.d, r.e))


# this S keeps no-arbitrage on both sides of tau, while the conditions that
# guarantee it for every F-martingale fail
print(f"{'u':>4} {'lam':>5}  {'S^tau NA':>8} {'S-S^tau NA':>10}  before b..e   after b..e")
for u in ("2", "3"):
    for lam in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        m = second_model(u=u, lam=lam)
        G = progressive_enlargement(m.F, m.tau)
        before = na_check(m.space, G, stop_at(m.S, m.tau, G)).holds
        after = na_check(m.space, G, after_part(m.S, m.tau, G)).holds
        rb = validate_before_theorem(m.space, m.F, m.tau)
        ra = validate_after_theorem(m.space, m.F, m.tau)
        print(f"{u:>4} {format_fraction(lam):>5}  {str(before):>8} {str(after):>10}  {flags(rb):>11}  {flags(ra):>10}")

# the Azema pair does not depend on the price process, only on (P, F, tau)
m = second_model()
azema = azema_supermartingales(m.space, m.F, m.tau)
print("Z_1 =", [format_fraction(v) for v in azema.Z.at(1)])
print("Ztilde_2 =", [format_fraction(v) for v in azema.Ztilde.at(2)])
