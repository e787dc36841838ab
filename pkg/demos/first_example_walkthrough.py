"""Walk through the two-period binomial tree with tau = 1 on w3 and 2 elsewhere.

Run with ``python3 demos/first_example_walkthrough.py``.
"""

from tauarb import (
    azema_supermartingales,
    brute_force_na,
    first_model,
    format_fraction,
    format_time,
    gains,
    na_check,
    one_hitting_times,
    progressive_enlargement,
    qe_measures,
    stop_at,
    zero_hitting_times,
)


def show(label, row):
    print(f"  {label:<10}", "  ".join(format_fraction(v) for v in row))


m = first_model()
space, F, S, tau = m.space, m.F, m.S, m.tau
print("outcomes  ", space.outcomes)
print("weights   ", [format_fraction(w) for w in space.weights])
print("tau       ", tau.values)

# Azema supermartingales Z_n = P[tau > n | F_n] and Ztilde_n = P[tau >= n | F_n]
azema = azema_supermartingales(space, F, tau)
for n in range(space.horizon + 1):
    show(f"Z_{n}", azema.Z.at(n))
    show(f"Zt_{n}", azema.Ztilde.at(n))

for label, times in (("R", zero_hitting_times(azema)), ("sigma", one_hitting_times(azema))):
    for k, t in enumerate(times, 1):
        print(f"  {label + str(k):<10}", "  ".join(format_time(v) for v in t.values))

# S is an F-martingale, but stopped at tau it is not one in the enlarged filtration
G = progressive_enlargement(F, tau)
stopped = stop_at(S, tau, G)
verdict = na_check(space, G, stopped)
print("no arbitrage for S stopped at tau:", verdict.holds)
print("violations:", verdict.violations)
show("gains", gains(verdict.strategy, stopped))

# the brute-force search over {-1, 0, 1} strategies agrees
print("brute force agrees:", brute_force_na(space, G, stopped).holds == verdict.holds)

# density of the two measures that make the truncated processes martingales
Qe, Qe_tilde = qe_measures(space, azema)
show("dQe/dP", Qe.terminal)
show("dQe~/dP", Qe_tilde.terminal)
