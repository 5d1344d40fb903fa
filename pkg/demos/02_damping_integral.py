# %% [markdown]
# # The exponential-of-friction integral
#
# With Gamma(t, tau) = int_tau^t gamma, the integral of exp(-Gamma) over
# [tau, inf) measures how long the friction takes to "forget" time tau.
# It is bounded by (2/K)(1+tau)^alpha once tau is past tau0.

# %%
from vandamp import DampingSchedule, lemma1_check, tau0

print(f"{'K':>4} {'alpha':>5} {'tau':>8} {'integral':>12} {'bound':>12} {'ratio':>6}")
for K in (0.5, 2.0):
    for alpha in (0.0, 0.5, 0.7):
        sched = DampingSchedule("power", K, alpha)
        for off in (0.0, 10.0, 1000.0):
            tau = tau0(sched) + off
            res = lemma1_check(sched, tau)
            print(f"{K:4} {alpha:5} {tau:8.2f} {res.lhs:12.5g} {res.rhs:12.5g} {res.lhs / res.rhs:6.3f}")

# %% [markdown]
# For constant friction the integral is exactly 1/K, half the bound.  For
# alpha > 0 the ratio starts higher near tau0 and comes down towards 1/2 as
# tau grows and the friction looks locally constant.
