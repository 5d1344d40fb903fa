# %% [markdown]
# # A damped nonlinear string
#
# u_tt + K (1+t)^-1/2 u_t - u_xx + u^3 = g on (0, 1) with Dirichlet ends,
# 64 interior finite-difference nodes.

# %%
import numpy as np

from vandamp import (DampingSchedule, IntegratorConfig, NormTriple, ScalarNonlinearity, SourceTerm,
                     build_wave_problem, default_initial, integrate, interpolation_constant)

prob = build_wave_problem(64, ScalarNonlinearity("cubic", 1.0, 0.0))
norms = NormTriple(prob)
print("interpolation constant:", interpolation_constant(norms, m=1000))

# %%
sched = DampingSchedule("power", 3.0, 0.5)
x = np.arange(1, 65) / 65
direction = np.sin(3 * np.pi * x)
direction /= prob.hnorm(direction)
src = SourceTerm("exp_decay", direction, c=1.0, rate=0.1)
ini = default_initial(prob, 1.0, shape="bump")
rec = integrate(IntegratorConfig(0.01, 5000.0, 50), prob, sched, src, ini)

for t in (0, 10, 100, 1000, 5000):
    k = np.searchsorted(rec.t, t)
    print(f"t={rec.t[k]:7.1f}  E={rec.E[k]:.3e}  |u|_V={rec.dist_V[k]:.3e}")

# %% [markdown]
# The lowest mode dominates: its amplitude decays like exp(-int gamma / 2),
# i.e. exp(-K sqrt(t)) here, much faster than any power.
