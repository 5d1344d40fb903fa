# %% [markdown]
# # How fast does the energy go to zero?
#
# A 4-dimensional quadratic potential, friction K (1+t)^-alpha and a
# source decaying like (1+t)^-(1.2+alpha).  For each alpha we integrate to
# t = 10^4 and look at the scaled energy (1+t)^(2 alpha) E(t).

# %%
import numpy as np

from vandamp import (DampingSchedule, IntegratorConfig, SourceTerm, default_initial, integrate,
                     quadratic_problem, scaled_energy_trend)
from vandamp.diagnostics import decay_fit

prob = quadratic_problem(4, eig_min=1.0, eig_max=4.0)
ini = default_initial(prob, offset=1.0, seed=2)
direction = np.eye(4)[0]

# %%
for alpha in (0.25, 0.5, 0.75):
    sched = DampingSchedule("power", 2.0, alpha)
    src = SourceTerm("power_decay", direction, c=0.5, beta=1.2 + alpha)
    rec = integrate(IntegratorConfig(5e-3, 1e4, 200), prob, sched, src, ini, nu=(2 * alpha,))
    fit = decay_fit(rec, "E", 0.5, nu=2 * alpha)
    trend = scaled_energy_trend(rec, 2 * alpha)
    print(f"alpha={alpha}: E(T)={rec.E[-1]:.2e}  fitted slope {fit.slope:.2f}  "
          f"scaled ratio {trend.ratio:.1e} ({'little-o' if trend.passed else 'not yet'})")

# %% [markdown]
# The fitted slope sits near -2 beta: once the free motion has died out the
# energy is slaved to the source, u ~ ubar + A^-1 g.  Without a source the
# decay is set by the friction alone:

# %%
sched = DampingSchedule("power", 2.0, 0.5)
rec = integrate(IntegratorConfig(5e-3, 1e4, 200), prob, sched, SourceTerm.zero(4), ini)
print("g = 0:", f"E(100)={rec.E[np.searchsorted(rec.t, 100)]:.2e}", f"E(1e4)={rec.E[-1]:.2e}")
