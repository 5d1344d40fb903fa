# %% [markdown]
# # When the source decays too slowly
#
# The convergence results need int (1+t)^alpha |g| < inf.  With alpha = 0.5
# that means beta > 1.5.  Here we compare beta = 2 with beta = 1.2, which
# breaks the condition; the second run is a probe, reported but never failed.

# %%
from vandamp import parse_config, run_scenario
from vandamp.runner import scenario_text

for beta in (2.0, 1.2):
    cfg = parse_config(scenario_text(
        f"beta{beta}", {"family": "quadratic", "dimension": 4}, {"K": 2.0, "alpha": 0.5},
        {"family": "power_decay", "c": 0.5, "beta": beta}, {"dt": 5e-3, "t_end": 1e4, "sample_stride": 200}))
    print(f"--- beta = {beta}")
    print(cfg.classification.summary())
    res = run_scenario(cfg)
    th1 = res.verdicts["theorem1"]
    print(f"theorem 1: {th1['status']} (observed {th1['observed']}, scaled ratio {th1['trend_ratio']:.2e}, "
          f"|grad Phi(u(T))|_V' = {th1['limit_grad_vprime']:.1e})")
    print(f"exit code {res.exit_code}")

# %% [markdown]
# The slow source still lets the energy decay, and faster than t^-1.  What
# fails at T = 10^4 is the end state: it trails the source by about |g(T)|,
# so the gradient is still ~4e-6 rather than below the 1e-6 membership
# tolerance.  The hypothesis is sufficient, not necessary, so the run is
# reported as a probe and the exit code stays 0.
