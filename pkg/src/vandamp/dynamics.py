"""Fixed-step RK4 integration of u'' + gamma(t) u' + A u + f(u) = g(t).

The second-order equation is integrated as the first-order system
(u, v)' = (v, g - gamma v - A u - f(u)).  gamma and g are evaluated at the
RK4 stage times so the scheme keeps fourth order with time-dependent
coefficients.  The inner loop is compiled with numba (see ``_kernel``).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .diagnostics import RecordBuilder
from .errors import PreconditionError, StabilityError
from .problem import NormTriple
from .rng import SplitMix64

log = logging.getLogger(__name__)

RK4_STABILITY_LIMIT = 2.8
_CHUNK_VALUES = 1 << 21  # floats per state buffer handed to the kernel


@dataclass(frozen=True, eq=False)
class TrajectoryState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        v = np.array(self.v, dtype=float).ravel()
        if u.shape != v.shape:
            raise PreconditionError("position and velocity dimensions differ")
        if not self.t >= 0:
            raise PreconditionError("state time must be nonnegative")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise StabilityError(f"non-finite state at t = {self.t}", t=self.t)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    sample_stride: int = 1
    stability_margin: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if not self.t_end >= 0:
            raise PreconditionError("t_end must be nonnegative")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise PreconditionError("sample_stride must be a positive integer")
        if not 0 < self.stability_margin <= 1:
            raise PreconditionError("stability_margin must lie in (0, 1]")

    @property
    def n_samples(self):
        """Samples after the initial one; the horizon is rounded up to a whole stride."""
        if self.t_end == 0:
            return 0
        return int(math.ceil(self.t_end / (self.dt * self.sample_stride) - 1e-9))


def _model(problem, schedule, source):
    A = problem.A
    a_kind = {"zero": 0, "dense": 1, "tridiagonal": 2}[A.kind]
    a_mat = np.ascontiguousarray(A.dense) if A.kind == "dense" else np.zeros((1, 1))
    a_diag = np.array(A.diag) if A.kind == "tridiagonal" else np.zeros(1)
    a_off = np.array(A.off) if A.kind == "tridiagonal" and A.n > 1 else np.zeros(1)
    nl = problem.nonlinearity
    f_kind = 0 if nl is None else {"cubic": 1, "box": 2}[nl.kind]
    f_p = np.array([0.0, 0.0]) if nl is None else np.array([nl.coef, nl.shift])
    if schedule.kind == "tabulated":
        gam_kind, gam_p = 1, np.zeros(2)
        tab_t, tab_g = np.array(schedule.table_t), np.array(schedule.table_gamma)
    else:
        gam_kind, gam_p = 0, np.array([schedule.strength, schedule.alpha])
        tab_t, tab_g = np.zeros(2), np.zeros(2)
    g_kind = {"zero": 0, "power_decay": 1, "exp_decay": 2, "modulated_power": 3}[source.family]
    g_p = np.array([source.c, source.beta, source.rate, source.omega])
    g_dir = np.ascontiguousarray(source.direction, dtype=float)
    if g_dir.shape != (problem.n,):
        raise PreconditionError("source direction has the wrong dimension")
    return (a_kind, a_mat, a_diag, a_off, f_kind, f_p, gam_kind, gam_p, tab_t, tab_g, g_kind, g_p, g_dir)


def rhs(state, problem, schedule, source):
    """(du, dv) = (v, g(t) - gamma(t) v - A u - f(u))."""
    u, v = state.u, state.v
    dv = source(state.t) - schedule(state.t) * v - problem.grad(u)
    return v.copy(), dv


def step(state, dt, problem, schedule, source):
    """One classical RK4 step."""
    u, v = state.u.copy(), state.v.copy()
    out_t, out_u, out_v = np.empty(1), np.empty((1, problem.n)), np.empty((1, problem.n))
    _, bad = _kernel.rk4_run(u, v, state.t, 0, float(dt), 1, 1, out_t, out_u, out_v,
                             *_model(problem, schedule, source))
    if bad >= 0:
        raise StabilityError(f"non-finite state after the step from t = {state.t}", step=0, t=state.t)
    return TrajectoryState(state.t + dt, u, v)


def spectral_bound(problem, iterations=200, tol=1e-6):
    """Upper estimate of lambda_max(A): power iteration inflated by 10 %, or the
    exact bound when the problem carries one (4/h^2 for the wave family)."""
    if problem.lambda_max_exact is not None:
        return float(problem.lambda_max_exact)
    A = problem.A
    if A.kind == "zero":
        return 0.0
    x = 1.0 + 0.1 * SplitMix64(12345).uniforms(A.n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iterations):
        y = A.matvec(x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(x @ y)
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return 1.1 * lam


def trust_radius(problem, initial):
    """Heuristic sup-norm radius for the Lipschitz part of the stability guard."""
    return 2.0 * max(float(np.max(np.abs(initial.u))), float(np.max(np.abs(problem.ubar)))) + 1.0


def stable_dt(problem, initial, margin=0.5):
    """Largest dt allowed by dt sqrt(lambda_max + Lip f) <= 2.8 margin."""
    lip = 0.0 if problem.nonlinearity is None else problem.nonlinearity.lipschitz(trust_radius(problem, initial))
    rate = math.sqrt(spectral_bound(problem) + lip)
    return math.inf if rate == 0.0 else RK4_STABILITY_LIMIT * margin / rate


def default_initial(problem, offset=1.0, seed=0, v0=0.0, shape="random"):
    """u(0) = ubar + offset * d, v(0) = v0 * e with unit-H directions d, e.

    ``shape="bump"`` uses sin(pi x) on the grid (the smooth wave-problem default).
    """
    n = problem.n
    if shape == "bump":
        x = np.arange(1, n + 1) / (n + 1)
        d = np.sin(math.pi * x)
        d = d / problem.hnorm(d)
    else:
        d = SplitMix64(seed).normals(n)
        d = d / problem.hnorm(d)
    e = SplitMix64(seed + 1).normals(n)
    e = e / problem.hnorm(e)
    return TrajectoryState(0.0, problem.ubar + offset * d, v0 * e)


def integrate(config, problem, schedule, source, initial, observers=(), nu=(), checkpoints=16,
              check_stability=True):
    """Run RK4 from ``initial`` to the configured horizon and return the EnergyRecord.

    Each sampled state is passed to every callable in ``observers``.  Reruns with
    identical inputs are bit-identical.
    """
    if initial.u.shape != (problem.n,):
        raise PreconditionError("initial state has the wrong dimension")
    if check_stability:
        limit = stable_dt(problem, initial, config.stability_margin)
        if config.dt > limit * (1 + 1e-12):
            raise PreconditionError(
                f"dt = {config.dt} violates the RK4 stability guard (max {limit:.4g} at margin "
                f"{config.stability_margin})")
    model = _model(problem, schedule, source)
    stride = int(config.sample_stride)
    total = config.n_samples
    dts = config.dt * stride
    times = initial.t + dts * np.arange(total + 1)
    builder = RecordBuilder(problem, schedule, source, times, nu=nu, checkpoints=checkpoints,
                            norms=NormTriple(problem))
    builder.add([initial.t], initial.u[None, :], initial.v[None, :])
    for obs in observers:
        obs(initial)
    u, v = initial.u.copy(), initial.v.copy()
    chunk = max(1, _CHUNK_VALUES // max(1, problem.n))
    done = 0
    meta = {"dt": config.dt, "sample_stride": stride}
    while done < total:
        m = min(chunk, total - done)
        out_t = np.empty(m)
        out_u = np.empty((m, problem.n))
        out_v = np.empty((m, problem.n))
        got, bad = _kernel.rk4_run(u, v, initial.t, done * stride, config.dt, stride, m,
                                   out_t, out_u, out_v, *model)
        # recompute sample times exactly as the record's grid
        out_t[:got] = times[done + 1:done + 1 + got]
        with np.errstate(over="ignore", invalid="ignore"):
            builder.add(out_t[:got], out_u[:got], out_v[:got])
        for obs in observers:
            for j in range(got):
                obs(TrajectoryState(out_t[j], out_u[j], out_v[j]))
        done += got
        if bad >= 0:
            t_bad = initial.t + bad * config.dt
            with np.errstate(over="ignore", invalid="ignore"):
                record = builder.finish(complete=False, meta=meta)
            raise StabilityError(f"integration blew up at step {bad} (t = {t_bad:.6g})",
                                 step=int(bad), t=t_bad, record=record)
    return builder.finish(meta=meta)


def reference_solve(config, problem, schedule, source, initial, observers=(), nu=(), checkpoints=16):
    """Same run with dt/10, sampled on the coarse grid (test oracle)."""
    fine = IntegratorConfig(config.dt / 10.0, config.t_end, config.sample_stride * 10, config.stability_margin)
    return integrate(fine, problem, schedule, source, initial, observers, nu, checkpoints)
