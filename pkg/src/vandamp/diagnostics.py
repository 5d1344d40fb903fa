"""Energy bookkeeping and asymptotic checks along computed trajectories.

The quantities follow the standard Lyapunov analysis of damped inertial
systems:

* energy ``E = |u'|^2/2 + Phi(u) - Phi*``
* modified energy ``Etilde(t) = E(t) + int_t^inf |g|^2 / (4 gamma)``
* anchor ``p = |u - ubar|^2 / 2``
* running weighted integrals ``I_nu(t) = int_0^t (1+s)^(nu-alpha) |u'|^2 ds``

Little-o decay claims are turned into finite-horizon verdicts through
:func:`scaled_energy_trend` and :func:`decay_fit`.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegralError, PreconditionError
from .problem import NormTriple, _GL_W, _GL_X, classify_source

# ---------------------------------------------------------------------------
# pointwise quantities


def energy(problem, state):
    return float(0.5 * problem.inner(state.v, state.v) + problem.phi(state.u) - problem.phi_star)


def anchor(problem, state):
    w = np.asarray(state.u) - problem.ubar
    return float(0.5 * problem.inner(w, w))


def _closed_tail(strength, alpha, source, T):
    """int_T^inf env(s)^2 / (4 strength (1+s)^-alpha) ds for power / exp sources.

    Modulated sources are only evaluated far out, where half the power-family
    value plus an asymptotic series for the oscillating part is accurate.
    """
    T = np.asarray(T, dtype=float)
    c2 = source.c**2 / (4.0 * strength)
    if source.family in ("power_decay", "modulated_power"):
        e = alpha - 2.0 * source.beta
        out = c2 * (1.0 + T) ** (e + 1.0) / (-e - 1.0)
        if source.family == "power_decay":
            return out
        # sin^2 = (1 - cos 2wt) / 2; the cosine part by repeated integration by parts:
        # int_T^inf q e^{ikx} dx = -e^{ikT} sum_m (-1)^m q^(m)(T) / (ik)^(m+1)
        if source.omega == 0.0:
            return np.zeros_like(out)
        k = 2.0 * source.omega
        series, deriv = 0.0, c2
        for m in range(4):
            series = series + (-1) ** m * deriv * (1.0 + T) ** (e - m) / (1j * k) ** (m + 1)
            deriv *= e - m
        cos_part = np.real(-np.exp(1j * k * T) * series)
        return 0.5 * out - 0.5 * cos_part
    r2 = 2.0 * source.rate
    a = alpha + 1.0
    if alpha == 0.0:
        return c2 * np.exp(-r2 * T) / r2
    q = special.gammaincc(a, r2 * (1.0 + T))
    with np.errstate(divide="ignore"):
        logv = r2 - a * math.log(r2) + special.gammaln(a) + np.log(q)
    return c2 * np.exp(logv)


def _split(edges, max_len):
    out = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((b - a) / max_len(a))))
        out.append(np.linspace(a, b, m + 1)[1:])
    return np.concatenate(out)


def source_tail(schedule, source, ts):
    """int_t^inf |g(s)|^2 / (4 gamma(s)) ds at every t in ``ts``.

    Closed form for power damping with power or exponential sources; otherwise
    32-point Gauss-Legendre on a refined grid out to a far horizon followed by
    the closed form beyond it.  Raises :class:`DivergentIntegralError` when the
    integral is infinite.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if source.is_zero:
        return np.zeros_like(ts)
    if not classify_source(schedule, source).tail_converges:
        raise DivergentIntegralError("int |g|^2/(4 gamma) diverges; use the plain energy instead")
    power_like = schedule.kind != "tabulated"
    if power_like and source.family in ("power_decay", "exp_decay"):
        return _closed_tail(schedule.strength, schedule.alpha, source, ts)

    knots = np.asarray(schedule.table_t) if schedule.kind == "tabulated" else np.zeros(0)
    T_far = 10.0 * (1.0 + max(float(ts.max()), float(knots.max()) if knots.size else 0.0))
    if schedule.kind == "tabulated" and np.any(np.asarray(schedule.table_gamma)[knots >= ts.min()] == 0.0):
        raise DivergentIntegralError("damping vanishes where the source does not")
    hp = math.pi / abs(source.omega) if source.family == "modulated_power" and source.omega else math.inf
    far = np.geomspace(1.0 + ts.max(), 1.0 + T_far, 64) - 1.0
    edges = np.unique(np.concatenate([ts, knots[(knots > ts.min()) & (knots < T_far)], far]))
    edges = _split(edges, lambda s: min(hp, 0.1 * (1.0 + s)))
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    pieces = 0.5 * (b - a)[:, 0] * ((source.envelope(x) ** 2 / (4.0 * schedule(x))) @ _GL_W)
    if schedule.kind == "tabulated":
        far_tail = float(_closed_tail(schedule.table_gamma[-1], 0.0, source, T_far))
    else:
        far_tail = float(_closed_tail(schedule.strength, schedule.alpha, source, T_far))
    cum = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + far_tail
    return cum[np.searchsorted(edges, ts)]


def modified_energy(problem, schedule, source, state):
    return energy(problem, state) + float(source_tail(schedule, source, [state.t])[0])


def big_gamma(schedule, tau, t):
    """Gamma(t, tau) = int_tau^t gamma(s) ds (exact for every schedule kind)."""
    if t < tau:
        raise PreconditionError("big_gamma needs t >= tau")
    if tau < 0:
        raise PreconditionError("tau must be nonnegative")
    if schedule.kind != "tabulated":
        S, a = schedule.strength, schedule.alpha
        if a == 0.0:
            return S * (t - tau)
        return S * ((1.0 + t) ** (1.0 - a) - (1.0 + tau) ** (1.0 - a)) / (1.0 - a)
    knots = np.asarray(schedule.table_t)
    inner = knots[(knots > tau) & (knots < t)]
    pts = np.concatenate([[tau], inner, [t]])
    return float(np.trapezoid(schedule(pts), pts)) if pts.size > 1 else 0.0


def tau0(schedule):
    """Smallest threshold with alpha / (K (1+tau0)^(1-alpha)) <= 1/2, not below t0."""
    a, K = schedule.alpha, schedule.K
    if a >= 1.0:
        raise PreconditionError("alpha must be < 1")
    if a == 0.0:
        return float(schedule.t0)
    return float(max(schedule.t0, (2.0 * a / K) ** (1.0 / (1.0 - a)) - 1.0, 0.0))


@dataclass(frozen=True)
class Lemma1Result:
    lhs: float
    rhs: float
    passed: bool
    T_quad: float
    tail_bound: float


def _invert_gamma(schedule, tau, level):
    """t >= tau with Gamma(t, tau) = level."""
    if schedule.kind != "tabulated":
        S, a = schedule.strength, schedule.alpha
        if a == 0.0:
            return tau + level / S
        return ((1.0 + tau) ** (1.0 - a) + (1.0 - a) * level / S) ** (1.0 / (1.0 - a)) - 1.0
    from scipy.optimize import brentq

    hi = tau + 1.0
    while big_gamma(schedule, tau, hi) < level:
        hi = 2.0 * hi + 1.0
    return brentq(lambda s: big_gamma(schedule, tau, s) - level, tau, hi, xtol=1e-12)


def lemma1_check(schedule, tau, T_quad=None, tail_tol=1e-12):
    """Compare int_tau^inf exp(-Gamma(t, tau)) dt with (2/K)(1+tau)^alpha.

    The integral is split at the level sets Gamma = 0, 1, 2, ... and each
    piece handed to adaptive quadrature.  Past the last piece the tail is
    bounded by (2/K)(1+T)^alpha exp(-Gamma(T, tau)), which holds for any
    T >= tau0; T is pushed out until that bound is below ``tail_tol``.
    """
    t_min = tau0(schedule)
    if tau < t_min:
        raise PreconditionError(f"tau = {tau} is below the threshold tau0 = {t_min}")
    K, a = schedule.K, schedule.alpha
    rhs = 2.0 / K * (1.0 + tau) ** a

    def tail(T):
        return 2.0 / K * (1.0 + T) ** a * math.exp(-big_gamma(schedule, tau, T))

    level = 1
    T = _invert_gamma(schedule, tau, level)
    if T_quad is not None:
        T = max(T, T_quad)
    while tail(T) > tail_tol:
        level += 1
        T = max(T, _invert_gamma(schedule, tau, level))
    levels = [_invert_gamma(schedule, tau, k) for k in range(1, level)]
    edges = sorted(set([tau] + [x for x in levels if tau < x < T] + [T]))
    fun = lambda s: math.exp(-big_gamma(schedule, tau, max(s, tau)))  # noqa: E731
    body = sum(integrate.quad(fun, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
               for lo, hi in zip(edges[:-1], edges[1:]))
    tb = tail(T)
    lhs = body + tb
    return Lemma1Result(lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-9)), T, tb)


# ---------------------------------------------------------------------------
# trajectory records


@dataclass
class EnergyRecord:
    """Index-aligned diagnostic series sampled along one trajectory."""

    t: np.ndarray
    E: np.ndarray
    Etilde: np.ndarray
    p: np.ndarray
    speed: np.ndarray
    dist_V: np.ndarray
    gradnorm_Vp: np.ndarray
    power_in: np.ndarray
    I: dict
    nu: tuple
    alpha: float
    checkpoint_t: np.ndarray
    checkpoint_u: np.ndarray
    checkpoint_v: np.ndarray
    sup_u: float
    u_final: np.ndarray
    v_final: np.ndarray
    complete: bool = True
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def dt_sample(self):
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def columns(self):
        cols = {
            "t": self.t, "E": self.E, "Etilde": self.Etilde, "p": self.p, "speed": self.speed,
            "dist_V": self.dist_V, "gradnorm_Vp": self.gradnorm_Vp,
        }
        for nu in self.nu:
            cols[f"I_nu_{float(nu)!r}"] = self.I[nu]
        return cols


def checkpoint_indices(n_samples, count=16):
    """Sample indices at T 2^-j (j = 0, 1, ...) plus ``count`` uniform points in [T/2, T]."""
    last = n_samples - 1
    if last <= 0:
        return np.array([0])
    geo = []
    k = last
    while k >= 1:
        geo.append(k)
        k //= 2
    uni = np.rint(np.linspace(last / 2.0, last, count)).astype(int)
    return np.unique(np.concatenate([[0], geo, uni]))


class RecordBuilder:
    """Accumulates an :class:`EnergyRecord` from batches of sampled states."""

    def __init__(self, problem, schedule, source, times, nu=(), checkpoints=16, norms=None):
        self.problem, self.schedule, self.source = problem, schedule, source
        self.norms = norms or NormTriple(problem)
        self.times = np.asarray(times, dtype=float)
        self.nu = tuple(float(x) for x in nu)
        try:
            self.tail = source_tail(schedule, source, self.times)
        except DivergentIntegralError:
            self.tail = np.full(self.times.shape, np.nan)
        self.ck_idx = checkpoint_indices(len(self.times), checkpoints)
        self.cols = {k: [] for k in ("t", "E", "Etilde", "p", "speed", "dist_V", "gradnorm_Vp", "power_in")}
        self.I = {nu: [] for nu in self.nu}
        self._I_last = {nu: 0.0 for nu in self.nu}
        self._w_last = {nu: None for nu in self.nu}
        self._t_last = None
        self.ck = []
        self.count = 0
        self.sup_u = 0.0
        self.u_last = self.v_last = None

    def add(self, ts, U, V):
        prob = self.problem
        ts = np.asarray(ts, dtype=float)
        U = np.atleast_2d(U)
        V = np.atleast_2d(V)
        m = len(ts)
        if m == 0:
            return
        idx = np.arange(self.count, self.count + m)
        speed2 = prob.inner(V, V)
        E = 0.5 * speed2 + prob.phi(U) - prob.phi_star
        W = U - prob.ubar
        c = self.cols
        c["t"].append(ts)
        c["E"].append(E)
        c["Etilde"].append(E + self.tail[idx])
        c["p"].append(0.5 * prob.inner(W, W))
        c["speed"].append(np.sqrt(speed2))
        c["dist_V"].append(self.norms.v_norm(W))
        c["gradnorm_Vp"].append(self.norms.vprime_norm(prob.grad(U)))
        c["power_in"].append(self.source.envelope(ts) * prob.inner(V, self.source.direction))
        for nu in self.nu:
            w = (1.0 + ts) ** (nu - self.schedule.alpha) * speed2
            tt = ts if self._t_last is None else np.concatenate([[self._t_last], ts])
            ww = w if self._w_last[nu] is None else np.concatenate([[self._w_last[nu]], w])
            run = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(tt) * (ww[1:] + ww[:-1]))])
            if self._t_last is None:
                vals = self._I_last[nu] + run
            else:
                vals = self._I_last[nu] + run[1:]
            self.I[nu].append(vals)
            self._I_last[nu] = float(vals[-1])
            self._w_last[nu] = float(w[-1])
        self._t_last = float(ts[-1])
        sel = np.isin(idx, self.ck_idx)
        for j in np.nonzero(sel)[0]:
            self.ck.append((ts[j], U[j].copy(), V[j].copy()))
        self.sup_u = max(self.sup_u, float(np.max(prob.hnorm(U))))
        self.u_last, self.v_last = U[-1].copy(), V[-1].copy()
        self.count += m

    def finish(self, complete=True, meta=None):
        cat = {k: np.concatenate(v) if v else np.zeros(0) for k, v in self.cols.items()}
        ck_t = np.array([c[0] for c in self.ck])
        n = self.problem.n
        return EnergyRecord(
            I={nu: np.concatenate(v) if v else np.zeros(0) for nu, v in self.I.items()},
            nu=self.nu,
            alpha=self.schedule.alpha,
            checkpoint_t=ck_t,
            checkpoint_u=np.array([c[1] for c in self.ck]).reshape(-1, n),
            checkpoint_v=np.array([c[2] for c in self.ck]).reshape(-1, n),
            sup_u=self.sup_u,
            u_final=self.u_last,
            v_final=self.v_last,
            complete=complete,
            meta=dict(meta or {}),
            **cat,
        )


# ---------------------------------------------------------------------------
# trajectory checks


def monotonicity_violations(series, tol=1e-10):
    """Number of steps with series[k+1] > series[k] + tol, and the largest such jump."""
    s = np.asarray(series, dtype=float)
    s = s[np.isfinite(s)]
    if s.size < 2:
        return 0, 0.0
    jumps = np.diff(s)
    return int(np.count_nonzero(jumps > tol)), float(max(0.0, jumps.max()))


def energy_derivative_residual(record, problem, schedule, source):
    """Largest gap between the centred difference of E and -gamma |u'|^2 + <g, u'>."""
    if len(record.t) < 3:
        raise PreconditionError("need at least three samples")
    t = record.t
    dts = np.diff(t)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=0):
        raise PreconditionError("energy residual needs uniform sampling")
    dE = (record.E[2:] - record.E[:-2]) / (t[2:] - t[:-2])
    tk = t[1:-1]
    predicted = -schedule(tk) * record.speed[1:-1] ** 2 + record.power_in[1:-1]
    return float(np.max(np.abs(dE - predicted)))


@dataclass(frozen=True)
class DecayFit:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    correlation: float
    verdict: str
    degenerate: bool = False
    samples: int = 0


def decay_fit(record, quantity="E", window_fraction=0.5, nu=None, min_samples=10):
    """Least-squares line through (log t, log q) over the final part of the record.

    The window is the last ``window_fraction`` of the log-time span of the
    positive sample times.  For a target rate ``nu`` the verdict is
    ``consistent`` when the slope is at most -nu + 0.1 or t^nu q decreases
    monotonically on the window; ``inconsistent`` when the fit is clean
    (|r| >= 0.9, or q constant) but neither holds; ``inconclusive`` otherwise.
    """
    t = np.asarray(record["t"] if isinstance(record, dict) else record.t, dtype=float)
    if isinstance(record, dict):
        q = np.asarray(record[quantity], dtype=float)
    else:
        q = np.asarray(getattr(record, quantity), dtype=float)
    pos = t > 0
    if np.count_nonzero(pos) < min_samples:
        raise PreconditionError("record too short for a decay fit")
    lt = np.log(t[pos])
    cut = lt[-1] - window_fraction * (lt[-1] - lt[0])
    win = np.nonzero(pos)[0][lt >= cut]
    if win.size < min_samples:
        raise PreconditionError(f"window holds {win.size} samples, need {min_samples}")
    tw, qw = t[win], q[win]
    keep = qw > 0
    if not np.any(keep):
        return DecayFit(tw[0], tw[-1], -math.inf, -math.inf, 1.0, "consistent", True, 0)
    if np.count_nonzero(keep) < 2:
        return DecayFit(tw[0], tw[-1], -math.inf, -math.inf, 1.0, "inconclusive", True, 1)
    x, y = np.log(tw[keep]), np.log(qw[keep])
    slope, intercept = np.polyfit(x, y, 1)
    flat = np.ptp(y) <= 1e-12 * max(1.0, np.max(np.abs(y)))
    r = 0.0 if flat else float(np.corrcoef(x, y)[0, 1])
    if flat:
        slope = 0.0
        intercept = float(y.mean())
    verdict = "inconclusive"
    if nu is not None:
        scaled = tw[keep] ** nu * qw[keep]
        if slope <= -nu + 0.1 or np.all(np.diff(scaled) < 0):
            verdict = "consistent"
        elif flat or abs(r) >= 0.9:
            verdict = "inconsistent"
    return DecayFit(float(tw[0]), float(tw[-1]), float(slope), float(intercept), r, verdict,
                    False, int(np.count_nonzero(keep)))


@dataclass(frozen=True)
class TrendVerdict:
    series: np.ndarray
    ratio: float
    passed: bool
    degenerate: bool = False


def scaled_energy_trend(record, nu, threshold=0.2):
    """s = (1+t)^nu E over the final two decades [T/100, T].

    Passes when s(T) / max(s on [T/100, T/10]) <= threshold.
    """
    t = np.asarray(record["t"] if isinstance(record, dict) else record.t, dtype=float)
    E = np.asarray(record["E"] if isinstance(record, dict) else record.E, dtype=float)
    s = (1.0 + t) ** nu * np.maximum(E, 0.0)
    T = t[-1]
    early = (t >= T / 100.0) & (t <= T / 10.0)
    if not np.any(early):
        early = t <= T / 10.0
    ref = float(np.max(s[early])) if np.any(early) else float(s[0])
    if ref == 0.0:
        return TrendVerdict(s, 0.0, True, True)
    ratio = float(s[-1] / ref)
    return TrendVerdict(s, ratio, ratio <= threshold)


def _decade_growth(t, I):
    T = t[-1]
    total = float(I[-1])
    if total == 0.0:
        return total, 0.0
    before = float(np.interp(T / 10.0, t, I))
    return total, (total - before) / total


def velocity_integral_verdict(record, nu, tol=0.05):
    """Terminal I_nu and whether its growth over the last decade is within ``tol`` of the total."""
    nu = float(nu)
    if nu not in record.I:
        raise PreconditionError(f"nu = {nu} was not configured for this record")
    total, growth = _decade_growth(record.t, record.I[nu])
    return total, growth <= tol


def gradient_integral_verdict(record, tol=0.05):
    """Running int (1+t)^alpha ||grad Phi(u)||_V' dt and its last-decade boundedness verdict."""
    w = (1.0 + record.t) ** record.alpha * record.gradnorm_Vp
    run = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(record.t) * (w[1:] + w[:-1]))])
    total, growth = _decade_growth(record.t, run)
    return total, growth <= tol


def cauchy_check(record, norms, norm="V", tol=None):
    """Largest pairwise distance between checkpoints in [T/2, T]."""
    t = record.checkpoint_t
    if t.size == 0:
        raise PreconditionError("record has no checkpoints")
    T = float(record.t[-1])
    sel = t >= T / 2.0 - 1e-9 * max(1.0, T)
    U = record.checkpoint_u[sel]
    if U.shape[0] < 4:
        raise PreconditionError("need at least 4 checkpoints in the final window")
    fn = {"H": norms.h_norm, "V": norms.v_norm, "Vprime": norms.vprime_norm}[norm]
    D = U[:, None, :] - U[None, :, :]
    dist = float(np.max(fn(D.reshape(-1, U.shape[1]))))
    if tol is None:
        tol = 1e-3 * (1.0 + float(fn(record.checkpoint_u[sel][-1])))
    return dist, dist <= tol


@dataclass(frozen=True)
class LimitCheck:
    phi_gap: float
    grad_vprime: float
    member: bool


def limit_candidate_check(problem, norms, u_final):
    gap = float(problem.phi(u_final) - problem.phi_star)
    gn = float(norms.vprime_norm(problem.grad(u_final)))
    tol = 1e-6 * (1.0 + abs(problem.phi_star))
    return LimitCheck(gap, gn, bool(gap <= tol and gn <= tol))


def anchor_limit_check(record, tol=0.05):
    """Oscillation of p on [T/2, T] at most tol (1 + p(T))."""
    t = record.t
    if len(t) < 3 or t[-1] < 100.0 * (t[1] - t[0]):
        raise PreconditionError("anchor limit check needs a record spanning two decades")
    w = record.p[t >= t[-1] / 2.0]
    osc = float(np.max(w) - np.min(w))
    return osc, osc <= tol * (1.0 + float(record.p[-1]))
