"""Damping schedules, convex problem instances, source terms and the V/H/V' norm triple.

Everything here is finite dimensional: a state is a vector in R^n and the
H inner product is ``<v, w>_H = h * sum(v * w)`` with a mass weight ``h``
(1 for abstract problems, the grid spacing for the discretised wave equation).
The V and V' norms are built from the shifted operator ``S = A + I``::

    ||v||_V^2  = a(v, v) + |v|_H^2
    ||v||_V'^2 = <S^{-1} v, v>_H

so that ``||v||_V' <= |v|_H <= ||v||_V`` for every v.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, special

from .errors import MinimizerError, PreconditionError
from .rng import SplitMix64

# ---------------------------------------------------------------------------
# damping


DAMPING_KINDS = ("power", "scaled_power", "tabulated")
_HYP_RTOL = 1e-12


@dataclass(frozen=True)
class DampingSchedule:
    """Friction coefficient gamma(t) >= 0.

    ``power``         gamma(t) = K (1+t)^-alpha
    ``scaled_power``  gamma(t) = scale * K (1+t)^-alpha, scale >= 1
    ``tabulated``     linear interpolation of (table_t, table_gamma), held
                      constant outside the table; K and alpha are the
                      *declared* constants the hypotheses are checked against.
    """

    kind: str = "power"
    K: float = 1.0
    alpha: float = 0.0
    t0: float = 0.0
    scale: float = 1.0
    table_t: tuple = ()
    table_gamma: tuple = ()

    def __post_init__(self):
        if self.kind not in DAMPING_KINDS:
            raise PreconditionError(f"unknown damping kind {self.kind!r}")
        if not self.K > 0:
            raise PreconditionError(f"damping strength K must be positive, got {self.K}")
        if not 0.0 <= self.alpha < 1.0:
            raise PreconditionError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.t0 >= 0:
            raise PreconditionError(f"t0 must be nonnegative, got {self.t0}")
        if self.kind == "scaled_power" and not self.scale >= 1.0:
            raise PreconditionError(f"scale must be >= 1, got {self.scale}")
        if self.kind == "tabulated":
            tt = np.asarray(self.table_t, dtype=float)
            gg = np.asarray(self.table_gamma, dtype=float)
            if tt.ndim != 1 or tt.size < 2 or tt.shape != gg.shape:
                raise PreconditionError("tabulated damping needs matching t/gamma tables of length >= 2")
            if np.any(np.diff(tt) <= 0):
                raise PreconditionError("table_t must be strictly increasing")
            if np.any(gg < 0):
                raise PreconditionError("tabulated gamma must be nonnegative")
            object.__setattr__(self, "table_t", tuple(float(x) for x in tt))
            object.__setattr__(self, "table_gamma", tuple(float(x) for x in gg))

    @property
    def strength(self):
        """Coefficient in front of (1+t)^-alpha for the power families."""
        return self.K * self.scale if self.kind == "scaled_power" else self.K

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "tabulated":
            out = np.interp(t, self.table_t, self.table_gamma)
        else:
            out = self.strength * (1.0 + t) ** (-self.alpha)
        return out if out.ndim else float(out)


def gamma_eval(schedule, t):
    if np.any(np.asarray(t) < 0):
        raise PreconditionError("gamma is only defined for t >= 0")
    return schedule(t)


@dataclass(frozen=True)
class HypothesisReport:
    h1: bool
    h2: bool
    h1_first_violation: float = None
    h2_first_violation: float = None
    h2_equality: bool = False


def check_damping(schedule, grid):
    """Check the lower bound gamma (1+t)^alpha >= K and the monotonicity of
    (1+t)^alpha gamma on the grid points with t >= t0."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise PreconditionError("empty evaluation grid")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise PreconditionError("grid must be sorted and nonnegative")
    tt = grid[grid >= schedule.t0]
    if tt.size == 0:
        return HypothesisReport(True, True, h2_equality=True)
    prod = schedule(tt) * (1.0 + tt) ** schedule.alpha
    prod = np.atleast_1d(prod)
    bad1 = np.nonzero(prod < schedule.K * (1.0 - _HYP_RTOL))[0]
    jumps = np.diff(prod)
    bad2 = np.nonzero(jumps > _HYP_RTOL * np.abs(prod[:-1]))[0]
    return HypothesisReport(
        h1=bad1.size == 0,
        h2=bad2.size == 0,
        h1_first_violation=float(tt[bad1[0]]) if bad1.size else None,
        h2_first_violation=float(tt[bad2[0] + 1]) if bad2.size else None,
        h2_equality=bool(np.all(np.abs(jumps) <= _HYP_RTOL * np.abs(prod[:-1]))),
    )


# ---------------------------------------------------------------------------
# operators and nonlinearities


class SymmetricOperator:
    """Symmetric positive semidefinite matrix stored dense, tridiagonal or as zero.

    ``matvec`` acts on the last axis so a stack of states (m, n) is handled in
    one call.
    """

    def __init__(self, kind, n, dense=None, diag=None, off=None):
        if kind not in ("zero", "dense", "tridiagonal"):
            raise PreconditionError(f"unknown operator kind {kind!r}")
        self.kind = kind
        self.n = int(n)
        self.dense = None if dense is None else _frozen(np.array(dense, dtype=float))
        self.diag = None if diag is None else _frozen(np.array(diag, dtype=float))
        self.off = None if off is None else _frozen(np.array(off, dtype=float))
        if kind == "dense":
            if self.dense.shape != (self.n, self.n):
                raise PreconditionError("dense operator has wrong shape")
            scale = max(1.0, float(np.max(np.abs(self.dense))))
            if not np.allclose(self.dense, self.dense.T, rtol=0, atol=1e-12 * scale):
                raise PreconditionError("operator A must be symmetric")
        if kind == "tridiagonal":
            if self.diag.shape != (self.n,) or self.off.shape != (self.n - 1,):
                raise PreconditionError("tridiagonal operator has wrong band lengths")
        lam = self.eigvalsh()
        if lam.size and lam[0] < -1e-10 * max(1.0, abs(lam[-1])):
            raise PreconditionError(f"operator A must be positive semidefinite (min eigenvalue {lam[0]:.3e})")

    @classmethod
    def from_matrix(cls, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if not np.any(M):
            return cls("zero", M.shape[0])
        return cls("dense", M.shape[0], dense=M)

    def matvec(self, U):
        U = np.asarray(U, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(U)
        if self.kind == "dense":
            return U @ self.dense  # symmetric, so row-vector product is A u
        out = self.diag * U
        out[..., :-1] += self.off * U[..., 1:]
        out[..., 1:] += self.off * U[..., :-1]
        return out

    def to_dense(self):
        if self.kind == "zero":
            return np.zeros((self.n, self.n))
        if self.kind == "dense":
            return np.array(self.dense)
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def eigvalsh(self):
        if self.kind == "zero":
            return np.zeros(self.n)
        if self.kind == "dense":
            return np.linalg.eigvalsh(self.dense)
        if self.n == 1:
            return np.array(self.diag)
        return linalg.eigvalsh_tridiagonal(self.diag, self.off)

    def eigh(self):
        if self.kind == "zero":
            return np.zeros(self.n), np.eye(self.n)
        if self.kind == "tridiagonal" and self.n > 1:
            return linalg.eigh_tridiagonal(self.diag, self.off)
        return np.linalg.eigh(self.to_dense())

    def shifted_solver(self, shift=1.0):
        """Return a solver for (A + shift I) w = v acting on the last axis."""
        if self.kind == "zero":
            return lambda V: np.asarray(V, dtype=float) / shift
        if self.kind == "dense":
            cf = linalg.cho_factor(self.dense + shift * np.eye(self.n))
            return lambda V: linalg.cho_solve(cf, np.asarray(V, dtype=float).T).T
        ab = np.zeros((2, self.n))
        ab[0, 1:] = self.off
        ab[1] = self.diag + shift
        return lambda V: linalg.solveh_banded(ab, np.asarray(V, dtype=float).T).T


def _frozen(a):
    a.setflags(write=False)
    return a


NONLINEARITY_KINDS = ("cubic", "box")


@dataclass(frozen=True)
class ScalarNonlinearity:
    """Componentwise monotone map with a convex antiderivative.

    ``cubic``  f(s) = coef (s - shift)^3,            F(s) = coef (s - shift)^4 / 4
    ``box``    f(s) = 2 coef sign(s) max(|s|-r, 0),  F(s) = coef max(|s|-r, 0)^2
               (``shift`` plays the role of the radius r; F vanishes on [-r, r])
    """

    kind: str = "cubic"
    coef: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise PreconditionError(f"unknown nonlinearity {self.kind!r}")
        if self.kind == "box" and self.shift < 0:
            raise PreconditionError("box radius must be nonnegative")

    def f(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cubic":
            return self.coef * (s - self.shift) ** 3
        return 2.0 * self.coef * np.sign(s) * np.maximum(np.abs(s) - self.shift, 0.0)

    def F(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cubic":
            return 0.25 * self.coef * (s - self.shift) ** 4
        return self.coef * np.maximum(np.abs(s) - self.shift, 0.0) ** 2

    def fprime(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "cubic":
            return 3.0 * self.coef * (s - self.shift) ** 2
        return np.where(np.abs(s) > self.shift, 2.0 * self.coef, 0.0)

    def lipschitz(self, radius):
        """Lipschitz constant of f on [-radius, radius]."""
        if self.kind == "cubic":
            return 3.0 * abs(self.coef) * (radius + abs(self.shift)) ** 2
        return 2.0 * abs(self.coef)

    @property
    def even(self):
        return self.kind == "box" or self.shift == 0.0

    @property
    def flat_core(self):
        return self.kind == "box" and self.shift > 0


# ---------------------------------------------------------------------------
# convex problems


@dataclass(frozen=True, eq=False)
class ConvexProblem:
    """Finite-dimensional potential Phi(v) = a(v, v)/2 + F(v) with a(v, w) = <Av, w>_H.

    Build instances with :func:`make_problem` (or the family builders), which
    computes and caches the minimiser ``ubar`` and ``phi_star``.
    """

    A: SymmetricOperator
    h: float = 1.0
    nonlinearity: ScalarNonlinearity = None
    ubar: np.ndarray = None
    phi_star: float = 0.0
    family: str = "custom"
    lam: float = 1.0
    mu: float = 1.0
    lambda_max_exact: float = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.A.n

    @property
    def even(self):
        return self.nonlinearity is None or self.nonlinearity.even

    @property
    def flat_interior(self):
        """True when arg min Phi has nonempty interior (A = 0 with a flat-core F)."""
        return self.A.kind == "zero" and self.nonlinearity is not None and self.nonlinearity.flat_core

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.n:
            raise PreconditionError(f"dimension mismatch: expected {self.n}, got {u.shape[-1]}")
        return u

    def inner(self, u, w):
        return self.h * np.sum(np.asarray(u) * np.asarray(w), axis=-1)

    def hnorm(self, u):
        return np.sqrt(self.inner(u, u))

    def bilinear(self, u, w=None):
        u = self._check(u)
        w = u if w is None else self._check(w)
        return self.inner(self.A.matvec(u), w)

    def F(self, u):
        u = self._check(u)
        if self.nonlinearity is None:
            return np.zeros(u.shape[:-1]) if u.ndim > 1 else 0.0
        return self.h * np.sum(self.nonlinearity.F(u), axis=-1)

    def f(self, u):
        u = self._check(u)
        if self.nonlinearity is None:
            return np.zeros_like(u)
        return self.nonlinearity.f(u)

    def phi(self, u):
        return 0.5 * self.bilinear(u) + self.F(u)

    def grad(self, u):
        u = self._check(u)
        return self.A.matvec(u) + self.f(u)

    def hessian(self, u):
        H = self.A.to_dense()
        if self.nonlinearity is not None:
            H = H + np.diag(self.nonlinearity.fprime(u))
        return H


def phi(problem, u):
    return problem.phi(u)


def grad_phi(problem, u):
    return problem.grad(u)


def compute_minimizer(A, nonlinearity=None, h=1.0, tol=1e-12, max_iter=2000):
    """Minimise Phi from the zero vector.

    Backtracking gradient descent brings the iterate into the basin, then damped
    Newton steps on A + diag(f'(u)) drive ||grad Phi||_H below ``tol``.
    Returns ``(ubar, phi_star)``.
    """
    prob = ConvexProblem(A=A, h=h, nonlinearity=nonlinearity)
    u = np.zeros(A.n)
    gnorm = lambda g: math.sqrt(h * float(g @ g))  # noqa: E731

    g = prob.grad(u)
    fu = float(prob.phi(u))
    step = 1.0
    for _ in range(200):
        if gnorm(g) <= tol:
            break
        while True:
            trial = u - step * g
            ft = float(prob.phi(trial))
            if ft <= fu - 0.5 * step * h * float(g @ g) or step < 1e-14:
                break
            step *= 0.5
        u, fu = trial, ft
        g = prob.grad(u)
        step = min(1.0, 2.0 * step)

    for _ in range(max_iter):
        gn = gnorm(g)
        if gn <= tol:
            return u, float(prob.phi(u))
        H = prob.hessian(u)
        try:
            d = -np.linalg.solve(H + 1e-14 * np.eye(A.n), g)
        except np.linalg.LinAlgError:
            d = -g
        s = 1.0
        while s > 1e-12:
            trial = u + s * d
            gt = prob.grad(trial)
            ft = float(prob.phi(trial))
            if ft < fu or gnorm(gt) < gn:
                break
            s *= 0.5
        else:
            break
        u, g, fu = trial, gt, ft
    gn = gnorm(g)
    if gn <= tol:
        return u, float(prob.phi(u))
    raise MinimizerError("minimiser did not converge", u, gn)


def make_problem(A, nonlinearity=None, h=1.0, family="custom", tol=1e-12, **kw):
    if not isinstance(A, SymmetricOperator):
        A = SymmetricOperator.from_matrix(A)
    if not h > 0:
        raise PreconditionError("mass weight h must be positive")
    ubar, phi_star = compute_minimizer(A, nonlinearity, h=h, tol=tol)
    ubar.setflags(write=False)
    return ConvexProblem(A=A, h=float(h), nonlinearity=nonlinearity, ubar=ubar,
                         phi_star=phi_star, family=family, **kw)


def quadratic_problem(n, eig_min=1.0, eig_max=4.0, seed=0, nonlinearity=None, family="quadratic"):
    """A = Q diag(linspace(eig_min, eig_max, n)) Q^T with a seeded rotation Q."""
    from .rng import orthogonal_matrix

    if n < 1:
        raise PreconditionError("dimension must be positive")
    if eig_min < 0 or eig_max < eig_min:
        raise PreconditionError("need 0 <= eig_min <= eig_max")
    lam = np.linspace(eig_min, eig_max, n)
    Q = orthogonal_matrix(seed, n)
    M = (Q * lam) @ Q.T
    M = 0.5 * (M + M.T)
    return make_problem(SymmetricOperator.from_matrix(M), nonlinearity, family=family,
                        meta={"eigenvalues": tuple(lam)})


def shifted_quartic_problem(n, shift=1.0, coef=1.0, eig_min=1.0, eig_max=4.0, seed=0):
    """Quadratic part plus coef * sum (v_i - shift)^4 / 4; even when shift == 0."""
    return quadratic_problem(n, eig_min, eig_max, seed, ScalarNonlinearity("cubic", coef, shift),
                             family="shifted_quartic")


def flat_basin_problem(n, radius=1.0, coef=1.0):
    """A = 0 and F(v) = coef * sum max(|v_i| - radius, 0)^2: arg min Phi = [-radius, radius]^n."""
    return make_problem(SymmetricOperator("zero", n), ScalarNonlinearity("box", coef, radius),
                        family="flat_basin")


def build_wave_problem(n_interior, f_spec=None):
    """Finite-difference Dirichlet Laplacian on (0, 1) with n interior nodes.

    A = tridiag(-1, 2, -1) / h^2, H weight h = 1/(n+1), F(v) = h sum F_s(v_i).
    """
    n = int(n_interior)
    if n < 2:
        raise PreconditionError("wave problem needs at least 2 interior nodes")
    if f_spec is not None:
        s = np.linspace(-10.0, 10.0, 2001)
        if np.any(np.diff(f_spec.f(s)) < 0):
            raise PreconditionError("wave nonlinearity must be nondecreasing")
        if float(f_spec.f(0.0)) != 0.0:
            raise PreconditionError("wave nonlinearity must satisfy f(0) = 0")
    h = 1.0 / (n + 1)
    A = SymmetricOperator("tridiagonal", n, diag=np.full(n, 2.0 / h**2), off=np.full(n - 1, -1.0 / h**2))
    return make_problem(A, f_spec, h=h, family="wave", lambda_max_exact=4.0 / h**2)


def validate_problem(problem, samples=20, seed=0, tol=1e-9):
    """Randomised checks of symmetry, positivity, convexity of F, stationarity
    at the cached minimiser and semi-coercivity.  Returns a dict of booleans."""
    rng = SplitMix64(seed)
    n = problem.n
    norms = NormTriple(problem)
    ok = {"symmetric": True, "positive": True, "midpoint_convex": True, "semi_coercive": True}
    for _ in range(samples):
        x, y = rng.normals(n), rng.normals(n)
        ax, ay = problem.A.matvec(x), problem.A.matvec(y)
        scale = 1.0 + abs(problem.inner(ax, x)) + abs(problem.inner(ay, y))
        ok["symmetric"] &= bool(abs(problem.inner(ax, y) - problem.inner(x, ay)) <= tol * scale)
        ok["positive"] &= bool(problem.inner(ax, x) >= -tol * scale)
        Fm = problem.F(0.5 * (x + y))
        ok["midpoint_convex"] &= bool(Fm <= 0.5 * (problem.F(x) + problem.F(y)) + tol * (1 + abs(Fm)))
        lhs = problem.bilinear(x) + problem.lam * problem.inner(x, x)
        ok["semi_coercive"] &= bool(lhs >= problem.mu * norms.v_norm(x) ** 2 * (1 - tol))
    g = problem.grad(problem.ubar)
    ok["stationary"] = bool(problem.hnorm(g) <= 1e-10)
    ok["phi_star"] = bool(abs(problem.phi(problem.ubar) - problem.phi_star) <= 1e-12 * (1 + abs(problem.phi_star)))
    return ok


# ---------------------------------------------------------------------------
# sources


SOURCE_FAMILIES = ("zero", "power_decay", "exp_decay", "modulated_power")


@dataclass(frozen=True, eq=False)
class SourceTerm:
    """g(t) = envelope(t) * direction with |direction|_H = 1.

    power_decay      c (1+t)^-beta
    exp_decay        c exp(-rate t)
    modulated_power  c (1+t)^-beta sin(omega t)
    """

    family: str = "zero"
    direction: np.ndarray = None
    c: float = 0.0
    beta: float = 0.0
    rate: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.family not in SOURCE_FAMILIES:
            raise PreconditionError(f"unknown source family {self.family!r}")
        if self.direction is None:
            raise PreconditionError("source needs a direction vector")
        d = np.array(self.direction, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)
        if self.c < 0:
            raise PreconditionError("source amplitude must be nonnegative")
        if self.family in ("power_decay", "modulated_power") and not self.beta > 0:
            raise PreconditionError("power sources need beta > 0")
        if self.family == "exp_decay" and not self.rate >= 0:
            raise PreconditionError("exp_decay needs rate >= 0")

    @classmethod
    def zero(cls, n):
        d = np.zeros(n)
        d[0] = 1.0
        return cls("zero", d)

    @property
    def is_zero(self):
        return self.family == "zero" or self.c == 0.0

    def envelope(self, t):
        """Signed scalar factor in front of ``direction``."""
        t = np.asarray(t, dtype=float)
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "power_decay":
            out = self.c * (1.0 + t) ** (-self.beta)
        elif self.family == "exp_decay":
            out = self.c * np.exp(-self.rate * t)
        else:
            out = self.c * (1.0 + t) ** (-self.beta) * np.sin(self.omega * t)
        return out if out.ndim else float(out)

    def norm(self, t):
        """|g(t)|_H."""
        return np.abs(self.envelope(t))

    def __call__(self, t):
        return np.multiply.outer(self.envelope(t), self.direction)


def source_eval(source, t):
    if t < 0:
        raise PreconditionError("source is only defined for t >= 0")
    return source(t)


@dataclass(frozen=True)
class SourceReport:
    """Analytic classification of a source against the theorem hypotheses.

    ``nu_max`` is the supremum of admissible rates for the energy decay bound;
    the admissible set is always the open interval [0, nu_max).
    ``nu_square_max`` is the supremum of nu for which the weighted square
    integral of (1+t)^(nu+alpha) |g|^2 is finite (the alternative to boundedness).
    """

    op: bool
    th2_square: bool
    th3_square: bool
    nu_max: float
    nu_square_max: float
    tail_converges: bool
    nu_max_open: bool = True

    @property
    def probe(self):
        return not self.op

    def prop1_applicable(self, nu, bounded=False):
        if not 0 <= nu < self.nu_max:
            return False
        return bool(bounded or self.th2_square or nu < self.nu_square_max)

    def summary(self):
        lines = [
            f"(op) integrable weighted source: {'holds' if self.op else 'fails - probe scenario'}",
            f"theorem-2 square condition: {'holds' if self.th2_square else 'fails'}",
            f"theorem-3 square condition: {'holds' if self.th3_square else 'fails'}",
            f"energy decay rate bound nu_max = {self.nu_max!r} (open)",
            f"square-condition rate bound = {self.nu_square_max!r} (open)",
            f"modified-energy tail: {'finite' if self.tail_converges else 'divergent'}",
        ]
        return "\n".join(lines)


def _power_exponent(source):
    """Decay exponent beta of |g| for power-type families, inf for faster decay."""
    if source.is_zero or source.family == "exp_decay" and source.rate > 0:
        return math.inf
    if source.family == "exp_decay":
        return 0.0
    return source.beta


def classify_source(schedule, source):
    a = schedule.alpha
    b = _power_exponent(source)
    if schedule.kind == "tabulated" and schedule.table_gamma[-1] == 0.0:
        tail_ok = b == math.inf
    elif schedule.kind == "tabulated":
        tail_ok = 2 * b > 1
    else:
        tail_ok = 2 * b - a > 1
    return SourceReport(
        op=a - b < -1,
        th2_square=3 * a - 2 * b < -1,
        th3_square=2 * a + 1 - 2 * b < -1,
        nu_max=max(0.0, min(1.0 + a, 2.0 * (b - 1.0))),
        nu_square_max=max(0.0, 2.0 * b - 1.0 - a),
        tail_converges=tail_ok,
    )


@dataclass(frozen=True)
class WeightedIntegral:
    value: float
    tail_bound: float
    divergent: bool


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _gauss_pieces(fun, edges):
    """Sum of 32-point Gauss-Legendre rules on consecutive [edges[i], edges[i+1]]."""
    total = 0.0
    for k in range(0, len(edges) - 1, 200_000):
        e = edges[k:k + 200_001]
        a, b = e[:-1, None], e[1:, None]
        x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
        total += float(np.sum(0.5 * (b - a)[:, 0] * (fun(x) @ _GL_W)))
    return total


def _power_part(cp, e, T):
    """Integral of cp (1+t)^e over [0, T] and over [T, inf)."""
    if e == -1.0:
        head = cp * math.log1p(T) if math.isfinite(T) else math.inf
    elif math.isfinite(T):
        head = cp * math.expm1((e + 1.0) * math.log1p(T)) / (e + 1.0)
    else:
        head = cp / (-e - 1.0) if e < -1 else math.inf
    if not math.isfinite(T):
        tail = 0.0 if e < -1 else math.inf
    else:
        tail = cp * (1.0 + T) ** (e + 1.0) / (-e - 1.0) if e < -1 else math.inf
    return head, tail


def source_weighted_integral(source, r, p, T):
    """Integral of (1+t)^r |g(t)|^p over [0, T] plus an analytic bound on [T, inf).

    ``T`` may be ``inf``.  A divergent full-line integral is flagged but the
    finite-horizon value is still returned.
    """
    if p not in (1, 2):
        raise PreconditionError("p must be 1 or 2")
    if not T > 0:
        raise PreconditionError("T must be positive")
    if source.is_zero:
        return WeightedIntegral(0.0, 0.0, False)
    cp = source.c**p
    if source.family == "power_decay":
        head, tail = _power_part(cp, r - p * source.beta, T)
        return WeightedIntegral(head, tail, not math.isfinite(tail))

    if source.family == "modulated_power":
        _, tail = _power_part(cp, r - p * source.beta, T)
        if source.omega == 0.0:
            return WeightedIntegral(0.0, 0.0, False)
        if not math.isfinite(T):
            raise PreconditionError("modulated sources need a finite horizon")
        half = math.pi / abs(source.omega)
        edges = np.append(np.arange(0.0, T, half), T)
        fun = lambda x: (1.0 + x) ** r * np.abs(source.envelope(x)) ** p  # noqa: E731
        return WeightedIntegral(_gauss_pieces(fun, edges), tail, not math.isfinite(tail))

    # exp_decay: (1+t)^r c^p exp(-k t) with k = p * rate
    k = p * source.rate
    if k == 0.0:
        head, tail = _power_part(cp, float(r), T)
        return WeightedIntegral(head, tail, not math.isfinite(tail))
    a = r + 1.0
    if a > 0 and k < 500:
        def upper(x):
            if not math.isfinite(x):
                return 0.0
            q = special.gammaincc(a, x)
            if q == 0.0:
                return 0.0
            return cp * math.exp(k - a * math.log(k) + special.gammaln(a) + math.log(q))
        top = upper(k * (1.0 + T))
        return WeightedIntegral(upper(k) - top, top, False)
    fun = lambda t: cp * (1.0 + t) ** r * math.exp(-k * t)  # noqa: E731
    head = integrate.quad(fun, 0.0, T, epsrel=1e-10, limit=500)[0]
    # (1+t)^r e^{-kt} is eventually dominated by e^{-kt/2}
    tail = 0.0 if not math.isfinite(T) else integrate.quad(fun, T, math.inf, epsrel=1e-10, limit=500)[0]
    return WeightedIntegral(head, tail, False)


# ---------------------------------------------------------------------------
# norms


class NormTriple:
    """|.|_H, ||.||_V and ||.||_V' for a problem, all acting on the last axis."""

    def __init__(self, problem, rtol=1e-10):
        self.problem = problem
        self.rtol = rtol
        self._solve = problem.A.shifted_solver(1.0)

    def h_norm(self, v):
        return self.problem.hnorm(v)

    def v_norm(self, v):
        v = self.problem._check(v)
        return np.sqrt(np.maximum(self.problem.bilinear(v) + self.problem.inner(v, v), 0.0))

    def apply_inverse_shift(self, v):
        v = self.problem._check(v)
        w = self._solve(v)
        resid = np.linalg.norm(w + self.problem.A.matvec(w) - v, axis=-1)
        scale = np.linalg.norm(v, axis=-1)
        if not np.all(np.isfinite(w)) or np.any(resid > self.rtol * scale):
            raise np.linalg.LinAlgError(f"shifted solve failed (residual {np.max(resid):.3e})")
        return w

    def vprime_norm(self, v):
        v = self.problem._check(v)
        w = self.apply_inverse_shift(v)
        return np.sqrt(np.maximum(self.problem.inner(w, v), 0.0))


def v_norm(norms, v):
    return norms.v_norm(v)


def vprime_norm(norms, v):
    return norms.vprime_norm(v)


def interpolation_constant(norms, m=1000, seed=0):
    """Largest |v|_H / (||v||_V'^(1/2) ||v||_V^(1/2)) over m random unit vectors
    and every eigenvector of A."""
    if m < 1:
        raise PreconditionError("need at least one sample")
    prob = norms.problem
    rng = SplitMix64(seed)
    V = rng.normals(m * prob.n).reshape(m, prob.n)
    _, vecs = prob.A.eigh()
    V = np.vstack([V, vecs.T])
    V = V / prob.hnorm(V)[:, None]
    ratio = prob.hnorm(V) / np.sqrt(norms.vprime_norm(V) * norms.v_norm(V))
    return float(np.max(ratio))
