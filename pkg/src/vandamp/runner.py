"""Scenario configs, verdicts, predefined suites and CSV output.

Config files are line oriented::

    [problem]
    family = quadratic        # quadratic | shifted_quartic | wave | flat_basin
    dimension = 4

    [damping]
    K = 2
    alpha = 0.5

Sections: ``scenario``, ``problem``, ``damping``, ``source``, ``initial``,
``integrator``, ``diagnostics``, ``output``.  ``problem`` and ``damping`` are
required; everything else has defaults.
"""

import dataclasses
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .dynamics import IntegratorConfig, default_initial, integrate, stable_dt
from .errors import ConfigError, StabilityError, VandampError
from .problem import (DampingSchedule, NormTriple, ScalarNonlinearity, SourceTerm, build_wave_problem,
                      classify_source, flat_basin_problem, quadratic_problem, shifted_quartic_problem)
from .rng import unit_vector

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VERDICT, EXIT_UNSTABLE, EXIT_IO = 0, 1, 2, 3

_SCHEMA = {
    "scenario": {"name": str},
    "problem": {"family": str, "dimension": int, "eig_min": float, "eig_max": float, "seed": int,
                "shift": float, "coef": float, "radius": float, "nonlinearity": str},
    "damping": {"kind": str, "K": float, "alpha": float, "t0": float, "scale": float, "table": str},
    "source": {"family": str, "c": float, "beta": float, "rate": float, "omega": float, "seed": int},
    "initial": {"offset": float, "seed": int, "v0": float, "shape": str},
    "integrator": {"dt": float, "t_end": float, "sample_stride": int, "stability_margin": float, "guard": str},
    "diagnostics": {"nu": str, "window_fraction": float, "checkpoints": int},
    "output": {"path": str},
}
_REQUIRED = ("problem", "damping")
PROBLEM_FAMILIES = ("quadratic", "shifted_quartic", "wave", "flat_basin")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    problem: dict
    damping: dict
    source: dict
    initial: dict
    integrator: dict
    diagnostics: dict
    output: dict
    classification: object = field(default=None, compare=False)

    @property
    def nu(self):
        return tuple(self.diagnostics["nu"])

    @property
    def probe(self):
        return self.classification.probe

    def canonical(self):
        d = {k: getattr(self, k) for k in ("name", "problem", "damping", "source", "initial",
                                           "integrator", "diagnostics", "output")}
        return json.dumps(d, sort_keys=True, default=list)

    @property
    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def build(self):
        """Instantiate (problem, schedule, source, initial state, IntegratorConfig)."""
        problem = _build_problem(self.problem)
        schedule = _build_damping(self.damping)
        source = _build_source(self.source, problem)
        ini = self.initial
        initial = default_initial(problem, ini["offset"], ini["seed"], ini["v0"], ini["shape"])
        it = self.integrator
        cfg = IntegratorConfig(it["dt"], it["t_end"], it["sample_stride"], it["stability_margin"])
        return problem, schedule, source, initial, cfg


def _build_problem(p):
    fam, n = p["family"], p["dimension"]
    if fam == "quadratic":
        return quadratic_problem(n, p["eig_min"], p["eig_max"], p["seed"])
    if fam == "shifted_quartic":
        return shifted_quartic_problem(n, p["shift"], p["coef"], p["eig_min"], p["eig_max"], p["seed"])
    if fam == "flat_basin":
        return flat_basin_problem(n, p["radius"], p["coef"])
    f = None if p["nonlinearity"] == "none" else ScalarNonlinearity("cubic", p["coef"], 0.0)
    return build_wave_problem(n, f)


def _build_damping(d):
    table = d.get("table") or ()
    return DampingSchedule(d["kind"], d["K"], d["alpha"], d["t0"], d["scale"],
                           tuple(x for x, _ in table), tuple(y for _, y in table))


def _build_source(s, problem):
    direction = unit_vector(s["seed"], problem.n, problem.h)
    if s["family"] == "zero":
        return SourceTerm("zero", direction)
    return SourceTerm(s["family"], direction, s["c"], s["beta"], s["rate"], s["omega"])


def _defaults(alpha):
    return {
        "scenario": {"name": "scenario"},
        "problem": {"eig_min": 1.0, "eig_max": 4.0, "seed": 0, "shift": 1.0, "coef": 1.0,
                    "radius": 1.0, "nonlinearity": "cubic"},
        "damping": {"kind": "power", "t0": 0.0, "scale": 1.0, "table": ()},
        "source": {"family": "zero", "c": 1.0, "beta": 2.0, "rate": 1.0, "omega": 1.0, "seed": 1},
        "initial": {"offset": 1.0, "seed": 2, "v0": 0.0, "shape": None},
        "integrator": {"dt": None, "t_end": 100.0, "sample_stride": None, "stability_margin": 0.5, "guard": "on"},
        "diagnostics": {"nu": (2.0 * alpha,), "window_fraction": 0.5, "checkpoints": 16},
        "output": {"path": None},
    }


def _tokenize(text):
    """Split config text into {section: {key: (raw value, line number)}}; collect syntax errors."""
    sections, errors = {}, []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{current}]")
            elif current in sections:
                errors.append(f"line {lineno}: duplicate section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any section")
            continue
        key, value = (x.strip() for x in line.split("=", 1))
        if current in _SCHEMA and key not in _SCHEMA[current]:
            errors.append(f"line {lineno}: unknown key '{key}' in [{current}]")
            continue
        sections[current][key] = (value, lineno)
    return sections, errors


def _convert(section, key, raw, lineno, errors):
    typ = _SCHEMA[section][key]
    try:
        if typ is int:
            return int(raw, 0)
        if typ is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        return raw
    except ValueError:
        errors.append(f"line {lineno}: [{section}] {key} = {raw!r} is not a valid {typ.__name__}")
        return None


def parse_config(text):
    """Parse and fully validate a scenario config; raises ConfigError listing every problem."""
    sections, errors = _tokenize(text)
    for req in _REQUIRED:
        if req not in sections:
            errors.append(f"missing section [{req}]")
    values = {}
    for sec, items in sections.items():
        if sec not in _SCHEMA:
            continue
        for key, (raw, lineno) in items.items():
            v = _convert(sec, key, raw, lineno, errors)
            if v is not None:
                values.setdefault(sec, {})[key] = v
    alpha = values.get("damping", {}).get("alpha", 0.0)
    cfg = _defaults(alpha)
    for sec, items in values.items():
        cfg[sec].update(items)

    prob, damp, src = cfg["problem"], cfg["damping"], cfg["source"]
    if "family" not in prob:
        errors.append("[problem] family is required")
    elif prob["family"] not in PROBLEM_FAMILIES:
        errors.append(f"[problem] family must be one of {', '.join(PROBLEM_FAMILIES)}")
    if "dimension" not in prob:
        errors.append("[problem] dimension is required")
    elif prob["dimension"] < 1:
        errors.append("[problem] dimension must be positive")
    if prob.get("nonlinearity") not in ("none", "cubic"):
        errors.append("[problem] nonlinearity must be 'none' or 'cubic'")
    for key in ("K", "alpha"):
        if key not in damp:
            errors.append(f"[damping] {key} is required")
    if "alpha" in damp and not 0.0 <= damp["alpha"] < 1.0:
        errors.append(f"[damping] alpha = {damp['alpha']!r} rejected: alpha must lie in [0, 1)")
    if "K" in damp and not damp["K"] > 0:
        errors.append("[damping] K must be positive")
    if isinstance(damp.get("table"), str):
        try:
            pairs = [tuple(float(x) for x in item.split(":")) for item in damp["table"].split(",")]
            if any(len(pr) != 2 for pr in pairs):
                raise ValueError
            damp["table"] = tuple(pairs)
        except ValueError:
            errors.append("[damping] table must look like 't:gamma, t:gamma, ...'")
            damp["table"] = ()
    if isinstance(cfg["diagnostics"]["nu"], str):
        try:
            cfg["diagnostics"]["nu"] = tuple(float(x) for x in cfg["diagnostics"]["nu"].split(",") if x.strip())
        except ValueError:
            errors.append("[diagnostics] nu must be a comma-separated list of numbers")
            cfg["diagnostics"]["nu"] = ()
    if "alpha" in damp:
        for nu in cfg["diagnostics"]["nu"]:
            if not 0.0 <= nu < 1.0 + damp["alpha"]:
                errors.append(f"[diagnostics] nu = {nu!r} is outside [0, 1 + alpha) = [0, {1.0 + damp['alpha']!r})")
    if not 0 < cfg["diagnostics"]["window_fraction"] <= 1:
        errors.append("[diagnostics] window_fraction must lie in (0, 1]")
    if cfg["diagnostics"]["checkpoints"] < 4:
        errors.append("[diagnostics] checkpoints must be at least 4")
    if src["family"] not in ("zero", "power_decay", "exp_decay", "modulated_power"):
        errors.append(f"[source] unknown family {src['family']!r}")
    it = cfg["integrator"]
    if not it["t_end"] >= 0:
        errors.append("[integrator] t_end must be nonnegative")
    if it["dt"] is not None and not it["dt"] > 0:
        errors.append("[integrator] dt must be positive")
    if it["guard"] not in ("on", "off"):
        errors.append("[integrator] guard must be 'on' or 'off'")
    if not 0 < it["stability_margin"] <= 1:
        errors.append("[integrator] stability_margin must lie in (0, 1]")
    if it["sample_stride"] is not None and it["sample_stride"] < 1:
        errors.append("[integrator] sample_stride must be positive")
    if errors:
        raise ConfigError(errors)

    if cfg["initial"]["shape"] is None:
        cfg["initial"]["shape"] = "bump" if prob["family"] == "wave" else "random"
    if prob["family"] != "wave":
        cfg["problem"]["nonlinearity"] = "none" if prob["family"] == "quadratic" else "cubic"
    try:
        problem = _build_problem(prob)
        schedule = _build_damping(damp)
        source = _build_source(src, problem)
        initial = default_initial(problem, cfg["initial"]["offset"], cfg["initial"]["seed"],
                                  cfg["initial"]["v0"], cfg["initial"]["shape"])
        limit = stable_dt(problem, initial, it["stability_margin"])
        if it["dt"] is None:
            it["dt"] = min(0.01, limit)
        elif it["dt"] > limit and it["guard"] == "on":
            errors.append(f"[integrator] dt = {it['dt']!r} violates the RK4 stability guard (max {limit:.4g})")
        if it["sample_stride"] is None:
            steps = it["t_end"] / it["dt"]
            it["sample_stride"] = max(1, int(math.ceil(steps / 10000.0)))
        classification = classify_source(schedule, source)
    except VandampError as exc:
        errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        name=cfg["scenario"]["name"],
        problem=prob, damping={**damp, "table": tuple(damp["table"])}, source=src,
        initial=cfg["initial"], integrator=it,
        diagnostics={**cfg["diagnostics"], "nu": tuple(cfg["diagnostics"]["nu"])},
        output=cfg["output"], classification=classification,
    )


# ---------------------------------------------------------------------------
# CSV


CSV_BASE = ("t", "E", "Etilde", "p", "speed", "dist_V", "gradnorm_Vp")


def emit_csv(record, path):
    """Write the record with shortest round-trip float formatting and LF line endings."""
    cols = record.columns()
    names = list(cols)
    data = [np.asarray(cols[k], dtype=float).tolist() for k in names]
    lines = [",".join(names)]
    lines.extend(",".join(map(repr, row)) for row in zip(*data))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    return {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# verdicts


def _status(applicable, observed):
    if not applicable:
        return "probe"
    return "pass" if observed else "fail"


def _bounded_observed(record):
    p = record.p
    half = record.t >= record.t[-1] / 2.0
    if not np.any(~half):
        return True
    return bool(np.max(p[half]) <= 1.1 * np.max(p[~half]) + 1e-12)


def evaluate(config, problem, schedule, source, record):
    """Theorem-by-theorem verdict block for one trajectory."""
    rep = config.classification
    norms = NormTriple(problem)
    a = schedule.alpha
    bounded = _bounded_observed(record)
    long_enough = len(record.t) >= 3 and record.t[-1] >= 100.0 * record.dt_sample
    limit = dg.limit_candidate_check(problem, norms, record.u_final)

    def rate(nu):
        trend = dg.scaled_energy_trend(record, nu)
        total, vb = dg.velocity_integral_verdict(record, nu)
        return {"trend_ratio": trend.ratio, "trend_pass": trend.passed,
                "velocity_integral": total, "velocity_bounded": vb,
                "observed": bool(trend.passed and vb)}

    out = {}
    th1 = rate(2.0 * a)
    anchor_ok = dg.anchor_limit_check(record)[1] if long_enough else False
    th1.update(anchor_limit=anchor_ok, limit_phi_gap=limit.phi_gap, limit_grad_vprime=limit.grad_vprime,
               limit_member=limit.member)
    th1["observed"] = bool(th1["observed"] and anchor_ok and limit.member)
    th1_app = rep.op and (rep.th2_square or bounded)
    out["theorem1"] = {"status": _status(th1_app, th1["observed"]), **th1}

    out["theorem2"] = {"status": _status(rep.op and rep.th2_square, th1["observed"] and bounded),
                       "bounded": bounded, "sup_u": record.sup_u, "observed": bool(th1["observed"] and bounded)}

    ck_ok = record.checkpoint_t.size and np.count_nonzero(record.checkpoint_t >= record.t[-1] / 2) >= 4
    dist, conv = dg.cauchy_check(record, norms, "V") if ck_ok else (math.nan, False)
    th3_obs = bool(conv and limit.member)
    out["theorem3"] = {"status": _status(problem.even and rep.op and rep.th3_square, th3_obs),
                       "cauchy_V": dist, "converged": conv, "limit_member": limit.member, "observed": th3_obs}

    gint, gbounded = dg.gradient_integral_verdict(record)
    th4_obs = bool(conv and gbounded and limit.member)
    out["theorem4"] = {"status": _status(problem.flat_interior and rep.op and (rep.th2_square or bounded), th4_obs),
                       "cauchy_V": dist, "converged": conv, "gradient_integral": gint,
                       "gradient_bounded": gbounded, "observed": th4_obs}

    prop = {}
    for nu in config.nu:
        r = rate(nu)
        prop[repr(float(nu))] = {"status": _status(rep.prop1_applicable(nu, bounded), r["observed"]), **r}
    out["prop1"] = prop

    if source.is_zero:
        count, worst = dg.monotonicity_violations(record.E)
        out["energy"] = {"status": "pass" if count == 0 else "fail", "series": "E",
                         "violations": count, "max_jump": worst, "observed": count == 0}
    else:
        count, worst = dg.monotonicity_violations(record.Etilde)
        out["energy"] = {"status": _status(rep.tail_converges, count == 0), "series": "Etilde",
                         "violations": count, "max_jump": worst, "observed": count == 0}
    return out


def _statuses(verdicts):
    for key, v in verdicts.items():
        if key == "prop1":
            yield from (x["status"] for x in v.values())
        else:
            yield v["status"]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    record: object
    verdicts: dict
    exit_code: int
    csv_path: str = None
    error: str = None
    wall_time: float = 0.0

    def summary(self):
        return {
            "name": self.config.name,
            "digest": self.config.digest,
            "classification": _clean(dataclasses.asdict(self.config.classification)) | {
                "probe": self.config.probe},
            "verdicts": _clean(self.verdicts),
            "exit_code": self.exit_code,
            "error": self.error,
            "csv": None if self.csv_path is None else os.path.basename(self.csv_path),
        }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def run_scenario(config, csv_path=None):
    """Integrate, write the CSV, evaluate verdicts.

    Exit code 0 when every applicable verdict passes (probe verdicts never
    count), 1 on a failing verdict, 2 on numerical blow-up (partial CSV
    written), 3 when the CSV cannot be written.
    """
    start = time.perf_counter()
    csv_path = csv_path or config.output.get("path")
    problem, schedule, source, initial, icfg = config.build()
    nu_all = sorted(set(config.nu) | {2.0 * schedule.alpha})
    try:
        record = integrate(icfg, problem, schedule, source, initial, nu=nu_all,
                           checkpoints=config.diagnostics["checkpoints"],
                           check_stability=config.integrator["guard"] == "on")
    except StabilityError as exc:
        record = exc.record
        if record is not None:
            record.nu = config.nu
        code, err = EXIT_UNSTABLE, str(exc)
        if csv_path and record is not None:
            try:
                emit_csv(record, csv_path)
            except OSError:
                pass
        return ScenarioResult(config, record, {}, code, csv_path, err, time.perf_counter() - start)
    record.nu = config.nu
    verdicts = evaluate(config, problem, schedule, source, record)
    code = EXIT_OK if all(s != "fail" for s in _statuses(verdicts)) else EXIT_VERDICT
    err = None
    if csv_path:
        try:
            emit_csv(record, csv_path)
        except OSError as exc:
            code, err = EXIT_IO, f"cannot write {csv_path}: {exc}"
    return ScenarioResult(config, record, verdicts, code, csv_path, err, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# suites


SUITES = ("theorem1", "theorem2", "theorem3", "theorem4", "prop1", "lemma1", "wave", "probes", "all")


def scenario_text(name, problem, damping, source=None, integrator=None, diagnostics=None, initial=None):
    """Render a config file from section dicts."""
    parts = [("scenario", {"name": name}), ("problem", problem), ("damping", damping),
             ("source", source or {}), ("initial", initial or {}), ("integrator", integrator or {}),
             ("diagnostics", diagnostics or {})]
    out = []
    for sec, items in parts:
        if not items:
            continue
        out.append(f"[{sec}]")
        out.extend(f"{k} = {v}" for k, v in items.items())
        out.append("")
    return "\n".join(out)


_LONG = {"dt": 5e-3, "t_end": 1e4, "sample_stride": 200}


def _suite_texts(name):
    if name == "theorem1":
        return [scenario_text(f"th1_a{a}_n{n}", {"family": "quadratic", "dimension": n},
                              {"K": 2.0, "alpha": a},
                              {"family": "power_decay", "c": 0.5, "beta": round(1.2 + a, 10)},
                              _LONG)
                for a in (0.25, 0.5, 0.75) for n in (1, 4)]
    if name == "theorem2":
        return [scenario_text("th2_quadratic_n4", {"family": "quadratic", "dimension": 4},
                              {"K": 2.0, "alpha": 0.5}, {"family": "power_decay", "c": 0.5, "beta": 2.0}, _LONG),
                scenario_text("th2_shifted_quartic_n4", {"family": "shifted_quartic", "dimension": 4, "shift": 1.0},
                              {"K": 2.0, "alpha": 0.5}, {"family": "power_decay", "c": 0.5, "beta": 2.0}, _LONG)]
    if name == "theorem3":
        out = []
        for n in (1, 4):
            for src in ({"family": "power_decay", "c": 0.5, "beta": 2.0}, {"family": "zero"}):
                tag = "g" if src["family"] != "zero" else "g0"
                out.append(scenario_text(f"th3_even_quartic_n{n}_{tag}",
                                         {"family": "shifted_quartic", "dimension": n, "shift": 0.0},
                                         {"K": 2.0, "alpha": 0.5}, src, _LONG))
        return out
    if name == "theorem4":
        return [scenario_text(f"th4_flat_basin_n{n}", {"family": "flat_basin", "dimension": n, "radius": 1.0},
                              {"K": 2.0, "alpha": 0.5}, {"family": "power_decay", "c": 0.2, "beta": 2.0},
                              _LONG, initial={"offset": 3.0})
                for n in (1, 4)]
    if name == "prop1":
        return [scenario_text(f"prop1_n{n}", {"family": "quadratic", "dimension": n},
                              {"K": 2.0, "alpha": 0.5}, {"family": "power_decay", "c": 0.5, "beta": 1.75},
                              _LONG, {"nu": "1.0, 1.3"})
                for n in (1, 4)]
    if name == "wave":
        return [scenario_text("wave_n64_cubic", {"family": "wave", "dimension": 64, "nonlinearity": "cubic"},
                              {"K": 3.0, "alpha": 0.5}, {"family": "exp_decay", "c": 1.0, "rate": 0.1},
                              {"dt": 0.01, "t_end": 5000.0, "sample_stride": 50}, {"nu": "1.0"})]
    if name == "probes":
        return [scenario_text(f"probe_beta1.2_n{n}", {"family": "quadratic", "dimension": n},
                              {"K": 2.0, "alpha": 0.5}, {"family": "power_decay", "c": 0.5, "beta": 1.2},
                              _LONG)
                for n in (1, 4)]
    if name == "lemma1":
        return []
    raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def suite_configs(name):
    if name == "all":
        return [c for s in SUITES[:-1] for c in suite_configs(s)]
    return [parse_config(text) for text in _suite_texts(name)]


LEMMA1_K = (0.5, 1.0, 2.0)
LEMMA1_ALPHA = (0.0, 0.3, 0.5, 0.7)
LEMMA1_OFFSETS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0)


def lemma1_lattice():
    """All 120 (K, alpha, tau) cells with tau = tau0 + offset."""
    cells = []
    for K in LEMMA1_K:
        for a in LEMMA1_ALPHA:
            sched = DampingSchedule("power", K, a)
            t0 = dg.tau0(sched)
            for off in LEMMA1_OFFSETS:
                res = dg.lemma1_check(sched, t0 + off)
                cell = {"K": K, "alpha": a, "tau": t0 + off, "lhs": res.lhs, "rhs": res.rhs,
                        "pass": res.passed}
                if a == 0.0:
                    cell["exact"] = 1.0 / K
                    cell["pass"] = bool(res.passed and abs(res.lhs - 1.0 / K) <= 1e-9)
                cells.append(cell)
    return cells


@dataclass
class SuiteReport:
    name: str
    scenarios: list
    lemma1: list
    passed: bool
    exit_code: int
    wall_time: float = 0.0

    def to_json(self):
        body = {"suite": self.name, "passed": self.passed, "exit_code": self.exit_code,
                "scenarios": [r.summary() for r in self.scenarios], "lemma1": _clean(self.lemma1)}
        return json.dumps(body, sort_keys=True, indent=1) + "\n"


def _threads():
    try:
        return max(1, int(os.environ.get("VANDAMP_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def run_suite(name, out_dir=None, threads=None):
    """Run a predefined scenario matrix; writes ``<out>/<name>_summary.json`` plus one CSV per scenario."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    start = time.perf_counter()
    configs = suite_configs(name)
    out = Path(out_dir) if out_dir else None
    jobs = [(c, str(out / f"{c.name}.csv") if out else None) for c in configs]
    with ThreadPoolExecutor(max_workers=threads or _threads()) as pool:
        results = list(pool.map(lambda job: run_scenario(*job), jobs))
    lemma = lemma1_lattice() if name in ("lemma1", "all") else []
    hard = [r for r in results if r.exit_code != EXIT_OK]
    ok = not hard and all(c["pass"] for c in lemma)
    report = SuiteReport(name, results, lemma, ok, EXIT_OK if ok else EXIT_VERDICT, time.perf_counter() - start)
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}_summary.json").write_text(report.to_json())
    return report
