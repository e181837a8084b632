"""Parameter sweeps, config files, result tables and the oracle verification suite."""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import integrate

from . import analytic, lindblad, quantum, sensitivity
from .lindblad import IntegratorConfig, NoiseModel, SystemParams
from .quantum import L_MAX, ProbeState, Scheme

CSV_HEADER = ["L", "m", "gamma", "noise", "scheme", "t_opt", "delta_eps_norm",
              "ratio", "regime", "validity"]
MODES = ("analytic", "numeric", "compare")
FORMATS = ("csv", "json")
SIG_DIGITS = 12


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass
class SweepConfig:
    L: list = field(default_factory=lambda: [1])
    m: list = field(default_factory=lambda: [1.1])
    gamma: list = field(default_factory=lambda: [1e-6])
    noise: str = "parallel"
    schemes: list = field(default_factory=lambda: [Scheme.INDIVIDUAL, Scheme.GHZ])
    mode: str = "analytic"
    T_normalized: bool = True
    T: float = math.inf
    omega: float = 1.0
    epsilon: float = 1e-4
    parallel_form: str = "canonical"
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    jobs: int = 1
    points_per_decade: int = 2000
    max_steps: int = 200_000
    times: list = field(default_factory=lambda: list(np.linspace(0.0, 20.0, 201)))

    def noise_model(self, gamma: float) -> NoiseModel:
        if self.noise == "none":
            return NoiseModel()
        return NoiseModel(self.noise, gamma, self.parallel_form)

    def params(self, L: int, m: float, gamma: float, epsilon: float = 0.0) -> SystemParams:
        return SystemParams(self.omega, m, epsilon, int(L), self.noise_model(gamma))

    def validate(self):
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(msg, key)

        for key, attr in (("L", "L"), ("m", "m"), ("gamma", "gamma"), ("scheme", "schemes"),
                          ("times", "times")):
            need(getattr(self, attr), key, f"empty grid for {key}")
        need(self.mode in MODES, "mode", f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        need(self.format in FORMATS, "format", f"format must be csv or json, got {self.format!r}")
        need(self.noise in lindblad.NOISE_KINDS, "noise", f"unknown noise {self.noise!r}")
        need(self.parallel_form in lindblad.PARALLEL_FORMS, "parallel_form",
             f"unknown parallel_form {self.parallel_form!r}")
        need(all(L >= 1 for L in self.L), "L", "L values must be >= 1")
        need(self.mode == "analytic" or max(self.L) <= L_MAX, "L",
             f"numeric and compare modes need L <= {L_MAX}")
        need(all(m >= 0 for m in self.m), "m", "m must be non-negative")
        need(all(g >= 0 for g in self.gamma), "gamma", "gamma must be non-negative")
        need(self.omega > 0, "omega", "omega must be positive")
        need(self.T > 0, "T", "T must be positive")
        need(self.T_normalized or math.isfinite(self.T), "T_normalized",
             "T_normalized = false requires a finite T")
        need(self.jobs >= 1, "jobs", "jobs must be >= 1")
        need(self.points_per_decade >= 10, "points_per_decade", "points_per_decade must be >= 10")
        return self


# --- config parsing -------------------------------------------------------

_KEYS = {
    "L", "m", "gamma", "noise", "scheme", "mode", "T_normalized", "T", "omega",
    "epsilon", "parallel_form", "output", "format", "seed", "jobs",
    "points_per_decade", "max_steps", "times",
}


def _split_assignments(line: str, lineno: int):
    # "a = 1, 2, b = x" -> [("a", "1, 2"), ("b", "x")]
    out = []
    for seg in line.split(","):
        if "=" in seg:
            key, _, val = seg.partition("=")
            out.append([key.strip(), val.strip()])
        elif out:
            out[-1][1] += "," + seg
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
    return [(k, v.strip()) for k, v in out]


def _log_range(text: str, key: str, lineno: int, offset: float = 0.0) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"line {lineno}: malformed range {text!r} for {key} (start:stop:points_per_decade)")
    try:
        start, stop, ppd = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"line {lineno}: malformed range {text!r} for {key}") from None
    lo, hi = start - offset, stop - offset
    if ppd <= 0 or lo <= 0 or hi <= 0 or hi < lo:
        raise ConfigError(f"line {lineno}: invalid log range {text!r} for {key}")
    n = int(math.floor(math.log10(hi / lo) * ppd + 0.5)) + 1
    vals = np.geomspace(lo, hi, n) if n > 1 else np.array([lo])
    return [float(v + offset) for v in vals]


def _floats(text: str, key: str, lineno: int) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse numbers for {key}: {text!r}") from None


def _bool(text: str, key: str, lineno: int) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"line {lineno}: {key} expects a boolean, got {text!r}")


def parse_config(text: str) -> SweepConfig:
    """Parse flat ``key = value`` lines.

    ``#`` starts a comment, lists are comma separated and
    ``start:stop:points_per_decade`` is a log-spaced range. For ``m`` the
    range is log-spaced in the detuning ``m - omega``.
    """
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].replace("−", "-").strip()
        if not line:
            continue
        for key, val in _split_assignments(line, lineno):
            if key not in _KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if not val:
                raise ConfigError(f"line {lineno}: empty value for {key!r}")
            raw[key] = (val, lineno)

    cfg = SweepConfig()
    scalar_float = {"T": "T", "omega": "omega", "epsilon": "epsilon"}
    for key, attr in scalar_float.items():
        if key in raw:
            val, ln = raw[key]
            vals = _floats(val, key, ln)
            if len(vals) != 1:
                raise ConfigError(f"line {ln}: {key} takes a single value")
            setattr(cfg, attr, vals[0])
    for key in ("seed", "jobs", "points_per_decade", "max_steps"):
        if key in raw:
            val, ln = raw[key]
            try:
                setattr(cfg, key, int(val))
            except ValueError:
                raise ConfigError(f"line {ln}: {key} expects an integer, got {val!r}") from None
    for key in ("noise", "mode", "format", "parallel_form", "output"):
        if key in raw:
            setattr(cfg, key, raw[key][0] if key == "output" else raw[key][0].lower())
    if "T_normalized" in raw:
        val, ln = raw["T_normalized"]
        cfg.T_normalized = _bool(val, "T_normalized", ln)
    if "scheme" in raw:
        val, ln = raw["scheme"]
        try:
            cfg.schemes = [Scheme(s.strip().lower()) for s in val.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"line {ln}: scheme must be individual and/or ghz, got {val!r}") from None
        if len(set(cfg.schemes)) != len(cfg.schemes):
            raise ConfigError(f"line {ln}: duplicate scheme")

    def grid(key, offset=0.0):
        val, ln = raw[key]
        if ":" in val:
            return _log_range(val, key, ln, offset)
        return _floats(val, key, ln)

    if "L" in raw:
        vals = grid("L")
        ints = []
        for v in vals:
            iv = int(round(v))
            if ":" not in raw["L"][0] and iv != v:
                raise ConfigError(f"line {raw['L'][1]}: L must be integers")
            if iv not in ints:
                ints.append(iv)
        cfg.L = ints
    if "m" in raw:
        val, ln = raw["m"]
        if ":" in val:
            try:
                offset = cfg.omega if float(val.split(":")[0]) > cfg.omega else 0.0
            except ValueError:
                offset = 0.0
            cfg.m = _log_range(val, "m", ln, offset)
        else:
            cfg.m = _floats(val, "m", ln)
    if "gamma" in raw:
        cfg.gamma = grid("gamma")
    if "times" in raw:
        cfg.times = grid("times")
    try:
        return cfg.validate()
    except ConfigError as exc:
        if exc.key in raw:
            raise ConfigError(f"line {raw[exc.key][1]}: {exc}", exc.key) from None
        raise


def load_config(path: str | Path) -> SweepConfig:
    """Read a config file, or one of the bundled presets (``fig1`` .. ``fig4``)."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text())
    name = p.name if p.name.endswith(".cfg") else p.name + ".cfg"
    preset = resources.files("ghzmag.presets") / name
    if preset.is_file():
        return parse_config(preset.read_text())
    raise FileNotFoundError(f"no config file or preset named {str(path)!r}")


# --- sweeps ---------------------------------------------------------------

@dataclass
class SweepRow:
    L: int
    m: float
    gamma: float
    noise: str
    scheme: str
    t_opt: float | None
    delta_eps_norm: float | None
    ratio: float | None
    regime: str
    validity: str


def numeric_delta_epsilon_norm(t: float, params: SystemParams, scheme, max_steps: int = 200_000,
                               cfg: IntegratorConfig | None = None) -> float:
    """``sqrt(T) * d_eps`` with p and dp/deps taken from Lindblad integrations.

    Individual qubits are simulated as one qubit and counted ``L`` times.
    The slope uses a one-sided second-order difference at eps = 0.
    """
    scheme = Scheme(scheme)
    cfg = cfg or IntegratorConfig()
    L = params.L
    sim = replace(params, L=1) if scheme is Scheme.INDIVIDUAL else params
    steps = t / cfg.step_bound(sim)
    if steps > max_steps:
        raise lindblad.IntegrationError(f"{steps:.3g} RK4 steps needed (max_steps={max_steps})")
    h = 1e-3 / (sim.L * t)
    probe = ProbeState(scheme, sim.L)
    p = [lindblad.probability_trace(replace(sim, epsilon=k * h), probe, [t], cfg)[0][1]
         for k in (0, 1, 2)]
    slope = (-3 * p[0] + 4 * p[1] - p[2]) / (2 * h)
    n_r = (L if scheme is Scheme.INDIVIDUAL else 1) / t
    p0 = min(max(p[0], 0.0), 1.0)
    return float(sensitivity.delta_p(p0, n_r) / abs(slope))


def _run_point(args):
    cfg, L, m, gamma, scheme = args
    noise_label = cfg.noise
    try:
        params = cfg.params(L, m, gamma)
        budget = sensitivity.MeasurementBudget(cfg.T, int(L), scheme)
        res = sensitivity.optimize_time(params, budget, points_per_decade=cfg.points_per_decade)
        value = res.delta_eps_norm
        validity = res.validity
        if cfg.mode != "analytic":
            num = numeric_delta_epsilon_norm(res.t_opt, params, scheme, cfg.max_steps)
            if cfg.mode == "numeric":
                value = num
            else:
                rel = abs(num / value - 1)
                if rel > 0.05:
                    validity = f"numeric-mismatch(rel={rel:.3g})"
        if not cfg.T_normalized:
            value = value / math.sqrt(cfg.T)
        return SweepRow(int(L), m, gamma, noise_label, scheme.value, res.t_opt, value,
                        None, res.regime, validity)
    except Exception as exc:  # recorded per row, never aborts the sweep
        msg = f"failed: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        return SweepRow(int(L), m, gamma, noise_label, scheme.value, None, None, None, "", msg)


def run_sweep(cfg: SweepConfig, jobs: int | None = None) -> list[SweepRow]:
    """One row per (L, m, gamma, scheme) in grid order; ratios joined per point."""
    cfg.validate()
    tasks = [(cfg, L, m, g, s) for L in cfg.L for m in cfg.m for g in cfg.gamma for s in cfg.schemes]
    jobs = jobs or cfg.jobs
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_run_point(t) for t in tasks]

    if Scheme.INDIVIDUAL in cfg.schemes and Scheme.GHZ in cfg.schemes:
        by_key: dict[tuple, dict[str, SweepRow]] = {}
        for r in rows:
            by_key.setdefault((r.L, r.m, r.gamma, r.noise), {})[r.scheme] = r
        for pair in by_key.values():
            ind, ghz = pair.get("individual"), pair.get("ghz")
            if ind and ghz and ind.delta_eps_norm and ghz.delta_eps_norm:
                rat = ghz.delta_eps_norm / ind.delta_eps_norm
                ind.ratio = ghz.ratio = rat
    return rows


# --- output ---------------------------------------------------------------

def _num(x):
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def _row_record(r: SweepRow) -> dict:
    return {
        "L": int(r.L), "m": _num(r.m), "gamma": _num(r.gamma), "noise": r.noise,
        "scheme": r.scheme, "t_opt": _num(r.t_opt), "delta_eps_norm": _num(r.delta_eps_norm),
        "ratio": _num(r.ratio), "regime": r.regime, "validity": r.validity,
    }


def format_rows(rows: list[SweepRow], fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("no rows to emit")
    records = [_row_record(r) for r in rows]
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(["" if rec[k] is None else (f"{rec[k]:.{SIG_DIGITS}g}" if isinstance(rec[k], float)
                                                else rec[k]) for k in CSV_HEADER])
    return buf.getvalue()


def emit(rows: list[SweepRow], fmt: str, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(format_rows(rows, fmt))
    return path


def read_rows(path: str | Path) -> list[dict]:
    """Parse a CSV or JSON table written by :func:`emit` back into records."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("["):
        return json.loads(text)
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k in CSV_HEADER:
            v = rec[k]
            if k == "L":
                row[k] = int(v)
            elif k in ("noise", "scheme", "regime", "validity"):
                row[k] = v
            else:
                row[k] = float(v) if v != "" else None
        out.append(row)
    return out


# --- verification ---------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: str
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<34} residual={self.residual:.3e} tol={self.tolerance} ({self.seconds:.1f}s)"


@dataclass
class VerificationReport:
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def text(self) -> str:
        lines = [f"verification suite (seed={self.seed})"]
        lines += [c.line() for c in self.checks]
        lines.append("ALL CHECKS PASSED" if self.passed else "FAILED: " + ", ".join(self.failed()))
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed, "checks": [asdict(c) for c in self.checks]}


ORACLE_M = (0.5, 1.5, 3.0)
ORACLE_EPS = 1e-4
ORACLE_TIMES = np.linspace(0.0, 20.0, 401)


def check_kraus_equivalence(seed: int, n_states: int = 100, Ls=(1, 2, 3), gamma: float = 0.37):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for L in Ls:
        for _ in range(n_states):
            rho = quantum.random_density_matrix(L, rng)
            a = lindblad.dissipator_depolarizing(rho, gamma, L)
            b = lindblad.dissipator_depolarizing_kraus(rho, gamma, L)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst, worst < 1e-12


def oracle_tolerance(L: int, eps: float = ORACLE_EPS) -> float:
    return 5 * eps**2 if L == 1 else 5 * (L * eps) ** 2 + 3 * eps


def oracle_residuals(noise_kind: str, gammas, Ls=(1, 2, 3, 4), ms=ORACLE_M, eps=ORACLE_EPS,
                     times=ORACLE_TIMES, parallel_form="canonical"):
    """Worst ``|numeric - closed form| / tolerance`` per qubit count.

    Returns ``{L: (max_residual, tolerance)}``; both schemes are checked,
    the individual scheme against the one-qubit formula.
    """
    out = {}
    for L in Ls:
        worst = 0.0
        for g in gammas:
            for m in ms:
                p = SystemParams(1.0, m, eps, L, NoiseModel(noise_kind, g, parallel_form))
                schemes = (Scheme.INDIVIDUAL, Scheme.GHZ) if L == 1 else (Scheme.GHZ,)
                for s in schemes:
                    num = np.array([v for _, v in lindblad.probability_trace(p, ProbeState(s, L), times)])
                    ref = analytic.model_probability(times, p, s).value
                    worst = max(worst, float(np.max(np.abs(num - ref))))
        out[L] = (worst, oracle_tolerance(L, eps))
    return out


def check_individual_depolarizing_first_order(eps=ORACLE_EPS, gamma=1e-2):
    worst = 0.0
    for m in ORACLE_M:
        p = SystemParams(1.0, m, eps, 1, NoiseModel.depolarizing(gamma))
        num = np.array([v for _, v in lindblad.probability_trace(p, ProbeState(Scheme.INDIVIDUAL, 1), ORACLE_TIMES)])
        ref = analytic.p_individual_depolarizing(ORACLE_TIMES, p).value
        worst = max(worst, float(np.max(np.abs(num - ref))))
    return worst, worst <= 5 * eps**2


def check_large_L_depolarizing(eps=1e-5, gamma=1e-2):
    """Large-L form against the exact one where its assumptions hold."""
    worst = 0.0
    for L in (10, 12, 16, 20):
        for m in ORACLE_M:
            p = SystemParams(1.0, m, eps, L, NoiseModel.depolarizing(gamma))
            t = np.linspace(0.01, 40.0, 400)
            w = analytic.window(t, 1.0, m)
            ok = (0.5**L < 1e-3 * np.exp(-L * gamma * t)) & (np.abs(2 * L * eps * t * w) < 0.05)
            if not ok.any():
                continue
            ex = analytic.p_ghz_depolarizing_exact(t[ok], p).value
            lead = analytic.p_ghz_depolarizing_leading(t[ok], p).value
            worst = max(worst, float(np.max(np.abs(lead / ex - 1))))
    return worst, worst < 0.01


def check_window_quadrature(seed: int, n: int = 1000, omega: float = 1.0):
    rng = np.random.default_rng(seed + 1)
    ms = rng.uniform(0.0, 4.0, n)
    ts = 10 ** rng.uniform(-8, 1.5, n)
    ms[:50] = omega
    ts[50:60] = 10.0 ** -np.arange(6, 16)
    ts[60:70] = 0.0
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for t, m in zip(ts, ms):
            worst = max(worst, abs(float(analytic.window(t, omega, m)) - _window_quad(t, omega, m)))
    return worst, worst < 1e-10


def _window_quad(t, omega, m):
    if t == 0:
        return 2.0
    val, _ = integrate.quad(lambda s: 2 * np.cos(m * s) * np.cos(omega * s), 0, t,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / t


def check_signal_integrals(omega=1.0, m=1.4, gamma=0.01, t=7.0):
    got = analytic.signal_integrals(t, omega, m, gamma)
    refs = [
        integrate.quad(lambda s: np.cos(m * s) * np.sin(omega * s) * np.exp(-gamma * s), 0, t, epsabs=1e-14)[0],
        integrate.quad(lambda s: np.cos(m * s) * np.sin(omega * s) * np.exp(gamma * s), 0, t, epsabs=1e-14)[0],
        integrate.quad(lambda s: np.cos(m * s) * np.cos(omega * s), 0, t, epsabs=1e-14)[0],
    ]
    worst = max(abs(a - b) for a, b in zip(got, refs))
    return worst, worst < 1e-10


def rk4_error_ratio(eps=1e-2, gamma=1e-2, m=1.5, t_final=10.0):
    """Terminal-state error ratio between step sizes dt and dt/2 (dt/8 reference)."""
    p = SystemParams(1.0, m, eps, 1, NoiseModel.parallel(gamma))
    rho0 = quantum.initial_state(ProbeState(Scheme.INDIVIDUAL, 1))
    n = math.ceil(t_final / IntegratorConfig().step_bound(p))
    ref = lindblad.evolve(rho0, t_final, p, dt=t_final / (8 * n))
    e1 = np.max(np.abs(lindblad.evolve(rho0, t_final, p, dt=t_final / n) - ref))
    e2 = np.max(np.abs(lindblad.evolve(rho0, t_final, p, dt=t_final / (2 * n)) - ref))
    return float(e1 / e2)


def verify(cfg: SweepConfig | None = None, seed: int | None = None) -> VerificationReport:
    """Run every numeric-vs-closed-form oracle and report residuals."""
    cfg = cfg or SweepConfig(mode="compare")
    seed = cfg.seed if seed is None else seed
    report = VerificationReport(seed)

    def timed(name, tol, fn):
        t0 = time.perf_counter()
        residual, ok = fn()
        report.checks.append(CheckResult(name, residual, tol, bool(ok), time.perf_counter() - t0))

    timed("kraus-vs-superoperator", "1e-12", lambda: check_kraus_equivalence(seed))
    timed("window-quadrature", "1e-10", lambda: check_window_quadrature(seed))
    timed("signal-integrals-quadrature", "1e-10", check_signal_integrals)

    for kind, gammas in (("parallel", (0.0, 1e-2)), ("depolarizing", (1e-2,))):
        t0 = time.perf_counter()
        res = oracle_residuals(kind, gammas)
        dt = (time.perf_counter() - t0) / len(res)
        for L, (r, tol) in res.items():
            report.checks.append(CheckResult(f"oracle-{kind}-L{L}", r, f"{tol:.2e}", r <= tol, dt))

    timed("individual-depolarizing-first-order", f"{5 * ORACLE_EPS**2:.1e}",
          check_individual_depolarizing_first_order)
    timed("ghz-depolarizing-large-L", "1% rel", check_large_L_depolarizing)

    def rk4():
        r = rk4_error_ratio()
        return r, 12 <= r <= 20

    timed("rk4-order", "ratio in [12, 20]", rk4)
    return report
