"""Experiment bodies.  Each experiment has a per-member worker producing
long-format rows and a summariser that reduces all rows to a JSON summary.
Workers are module-level so they can run in a process pool."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .. import eternal as et
from ..models import member_seed, sample_model
from ..observables import (euclidean_2pt_parts, mutual_info_record, otoc_H,
                           pg_2pt_closed_form)
from ..size_winding import lyapunov_fit, winding_series
from ..states import NumericalError, thermofield_double
from ..teleport import (ProtocolConfig, _signed, register, run, run_classical, run_correlator,
                        run_quantum)
from .config import ConfigError, ExperimentConfig


@dataclass
class MemberResult:
    rows: list[tuple]
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Spec:
    columns: tuple[str, ...]
    worker: Callable[[ExperimentConfig, int, int], MemberResult]
    summarize: Callable[[ExperimentConfig, list[MemberResult]], dict]
    validate: Callable[[ExperimentConfig], None] | None = None


def protocol(cfg: ExperimentConfig, **over) -> ProtocolConfig:
    p = dict(cfg.protocol)
    p.update(over)
    return ProtocolConfig(**p)


def couplings(cfg: ExperimentConfig, seed: int):
    p = cfg.protocol
    return sample_model(p["model"], p["N"], p["q"], p["J"], seed)


def _rows(results: list[MemberResult]) -> list[tuple]:
    return [r for m in results for r in m.rows]


def _sem(a: np.ndarray, axis=0):
    n = a.shape[axis]
    return a.std(axis=axis, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(np.delete(a.shape, axis))


def _check_protocol(cfg: ExperimentConfig, **over):
    try:
        protocol(cfg, **over)
    except ValueError as exc:
        raise ConfigError("protocol", str(exc)) from exc


# mi-curve and pg-compare ------------------------------------------------------

MI_COLUMNS = ("instantiation", "seed", "sign", "mu", "t0", "t1", "I_RT")


def _mi_worker(cfg, k, seed, fixed_t0):
    c = couplings(cfg, seed)
    base = protocol(cfg)
    rows = []
    for sign in (-1, 1):
        sc = _signed(base, sign)
        for t in cfg.grid["t"]:
            t0 = t if fixed_t0 is None else fixed_t0
            r = run(sc.with_(t0=t0, t1=t), c)
            rows.append((k, seed, sign, sc.mu, t0, t, r.I_RT))
    return MemberResult(rows)


def mi_worker(cfg, k, seed):
    return _mi_worker(cfg, k, seed, None)


def pg_worker(cfg, k, seed):
    return _mi_worker(cfg, k, seed, cfg.protocol["t0"])


def mi_summary(cfg, results):
    nt = len(cfg.grid["t"])
    I = np.array([[r[-1] for r in m.rows] for m in results]).reshape(len(results), 2, nt)
    minus, plus = I[:, 0], I[:, 1]
    asym = minus - plus
    mean = asym.mean(axis=0)
    k = int(np.argmax(mean))
    return {"t": cfg.grid["t"], "mean_I_minus": minus.mean(0), "mean_I_plus": plus.mean(0),
            "mean_asymmetry": mean, "sem_asymmetry": _sem(asym),
            "peak_t": cfg.grid["t"][k], "peak_asymmetry": mean[k]}


def mi_validate(cfg):
    _check_protocol(cfg)


# warmup -----------------------------------------------------------------------

def warmup_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    rows = []
    for mu in cfg.grid["mu"]:
        r = run_quantum(protocol(cfg, mu=mu, t0=0.0, t1=0.0, beta=0.0), c)
        rows.append((k, seed, mu, r.I_RT, 2 * np.log2(1 + np.sin(mu) ** 2)))
    return MemberResult(rows)


def warmup_summary(cfg, results):
    d = np.array([r[3] - r[4] for r in _rows(results)])
    return {"max_abs_deviation": float(np.abs(d).max())}


def warmup_validate(cfg):
    if cfg.protocol["N"] != 2:
        raise ConfigError("protocol.N", "the warm-up closed form holds for N = 2 only")
    _check_protocol(cfg)


# winding ----------------------------------------------------------------------

def _fermions(cfg):
    n = cfg.options["fermions"]
    if not 1 <= n <= cfg.protocol["N"]:
        raise ConfigError("options.fermions", f"must lie in [1, N={cfg.protocol['N']}]")
    return tuple(range(n))


def _winding_pair(cfg, c, times):
    p = cfg.protocol
    f = _fermions(cfg)
    pre = winding_series(c, times, p["beta"], f, "L", p["interaction"])
    post = winding_series(c, times, p["beta"], f, "L", p["interaction"], mu=p["mu"])
    return pre, post


def winding_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    pre, post = _winding_pair(cfg, c, cfg.grid["t"])
    rows, extra = [], {"slope_pre": [], "slope_post": [], "coherence_post": []}
    for stage, series in (("pre", pre), ("post", post)):
        for w in series:
            for s, (P, Q) in enumerate(zip(w.P, w.Q)):
                rows.append((k, seed, w.t, stage, s, P, Q.real, Q.imag))
    extra["slope_pre"] = [w.fit.slope for w in pre]
    extra["slope_post"] = [w.fit.slope for w in post]
    extra["coherence_post"] = [w.fit.coherence for w in post]
    return MemberResult(rows, extra)


def winding_summary(cfg, results):
    return {"t": cfg.grid["t"], "members": [m.extra for m in results]}


def summary_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    pre, post = _winding_pair(cfg, c, cfg.grid["t"])
    rows = [(k, seed, a.t, a.fit.slope, b.fit.slope, a.fit.coherence, b.fit.coherence,
             a.fit.weighted_r2, a.mean_size, a.std_size) for a, b in zip(pre, post)]
    return MemberResult(rows)


def winding_series_summary(cfg, results):
    a = np.array([[r[3:] for r in m.rows] for m in results])
    mean = a.mean(axis=0)
    return {"t": cfg.grid["t"], "mean_slope_pre": mean[:, 0], "mean_slope_post": mean[:, 1],
            "mean_coherence_pre": mean[:, 2], "mean_coherence_post": mean[:, 3],
            "mean_size": mean[:, 5]}


# lyapunov ---------------------------------------------------------------------

def lyapunov_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    f = _fermions(cfg)
    rows = []
    for beta in cfg.grid["beta"]:
        for w in winding_series(c, cfg.grid["t"], beta, f, "L", cfg.protocol["interaction"]):
            rows.append((k, seed, beta, w.t, w.fit.slope, w.mean_size))
    return MemberResult(rows)


def lyapunov_summary(cfg, results):
    nb, nt = len(cfg.grid["beta"]), len(cfg.grid["t"])
    s = np.array([[r[4] for r in m.rows] for m in results]).reshape(len(results), nb, nt)
    mean = s.mean(axis=0)
    fits = []
    for b, slopes in zip(cfg.grid["beta"], mean):
        fit = lyapunov_fit(cfg.grid["t"], slopes, tuple(cfg.options["window"]))
        bound = 2 * np.pi / b
        fits.append({"beta": b, "lambda": fit.lam, "bound": bound, "ratio": fit.lam / bound,
                     "rms_residual": fit.rms_residual, "n_points": fit.n_points})
    return {"window": cfg.options["window"], "fits": fits}


def lyapunov_validate(cfg):
    w = cfg.options["window"]
    if len(w) != 2 or w[0] >= w[1]:
        raise ConfigError("options.window", "expected [t_lo, t_hi] with t_lo < t_hi")
    if any(b <= 0 for b in cfg.grid["beta"]):
        raise ConfigError("grid.beta", "the chaos bound needs beta > 0")
    _fermions(cfg)


# eternal ----------------------------------------------------------------------

ETERNAL_COLUMNS = ("instantiation", "seed", "mu", "level", "eigenvalue")


def eternal_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    kind = cfg.protocol["interaction"]
    rows, extra = [], {"E0": [], "gap": [], "beta_star": [], "overlap": [], "on_boundary": [],
                       "fom": [], "multiplicities": []}
    for mu in cfg.grid["mu"]:
        spec = et.eternal_spectrum(c, kind, mu, k=cfg.options["levels"])
        opt = et.optimal_beta(c, kind, mu, cfg.grid["beta"], spec)
        fom = et.sl2r_figure_of_merit(c, kind, mu, opt.beta, spec)
        rows.extend((k, seed, mu, i, e) for i, e in enumerate(spec.eigenvalues))
        for key, v in (("E0", spec.E0), ("gap", spec.gap), ("beta_star", opt.beta),
                       ("overlap", opt.overlap), ("on_boundary", opt.on_boundary), ("fom", fom),
                       ("multiplicities", et.degeneracy_report(spec))):
            extra[key].append(v)
    return MemberResult(rows, extra)


def eternal_summary(cfg, results):
    mu = np.array(cfg.grid["mu"])
    out = {"mu": mu}
    for key in ("E0", "gap", "beta_star", "overlap", "fom"):
        a = np.array([m.extra[key] for m in results], dtype=float)
        out[f"mean_{key}"] = a.mean(axis=0)
    out["beta_on_boundary"] = [any(m.extra["on_boundary"][i] for m in results) for i in range(mu.size)]
    mult = [x for m in results for ms in m.extra["multiplicities"] for x in ms]
    out["multiplicities_seen"] = sorted(set(mult))
    try:
        fit = et.fit_power_law(mu, out["mean_gap"], cfg.options["fit_mu_max"])
        out["power_law"] = {"a": fit.a, "b": fit.b, "c": fit.c, "b_interval": fit.b_interval,
                            "mu_max": cfg.options["fit_mu_max"]}
    except ValueError as exc:
        out["power_law"] = {"skipped": str(exc)}
    return out


def eternal_validate(cfg):
    if cfg.options["levels"] < 2:
        raise ConfigError("options.levels", "need at least two levels")
    if len(cfg.grid["beta"]) < 3:
        raise ConfigError("grid.beta", "need at least three beta points")


# causal -----------------------------------------------------------------------

def causal_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    base = protocol(cfg)
    rows = []
    for t0 in cfg.grid["t0"]:
        for t1 in cfg.grid["t1"]:
            I = {s: run(_signed(base, s).with_(t0=t0, t1=t1), c).I_RT for s in (-1, 1)}
            rows.append((k, seed, t0, t1, I[-1], I[1], I[-1] - I[1]))
    return MemberResult(rows)


def causal_summary(cfg, results):
    t0, t1 = np.array(cfg.grid["t0"]), np.array(cfg.grid["t1"])
    a = np.array([[r[6] for r in m.rows] for m in results]).reshape(len(results), t0.size, t1.size)
    mean = a.mean(axis=0)
    best = np.argmax(mean, axis=1)  # ties go to the smaller t1
    out = {"t0": t0, "best_t1": t1[best], "best_asymmetry": mean[np.arange(t0.size), best]}
    out["slope"] = float(np.polyfit(t0, t1[best], 1)[0]) if t0.size >= 2 else None
    return out


def causal_validate(cfg):
    sched = cfg.protocol.get("schedule")
    if sched is not None:
        lo, hi = -min(cfg.grid["t0"]), min(cfg.grid["t1"])
        for k, (t, _) in enumerate(sched):
            if not lo <= t <= hi:
                raise ConfigError(f"protocol.schedule[{k}]",
                                  f"slice time {t} must lie in [-t0, t1] = [{lo}, {hi}] for every grid point")
    _check_protocol(cfg)


# classical --------------------------------------------------------------------

CLASSICAL_COLUMNS = ("instantiation", "seed", "sign", "mu", "t", "outcome", "probability",
                     "I_RT_branch", "I_RT_classical", "I_RT_quantum")


def classical_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    base = protocol(cfg, channel="classical")
    rows = []
    for sign in (-1, 1):
        sc = _signed(base, sign)
        for t in cfg.grid["t"]:
            cc = sc.with_(t0=t, t1=t)
            r = run_classical(cc, c)
            q = run_correlator(cc.with_(channel="quantum"), c)
            for b in r.outcomes:
                rows.append((k, seed, sign, sc.mu, t, b.bits, b.probability, b.I_RT, r.I_RT, q.I_RT))
    return MemberResult(rows)


def classical_summary(cfg, results):
    rows = _rows(results)
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r[0], r[2], r[4]), []).append(r)
    points, above, below = [], 0, 0
    for (k, sign, t), g in groups.items():
        Ib = np.array([r[7] for r in g])
        qv = g[0][9]
        a, b = int((Ib > qv + 1e-12).sum()), int((Ib < qv - 1e-12).sum())
        above, below = above + a, below + b
        points.append({"instantiation": k, "sign": sign, "t": t, "I_quantum": qv,
                       "I_classical": g[0][8], "branch_min": Ib.min(), "branch_max": Ib.max(),
                       "n_above": a, "n_below": b})
    return {"points": points, "branches_above_quantum": above, "branches_below_quantum": below}


def classical_validate(cfg):
    if cfg.protocol["interaction"] != "Vb":
        raise ConfigError("protocol.interaction", "the classical channel requires 'Vb'")
    if cfg.protocol.get("schedule") is not None:
        raise ConfigError("protocol.schedule", "the classical channel supports a single slice at t = 0")
    _check_protocol(cfg, channel="classical")


# tripartite -------------------------------------------------------------------

def tripartite_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    base = protocol(cfg)
    reg = register(cfg.protocol["N"])
    rows = []
    for sign in (-1, 1):
        sc = _signed(base, sign)
        for t in cfg.grid["t"]:
            psi = run_quantum(sc.with_(t0=t, t1=t), c, keep_state=True).state
            m = mutual_info_record(psi, [reg["R"]], list(reg["L"]), [reg["T"]])
            rows.append((k, seed, sign, sc.mu, t, m.I_RT, m.I_RL, m.I_RLT, m.I3))
    return MemberResult(rows)


def tripartite_summary(cfg, results):
    a = np.array([[r[5:] for r in m.rows] for m in results]).mean(axis=0)
    nt = len(cfg.grid["t"])
    return {"t": cfg.grid["t"], "mean_I3_minus": a[:nt, 3], "mean_I3_plus": a[nt:, 3],
            "mean_I_RT_minus": a[:nt, 0], "mean_I_RT_plus": a[nt:, 0]}


# otoc -------------------------------------------------------------------------

def otoc_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    p = cfg.protocol
    tfd = thermofield_double(c.hamiltonian("L"), p["beta"])
    tR, j = cfg.options["t_R"], cfg.options["fermion"]
    rows = []
    for sign in (-1, 1):
        mu = sign * abs(p["mu"])
        for t in cfg.grid["t"]:
            h = otoc_H(c, p["interaction"], mu, t, tR, j, p["beta"], tfd)
            rows.append((k, seed, sign, mu, t, tR, h.real, h.imag, -sign * h.imag))
    return MemberResult(rows)


def otoc_summary(cfg, results):
    nt = len(cfg.grid["t"])
    a = np.array([[r[8] for r in m.rows] for m in results]).reshape(len(results), 2, nt)
    mean = a.mean(axis=0)
    return {"t_L": cfg.grid["t"], "mean_minus": mean[0], "mean_plus": mean[1],
            "peak_minus": mean[0].max(), "peak_plus": mean[1].max()}


def otoc_validate(cfg):
    j = cfg.options["fermion"]
    if not 0 <= j < cfg.protocol["N"]:
        raise ConfigError("options.fermion", f"must lie in [0, N={cfg.protocol['N']})")


# twopoint ---------------------------------------------------------------------

def twopoint_worker(cfg, k, seed):
    c = couplings(cfg, seed)
    beta = cfg.protocol["beta"]
    rows = []
    for tau in cfg.grid["tau"]:
        parts = np.array([euclidean_2pt_parts(c, j, tau, beta) for j in range(c.N)])
        G = float(np.mean(parts[:, 0] / parts[:, 1]))
        rows.append((k, seed, tau, G, float(parts[:, 0].mean()), float(parts[0, 1])))
    return MemberResult(rows)


def twopoint_summary(cfg, results):
    ntau = len(cfg.grid["tau"])
    a = np.array([[r[3:] for r in m.rows] for m in results]).reshape(len(results), ntau, 3)
    G, num, Z = a[..., 0], a[..., 1], a[..., 2]
    ann = num.mean(0) / Z.mean(0)
    # delta-method standard error of a ratio of means
    d = (num - ann * Z) / Z.mean(0)
    out = {"tau": cfg.grid["tau"], "quenched_mean": G.mean(0), "quenched_sem": _sem(G),
           "annealed_mean": ann, "annealed_sem": _sem(d)}
    if cfg.protocol["model"] == "pg":
        out["closed_form"] = pg_2pt_closed_form(cfg.grid["tau"], cfg.protocol["beta"], cfg.protocol["J"])
    return out


def twopoint_validate(cfg):
    beta = cfg.protocol["beta"]
    if any(not 0 <= t <= beta for t in cfg.grid["tau"]):
        raise ConfigError("grid.tau", f"every tau must lie in [0, beta={beta}]")


SPECS: dict[str, Spec] = {
    "mi-curve": Spec(MI_COLUMNS, mi_worker, mi_summary, mi_validate),
    "pg-compare": Spec(MI_COLUMNS, pg_worker, mi_summary, mi_validate),
    "warmup": Spec(("instantiation", "seed", "mu", "I_RT", "I_RT_closed_form"),
                   warmup_worker, warmup_summary, warmup_validate),
    "winding": Spec(("instantiation", "seed", "t", "stage", "size", "P", "Q_re", "Q_im"),
                    winding_worker, winding_summary, lambda cfg: _fermions(cfg)),
    "winding-summary": Spec(("instantiation", "seed", "t", "slope_pre", "slope_post",
                             "coherence_pre", "coherence_post", "r2_pre", "mean_size", "std_size"),
                            summary_worker, winding_series_summary, lambda cfg: _fermions(cfg)),
    "lyapunov": Spec(("instantiation", "seed", "beta", "t", "slope", "mean_size"),
                     lyapunov_worker, lyapunov_summary, lyapunov_validate),
    "eternal": Spec(ETERNAL_COLUMNS, eternal_worker, eternal_summary, eternal_validate),
    "eternal-vb": Spec(ETERNAL_COLUMNS, eternal_worker, eternal_summary, eternal_validate),
    "causal": Spec(("instantiation", "seed", "t0", "t1", "I_RT_minus", "I_RT_plus", "asymmetry"),
                   causal_worker, causal_summary, causal_validate),
    "classical": Spec(CLASSICAL_COLUMNS, classical_worker, classical_summary, classical_validate),
    "tripartite": Spec(("instantiation", "seed", "sign", "mu", "t", "I_RT", "I_RL", "I_RLT", "I3"),
                       tripartite_worker, tripartite_summary, mi_validate),
    "otoc": Spec(("instantiation", "seed", "sign", "mu", "t_L", "t_R", "H_re", "H_im",
                  "minus_sgn_mu_im_H"), otoc_worker, otoc_summary, otoc_validate),
    "twopoint": Spec(("instantiation", "seed", "tau", "G", "numerator", "Z"),
                     twopoint_worker, twopoint_summary, twopoint_validate),
}


def member_task(cfg: ExperimentConfig, index: int) -> MemberResult:
    """Worker entry point for one ensemble member (picklable)."""
    seed = member_seed(cfg.ensemble["master_seed"], index)
    return SPECS[cfg.experiment].worker(cfg, index, seed)


__all__ = ["SPECS", "Spec", "MemberResult", "member_task", "NumericalError"]
