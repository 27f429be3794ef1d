"""Acceptance suite: thirteen numerical criteria at their stated tolerances.

Run under pytest (one test per criterion, with a pass/fail line per criterion
printed in the terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import pi

import numpy as np
import pytest

from whlab.eternal import degeneracy_report, discrete_symmetries, eternal_spectrum, fit_power_law
from whlab.fermion_algebra import gamma_operator
from whlab.models import (EnsembleSpec, apply_exp_interaction, build_interaction, member_seed,
                          pg_couplings, syk_couplings)
from whlab.observables import (euclidean_2pt_parts, mutual_info_record, pg_2pt_closed_form,
                               purity)
from whlab.size_winding import (apply_interaction_phase, expand_state, expand_thermal_fermion,
                                lyapunov_fit, size_distributions, size_of_masks,
                                thermal_fermion_state, winding_series)
from whlab.states import max_entangled_state
from whlab.teleport import (ProtocolConfig, mi_curve, rho_TR_correlator, run, run_classical,
                            run_correlator, run_quantum)


@dataclass
class Outcome:
    ok: bool
    detail: str


RESULTS: dict[str, tuple[bool, str, float]] = {}


def warmup_rho(mu: float) -> np.ndarray:
    s = np.sin(mu)
    a, b = (1 + s * s) / 4, (1 - s * s) / 4
    return np.array([[a, 0, 0, s / 2], [0, b, 0, 0], [0, 0, b, 0], [s / 2, 0, 0, a]])


def c01_warmup() -> Outcome:
    worst_I = worst_rho = 0.0
    for N in (4, 6, 8):
        c = syk_couplings(N, 4, 1.0, member_seed(0, N))
        for mu in (0.0, 0.3, pi / 4, pi / 2):
            r = run_quantum(ProtocolConfig(N=N, mu=mu, interaction="V"), c)
            worst_I = max(worst_I, abs(r.I_RT - 2 * np.log2(1 + np.sin(mu) ** 2)))
            worst_rho = max(worst_rho, np.abs(r.rho_TR - warmup_rho(mu)).max())
    return Outcome(max(worst_I, worst_rho) <= 1e-10,
                   f"max |dI| = {worst_I:.1e}, max |d rho| = {worst_rho:.1e} (tol 1e-10)")


def c02_longrange_null() -> Outcome:
    worst_I = worst_rho = 0.0
    for N in (4, 6, 8):
        c = syk_couplings(N, 4, 1.0, member_seed(0, N))
        for mu in (0.0, 0.3, pi / 4, pi / 2):
            r = run_quantum(ProtocolConfig(N=N, mu=mu, interaction="Vb"), c)
            worst_I = max(worst_I, abs(r.I_RT))
            worst_rho = max(worst_rho, np.abs(r.rho_TR - np.eye(4) / 4).max())
    return Outcome(max(worst_I, worst_rho) <= 1e-10,
                   f"max |I| = {worst_I:.1e}, max |rho - I/4| = {worst_rho:.1e} (tol 1e-10)")


def c03_oracle_equivalence() -> Outcome:
    c = syk_couplings(6, 4, 1.0, member_seed(0, 0))
    worst, n = 0.0, 0
    for beta in (0.0, 4.0):
        for t in (0.0, 1.0, 2.0):
            for kind in ("V", "Vb"):
                for mu in (-0.3, 0.3):
                    cfg = ProtocolConfig(N=6, beta=beta, mu=mu, t0=t, t1=t, interaction=kind)
                    d = np.abs(rho_TR_correlator(cfg, c) - run_quantum(cfg, c).rho_TR).max()
                    worst, n = max(worst, d), n + 1
    return Outcome(worst <= 1e-8, f"{n} configurations, max |d rho| = {worst:.1e} (tol 1e-8)")


def c04_size_identities() -> Outcome:
    N = 6
    I = max_entangled_state(N)
    V, Vb = build_interaction("V", N), build_interaction("Vb", N)
    s, s2 = size_of_masks(N, "V"), size_of_masks(N, "Vb")
    dV = dVb = dVb2 = 0.0
    for mask in range(1 << N):
        J = tuple(j for j in range(N) if mask >> j & 1)
        g = gamma_operator(("L", J), N).apply(I)
        dV = max(dV, abs(np.vdot(g, V.apply(g)) - (s[mask] - N / 2)))
        ev = np.vdot(g, Vb.apply(g))
        dVb = max(dVb, abs(ev - (s2[mask] - N / 2)))
        dVb2 = max(dVb2, abs(ev - (2 * s2[mask] - N / 2)))
    return Outcome(dV <= 1e-12 and dVb <= 1e-12,
                   f"V: max dev {dV:.1e}; Vb vs s2 - N/2: max dev {dVb:.2f}; "
                   f"Vb vs 2 s2 - N/2: max dev {dVb2:.1e} (tol 1e-12)")


def c05_phase_law() -> Outcome:
    N, beta, t = 8, 4.0, 1.5
    c = syk_couplings(N, 4, 1.0, member_seed(0, 0))
    worst_pair = worst_coeff = 0.0
    for mu in (0.3, -0.2):
        for i in (0, 3):
            phi = thermal_fermion_state(c, "L", i, t, beta)
            pre = expand_thermal_fermion(c, "L", i, t, beta)
            post_c = expand_state(apply_exp_interaction(phi, "V", 1j * mu, N), N, "L")
            worst_coeff = max(worst_coeff,
                              np.abs(apply_interaction_phase(pre, mu, "V").c - post_c).max())
            P, Q0 = size_distributions(pre)
            _, Q1 = size_distributions(pre.__class__(N, "L", i, t, beta, post_c, "V"))
            ss = np.flatnonzero(P > 1e-8)
            shift = np.angle(Q1[ss] / Q0[ss])
            for a in range(ss.size):
                for b in range(ss.size):
                    want = 2 * mu * (ss[a] - ss[b])
                    d = np.angle(np.exp(1j * (shift[a] - shift[b] - want)))
                    worst_pair = max(worst_pair, abs(d))
    return Outcome(max(worst_pair, worst_coeff) <= 1e-10,
                   f"max pairwise phase error {worst_pair:.1e}, "
                   f"max coefficient error vs full evolution {worst_coeff:.1e} (tol 1e-10)")


def c06_asymmetry() -> Outcome:
    t = np.arange(1.0, 5.01, 0.5)
    curve = mi_curve(ProtocolConfig(N=10, q=4, beta=4.0, mu=0.3), t, EnsembleSpec(0, 10))
    mean, sem = curve.mean_asymmetry, curve.sem_asymmetry
    k = int(np.argmax(mean))
    return Outcome(mean[k] > 0 and mean[k] > 3 * sem[k],
                   f"peak mean asymmetry {mean[k]:.3f} at t = {t[k]}, 3 SEM = {3 * sem[k]:.3f}")


def c07_winding_flip() -> Outcome:
    N, beta, mu = 12, 4.0, -0.2
    c = syk_couplings(N, 4, 1.0, member_seed(0, 0))
    t = np.arange(0.5, 6.01, 0.5)
    curve = mi_curve(ProtocolConfig(N=N, beta=beta, mu=mu), t, EnsembleSpec(0, 1))
    tp = float(t[int(np.argmax(curve.mean_asymmetry))])
    fermions = tuple(range(N))
    pre = winding_series(c, [-tp], beta, fermions, "L", "V")[0].fit
    post = winding_series(c, [-tp], beta, fermions, "L", "V", mu=mu)[0].fit
    post0 = winding_series(c, [-tp], 0.0, fermions, "L", "V", mu=mu)[0].fit
    flip = np.sign(pre.slope) == -np.sign(post.slope) and pre.slope != 0
    coh = post.coherence > post0.coherence
    return Outcome(bool(flip and coh),
                   f"peak t = {tp}; slope pre {pre.slope:+.3f}, post {post.slope:+.3f} "
                   f"(flip {'yes' if flip else 'no'}); coherence {post.coherence:.3f} vs "
                   f"beta=0 value {post0.coherence:.3f} (exceeds: {'yes' if coh else 'no'})")


def c08_lyapunov() -> Outcome:
    tt = np.linspace(0, 5, 11)
    syn = lyapunov_fit(tt, 0.7 * np.exp(-1.3 * tt), (0.0, 5.0))
    ok = abs(syn.lam - 1.3) <= 1e-8
    parts = [f"synthetic lambda error {abs(syn.lam - 1.3):.1e}"]
    c = syk_couplings(12, 4, 1.0, member_seed(0, 0))
    t = np.arange(0.0, 7.01, 0.5)
    for beta in (2.0, 4.0):
        slopes = [w.fit.slope for w in winding_series(c, t, beta, (0, 1, 2), "L", "V")]
        lam = lyapunov_fit(t, slopes, (3.0, 6.0)).lam
        bound = 2 * pi / beta
        ok &= lam <= 1.2 * bound
        parts.append(f"beta={beta:g}: lambda {lam:.3f} vs 1.2*2pi/beta = {1.2 * bound:.3f}")
    return Outcome(bool(ok), "; ".join(parts))


def c09_eternal_gap() -> Outcome:
    members = [syk_couplings(10, 4, 1.0, s) for s in EnsembleSpec(0, 10).seeds()]
    mu = np.round(np.arange(0.025, 0.3001, 0.025), 6)
    gaps = np.array([[eternal_spectrum(c, "V", m).gap for m in mu] for c in members])
    g03 = gaps[:, -1]
    sep = g03.mean() > 0 and g03.mean() > 3 * g03.std(ddof=1) / np.sqrt(g03.size)
    fit = fit_power_law(mu, gaps.mean(axis=0), mu_max=0.3)
    band = 0.5 <= fit.b <= 0.9
    lo, hi = fit.b_interval
    return Outcome(bool(sep and band),
                   f"mean gap at mu=0.3: {g03.mean():.3f} (min member {g03.min():.3f}); "
                   f"power law a={fit.a:.3f} b={fit.b:.3f} [{lo:.2f}, {hi:.2f}] c={fit.c:.3f}; "
                   f"b in [0.5, 0.9]: {'yes' if band else 'no'}")


def c10_tripartite() -> Outcome:
    c = syk_couplings(2, 2, 1.0, 0)
    worst = 0.0
    for mu in (0.0, 0.1, pi / 4):
        psi = run_quantum(ProtocolConfig(N=2, q=2, mu=mu, interaction="Vb"), c, keep_state=True).state
        m = mutual_info_record(psi, [0], [2], [4])
        L = np.log2(3 - np.cos(4 * mu))
        want = {"I_RL": L, "I_RLT": 2.0, "I3": -2 + L,
                "purity_RL": 0.5 + 2 * np.cos(mu) ** 2 * np.sin(mu) ** 2}
        got = {"I_RL": m.I_RL, "I_RLT": m.I_RLT, "I3": m.I3, "purity_RL": m.purities["RL"]}
        worst = max(worst, max(abs(got[k] - want[k]) for k in want))
    return Outcome(worst <= 1e-10, f"max deviation {worst:.1e} over four formulas (tol 1e-10)")


def c11_pg_twopoint() -> Outcome:
    members = [pg_couplings(16, 4, 1.0, s) for s in EnsembleSpec(0, 100).seeds()]
    ok, parts = True, []
    for tau in (0.1, 0.25, 0.5):
        P = np.array([[euclidean_2pt_parts(c, j, tau, 1.0) for j in range(16)] for c in members])
        num, Z = P[..., 0].mean(axis=1), P[:, 0, 1]
        ann = num.mean() / Z.mean()
        sem = ((num - ann * Z) / Z.mean()).std(ddof=1) / np.sqrt(len(members))
        quenched = (P[..., 0] / P[..., 1]).mean(axis=1)
        qm, qs = quenched.mean(), quenched.std(ddof=1) / np.sqrt(len(members))
        ref = float(pg_2pt_closed_form(tau, 1.0))
        ok &= abs(ann - ref) <= 3 * sem
        parts.append(f"tau={tau}: annealed {ann:.4f}+-{sem:.4f}, closed {ref:.4f}, "
                     f"quenched {qm:.4f}+-{qs:.4f}")
    return Outcome(bool(ok), "; ".join(parts))


def c12_symmetries() -> Outcome:
    worst, parts = 0.0, []
    for N in (8, 10):
        c = syk_couplings(N, 4, 1.0, member_seed(0, N))
        for kind in ("V", "Vb"):
            r = discrete_symmetries(c, kind)
            worst = max(worst, max(r.checks.values()))
    c = syk_couplings(10, 4, 1.0, member_seed(0, 10))
    mult = degeneracy_report(eternal_spectrum(c, "Vb", 0.3, k=20))
    doubly = all(m == 2 for m in mult)
    parts.append(f"max identity residual {worst:.1e} at N=8,10 for V and Vb")
    parts.append(f"Vb multiplicities at N=10: {mult}")
    return Outcome(worst <= 1e-12 and doubly, "; ".join(parts))


def c13_classical_spread() -> Outcome:
    c = syk_couplings(10, 4, 1.0, member_seed(0, 0))
    ok, parts = True, []
    for t in (1.0, 2.0, 3.0):
        cfg = ProtocolConfig(N=10, beta=4.0, mu=-0.25, t0=t, t1=t, interaction="Vb",
                             channel="classical")
        branches = np.array([b.I_RT for b in run_classical(cfg, c).outcomes])
        q = run_correlator(cfg.with_(channel="quantum"), c).I_RT
        a, b = int((branches > q).sum()), int((branches < q).sum())
        ok &= a > 0 and b > 0
        parts.append(f"t={t:g}: quantum {q:.3f}, branches [{branches.min():.3f}, "
                     f"{branches.max():.3f}], {a} above / {b} below")
    return Outcome(bool(ok), "; ".join(parts))


CRITERIA = {
    "1 warm-up exactness": c01_warmup,
    "2 long-range null": c02_longrange_null,
    "3 oracle equivalence": c03_oracle_equivalence,
    "4 size-operator identities": c04_size_identities,
    "5 interaction-phase law": c05_phase_law,
    "6 teleportation asymmetry": c06_asymmetry,
    "7 winding sign flip": c07_winding_flip,
    "8 lyapunov pipeline": c08_lyapunov,
    "9 eternal gap": c09_eternal_gap,
    "10 tripartite formulas": c10_tripartite,
    "11 pair-model 2-pt": c11_pg_twopoint,
    "12 discrete symmetries": c12_symmetries,
    "13 classical-channel spread": c13_classical_spread,
}


def evaluate(name: str) -> Outcome:
    t = time.perf_counter()
    out = CRITERIA[name]()
    RESULTS[name] = (out.ok, out.detail, time.perf_counter() - t)
    return out


def format_line(name: str) -> str:
    ok, detail, dt = RESULTS[name]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {name} ({dt:.1f}s): {detail}"


SLOW = {"6", "7", "8", "9", "11", "13"}


@pytest.mark.parametrize("name", [pytest.param(n, marks=pytest.mark.slow) if n.split()[0] in SLOW else n
                                  for n in CRITERIA])
def test_criterion(name):
    out = evaluate(name)
    print(format_line(name))
    assert out.ok, out.detail


if __name__ == "__main__":
    for name in CRITERIA:
        evaluate(name)
        print(format_line(name), flush=True)
