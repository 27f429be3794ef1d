"""Experiment registry: each entry names the figure it reproduces, the original
parameters of that figure, and the reduced desk-scale defaults actually used."""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

PROTOCOL_FIELDS = {
    "N": "int", "q": "int", "J": "float", "beta": "float", "mu": "float",
    "t0": "float", "t1": "float", "interaction": ("V", "Vb"), "schedule": "schedule",
    "channel": ("quantum", "classical"), "model": ("syk", "pg"),
}

_BASE = {"N": 10, "q": 4, "J": 1.0, "beta": 4.0, "mu": -0.3, "t0": 0.0, "t1": 0.0,
         "interaction": "V", "channel": "quantum", "model": "syk"}


def _p(**kw):
    d = dict(_BASE)
    d.update(kw)
    return d


@dataclass(frozen=True)
class Experiment:
    name: str
    figure: str
    description: str
    reference: dict  # parameters of the full-scale run this entry stands in for
    defaults: dict


_ENTRIES = [
    Experiment(
        "mi-curve", "self-average",
        "I(R:T) against t0 = t1 for both signs of mu, per member and ensemble mean",
        {"N": 10, "q": 4, "beta": 4, "mu": "+-0.3", "interaction": "V", "instantiations": 10},
        {"protocol": _p(), "ensemble": {"master_seed": 0, "count": 10},
         "grid": {"t": {"start": 0.0, "stop": 8.0, "step": 0.5}}},
    ),
    Experiment(
        "warmup", "two-qubit warm-up",
        "N=2 protocol at t = beta = 0 against the closed form I = 2 log2(1 + sin^2 mu)",
        {"N": 2, "beta": 0, "t": 0},
        {"protocol": _p(N=2, q=2, beta=0.0, mu=0.0), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"mu": {"start": 0.0, "stop": pi / 2, "num": 17}}},
    ),
    Experiment(
        "winding", "q4t29comp",
        "size distribution P(s) and winding Q(s) before and after the interaction",
        {"N": 20, "q": 4, "beta": 4, "t0": 2.9, "mu": -0.2, "interaction": "V", "fermions": 10},
        {"protocol": _p(N=12, mu=-0.2), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t": [2.5]}, "options": {"fermions": 6}},
    ),
    Experiment(
        "winding-summary", "all",
        "winding slope before/after the interaction, coherence and mean size against t",
        {"N": 20, "q": 4, "beta": 4, "mu": -0.2, "interaction": "V"},
        {"protocol": _p(N=12, mu=-0.2), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t": {"start": 0.0, "stop": 7.0, "step": 0.5}}, "options": {"fermions": 6}},
    ),
    Experiment(
        "lyapunov", "Lyapunov",
        "exponential decay rate of the size-winding slope for several beta",
        {"N": 26, "q": 8, "fit_window": [7.5, 15], "reproducible": False},
        {"protocol": _p(N=12), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t": {"start": 0.0, "stop": 7.0, "step": 0.5}, "beta": [2.0, 4.0]},
         "options": {"fermions": 3, "window": [3.0, 6.0]}},
    ),
    Experiment(
        "eternal", "e_spectrum_N10 / e_fit / beta_vs_mu / SL2R",
        "low spectrum of H_L + H_R + mu V: gap, power-law fit, optimal beta, SL(2,R) figure of merit",
        {"N": [10, 20], "q": 4, "mu": 0.3, "instantiations": 10, "fit": "mu < 0.3; a,b,c = 1.3,0.69,-0.17"},
        {"protocol": _p(mu=0.3), "ensemble": {"master_seed": 0, "count": 10},
         "grid": {"mu": {"start": 0.025, "stop": 0.5, "step": 0.025},
                  "beta": {"start": 0.5, "stop": 40.0, "step": 0.5}},
         "options": {"levels": 10, "fit_mu_max": 0.3}},
    ),
    Experiment(
        "eternal-vb", "e_spectrum_N10 right / beta_vs_mu_Vb",
        "eternal spectrum with Vb, including the degeneracy pattern",
        {"N": [18, 20], "q": 4, "mu": 0.3, "instantiations": [20, 10]},
        {"protocol": _p(mu=0.3, interaction="Vb"), "ensemble": {"master_seed": 0, "count": 10},
         "grid": {"mu": {"start": 0.025, "stop": 0.5, "step": 0.025},
                  "beta": {"start": 0.5, "stop": 40.0, "step": 0.5}},
         "options": {"levels": 10, "fit_mu_max": 0.3}},
    ),
    Experiment(
        "causal", "timeordering",
        "extraction time maximising the mu asymmetry against injection time",
        {"N": [24, 26], "q": 8, "beta": [20, 16], "mu": [-0.18, -0.11], "interaction": "Vb",
         "schedule": "[(-1.5, mu), (+1.5, mu)] on the right panel"},
        {"protocol": _p(interaction="Vb", mu=-0.3), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t0": {"start": 0.0, "stop": 5.0, "step": 0.5},
                  "t1": {"start": 0.0, "stop": 8.0, "step": 0.25}}},
    ),
    Experiment(
        "classical", "measure",
        "outcome-resolved I(R:T) after measuring the left qubits, against the quantum channel",
        {"N": 20, "q": 4, "beta": 4, "mu": "+-0.25", "interaction": "Vb", "outcomes": 1024},
        {"protocol": _p(interaction="Vb", mu=-0.25, channel="classical"),
         "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t": {"start": 0.0, "stop": 6.0, "step": 0.5}}},
    ),
    Experiment(
        "tripartite", "tripartite",
        "I(R:T), I(R:L), I(R:LT) and I3 against t0 = t1 for both signs of mu",
        {"N": 24, "q": [4, 8], "beta": [4, 8], "mu": "+-0.2", "interaction": "Vb"},
        {"protocol": _p(N=8, interaction="Vb", mu=-0.2), "ensemble": {"master_seed": 0, "count": 1},
         "grid": {"t": {"start": 0.0, "stop": 6.0, "step": 0.5}}},
    ),
    Experiment(
        "otoc", "compareSYKbeta10",
        "-sgn(mu) H_{i mu}(t_L, t_R) against t_L at fixed t_R",
        {"N": 10, "beta": 1, "mu": "+-0.139 pi", "t_R": -0.720, "instantiations": 100},
        {"protocol": _p(beta=1.0, mu=0.139 * pi, model="pg"),
         "ensemble": {"master_seed": 0, "count": 20},
         "grid": {"t": {"start": 0.0, "stop": 3.0, "step": 0.1}},
         "options": {"t_R": -0.720, "fermion": 2}},
    ),
    Experiment(
        "pg-compare", "compareMIbeta10",
        "I(R:T) against t1 at fixed t0 for the pair model and SYK",
        {"N": 10, "beta": 1, "mu": "+-0.139 pi", "t0": -0.720, "instantiations": [100, 10]},
        {"protocol": _p(beta=1.0, mu=0.139 * pi, t0=-0.720, model="pg"),
         "ensemble": {"master_seed": 0, "count": 20},
         "grid": {"t": {"start": 0.0, "stop": 3.0, "step": 0.1}}},
    ),
    Experiment(
        "twopoint", "pair-model 2-pt correlator",
        "Euclidean G(tau) per member, quenched and annealed means, closed form",
        {"N": 16, "q": 4, "beta": 1, "instantiations": 100},
        {"protocol": _p(N=16, beta=1.0, mu=0.0, model="pg"),
         "ensemble": {"master_seed": 0, "count": 100},
         "grid": {"tau": {"start": 0.0, "stop": 1.0, "step": 0.05}}},
    ),
]

REGISTRY: dict[str, Experiment] = {e.name: e for e in _ENTRIES}


def experiment_registry() -> list[tuple[str, str, dict]]:
    """``(name, figure, desk defaults)`` for every experiment."""
    return [(e.name, e.figure, e.defaults) for e in _ENTRIES]
