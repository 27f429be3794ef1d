"""Teleportation protocols on the full register and on the doubled space alone.

Full register layout (little-endian qubit indices)::

    R = 0, Q = 1, left block 2..N/2+1, right block N/2+2..N+1, T = N+2

The protocol applies, in order, the injection swap at time ``-t0``, the
interaction slices sorted by time, and the extraction swap at ``t1``.  Each
operator acts in the Heisenberg picture of ``H_L + H_R``; the state is
evolved between consecutive event times (backwards when needed).  For the
default single slice at ``t = 0`` this reproduces
``S_Tr e^{-i H_R t1} e^{i mu V} e^{-i H_L t0} S_Ql e^{i H_L t0}`` up to a
unitary on the doubled space that cannot change the reduced state of R and T.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .fermion_algebra import OperatorSum, PauliTerm, majorana_string
from .models import (EnsembleSpec, apply_exp_interaction, sample_model)
from .observables import renyi2_mutual
from .states import (Outcome, check_density, evolve, measure_qubits, normalize,
                     reduced_density, thermofield_double)

INTERACTIONS = ("V", "Vb")
CHANNELS = ("quantum", "classical")


@dataclass(frozen=True)
class ProtocolConfig:
    N: int
    q: int = 4
    J: float = 1.0
    beta: float = 0.0
    mu: float = 0.0
    t0: float = 0.0
    t1: float = 0.0
    interaction: str = "V"
    schedule: tuple[tuple[float, float], ...] | None = None
    channel: str = "quantum"
    seed: int = 0
    model: str = "syk"

    def __post_init__(self):
        if self.N <= 0 or self.N % 2:
            raise ValueError(f"N must be a positive even integer, got {self.N}")
        if self.interaction not in INTERACTIONS:
            raise ValueError(f"interaction must be one of {INTERACTIONS}, got {self.interaction!r}")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.schedule is not None:
            sched = tuple((float(t), float(m)) for t, m in self.schedule)
            object.__setattr__(self, "schedule", sched)
            if not sched:
                raise ValueError("schedule must contain at least one slice")
            lo, hi = min(-self.t0, self.t1), max(-self.t0, self.t1)
            bad = [t for t, _ in sched if not lo - 1e-12 <= t <= hi + 1e-12]
            if bad:
                raise ValueError(f"schedule times {bad} outside [-t0, t1] = [{-self.t0}, {self.t1}]")
            if self.channel == "classical" and len(sched) > 1:
                raise ValueError("classical channel supports a single interaction slice")

    @property
    def slices(self) -> tuple[tuple[float, float], ...]:
        if self.schedule is None:
            return ((0.0, self.mu),)
        return tuple(sorted(self.schedule, key=lambda s: s[0]))

    @property
    def n_register(self) -> int:
        return self.N + 3

    def with_(self, **kw) -> "ProtocolConfig":
        return replace(self, **kw)


@dataclass
class BranchRecord:
    bits: str
    probability: float
    I_RT: float
    rho_TR: np.ndarray = field(repr=False)


@dataclass
class TeleportResult:
    rho_TR: np.ndarray
    I_RT: float
    outcomes: list[BranchRecord] | None = None
    state: np.ndarray | None = field(default=None, repr=False)


# register helpers -------------------------------------------------------------

def register(N: int) -> dict[str, object]:
    return {"R": 0, "Q": 1, "L": list(range(2, 2 + N // 2)),
            "Rblock": list(range(2 + N // 2, 2 + N)), "T": N + 2, "n": N + 3}


def chi(side: str, N: int, offset: int = 0, n_total: int | None = None) -> OperatorSum:
    """``(psi_0 + i psi_1)/sqrt(2)`` on the given side."""
    n_total = N + offset if n_total is None else n_total
    a = majorana_string(side, 0, N, offset, n_total)
    b = majorana_string(side, 1, N, offset, n_total)
    return OperatorSum(n_total, {(a.x, a.z): 0.5, (b.x, b.z): 0.5j})


def _qubit_op(n: int, q: int, which: str) -> OperatorSum:
    """|0><0|, |0><1|, |1><0| or |1><1| on qubit ``q``."""
    x, z = 1 << q, 1 << q
    table = {"00": {(0, 0): 0.5, (0, z): 0.5}, "11": {(0, 0): 0.5, (0, z): -0.5},
             "01": {(x, 0): 0.5, (x, z): 0.5j}, "10": {(x, 0): 0.5, (x, z): -0.5j}}
    return OperatorSum(n, table[which])


def _swap_blocks(c: OperatorSum) -> dict[str, OperatorSum]:
    """SYK-side factors multiplying |q'><q| in the swap: keyed by ``q' q``."""
    cd = c.dagger()
    return {"00": c * cd, "01": cd, "10": c, "11": cd * c}


def swap_operator(which: str, N: int) -> OperatorSum:
    """``S_Ql`` or ``S_Tr`` on the full ``N + 3`` qubit register."""
    reg = register(N)
    n = reg["n"]
    if which == "S_Ql":
        qubit, c = reg["Q"], chi("L", N, 2, n)
    elif which == "S_Tr":
        qubit, c = reg["T"], chi("R", N, 2, n)
    else:
        raise ValueError(f"unknown swap {which!r}; expected 'S_Ql' or 'S_Tr'")
    out = OperatorSum.zero(n)
    for key, block in _swap_blocks(c).items():
        out = out + _qubit_op(n, qubit, key) * block
    return out.simplify()


# schedule engine --------------------------------------------------------------

Event = tuple[float, Callable[[np.ndarray], np.ndarray]]


def _run_events(psi: np.ndarray, H: OperatorSum, events: Sequence[Event]) -> np.ndarray:
    """Apply ``O_k(t_k)`` in list order, with ``O(t) = e^{iHt} O e^{-iHt}``.

    The trailing ``e^{iH t_last}`` is dropped; callers only use reduced
    states that it cannot affect.
    """
    now = 0.0
    for t, op in events:
        if t != now:
            psi = evolve(psi, H, t - now)
            now = t
        psi = op(psi)
    return psi


def _couplings(config: ProtocolConfig, couplings=None):
    if couplings is None:
        couplings = sample_model(config.model, config.N, config.q, config.J, config.seed)
    if couplings.N != config.N:
        raise ValueError(f"couplings have N={couplings.N}, config has N={config.N}")
    return couplings


def _rho_from_final(psi: np.ndarray, N: int) -> np.ndarray:
    reg = register(N)
    return reduced_density(psi, [reg["R"], reg["T"]])


def mutual_from_rho(rho_TR: np.ndarray) -> float:
    """I(R:T) from the 4x4 density matrix indexed by ``b_R + 2 b_T``."""
    return renyi2_mutual(rho_TR, [0], [1])


def initial_register_state(tfd: np.ndarray) -> np.ndarray:
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)  # index r + 2q
    t0 = np.array([1, 0], dtype=complex)
    return np.kron(t0, np.kron(tfd, bell))


def final_state(config: ProtocolConfig, couplings=None) -> np.ndarray:
    """Full-register state after the quantum-channel protocol."""
    c = _couplings(config, couplings)
    N = config.N
    reg = register(N)
    n = reg["n"]
    H = c.hamiltonian("L", 2, n) + c.hamiltonian("R", 2, n)
    tfd = thermofield_double(c.hamiltonian("L"), config.beta)
    S_in, S_out = swap_operator("S_Ql", N), swap_operator("S_Tr", N)
    events: list[Event] = [(-config.t0, S_in.apply)]
    for t, m in config.slices:
        events.append((t, lambda v, m=m: apply_exp_interaction(v, config.interaction, 1j * m,
                                                                N, 2, n)))
    events.append((config.t1, S_out.apply))
    return _run_events(initial_register_state(tfd), H, events)


def run_quantum(config: ProtocolConfig, couplings=None, keep_state: bool = False) -> TeleportResult:
    if config.channel != "quantum":
        raise ValueError("run_quantum requires channel='quantum'")
    psi = final_state(config, couplings)
    rho = _rho_from_final(psi, config.N)
    return TeleportResult(rho, mutual_from_rho(rho), state=psi if keep_state else None)


def rho_TR_correlator(config: ProtocolConfig, couplings=None) -> np.ndarray:
    """rho_TR assembled from eight vectors on the N-qubit doubled space.

    With ``A_{r q tau} = b_{tau 0}(t1) W a_{q r}(-t0)`` (``a``, ``b`` the
    fermionic blocks of the two swaps and ``W`` the interaction slices),
    ``rho[(r, tau), (r', tau')] = 1/2 sum_q <tfd| A_{r' q tau'}^dag A_{r q tau} |tfd>``.
    """
    c = _couplings(config, couplings)
    N = config.N
    H = c.hamiltonian("L") + c.hamiltonian("R")
    tfd = thermofield_double(c.hamiltonian("L"), config.beta)
    a = _swap_blocks(chi("L", N))
    b = _swap_blocks(chi("R", N))
    vecs = {}
    for r in (0, 1):
        for q in (0, 1):
            for tau in (0, 1):
                events: list[Event] = [(-config.t0, a[f"{q}{r}"].apply)]
                for t, m in config.slices:
                    events.append((t, lambda v, m=m: apply_exp_interaction(
                        v, config.interaction, 1j * m, N)))
                events.append((config.t1, b[f"{tau}0"].apply))
                vecs[(r, q, tau)] = _run_events(tfd, H, events)
    rho = np.zeros((4, 4), dtype=complex)
    for r in (0, 1):
        for tau in (0, 1):
            for r2 in (0, 1):
                for tau2 in (0, 1):
                    rho[r + 2 * tau, r2 + 2 * tau2] = 0.5 * sum(
                        np.vdot(vecs[(r2, q, tau2)], vecs[(r, q, tau)]) for q in (0, 1))
    return 0.5 * (rho + rho.conj().T)


def run_correlator(config: ProtocolConfig, couplings=None) -> TeleportResult:
    rho = rho_TR_correlator(config, couplings)
    return TeleportResult(rho, mutual_from_rho(rho))


# classical channel ------------------------------------------------------------

def run_classical(config: ProtocolConfig, couplings=None, policy: str = "enumerate",
                  sample_seed: int | None = None) -> TeleportResult:
    """Measure the left block at ``t = 0`` and correct on the right.

    Steps after the injection: measure every left qubit in the Z basis,
    apply ``exp(i mu sum_j s_j Z_{j+N/2})``, evolve the right side to ``t1``,
    swap the first right qubit with T, and apply Z on T when the product of
    the measured ``s_j`` is -1.  The aggregate ``rho_TR`` is the
    probability-weighted mixture of the branches.
    """
    if config.interaction != "Vb":
        raise ValueError("the classical channel requires interaction='Vb'")
    if len(config.slices) != 1 or config.slices[0][0] != 0.0:
        raise ValueError("the classical channel supports only a single slice at t = 0")
    c = _couplings(config, couplings)
    N = config.N
    reg = register(N)
    n = reg["n"]
    mu = config.slices[0][1]
    HL = c.hamiltonian("L", 2, n)
    HR = c.hamiltonian("R", 2, n)
    tfd = thermofield_double(c.hamiltonian("L"), config.beta)
    psi = initial_register_state(tfd)
    psi = evolve(psi, HL, -config.t0)
    psi = swap_operator("S_Ql", N).apply(psi)
    psi = evolve(psi, HL, config.t0)
    left = reg["L"]
    r0, T = reg["Rblock"][0], reg["T"]
    idx = np.arange(1 << n, dtype=np.int64)
    records = []
    rho_avg = np.zeros((4, 4), dtype=complex)
    for out in measure_qubits(psi, left, policy, seed=sample_seed):
        s = [1 - 2 * v for v in out.values]
        phase = np.zeros(idx.size)
        for j, sj in enumerate(s):
            phase += sj * (1 - 2 * ((idx >> reg["Rblock"][j]) & 1))
        v = np.exp(1j * mu * phase) * out.state
        v = evolve(v, HR, config.t1)
        v = _swap_qubits(v, r0, T)
        if np.prod(s) < 0:
            v = v * (1 - 2 * ((idx >> T) & 1))
        rho = reduced_density(v, [reg["R"], T])
        records.append(BranchRecord(out.bits, out.probability, mutual_from_rho(rho), rho))
        rho_avg += out.probability * rho
    if policy == "sample":
        rho_avg = records[0].rho_TR
    return TeleportResult(rho_avg, mutual_from_rho(rho_avg), records)


def _swap_qubits(psi: np.ndarray, a: int, b: int) -> np.ndarray:
    idx = np.arange(psi.shape[0], dtype=np.int64)
    ba, bb = (idx >> a) & 1, (idx >> b) & 1
    src = idx ^ (((ba ^ bb) << a) | ((ba ^ bb) << b))
    return psi[src]


# scans ------------------------------------------------------------------------

def run(config: ProtocolConfig, couplings=None, engine: str = "correlator") -> TeleportResult:
    if config.channel == "classical":
        return run_classical(config, couplings)
    if engine == "correlator":
        return run_correlator(config, couplings)
    if engine == "register":
        return run_quantum(config, couplings)
    raise ValueError(f"unknown engine {engine!r}")


@dataclass
class MICurve:
    t: np.ndarray
    I_minus: np.ndarray  # shape (members, len(t)) for mu = -|mu|
    I_plus: np.ndarray

    @property
    def mean_minus(self):
        return self.I_minus.mean(axis=0)

    @property
    def mean_plus(self):
        return self.I_plus.mean(axis=0)

    @property
    def asymmetry(self):
        """Per-member ``I(-|mu|) - I(+|mu|)``."""
        return self.I_minus - self.I_plus

    @property
    def mean_asymmetry(self):
        return self.asymmetry.mean(axis=0)

    @property
    def sem_asymmetry(self):
        a = self.asymmetry
        if a.shape[0] < 2:
            return np.zeros(a.shape[1])
        return a.std(axis=0, ddof=1) / np.sqrt(a.shape[0])


def _signed(config: ProtocolConfig, sign: int) -> ProtocolConfig:
    mu = sign * abs(config.mu)
    sched = None
    if config.schedule is not None:
        sched = tuple((t, sign * abs(m)) for t, m in config.schedule)
    return config.with_(mu=mu, schedule=sched)


def mi_curve(template: ProtocolConfig, t_grid: Sequence[float], ensemble: EnsembleSpec,
             t1_grid: Sequence[float] | None = None, engine: str = "correlator",
             fixed_t0: float | None = None) -> MICurve:
    """I(R:T) on ``t0 = t1 = t`` (default), for both signs of ``mu`` and each member.

    ``fixed_t0`` holds the injection time and scans the extraction time instead.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    out = {-1: np.zeros((ensemble.count, t_grid.size)), 1: np.zeros((ensemble.count, t_grid.size))}
    for k, seed in enumerate(ensemble.seeds()):
        c = sample_model(template.model, template.N, template.q, template.J, seed)
        for sign in (-1, 1):
            base = _signed(template, sign)
            for i, t in enumerate(t_grid):
                if fixed_t0 is None:
                    cfg = base.with_(t0=float(t), t1=float(t))
                else:
                    cfg = base.with_(t0=fixed_t0, t1=float(t))
                out[sign][k, i] = run(cfg, c, engine).I_RT
    return MICurve(t_grid, out[-1], out[1])


@dataclass
class CausalScan:
    t0: np.ndarray
    t1: np.ndarray
    asymmetry: np.ndarray  # (len(t0), len(t1)) mean over members
    best_t1: np.ndarray
    best_value: np.ndarray

    def slope(self, lo: float | None = None, hi: float | None = None) -> float:
        m = np.ones(self.t0.size, bool)
        if lo is not None:
            m &= self.t0 >= lo
        if hi is not None:
            m &= self.t0 <= hi
        return float(np.polyfit(self.t0[m], self.best_t1[m], 1)[0])


def _increasing(g, name):
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    return g


def causal_ordering_scan(template: ProtocolConfig, t0_grid: Sequence[float],
                         t1_grid: Sequence[float], ensemble: EnsembleSpec | None = None,
                         couplings=None) -> CausalScan:
    """For each ``t0`` the ``t1`` maximising the mean asymmetry ``I(-|mu|) - I(+|mu|)``.

    Ties resolve to the smaller ``t1`` (``argmax`` returns the first maximum).
    """
    t0_grid = _increasing(t0_grid, "t0")
    t1_grid = _increasing(t1_grid, "t1")
    if couplings is not None:
        members = [couplings]
    else:
        ensemble = ensemble or EnsembleSpec(template.seed, 1)
        members = [sample_model(template.model, template.N, template.q, template.J, s)
                   for s in ensemble.seeds()]
    asym = np.zeros((t0_grid.size, t1_grid.size))
    for c in members:
        for i, a in enumerate(t0_grid):
            for k, b in enumerate(t1_grid):
                vals = {}
                for sign in (-1, 1):
                    cfg = _signed(template, sign).with_(t0=float(a), t1=float(b))
                    vals[sign] = run(cfg, c).I_RT
                asym[i, k] += (vals[-1] - vals[1]) / len(members)
    best = np.argmax(asym, axis=1)
    return CausalScan(t0_grid, t1_grid, asym, t1_grid[best], asym[np.arange(t0_grid.size), best])
