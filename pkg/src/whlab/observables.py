"""Renyi-2 information measures, OTOCs and the Euclidean two-point function."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fermion_algebra import OperatorSum, majorana
from .models import apply_exp_interaction
from .states import (evolve, max_entangled_state, partial_trace_density, reduced_density,
                     thermofield_double)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def renyi2_entropy(rho: np.ndarray) -> float:
    """Second Renyi entropy in bits."""
    return -float(np.log2(purity(rho)))


def _reduce(state: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    if state.ndim == 1:
        return reduced_density(state, qubits)
    return partial_trace_density(state, qubits)


def _disjoint(*sets):
    flat = [q for s in sets for q in s]
    if len(flat) != len(set(flat)):
        raise ValueError(f"qubit sets overlap: {sets}")


def renyi2_mutual(state: np.ndarray, A: Sequence[int], B: Sequence[int]) -> float:
    """``log2(tr rho_AB^2 / (tr rho_A^2 tr rho_B^2))`` for a state vector or density matrix."""
    A, B = list(A), list(B)
    _disjoint(A, B)
    pab = purity(_reduce(state, A + B))
    pa = purity(_reduce(state, A))
    pb = purity(_reduce(state, B))
    return float(np.log2(pab / (pa * pb)))


@dataclass(frozen=True)
class MutualInfoRecord:
    I_RT: float
    I_RL: float
    I_RLT: float
    I3: float
    purities: dict[str, float]


def mutual_info_record(psi: np.ndarray, R: Sequence[int], L: Sequence[int],
                       T: Sequence[int]) -> MutualInfoRecord:
    R, L, T = list(R), list(L), list(T)
    _disjoint(R, L, T)
    sets = {"R": R, "L": L, "T": T, "RL": R + L, "RT": R + T, "LT": L + T, "RLT": R + L + T}
    p = {k: purity(_reduce(psi, v)) for k, v in sets.items()}
    I_RT = np.log2(p["RT"] / (p["R"] * p["T"]))
    I_RL = np.log2(p["RL"] / (p["R"] * p["L"]))
    I_RLT = np.log2(p["RLT"] / (p["R"] * p["LT"]))
    return MutualInfoRecord(float(I_RT), float(I_RL), float(I_RLT),
                            float(I_RT + I_RL - I_RLT), p)


def tripartite_info(psi: np.ndarray, R: Sequence[int], L: Sequence[int],
                    T: Sequence[int]) -> float:
    """``I(R:T) + I(R:L) - I(R:LT)``."""
    return mutual_info_record(psi, R, L, T).I3


# correlators ---------------------------------------------------------------

def _hamiltonians(couplings):
    return couplings.hamiltonian("L"), couplings.hamiltonian("R")


def otoc_H(couplings, interaction: str, mu: float, t_L: float, t_R: float, j: int = 2,
           beta: float = 0.0, tfd: np.ndarray | None = None) -> complex:
    """``-i <tfd| e^{i mu K} psi^l_j(t_L) e^{-i mu K} psi^r_j(t_R) |tfd>``."""
    return _otoc(couplings, interaction, 1j * mu, t_L, t_R, j, beta, tfd, euclidean=False)


def otoc_C(couplings, interaction: str, mu: float, t_L: float, t_R: float, j: int = 2,
           beta: float = 0.0, tfd: np.ndarray | None = None) -> float:
    """``<tfd|{e^{i mu K} psi^l_j(t_L) e^{-i mu K}, psi^r_j(t_R)}|tfd> = -2 Im H``."""
    return -2.0 * otoc_H(couplings, interaction, mu, t_L, t_R, j, beta, tfd).imag


def otoc_anticommutator(couplings, interaction: str, mu: float, t_L: float, t_R: float,
                        j: int = 2, beta: float = 0.0) -> complex:
    """The anticommutator expectation evaluated directly, for cross-checks of ``otoc_C``."""
    N = couplings.N
    HL, HR = _hamiltonians(couplings)
    tfd = thermofield_double(HL, beta)
    pl, pr = majorana(("L", j), N), majorana(("R", j), N)

    def left(v):  # e^{i mu K} psi^l(t_L) e^{-i mu K} v
        v = apply_exp_interaction(v, interaction, -1j * mu, N)
        v = evolve(pl.apply(evolve(v, HL, t_L)), HL, -t_L)
        return apply_exp_interaction(v, interaction, 1j * mu, N)

    def right(v):
        return evolve(pr.apply(evolve(v, HR, t_R)), HR, -t_R)

    return complex(np.vdot(tfd, left(right(tfd)) + right(left(tfd))))


def otoc_h(couplings, interaction: str, mu: float, tau1: float, tau2: float, j: int = 2,
           beta: float = 0.0, tfd: np.ndarray | None = None) -> complex:
    """Euclidean variant ``-i <tfd| e^{mu K} psi^l_j(tau1) e^{-mu K} psi^r_j(tau2) |tfd>``
    with ``psi(tau) = e^{tau H} psi e^{-tau H}``."""
    return _otoc(couplings, interaction, mu, tau1, tau2, j, beta, tfd, euclidean=True)


def _otoc(couplings, interaction, z, a, b, j, beta, tfd, euclidean):
    N = couplings.N
    HL, HR = _hamiltonians(couplings)
    if tfd is None:
        tfd = thermofield_double(HL, beta)
    pl, pr = majorana(("L", j), N), majorana(("R", j), N)

    def heis(v, H, op, t):
        if euclidean:
            # e^{tH} op e^{-tH} v; imaginary-mode evolve renormalises, so use eigh directly
            return _expH(H, t, op.apply(_expH(H, -t, v)))
        return evolve(op.apply(evolve(v, H, t)), H, -t)

    v = heis(tfd, HR, pr, b)
    v = apply_exp_interaction(v, interaction, -z, N)
    v = heis(v, HL, pl, a)
    v = apply_exp_interaction(v, interaction, z, N)
    return complex(-1j * np.vdot(tfd, v))


def _expH(H: OperatorSum, t: float, v: np.ndarray) -> np.ndarray:
    """``exp(t H) v`` without renormalisation."""
    from .states import _expm_apply_dense
    return _expm_apply_dense(H, v, t)


def _left_block(couplings) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of ``H_L`` restricted to the left qubits."""
    N = couplings.N
    cache = couplings.__dict__.get("_left_eig")
    if cache is None:
        HL = couplings.hamiltonian("L")
        qubits = list(range(N // 2))
        cache = np.linalg.eigh(HL.to_dense(qubits))
        object.__setattr__(couplings, "_left_eig", cache)
    return cache


def euclidean_2pt(couplings, j: int, tau: float, beta: float) -> float:
    """``2 Z^{-1} <I| e^{-beta H_L} psi_j(tau) psi_j(0) |I>`` (left Majorana ``j``).

    |I> is maximally entangled, so ``<I|O_L|I> = tr(O_L) / 2^{N/2}`` and the
    trace is taken on the left block alone.
    """
    if not 0 <= tau <= beta:
        raise ValueError(f"tau={tau} outside [0, beta={beta}]")
    N = couplings.N
    w, v = _left_block(couplings)
    psi = majorana(("L", j), N).to_dense(list(range(N // 2)))
    m = np.abs(v.conj().T @ psi @ v) ** 2
    shift = w.min()
    a = np.exp(-(beta - tau) * (w - shift))
    b = np.exp(-tau * (w - shift))
    Z = np.exp(-beta * (w - shift)).sum()
    return float(2 * (a @ m @ b) / Z)


def euclidean_2pt_parts(couplings, j: int, tau: float, beta: float) -> tuple[float, float]:
    """Unnormalised ``(2 tr(e^{-(beta-tau)H} psi e^{-tau H} psi), tr e^{-beta H})`` over ``2^{N/2}``."""
    if not 0 <= tau <= beta:
        raise ValueError(f"tau={tau} outside [0, beta={beta}]")
    N = couplings.N
    w, v = _left_block(couplings)
    psi = majorana(("L", j), N).to_dense(list(range(N // 2)))
    m = np.abs(v.conj().T @ psi @ v) ** 2
    d = w.size
    num = 2 * np.exp(-(beta - tau) * w) @ m @ np.exp(-tau * w) / d
    return float(num), float(np.exp(-beta * w).sum() / d)


def euclidean_2pt_annealed(members, tau: float, beta: float) -> float:
    """Ratio of ensemble means (numerator and partition function averaged separately),
    the approximation under which the pair-model closed form holds."""
    parts = np.array([[euclidean_2pt_parts(c, j, tau, beta) for j in range(c.N)] for c in members])
    return float(parts[..., 0].mean() / parts[..., 1].mean())


def pg_2pt_closed_form(tau, beta: float, J: float = 1.0):
    """Ensemble-averaged pair-model correlator ``exp(-J^2 tau (beta - tau))``."""
    tau = np.asarray(tau, dtype=float)
    return np.exp(-J ** 2 * tau * (beta - tau))


def euclidean_2pt_mean(couplings, tau: float, beta: float) -> float:
    """``euclidean_2pt`` averaged over all left Majoranas."""
    return float(np.mean([euclidean_2pt(couplings, j, tau, beta) for j in range(couplings.N)]))


def max_entangled_expectation(op: OperatorSum, N: int) -> complex:
    I = max_entangled_state(N)
    return complex(np.vdot(I, op.apply(I)))
