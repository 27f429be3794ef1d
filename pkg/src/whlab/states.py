"""States on the doubled register: |I>, |tfd>, time evolution, partial traces, measurement.

States are plain complex numpy vectors of length ``2**n`` in the little-endian
convention of :mod:`whlab.algebra`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fermion_algebra import OperatorSum, PauliTerm, apply_dense, majorana_string, popcount

# evolution on a connected block of at most this many qubits uses a dense
# eigendecomposition; larger blocks use the Krylov propagator
DENSE_MAX_QUBITS = 12
KRYLOV_DIM = 30
KRYLOV_TOL = 1e-10
MEASURE_CUTOFF = 1e-14
CONVENTION = "little-endian-v1"


class NumericalError(RuntimeError):
    """Raised when an iterative kernel fails to converge."""


def normalize(psi: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise NumericalError("cannot normalise the zero vector")
    return psi / nrm


def fix_phase(psi: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(psi) - 1e-12 * np.arange(psi.size) / psi.size))
    return psi * (abs(psi[k]) / psi[k])


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


# |I> and |tfd> -------------------------------------------------------------

def pair_terms(N: int, offset: int = 0, n_total: int | None = None) -> list[PauliTerm]:
    """The commuting strings ``P_j = 2i psi^l_j psi^r_j``; note ``V = sum_j P_j / 2``."""
    n_total = N + offset if n_total is None else n_total
    return [PauliTerm(n_total, 0, 0, 1) * majorana_string("L", j, N, offset, n_total)
            * majorana_string("R", j, N, offset, n_total) for j in range(N)]


def max_entangled_state(N: int) -> np.ndarray:
    """|I>: annihilated by ``psi^l_j + i psi^r_j`` for every ``j``.

    Built by applying the projectors ``(1 - P_j)/2`` to a computational basis
    state; the result is unique up to phase, fixed by :func:`fix_phase`.
    """
    if N <= 0 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    terms = pair_terms(N)
    for seed in range(1 << N):
        psi = basis_state(N, seed)
        for t in terms:
            psi = 0.5 * (psi - OperatorSum.from_term(t).apply(psi))
        if np.linalg.norm(psi) > 1e-6:
            return fix_phase(normalize(psi))
    raise NumericalError("no seed state has overlap with |I>")  # unreachable


def thermofield_double(H_L: OperatorSum, beta: float, N: int | None = None,
                       I_state: np.ndarray | None = None) -> np.ndarray:
    """``exp(-beta H_L / 2)|I>`` normalised."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if I_state is None:
        I_state = max_entangled_state(H_L.n_qubits if N is None else N)
    if beta == 0:
        return I_state.copy()
    return evolve(I_state, H_L, beta / 2, mode="imaginary")


# evolution ------------------------------------------------------------------

def components(H: OperatorSum) -> list[OperatorSum]:
    """Split ``H`` into pieces acting on disjoint qubit sets (they commute)."""
    groups: list[list] = []  # [mask, {key: c}]
    for key, c in H:
        s = key[0] | key[1]
        hit = [g for g in groups if g[0] & s]
        if not hit:
            groups.append([s, {key: c}])
            continue
        base = hit[0]
        base[0] |= s
        base[1][key] = c
        for g in hit[1:]:
            base[0] |= g[0]
            base[1].update(g[1])
            groups.remove(g)
    return [OperatorSum(H.n_qubits, g[1]) for g in groups]


def _eig(H: OperatorSum, qubits: list[int]):
    cache = H.__dict__.setdefault("_eig_cache", {})
    key = tuple(qubits)
    if key not in cache:
        w, v = np.linalg.eigh(H.to_dense(qubits))
        cache[key] = (w, v)
    return cache[key]


def _expm_apply_dense(H: OperatorSum, psi: np.ndarray, z: complex) -> np.ndarray:
    """``exp(z H) psi`` via the eigendecomposition of ``H`` on its support."""
    qubits = H.support_qubits()
    if not qubits:
        return np.exp(z * H.trace_normalized()) * psi
    w, v = _eig(H, qubits)
    mat = (v * np.exp(z * w)) @ v.conj().T
    return apply_dense(mat, qubits, psi)


def krylov_expm(H: OperatorSum, psi: np.ndarray, z: complex, m: int = KRYLOV_DIM,
                tol: float = KRYLOV_TOL, max_halvings: int = 40) -> np.ndarray:
    """``exp(z H) psi`` for Hermitian ``H`` by Lanczos, with adaptive sub-steps.

    Each sub-step builds an ``m``-dimensional Krylov space and accepts it when
    the standard a-posteriori error estimate ``beta_m |e_m^T exp(z T) e_1|``
    (relative to the step length) falls below ``tol``; otherwise the step is
    halved.
    """
    nrm0 = np.linalg.norm(psi)
    if nrm0 == 0 or z == 0:
        return psi.copy()
    total = 1.0
    done = 0.0
    frac = 1.0
    v = psi.astype(complex)
    halvings = 0
    while done < total - 1e-15:
        frac = min(frac, total - done)
        nv = np.linalg.norm(v)
        V = [v / nv]
        alpha, betas = [], []
        breakdown = False
        for j in range(m):
            w = H.apply(V[j])
            a = np.vdot(V[j], w).real
            w = w - a * V[j] - (betas[-1] * V[j - 1] if j else 0)
            # full reorthogonalisation keeps the small basis honest
            for u in V:
                w = w - np.vdot(u, w) * u
            alpha.append(a)
            b = np.linalg.norm(w)
            if b < 1e-13 * max(1.0, abs(a)):
                breakdown = True
                break
            betas.append(b)
            V.append(w / b)
        k = len(alpha)
        T = np.diag(alpha) + np.diag(betas[:k - 1], 1) + np.diag(betas[:k - 1], -1)
        w_t, u_t = np.linalg.eigh(T)
        coef = u_t @ (np.exp(z * frac * w_t) * u_t[0].conj())
        err = 0.0 if breakdown else betas[k - 1] * abs(coef[k - 1])
        if err > tol * max(frac, 1e-3) and not breakdown:
            halvings += 1
            if halvings > max_halvings:
                raise NumericalError(f"Krylov propagator did not converge: residual {err:.3e}")
            frac /= 2
            continue
        v = nv * (np.array(V[:k]).T @ coef)
        done += frac
        frac *= 1.5
    return v


def evolve(psi: np.ndarray, H: OperatorSum, t: float, mode: str = "real",
           method: str = "auto", dense_max_qubits: int = DENSE_MAX_QUBITS,
           krylov_dim: int = KRYLOV_DIM, krylov_tol: float = KRYLOV_TOL) -> np.ndarray:
    """``exp(-iHt) psi`` (real) or ``exp(-tH) psi`` renormalised (imaginary).

    Commuting pieces of ``H`` on disjoint qubits are exponentiated separately.
    ``method`` is ``auto``, ``dense`` or ``krylov``.
    """
    if psi.shape[0] != 1 << H.n_qubits:
        raise ValueError(f"dimension mismatch: H on {H.n_qubits} qubits, "
                         f"state of length {psi.shape[0]}")
    if mode not in ("real", "imaginary"):
        raise ValueError(f"mode must be 'real' or 'imaginary', got {mode!r}")
    if method not in ("auto", "dense", "krylov"):
        raise ValueError(f"unknown method {method!r}")
    if t == 0:
        return psi.copy()
    z = -1j * t if mode == "real" else -t
    out = psi
    for comp in components(H):
        k = popcount(comp.support)
        if method == "dense" or (method == "auto" and k <= dense_max_qubits):
            out = _expm_apply_dense(comp, out, z)
        else:
            out = krylov_expm(comp, out, z, krylov_dim, krylov_tol)
    if mode == "imaginary":
        out = normalize(out)
    return out


# reduced densities and measurement ------------------------------------------

def _check_qubits(qubits: Sequence[int], n: int) -> list[int]:
    qubits = [int(q) for q in qubits]
    if not qubits:
        raise ValueError("qubit set must be nonempty")
    if len(set(qubits)) != len(qubits) or not all(0 <= q < n for q in qubits):
        raise ValueError(f"invalid qubit set {qubits} for {n} qubits")
    return qubits


def _split(psi: np.ndarray, keep: list[int]) -> np.ndarray:
    """Matrix ``M[a, b]`` with ``a`` the little-endian index over ``keep``."""
    n = psi.shape[0].bit_length() - 1
    t = psi.reshape((2,) * n)
    front = [n - 1 - q for q in reversed(keep)]
    rest = [ax for ax in range(n) if ax not in front]
    return np.transpose(t, front + rest).reshape(1 << len(keep), -1)


def reduced_density(psi: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Partial trace onto ``keep``; row index bit ``m`` is qubit ``keep[m]``."""
    n = psi.shape[0].bit_length() - 1
    keep = _check_qubits(keep, n)
    M = _split(psi, keep)
    rho = M @ M.conj().T
    return 0.5 * (rho + rho.conj().T)


def partial_trace_density(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a density matrix, with the same index convention."""
    n = rho.shape[0].bit_length() - 1
    keep = _check_qubits(keep, n)
    t = rho.reshape((2,) * (2 * n))
    front = [n - 1 - q for q in reversed(keep)]
    rest = [ax for ax in range(n) if ax not in front]
    t = np.transpose(t, front + rest + [n + a for a in front] + [n + a for a in rest])
    d, r = 1 << len(keep), 1 << (n - len(keep))
    return np.einsum("ajbj->ab", t.reshape(d, r, d, r))


def check_density(rho: np.ndarray, atol: float = 1e-10) -> None:
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise NumericalError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise NumericalError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise NumericalError("density matrix has a negative eigenvalue")


@dataclass(frozen=True)
class Outcome:
    bits: str  # character m is the outcome on qubits[m]
    probability: float
    state: np.ndarray

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(int(b) for b in self.bits)


def measure_qubits(psi: np.ndarray, qubits: Sequence[int], policy: str = "enumerate",
                   seed: int | None = None, cutoff: float = MEASURE_CUTOFF) -> list[Outcome]:
    """Projective Z-basis measurement of ``qubits``.

    ``enumerate`` returns every outcome with probability above ``cutoff``;
    ``sample`` draws one outcome from the exact distribution using ``seed``.
    Collapsed states are normalised and keep the full register.
    """
    n = psi.shape[0].bit_length() - 1
    qubits = _check_qubits(qubits, n)
    idx = np.arange(psi.shape[0])
    key = np.zeros(psi.shape[0], dtype=np.int64)
    for m, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << m
    probs = np.bincount(key, weights=np.abs(psi) ** 2, minlength=1 << len(qubits))
    if policy == "enumerate":
        chosen = [k for k in range(probs.size) if probs[k] > cutoff]
    elif policy == "sample":
        rng = np.random.Generator(np.random.PCG64(seed))
        chosen = [int(rng.choice(probs.size, p=probs / probs.sum()))]
    else:
        raise ValueError(f"unknown policy {policy!r}")
    out = []
    for k in chosen:
        coll = np.where(key == k, psi, 0)
        bits = "".join(str((k >> m) & 1) for m in range(len(qubits)))
        out.append(Outcome(bits, float(probs[k]), normalize(coll)))
    return out


# state dump -----------------------------------------------------------------

def save_state(path: str | Path, psi: np.ndarray) -> None:
    """Write ``path`` (little-endian complex128 pairs) and ``path.json``."""
    path = Path(path)
    np.asarray(psi, dtype="<c16").tofile(path)
    n = psi.shape[0].bit_length() - 1
    path.with_name(path.name + ".json").write_text(
        json.dumps({"n_qubits": n, "convention": CONVENTION}) + "\n")


def load_state(path: str | Path) -> np.ndarray:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    if meta.get("convention") != CONVENTION:
        raise ValueError(f"unsupported state convention {meta.get('convention')!r}")
    psi = np.fromfile(path, dtype="<c16")
    if psi.size != 1 << meta["n_qubits"]:
        raise ValueError("state file size does not match its sidecar")
    return psi.astype(complex)
