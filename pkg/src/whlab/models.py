"""Random SYK and commuting pair-model Hamiltonians, plus the left-right couplings.

Couplings are drawn with numpy's PCG64 generator and its ziggurat
``standard_normal``, scaled by the square root of the ensemble variance.
Coupling tuples are enumerated lexicographically over strictly increasing
index tuples, so a seed fixes the Hamiltonian bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import factorial
from typing import Literal

import numpy as np

from .fermion_algebra import OperatorSum, PauliTerm, majorana_string

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finaliser."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def member_seed(master_seed: int, index: int) -> int:
    """Seed of ensemble member ``index``: splitmix64(master + golden*(index+1))."""
    return splitmix64((master_seed + _GOLDEN * (index + 1)) & _MASK64)


@dataclass(frozen=True)
class EnsembleSpec:
    master_seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("ensemble count must be >= 1")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    def seeds(self) -> list[int]:
        return [member_seed(self.master_seed, k) for k in range(self.count)]


def _check_Nq(N: int, q: int):
    if N <= 0 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    if q <= 0 or q % 2 or q > N:
        raise ValueError(f"q must be even with 2 <= q <= N, got q={q}, N={N}")


def syk_variance(N: int, q: int, J: float = 1.0) -> float:
    return 2 ** (q - 1) * factorial(q - 1) / (q * N ** (q - 1)) * J ** 2


def pg_variance(N: int, q: int, J: float = 1.0) -> float:
    return (2 ** (q - 1) * factorial(q // 2 - 1) * factorial(N // 2 - q // 2)
            / factorial(N // 2 - 1) * J ** 2)


def _draw(n: int, variance: float, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal(n) * np.sqrt(variance)


@dataclass(frozen=True)
class _Couplings:
    N: int
    q: int
    J: float
    seed: int
    indices: tuple[tuple[int, ...], ...]
    values: np.ndarray = field(repr=False, compare=False)

    kind = "base"

    @property
    def entries(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.indices, map(float, self.values)))

    def __len__(self):
        return len(self.indices)

    def to_json(self) -> str:
        doc = {"model": self.kind, "N": self.N, "q": self.q, "J": self.J, "seed": self.seed,
               "entries": [{"idx": list(i), "value": float(v)}
                           for i, v in zip(self.indices, self.values)]}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str):
        doc = json.loads(text)
        kind = doc.get("model", cls.kind)
        target = {"syk": SykCouplings, "pg": PgCouplings}.get(kind, cls)
        idx = tuple(tuple(e["idx"]) for e in doc["entries"])
        vals = np.array([e["value"] for e in doc["entries"]], dtype=float)
        return target(doc["N"], doc["q"], doc["J"], doc["seed"], idx, vals)

    def hamiltonian(self, side: str = "L", offset: int = 0,
                    n_total: int | None = None) -> OperatorSum:
        raise NotImplementedError


class SykCouplings(_Couplings):
    """All-to-all q-body couplings ``J_{j1..jq}``."""

    kind = "syk"

    def hamiltonian(self, side: str = "L", offset: int = 0,
                    n_total: int | None = None) -> OperatorSum:
        """``sum J psi_{j1}..psi_{jq}`` on one side of the doubled register.

        For ``q = 2 mod 4`` the bare product is anti-Hermitian and an extra
        factor ``i`` is included so the Hamiltonian stays Hermitian.
        """
        N, q = self.N, self.q
        n_total = N + offset if n_total is None else n_total
        strings = [majorana_string(side, j, N, offset, n_total) for j in range(N)]
        extra = 1 if q % 4 == 2 else 0
        scale = 2.0 ** (-q / 2)
        acc: dict = {}
        for idx, val in zip(self.indices, self.values):
            t = PauliTerm(n_total, 0, 0, extra)
            for j in idx:
                t = t * strings[j]
            key = (t.x, t.z)
            acc[key] = acc.get(key, 0) + val * scale * t.coefficient
        return OperatorSum(n_total, acc)


class PgCouplings(_Couplings):
    """Commuting pair-model couplings over pair operators ``X_i = psi_{2i-2} psi_{2i-1}``.

    Indices are zero-based pair labels ``i - 1``.
    """

    kind = "pg"

    def hamiltonian(self, side: str = "L", offset: int = 0,
                    n_total: int | None = None) -> OperatorSum:
        N = self.N
        n_total = N + offset if n_total is None else n_total
        pairs = []
        for i in range(N // 2):
            a = majorana_string(side, 2 * i, N, offset, n_total)
            b = majorana_string(side, 2 * i + 1, N, offset, n_total)
            pairs.append(a * b)  # = 2 X_i
        scale = 2.0 ** (-self.q / 2)
        acc: dict = {}
        for idx, val in zip(self.indices, self.values):
            t = PauliTerm(n_total)
            for i in idx:
                t = t * pairs[i]
            key = (t.x, t.z)
            acc[key] = acc.get(key, 0) + val * scale * t.coefficient
        return OperatorSum(n_total, acc)


Couplings = SykCouplings | PgCouplings


def syk_couplings(N: int, q: int, J: float, seed: int) -> SykCouplings:
    _check_Nq(N, q)
    idx = tuple(combinations(range(N), q))
    return SykCouplings(N, q, float(J), int(seed), idx, _draw(len(idx), syk_variance(N, q, J), seed))


def pg_couplings(N: int, q: int, J: float, seed: int) -> PgCouplings:
    _check_Nq(N, q)
    if q // 2 > N // 2:
        raise ValueError("q/2 exceeds the number of pair operators")
    idx = tuple(combinations(range(N // 2), q // 2))
    return PgCouplings(N, q, float(J), int(seed), idx, _draw(len(idx), pg_variance(N, q, J), seed))


def sample_syk(N: int, q: int, J: float, seed: int,
               side: str = "L") -> tuple[SykCouplings, OperatorSum]:
    c = syk_couplings(N, q, J, seed)
    return c, c.hamiltonian(side)


def sample_pg_commuting(N: int, q: int, J: float, seed: int,
                        side: str = "L") -> tuple[PgCouplings, OperatorSum]:
    c = pg_couplings(N, q, J, seed)
    return c, c.hamiltonian(side)


def sample_model(model: Literal["syk", "pg"], N: int, q: int, J: float, seed: int):
    """Couplings only, for either model family."""
    if model == "syk":
        return syk_couplings(N, q, J, seed)
    if model == "pg":
        return pg_couplings(N, q, J, seed)
    raise ValueError(f"unknown model {model!r}")


def build_interaction(kind: str, N: int, offset: int = 0,
                      n_total: int | None = None) -> OperatorSum:
    """``V = i sum_j psi^l_j psi^r_j`` or ``Vb = sum_j Z_j Z_{j+N/2}``."""
    if N <= 0 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    n_total = N + offset if n_total is None else n_total
    acc: dict = {}
    if kind == "V":
        for j in range(N):
            t = (PauliTerm(n_total, 0, 0, 1) * majorana_string("L", j, N, offset, n_total)
                 * majorana_string("R", j, N, offset, n_total))
            acc[(t.x, t.z)] = acc.get((t.x, t.z), 0) + 0.5 * t.coefficient
    elif kind == "Vb":
        h = N // 2
        for j in range(h):
            acc[(0, (1 << (j + offset)) | (1 << (j + h + offset)))] = 1.0
    else:
        raise ValueError(f"unsupported interaction kind {kind!r}; expected 'V' or 'Vb'")
    return OperatorSum(n_total, acc)


def bilinear_gamma2(side: str, j: int, N: int) -> OperatorSum:
    """``Gamma^(2)_j = 2i psi_{2j} psi_{2j+1}`` on one side."""
    t = (PauliTerm(N, 0, 0, 1) * majorana_string(side, 2 * j, N)
         * majorana_string(side, 2 * j + 1, N))
    return OperatorSum.from_term(t)


def apply_exp_interaction(psi: np.ndarray, kind: str, z: complex, N: int, offset: int = 0,
                          n_total: int | None = None) -> np.ndarray:
    """``exp(z K) psi`` for ``K`` in {V, Vb}; ``z = i mu`` gives the protocol unitary.

    ``V = sum_j P_j / 2`` with commuting ``P_j`` squaring to one, so the
    exponential factorises into ``prod_j (cosh(z/2) + sinh(z/2) P_j)``.  ``Vb``
    is diagonal.
    """
    n_total = N + offset if n_total is None else n_total
    if psi.shape[0] != 1 << n_total:
        raise ValueError("dimension mismatch")
    if kind == "V":
        ch, sh = np.cosh(z / 2), np.sinh(z / 2)
        out = psi.astype(complex)
        for j in range(N):
            t = (PauliTerm(n_total, 0, 0, 1) * majorana_string("L", j, N, offset, n_total)
                 * majorana_string("R", j, N, offset, n_total))
            out = ch * out + sh * OperatorSum.from_term(t).apply(out)
        return out
    if kind == "Vb":
        return np.exp(z * vb_diagonal(N, offset, n_total)) * psi
    raise ValueError(f"unsupported interaction kind {kind!r}; expected 'V' or 'Vb'")


def vb_diagonal(N: int, offset: int = 0, n_total: int | None = None) -> np.ndarray:
    """Diagonal of ``Vb = sum_j Z_j Z_{j+N/2}`` in the computational basis."""
    n_total = N + offset if n_total is None else n_total
    idx = np.arange(1 << n_total, dtype=np.int64)
    h = N // 2
    d = np.zeros(idx.size)
    for j in range(h):
        a = (idx >> (j + offset)) & 1
        b = (idx >> (j + h + offset)) & 1
        d += 1 - 2 * (a ^ b)
    return d
