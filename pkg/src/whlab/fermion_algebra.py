"""Bit-packed Pauli strings, operator sums and the Jordan-Wigner Majoranas.

A Pauli string on ``n`` qubits is stored as two integer masks ``(x, z)``;
qubit ``k`` carries ``I, X, Y, Z`` for ``(x_k, z_k) = (0,0), (1,0), (1,1),
(0,1)``.  State vectors are little-endian: bit ``k`` of an amplitude index is
the computational value of qubit ``k``.

Majorana layout for ``N`` fermions per side: the left block lives on qubits
``0..N/2-1`` and the right block on ``N/2..N-1`` (shifted by ``offset`` when
embedded in a larger register)::

    psi_{2j}   = Z_0 ... Z_{j-1} X_j / sqrt(2)
    psi_{2j+1} = Z_0 ... Z_{j-1} Y_j / sqrt(2)

with ``j -> j + N/2`` for the right side (its Z string covers the whole left
block).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

SIDES = ("L", "R")
_IPOW = (1, 1j, -1, -1j)

# dense block is used when n_terms * this > 2**k for a block of k qubits
_PAULI_APPLY_COST = 8
MAX_DENSE_BLOCK_QUBITS = 10


def popcount(v: int) -> int:
    return bin(v).count("1")


def popcount_array(a: np.ndarray) -> np.ndarray:
    """Vectorised popcount of a non-negative int64 array."""
    return np.bitwise_count(np.asarray(a, dtype=np.int64)).astype(np.int64)


@dataclass(frozen=True)
class PauliTerm:
    """``i**phase`` times the Hermitian Pauli string encoded by ``(x, z)``."""

    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.x >> self.n_qubits or self.z >> self.n_qubits or self.x < 0 or self.z < 0:
            raise ValueError("Pauli masks exceed the number of qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliTerm":
        """``label[k]`` is the letter on qubit ``k``."""
        x = z = 0
        for k, ch in enumerate(label.upper()):
            if ch in "XY":
                x |= 1 << k
            if ch in "ZY":
                z |= 1 << k
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(len(label), x, z, phase)

    @property
    def label(self) -> str:
        return "".join("IXZY"[((self.x >> k) & 1) | (((self.z >> k) & 1) << 1)]
                       for k in range(self.n_qubits))

    @property
    def coefficient(self) -> complex:
        return _IPOW[self.phase]

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        return pauli_mul(self, other)

    def __repr__(self):
        return f"PauliTerm({['+', '+i', '-', '-i'][self.phase]}{self.label})"

    def commutes(self, other: "PauliTerm") -> bool:
        return (popcount(self.x & other.z) + popcount(self.z & other.x)) % 2 == 0

    def dagger(self) -> "PauliTerm":
        return PauliTerm(self.n_qubits, self.x, self.z, -self.phase)

    def to_dense(self) -> np.ndarray:
        return OperatorSum.from_term(self).to_dense()


def string_product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of ``i`` in ``sigma(x1,z1) sigma(x2,z2) = i**p sigma(x1^x2, z1^z2)``.

    Uses ``sigma(x, z) = i**|x&z| X^x Z^z``.
    """
    x3, z3 = x1 ^ x2, z1 ^ z2
    return (popcount(x1 & z1) + popcount(x2 & z2) + 2 * popcount(z1 & x2)
            - popcount(x3 & z3)) % 4


def pauli_mul(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    p = string_product_phase(a.x, a.z, b.x, b.z)
    return PauliTerm(a.n_qubits, a.x ^ b.x, a.z ^ b.z, a.phase + b.phase + p)


def apply_string(x: int, z: int, coeff: complex, psi: np.ndarray,
                 out: np.ndarray | None = None) -> np.ndarray:
    """Return (or accumulate into ``out``) ``coeff * sigma(x, z) @ psi``."""
    idx = np.arange(psi.shape[0], dtype=np.int64)
    src = idx ^ x
    coeff = coeff * _IPOW[popcount(x & z) % 4]
    if z:
        sign = 1 - 2 * (popcount_array(src & z) & 1)
        vec = coeff * sign * psi[src]
    else:
        vec = coeff * psi[src]
    if out is None:
        return vec
    out += vec
    return out


class OperatorSum:
    """Complex-weighted sum of distinct Hermitian Pauli strings.

    Treated as immutable; arithmetic returns new objects.  ``terms`` maps
    ``(x, z)`` to the complex coefficient of ``sigma(x, z)``.
    """

    __slots__ = ("n_qubits", "_terms", "__dict__")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None,
                 atol: float = 0.0):
        self.n_qubits = n_qubits
        clean = {}
        for key, c in (terms or {}).items():
            c = complex(c)
            if abs(c) > atol:
                clean[key] = c
        self._terms = clean

    # construction -----------------------------------------------------
    @classmethod
    def from_term(cls, term: PauliTerm, coeff: complex = 1.0) -> "OperatorSum":
        return cls(term.n_qubits, {(term.x, term.z): coeff * term.coefficient})

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "OperatorSum":
        return cls(n_qubits)

    @classmethod
    def from_labels(cls, items: Iterable[tuple[complex, str]]) -> "OperatorSum":
        items = list(items)
        n = len(items[0][1])
        acc: dict = {}
        for c, lab in items:
            t = PauliTerm.from_label(lab)
            acc[(t.x, t.z)] = acc.get((t.x, t.z), 0) + c
        return cls(n, acc)

    # container --------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __repr__(self):
        shown = ", ".join(f"{c:.3g}*{PauliTerm(self.n_qubits, x, z).label}"
                          for (x, z), c in list(self._terms.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"OperatorSum({shown}{more})"

    @property
    def support(self) -> int:
        m = 0
        for x, z in self._terms:
            m |= x | z
        return m

    def support_qubits(self) -> list[int]:
        s = self.support
        return [k for k in range(self.n_qubits) if (s >> k) & 1]

    # arithmetic -------------------------------------------------------
    def _check(self, other: "OperatorSum"):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"size mismatch: {self.n_qubits} vs {other.n_qubits} qubits")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = OperatorSum.identity(self.n_qubits, other)
        self._check(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return OperatorSum(self.n_qubits, acc)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other if isinstance(other, OperatorSum) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: complex) -> "OperatorSum":
        return OperatorSum(self.n_qubits, {k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        if isinstance(other, PauliTerm):
            other = OperatorSum.from_term(other)
        self._check(other)
        acc: dict = {}
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                key = (x1 ^ x2, z1 ^ z2)
                p = string_product_phase(x1, z1, x2, z2)
                acc[key] = acc.get(key, 0) + c1 * c2 * _IPOW[p]
        return OperatorSum(self.n_qubits, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    __matmul__ = __mul__

    def dagger(self) -> "OperatorSum":
        return OperatorSum(self.n_qubits, {k: np.conj(c) for k, c in self._terms.items()})

    def commutator(self, other: "OperatorSum") -> "OperatorSum":
        return self * other - other * self

    def anticommutator(self, other: "OperatorSum") -> "OperatorSum":
        return self * other + other * self

    def simplify(self, atol: float = 1e-12) -> "OperatorSum":
        return OperatorSum(self.n_qubits, self._terms, atol=atol)

    def is_zero(self, atol: float = 1e-12) -> bool:
        return all(abs(c) <= atol for c in self._terms.values())

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= atol for c in self._terms.values())

    def equals(self, other: "OperatorSum", atol: float = 1e-12) -> bool:
        return (self - other).is_zero(atol)

    def trace_normalized(self) -> complex:
        """``tr(O) / 2**n``."""
        return self._terms.get((0, 0), 0.0)

    def all_commuting(self) -> bool:
        keys = list(self._terms)
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                (x1, z1), (x2, z2) = keys[a], keys[b]
                if (popcount(x1 & z2) + popcount(z1 & x2)) % 2:
                    return False
        return True

    def embed(self, n_total: int, offset: int) -> "OperatorSum":
        """Shift every qubit index by ``offset`` inside an ``n_total`` register."""
        if offset + self.n_qubits > n_total:
            raise ValueError("embedding does not fit")
        return OperatorSum(n_total, {(x << offset, z << offset): c
                                     for (x, z), c in self._terms.items()})

    # numerics ---------------------------------------------------------
    def to_dense(self, qubits: list[int] | None = None) -> np.ndarray:
        """Dense matrix, little-endian over ``qubits`` (default: all)."""
        if qubits is None:
            qubits = list(range(self.n_qubits))
        k = len(qubits)
        dim = 1 << k
        out = np.zeros((dim, dim), dtype=complex)
        col = np.arange(dim, dtype=np.int64)
        for (x, z), c in self._terms.items():
            xs, zs = _compress(x, qubits), _compress(z, qubits)
            row = col ^ xs
            sign = 1 - 2 * (popcount_array(col & zs) & 1)
            out[row, col] += c * _IPOW[popcount(xs & zs) % 4] * sign
        return out

    def to_sparse(self):
        import scipy.sparse as sp

        dim = 1 << self.n_qubits
        col = np.arange(dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for (x, z), c in self._terms.items():
            sign = 1 - 2 * (popcount_array(col & z) & 1)
            rows.append(col ^ x)
            cols.append(col)
            vals.append(c * _IPOW[popcount(x & z) % 4] * sign)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(dim, dim))
        return m.tocsr()

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Exact action on a state vector (or a stack of columns)."""
        if psi.shape[0] != 1 << self.n_qubits:
            raise ValueError(f"dimension mismatch: operator on {self.n_qubits} qubits, "
                             f"vector of length {psi.shape[0]}")
        return self.compiled.apply(psi)

    @cached_property
    def compiled(self) -> "CompiledOperator":
        return CompiledOperator(self)


def apply_term(op: PauliTerm | OperatorSum, psi: np.ndarray) -> np.ndarray:
    if isinstance(op, PauliTerm):
        if psi.shape[0] != 1 << op.n_qubits:
            raise ValueError("dimension mismatch")
        return apply_string(op.x, op.z, op.coefficient, psi)
    return op.apply(psi)


def _compress(mask: int, qubits: list[int]) -> int:
    out = 0
    for m, q in enumerate(qubits):
        if (mask >> q) & 1:
            out |= 1 << m
    return out


def apply_dense(mat: np.ndarray, qubits: list[int], psi: np.ndarray) -> np.ndarray:
    """Apply a dense operator (little-endian over ``qubits``) to ``psi``."""
    n = psi.shape[0].bit_length() - 1
    k = len(qubits)
    qubits = list(qubits)
    if qubits == list(range(qubits[0], qubits[0] + k)):
        lo = qubits[0]
        view = psi.reshape(1 << (n - lo - k), 1 << k, 1 << lo)
        return np.einsum("ij,ajb->aib", mat, view, optimize=True).reshape(-1)
    t = psi.reshape((2,) * n)
    m = mat.reshape((2,) * (2 * k))
    # tensor axis of qubit q is n-1-q; operator in-axis of local bit b is k + (k-1-b)
    in_axes = [k + (k - 1 - b) for b in range(k)]
    st_axes = [n - 1 - q for q in qubits]
    res = np.tensordot(m, t, axes=(in_axes, st_axes))
    # res axes: out bits (k-1..0) then remaining state axes in order
    out_positions = [n - 1 - qubits[k - 1 - a] for a in range(k)]
    res = np.moveaxis(res, list(range(k)), out_positions)
    return res.reshape(-1)


class CompiledOperator:
    """Matvec-ready form of an ``OperatorSum``.

    Terms sharing a small support are folded into dense blocks when that is
    cheaper than applying them string by string.
    """

    def __init__(self, op: OperatorSum):
        self.n_qubits = op.n_qubits
        groups: list[list] = []  # [support_mask, [(x, z, c), ...]]
        items = sorted(op, key=lambda kv: -popcount(kv[0][0] | kv[0][1]))
        for (x, z), c in items:
            s = x | z
            for g in groups:
                if s & ~g[0] == 0:
                    g[1].append((x, z, c))
                    break
            else:
                groups.append([s, [(x, z, c)]])
        self.blocks = []
        self.strings = []
        for mask, terms in groups:
            k = popcount(mask)
            if 0 < k <= MAX_DENSE_BLOCK_QUBITS and len(terms) * _PAULI_APPLY_COST > (1 << k):
                qubits = [q for q in range(self.n_qubits) if (mask >> q) & 1]
                block = OperatorSum(self.n_qubits, {(x, z): c for x, z, c in terms})
                self.blocks.append((qubits, block.to_dense(qubits)))
            else:
                self.strings.extend(terms)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if psi.ndim == 2:
            return np.stack([self.apply(psi[:, i]) for i in range(psi.shape[1])], axis=1)
        out = np.zeros_like(psi, dtype=complex)
        for qubits, mat in self.blocks:
            out += apply_dense(mat, qubits, psi)
        for x, z, c in self.strings:
            apply_string(x, z, c, psi, out)
        return out

    def as_linear_operator(self):
        from scipy.sparse.linalg import LinearOperator

        dim = 1 << self.n_qubits
        return LinearOperator((dim, dim), matvec=lambda v: self.apply(np.asarray(v).ravel()),
                              dtype=complex)


# Majoranas --------------------------------------------------------------

@dataclass(frozen=True)
class MajoranaIndex:
    side: str
    j: int

    def validate(self, N: int):
        if self.side not in SIDES:
            raise ValueError(f"side must be 'L' or 'R', got {self.side!r}")
        if not 0 <= self.j < N:
            raise ValueError(f"Majorana index {self.j} out of range for N={N}")


@dataclass(frozen=True)
class GammaIndex:
    side: str
    J: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.J)

    @property
    def mask(self) -> int:
        return sum(1 << j for j in self.J)

    def validate(self, N: int):
        if self.side not in SIDES:
            raise ValueError(f"side must be 'L' or 'R', got {self.side!r}")
        if any(b <= a for a, b in zip(self.J, self.J[1:])):
            raise ValueError(f"indices must be strictly increasing: {self.J}")
        if self.J and not (0 <= self.J[0] and self.J[-1] < N):
            raise ValueError(f"index out of range for N={N}: {self.J}")


def _check_N(N: int):
    if N <= 0 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")


def majorana_string(side: str, j: int, N: int, offset: int = 0,
                    n_total: int | None = None) -> PauliTerm:
    """The unit Pauli string ``sqrt(2) * psi^side_j``."""
    _check_N(N)
    MajoranaIndex(side, j).validate(N)
    n_total = N + offset if n_total is None else n_total
    qubit = j // 2 + (N // 2 if side == "R" else 0)
    zmask = ((1 << qubit) - 1) << offset
    x = 1 << (qubit + offset)
    z = zmask | (x if j % 2 else 0)
    return PauliTerm(n_total, x, z, 0)


def majorana(idx: MajoranaIndex | tuple[str, int], N: int, offset: int = 0,
             n_total: int | None = None) -> OperatorSum:
    """``psi^side_j`` as a one-term operator sum with weight ``1/sqrt(2)``."""
    if not isinstance(idx, MajoranaIndex):
        idx = MajoranaIndex(*idx)
    return OperatorSum.from_term(majorana_string(idx.side, idx.j, N, offset, n_total),
                                 1 / np.sqrt(2))


def gamma_phase(s: int) -> int:
    """Power of ``i`` in ``i**(s(s-1)/2)``."""
    return (s * (s - 1) // 2) % 4


def gamma_operator(g: GammaIndex | tuple[str, Iterable[int]], N: int, offset: int = 0,
                   n_total: int | None = None) -> OperatorSum:
    """``2**(s/2) i**(s(s-1)/2) psi_{j1} ... psi_{js}``; identity for ``s = 0``."""
    if not isinstance(g, GammaIndex):
        g = GammaIndex(g[0], tuple(g[1]))
    _check_N(N)
    g.validate(N)
    n_total = N + offset if n_total is None else n_total
    t = PauliTerm(n_total, 0, 0, gamma_phase(g.s))
    for j in g.J:
        t = t * majorana_string(g.side, j, N, offset, n_total)
    return OperatorSum.from_term(t)


def gamma_table(side: str, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli data of every ``Gamma_J`` on the ``N``-qubit doubled space.

    Returns arrays ``(x, z, phase)`` indexed by the bitmask of ``J`` such that
    ``Gamma_J = i**phase[J] * sigma(x[J], z[J])``.
    """
    _check_N(N)
    x = np.zeros(1, dtype=np.int64)
    z = np.zeros(1, dtype=np.int64)
    ph = np.zeros(1, dtype=np.int64)
    for k in range(N):
        g = majorana_string(side, k, N)
        # append psi_k on the right: it carries the largest index of the new J
        x3, z3 = x ^ g.x, z ^ g.z
        p = (popcount_array(x & z) + popcount(g.x & g.z) + 2 * popcount_array(z & g.x)
             - popcount_array(x3 & z3)) % 4
        x = np.concatenate([x, x3])
        z = np.concatenate([z, z3])
        ph = np.concatenate([ph, (ph + p) % 4])
    sizes = popcount_array(np.arange(1 << N, dtype=np.int64))
    ph = (ph + (sizes * (sizes - 1) // 2)) % 4
    return x, z, ph


def parity_operator(side: str, N: int, offset: int = 0,
                    n_total: int | None = None) -> OperatorSum:
    """Hermitian side parity ``Gamma^(N)_{0..N-1}`` (eigenvalues +-1)."""
    return gamma_operator((side, range(N)), N, offset, n_total)


def all_gamma_indices(side: str, N: int):
    for s in range(N + 1):
        for J in combinations(range(N), s):
            yield GammaIndex(side, J)
