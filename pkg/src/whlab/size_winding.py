"""Operator-size expansion of thermal fermions and size-winding diagnostics.

The thermal fermion state ``phi = psi_i(t)|tfd>`` is expanded in the
orthonormal basis ``{Gamma_J |I>}`` of the doubled space:
``c_J = sqrt(2) <I|Gamma_J|phi>``, normalised so that ``sum_J |c_J|^2 = 1``.

Coefficients are stored densely, indexed by the bitmask of ``J``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fermion_algebra import gamma_table, majorana, popcount, popcount_array
from .observables import euclidean_2pt
from .states import _split, evolve, max_entangled_state, thermofield_double

POPULATED = 1e-8
MEASURES = ("V", "Vb")


@dataclass(frozen=True)
class SizeData:
    N: int
    side: str
    i: int
    t: float
    beta: float
    c: np.ndarray  # complex, indexed by the bitmask of J
    size_measure: str = "V"

    def __post_init__(self):
        if self.size_measure not in MEASURES:
            raise ValueError(f"size_measure must be one of {MEASURES}")

    @property
    def sizes(self) -> np.ndarray:
        return size_of_masks(self.N, self.size_measure)

    @property
    def n_sizes(self) -> int:
        return self.N + 1 if self.size_measure == "V" else self.N // 2 + 1

    def distributions(self) -> tuple[np.ndarray, np.ndarray]:
        return size_distributions(self)

    def with_measure(self, measure: str) -> "SizeData":
        return replace(self, size_measure=measure)

    def mean_size(self) -> float:
        P, _ = self.distributions()
        return float(np.arange(P.size) @ P)

    def std_size(self) -> float:
        P, _ = self.distributions()
        s = np.arange(P.size)
        m = s @ P
        return float(np.sqrt(max((s ** 2) @ P - m ** 2, 0.0)))

    def to_csv_rows(self) -> list[tuple[int, float, float, float]]:
        P, Q = self.distributions()
        return [(s, float(P[s]), float(Q[s].real), float(Q[s].imag)) for s in range(P.size)]


def size_of_masks(N: int, measure: str = "V") -> np.ndarray:
    """``s`` (number of Majoranas) or ``s2`` (qubits holding exactly one) per mask."""
    m = np.arange(1 << N, dtype=np.int64)
    if measure == "V":
        return popcount_array(m)
    if measure == "Vb":
        even = 0
        for k in range(N // 2):
            even |= 1 << (2 * k)
        return popcount_array((m ^ (m >> 1)) & even)
    raise ValueError(f"unknown size measure {measure!r}")


def masks_to_indices(mask: int) -> tuple[int, ...]:
    out, k = [], 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


# engines ----------------------------------------------------------------------

def pauli_traces(M: np.ndarray) -> np.ndarray:
    """``tr(sigma(x, z) M)`` for every Pauli string on ``h`` qubits.

    Output index is ``sum_k code_k 4**k`` with ``code = x + 2 z`` per qubit,
    computed with one butterfly per qubit.
    """
    d = M.shape[0]
    h = d.bit_length() - 1
    # row bit k sits on axis h-1-k, column bit k on axis 2h-1-k; pair them up
    T = M.reshape((2,) * (2 * h))
    perm = []
    for k in reversed(range(h)):
        perm += [h - 1 - k, 2 * h - 1 - k]
    T = np.transpose(T, perm).reshape((4,) * h)  # axis a <-> qubit h-1-a, entries m_rc at r*2+c
    res = T
    for ax in range(h):
        m00 = np.take(res, 0, axis=ax)
        m01 = np.take(res, 1, axis=ax)
        m10 = np.take(res, 2, axis=ax)
        m11 = np.take(res, 3, axis=ax)
        # codes: 0 = I, 1 = X, 2 = Z, 3 = Y
        res = np.stack([m00 + m11, m01 + m10, m00 - m11, 1j * m01 - 1j * m10], axis=ax)
    return res.reshape(-1)  # flattened with axis 0 most significant = qubit h-1


def _interleave(x: np.ndarray, z: np.ndarray, h: int) -> np.ndarray:
    out = np.zeros_like(x)
    for k in range(h):
        out += (((x >> k) & 1) + 2 * ((z >> k) & 1)) << (2 * k)
    return out


def _fast_coefficients(phi: np.ndarray, I: np.ndarray, N: int) -> np.ndarray:
    """``c_J = sqrt(2) <I| Gamma^l_J |phi>`` for all ``J`` via Pauli traces.

    Left strings live on the left block, so with ``F[a, b]`` the amplitude
    matrix (``a`` left index, ``b`` right index),
    ``<I|G|phi> = tr(G F_phi F_I^dag)``.
    """
    h = N // 2
    left = list(range(h))
    Fp, FI = _split(phi, left), _split(I, left)
    M = Fp @ FI.conj().T
    traces = pauli_traces(M)
    x, z, p = gamma_table("L", N)
    idx = _interleave(x, z, h)
    return np.sqrt(2) * (1j ** p) * traces[idx]


def gamma_states(N: int, side: str = "L", I: np.ndarray | None = None) -> np.ndarray:
    """Matrix whose column ``J`` is ``Gamma_J |I>`` (direct engine)."""
    if I is None:
        I = max_entangled_state(N)
    x, z, p = gamma_table(side, N)
    idx = np.arange(I.size, dtype=np.int64)
    cols = np.empty((I.size, x.size), dtype=complex)
    for J in range(x.size):
        src = idx ^ x[J]
        sign = 1 - 2 * (popcount_array(src & z[J]) & 1)
        cols[:, J] = 1j ** ((p[J] + popcount(int(x[J] & z[J]))) % 4) * sign * I[src]
    return cols


def _direct_coefficients(phi: np.ndarray, N: int, side: str, I: np.ndarray) -> np.ndarray:
    if N > 12:
        raise ValueError("the direct engine is limited to N <= 12")
    G = gamma_states(N, side, I)
    return np.sqrt(2) * (G.conj().T @ phi)


def thermal_fermion_state(couplings, side: str, i: int, t: float, beta: float,
                          tfd: np.ndarray | None = None) -> np.ndarray:
    """``psi_i(t)|tfd>`` with ``psi(t) = e^{iHt} psi e^{-iHt}`` on the given side."""
    N = couplings.N
    if not 0 <= i < N:
        raise ValueError(f"fermion index {i} out of range for N={N}")
    H = couplings.hamiltonian(side)
    if tfd is None:
        tfd = thermofield_double(couplings.hamiltonian("L"), beta)
    v = evolve(tfd, H, t)
    v = majorana((side, i), N).apply(v)
    return evolve(v, H, -t)


def expand_state(phi: np.ndarray, N: int, side: str = "L", engine: str = "fast",
                 I: np.ndarray | None = None) -> np.ndarray:
    """Coefficients ``c_J = sqrt(2) <I|Gamma^side_J|phi>`` for every mask ``J``."""
    if I is None:
        I = max_entangled_state(N)
    if engine == "direct":
        return _direct_coefficients(phi, N, side, I)
    if engine != "fast":
        raise ValueError(f"unknown engine {engine!r}")
    c = _fast_coefficients(phi, I, N)
    if side == "R":
        # Gamma^r_J |I> = i^s Gamma^l_J |I>, so <I|Gamma^r_J = (-i)^s <I|Gamma^l_J
        s = popcount_array(np.arange(c.size, dtype=np.int64))
        c = c * (-1j) ** (s % 4)
    return c


def expand_thermal_fermion(couplings, side: str, i: int, t: float, beta: float,
                           engine: str = "fast", size_measure: str = "V",
                           tfd: np.ndarray | None = None) -> SizeData:
    phi = thermal_fermion_state(couplings, side, i, t, beta, tfd)
    c = expand_state(phi, couplings.N, side, engine)
    return SizeData(couplings.N, side, i, float(t), float(beta), c, size_measure)


# distributions and fits --------------------------------------------------------

def size_distributions(data: SizeData, measure: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``P(s) = sum |c_J|^2`` and ``Q(s) = sum c_J^2`` over ``J`` of each size."""
    measure = measure or data.size_measure
    sizes = size_of_masks(data.N, measure)
    n = data.N + 1 if measure == "V" else data.N // 2 + 1
    P = np.bincount(sizes, weights=np.abs(data.c) ** 2, minlength=n)
    c2 = data.c ** 2
    Q = (np.bincount(sizes, weights=c2.real, minlength=n)
         + 1j * np.bincount(sizes, weights=c2.imag, minlength=n))
    return P, Q


def interaction_eigenvalues(N: int, kind: str) -> np.ndarray:
    """Eigenvalue of ``V`` or ``Vb`` on each ``Gamma_J|I>``: ``s - N/2`` or ``2 s2 - N/2``."""
    if kind == "V":
        return size_of_masks(N, "V") - N / 2
    if kind == "Vb":
        return 2 * size_of_masks(N, "Vb") - N / 2
    raise ValueError(f"unsupported interaction kind {kind!r}")


def apply_interaction_phase(data: SizeData, mu: float, kind: str) -> SizeData:
    """Exact action of ``exp(i mu K)`` on the expanded state (no re-simulation)."""
    if kind != data.size_measure:
        raise ValueError(f"interaction {kind!r} does not match size measure {data.size_measure!r}")
    phase = np.exp(1j * mu * interaction_eigenvalues(data.N, kind))
    return replace(data, c=data.c * phase)


@dataclass(frozen=True)
class WindingFit:
    slope: float
    intercept: float
    weighted_r2: float
    coherence: float
    sizes: np.ndarray
    phases: np.ndarray


def winding_fit(P: np.ndarray, Q: np.ndarray, sizes: np.ndarray | None = None,
                threshold: float = POPULATED) -> WindingFit:
    """Weighted least-squares line through the unwrapped phases of ``Q(s)``."""
    P, Q = np.asarray(P, float), np.asarray(Q, complex)
    s = np.arange(P.size, dtype=float) if sizes is None else np.asarray(sizes, float)
    m = P > threshold
    if m.sum() < 2:
        raise ValueError("winding fit needs at least two populated sizes")
    s, w, q = s[m], P[m], Q[m]
    ph = np.unwrap(np.angle(q))
    W = w / w.sum()
    sm, pm = W @ s, W @ ph
    var = W @ (s - sm) ** 2
    slope = (W @ ((s - sm) * (ph - pm))) / var if var > 0 else 0.0
    intercept = pm - slope * sm
    resid = ph - (slope * s + intercept)
    tot = W @ (ph - pm) ** 2
    r2 = 1.0 - (W @ resid ** 2) / tot if tot > 1e-300 else 1.0
    coherence = float(W @ np.minimum(np.abs(q) / w, 1.0))
    return WindingFit(float(slope), float(intercept), float(r2), coherence, s, ph)


def average_distributions(items: list[SizeData], measure: str | None = None):
    """Mean ``P`` and ``Q`` over several expansions (e.g. fermions or members)."""
    Ps, Qs = zip(*(size_distributions(d, measure) for d in items))
    return np.mean(Ps, axis=0), np.mean(Qs, axis=0)


# thermal size and growth -------------------------------------------------------

def thermal_size(couplings, beta: float, i: int | None = None) -> tuple[float, float]:
    """``(n[rho^{1/2}], G(beta/2))`` with ``n = (N/2)(1 - G)``; ``G`` averaged over
    all left fermions unless ``i`` is given."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    N = couplings.N
    idx = range(N) if i is None else [i]
    G = float(np.mean([euclidean_2pt(couplings, j, beta / 2, beta) for j in idx]))
    return N / 2 * (1 - G), G


def largeN_growth_reference(G_half: float, J: float, lam: float, t):
    """``G (1 + 8 J^2 / lam^2 sinh^2(lam t / 2))``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    t = np.asarray(t, dtype=float)
    return G_half * (1 + 8 * J ** 2 / lam ** 2 * np.sinh(lam * t / 2) ** 2)


@dataclass(frozen=True)
class LyapunovFit:
    lam: float
    intercept: float
    residuals: np.ndarray
    n_points: int
    window: tuple[float, float]

    @property
    def rms_residual(self) -> float:
        return float(np.sqrt(np.mean(self.residuals ** 2)))


def lyapunov_fit(t, slopes, window: tuple[float, float]) -> LyapunovFit:
    """Least-squares fit of ``log|slope| = a - lam t`` inside ``window``."""
    t, y = np.asarray(t, float), np.abs(np.asarray(slopes, float))
    m = (t >= window[0]) & (t <= window[1])
    if m.sum() < 4:
        raise ValueError(f"lyapunov fit needs >= 4 points in {window}, got {int(m.sum())}")
    if np.any(y[m] == 0):
        raise ValueError("slopes inside the fit window must be nonzero")
    A = np.vstack([np.ones(m.sum()), -t[m]]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y[m]), rcond=None)
    resid = np.log(y[m]) - A @ coef
    return LyapunovFit(float(coef[1]), float(coef[0]), resid, int(m.sum()), tuple(window))


@dataclass(frozen=True)
class WindingPoint:
    t: float
    fit: WindingFit
    mean_size: float
    std_size: float
    P: np.ndarray
    Q: np.ndarray


def winding_series(couplings, times, beta: float, fermions=(0,), side: str = "L",
                   measure: str = "V", mu: float | None = None) -> list[WindingPoint]:
    """Fermion-averaged size winding at each time, optionally after ``exp(i mu K)``."""
    tfd = thermofield_double(couplings.hamiltonian("L"), beta)
    out = []
    for t in times:
        items = []
        for i in fermions:
            d = expand_thermal_fermion(couplings, side, i, t, beta, size_measure=measure, tfd=tfd)
            if mu is not None:
                d = apply_interaction_phase(d, mu, measure)
            items.append(d)
        P, Q = average_distributions(items)
        s = np.arange(P.size)
        mean = float(s @ P)
        std = float(np.sqrt(max((s ** 2) @ P - mean ** 2, 0.0)))
        out.append(WindingPoint(float(t), winding_fit(P, Q), mean, std, P, Q))
    return out
