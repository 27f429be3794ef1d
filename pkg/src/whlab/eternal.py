"""Spectral analysis of the eternal Hamiltonian ``H_L + H_R + mu K`` (K = V or Vb).

Sign convention: ``mu > 0`` here matches ``mu < 0`` in the teleportation
protocol, since evolving with ``exp(-i mu K t)`` is the opposite sign of the
protocol's ``exp(i mu K)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .fermion_algebra import OperatorSum, PauliTerm, gamma_operator, majorana_string
from .models import build_interaction
from .states import NumericalError, thermofield_double

DENSE_EIG_MAX_QUBITS = 10
CLUSTER_TOL = 1e-8


def eternal_hamiltonian(couplings, kind: str, mu: float) -> OperatorSum:
    N = couplings.N
    return couplings.hamiltonian("L") + couplings.hamiltonian("R") + build_interaction(kind, N).scale(mu)


def cluster(eigenvalues: np.ndarray, tol: float = CLUSTER_TOL) -> list[np.ndarray]:
    """Group sorted eigenvalues whose successive spacing is at most ``tol``."""
    groups, cur = [], [0]
    for k in range(1, eigenvalues.size):
        if eigenvalues[k] - eigenvalues[k - 1] <= tol:
            cur.append(k)
        else:
            groups.append(np.array(cur))
            cur = [k]
    groups.append(np.array(cur))
    return groups


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    E0: float
    gap: float
    ground_states: np.ndarray  # columns span the ground multiplet
    multiplicities: list[int]

    @property
    def ground_state(self) -> np.ndarray:
        return self.ground_states[:, 0]

    def overlap(self, psi: np.ndarray) -> float:
        """``|<psi|G>|`` maximised over the ground multiplet (norm of the projection)."""
        return float(np.linalg.norm(self.ground_states.conj().T @ psi))

    def csv_rows(self):
        return [(k, float(e)) for k, e in enumerate(self.eigenvalues)]


def eternal_spectrum(couplings, kind: str, mu: float, k: int = 10, method: str = "auto",
                     tol: float = CLUSTER_TOL) -> SpectrumResult:
    """Lowest ``k`` eigenpairs; dense up to ``DENSE_EIG_MAX_QUBITS``, Lanczos (ARPACK) beyond."""
    if k < 2:
        raise ValueError("k must be at least 2")
    H = eternal_hamiltonian(couplings, kind, mu)
    n = H.n_qubits
    if method == "auto":
        method = "dense" if n <= DENSE_EIG_MAX_QUBITS else "lanczos"
    if method == "dense":
        w, v = np.linalg.eigh(H.to_dense())
        w, v = w[:k], v[:, :k]
    elif method == "lanczos":
        op = H.compiled.as_linear_operator()
        try:
            # a generic start vector: symmetric ones stay inside one symmetry sector
            rng = np.random.default_rng(0)
            v0 = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
            w, v = eigsh(op, k=k, which="SA", tol=1e-12, v0=v0, ncv=max(4 * k, 40))
        except ArpackNoConvergence as exc:
            raise NumericalError(f"eigensolver did not converge: {exc}") from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    groups = cluster(w, tol)
    if len(groups) < 2:
        raise NumericalError("ground multiplet fills all computed eigenvalues; increase k")
    g0 = groups[0]
    gap = float(w[groups[1][0]] - w[g0[-1]])
    return SpectrumResult(w, float(w[0]), gap, v[:, g0], [len(g) for g in groups])


# power law -------------------------------------------------------------------

def _power(mu, a, b, c):
    return a * np.power(mu, b) + c


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    b: float
    c: float
    b_stderr: float
    mu: np.ndarray
    gap: np.ndarray

    @property
    def b_interval(self) -> tuple[float, float]:
        """Approximate 95% confidence interval on ``b``."""
        return self.b - 1.96 * self.b_stderr, self.b + 1.96 * self.b_stderr


def fit_power_law(mu: Sequence[float], gap: Sequence[float], mu_max: float = 0.3) -> PowerLawFit:
    """Nonlinear least squares of ``gap = a mu^b + c`` over ``0 < mu < mu_max``."""
    mu, gap = np.asarray(mu, float), np.asarray(gap, float)
    m = (mu > 0) & (mu < mu_max)
    if m.sum() < 4:
        raise ValueError("power-law fit needs at least four points below mu_max")
    try:
        p, cov = curve_fit(_power, mu[m], gap[m], p0=(1.0, 0.7, 0.0), maxfev=20000)
    except RuntimeError as exc:
        raise NumericalError(f"power-law fit failed: {exc}") from exc
    err = float(np.sqrt(cov[1, 1])) if np.all(np.isfinite(cov)) else float("inf")
    return PowerLawFit(float(p[0]), float(p[1]), float(p[2]), err, mu[m], gap[m])


def gap_power_law(members, mu_grid: Sequence[float], kind: str = "V", mu_max: float = 0.3,
                  k: int = 10) -> PowerLawFit:
    """Ensemble-mean gap on ``mu_grid`` fitted to ``a mu^b + c``."""
    members = members if isinstance(members, (list, tuple)) else [members]
    gaps = np.array([[eternal_spectrum(c, kind, m, k).gap for m in mu_grid] for c in members])
    return fit_power_law(mu_grid, gaps.mean(axis=0), mu_max)


# tfd overlap and figure of merit -----------------------------------------------

def tfd_overlap(couplings, spectrum: SpectrumResult, beta: float) -> float:
    return spectrum.overlap(thermofield_double(couplings.hamiltonian("L"), beta))


@dataclass(frozen=True)
class OptimalBeta:
    beta: float
    overlap: float
    on_boundary: bool
    grid_overlaps: np.ndarray


def optimal_beta(couplings, kind: str, mu: float, beta_grid: Sequence[float],
                 spectrum: SpectrumResult | None = None) -> OptimalBeta:
    """Maximise ``|<tfd(beta)|G>|``: grid scan, then golden-section refinement."""
    grid = np.asarray(beta_grid, float)
    if grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("beta grid must be strictly increasing with at least three points")
    spec = spectrum or eternal_spectrum(couplings, kind, mu)
    HL = couplings.hamiltonian("L")

    def ov(b):
        return spec.overlap(thermofield_double(HL, max(b, 0.0)))

    vals = np.array([ov(b) for b in grid])
    k = int(np.argmax(vals))
    if k == 0 or k == grid.size - 1:
        return OptimalBeta(float(grid[k]), float(vals[k]), True, vals)
    res = minimize_scalar(lambda b: -ov(b), bracket=(grid[k - 1], grid[k], grid[k + 1]),
                          method="golden", tol=1e-6)
    b, o = float(res.x), float(-res.fun)
    if o < vals[k]:
        b, o = float(grid[k]), float(vals[k])
    return OptimalBeta(b, o, False, vals)


def sl2r_figure_of_merit(couplings, kind: str, mu: float, beta: float,
                         spectrum: SpectrumResult | None = None) -> float:
    """``<tfd|(H_eternal - E0)|tfd> / |E0|``."""
    spec = spectrum or eternal_spectrum(couplings, kind, mu)
    if abs(spec.E0) < 1e-14:
        raise NumericalError("ground energy is zero; figure of merit undefined")
    H = eternal_hamiltonian(couplings, kind, mu)
    tfd = thermofield_double(couplings.hamiltonian("L"), beta)
    e = np.vdot(tfd, H.apply(tfd)).real
    return float((e - spec.E0) / abs(spec.E0))


def minimize_figure_of_merit(couplings, kind: str, mu: float, beta_grid: Sequence[float],
                             spectrum: SpectrumResult | None = None) -> tuple[float, float]:
    """``(beta, fom)`` minimising the figure of merit over the grid, refined by golden section."""
    spec = spectrum or eternal_spectrum(couplings, kind, mu)
    grid = np.asarray(beta_grid, float)
    f = [sl2r_figure_of_merit(couplings, kind, mu, b, spec) for b in grid]
    k = int(np.argmin(f))
    if 0 < k < grid.size - 1:
        res = minimize_scalar(lambda b: sl2r_figure_of_merit(couplings, kind, mu, max(b, 0), spec),
                              bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-6)
        if res.fun < f[k]:
            return float(res.x), float(res.fun)
    return float(grid[k]), float(f[k])


@dataclass(frozen=True)
class SL2RGenerators:
    B: OperatorSum
    E: OperatorSum
    P_plus: OperatorSum
    P_minus: OperatorSum


def sl2r_generators(couplings, mu: float, E0: float, kind: str = "V") -> SL2RGenerators:
    """``B = H_R - H_L``, ``E = H_L + H_R - mu K - E0``, ``P_pm = -(E pm B)/2``."""
    HL, HR = couplings.hamiltonian("L"), couplings.hamiltonian("R")
    K = build_interaction(kind, couplings.N)
    B = HR - HL
    E = HL + HR - K.scale(mu) - E0
    return SL2RGenerators(B, E, (E + B).scale(-0.5), (E - B).scale(-0.5))


def boost_residual(couplings, beta: float) -> float:
    """``|| B |tfd> ||``, zero for an exact thermofield double."""
    B = couplings.hamiltonian("R") - couplings.hamiltonian("L")
    return float(np.linalg.norm(B.apply(thermofield_double(couplings.hamiltonian("L"), beta))))


# discrete symmetries ---------------------------------------------------------

def q_operator(N: int) -> OperatorSum:
    """``Q = exp(i pi V / 2) = prod_j (1 + i P_j)/sqrt(2)`` with ``P_j = 2i psi^l_j psi^r_j``."""
    out = OperatorSum.identity(N)
    for j in range(N):
        t = PauliTerm(N, 0, 0, 1) * majorana_string("L", j, N) * majorana_string("R", j, N)
        factor = OperatorSum(N, {(0, 0): 1 / np.sqrt(2), (t.x, t.z): 1j * t.coefficient / np.sqrt(2)})
        out = out * factor
    return out.simplify(1e-14)


def side_parity(side: str, N: int) -> OperatorSum:
    """Hermitian parity ``Gamma^(N)`` over all Majoranas of one side."""
    return gamma_operator((side, tuple(range(N))), N)


def _norm(op: OperatorSum) -> float:
    return op.simplify(1e-12).max_abs_coefficient()


@dataclass
class SymmetryReport:
    N: int
    kind: str
    checks: dict[str, float]  # largest residual Pauli coefficient per identity
    Q_eigenvalues: np.ndarray | None = None

    def passed(self, atol: float = 1e-12) -> bool:
        return all(v <= atol for v in self.checks.values())


def discrete_symmetries(couplings, kind: str, N: int | None = None, mu: float = 1.0,
                        eigenvalues: bool = False) -> SymmetryReport:
    """Pauli-algebraic residuals of the discrete-symmetry identities.

    Checks ``[Q, H] = 0``, ``Q^2 = Gamma5_L Gamma5_R``, and, within the parity
    sector ``Q^2 = (-1)^{N/2}`` that contains ``|I>``, that ``Q`` and
    ``Gamma5_L`` commute (``N = 0 mod 4``) or anticommute (``N = 2 mod 4``).
    For ``Vb`` it also checks ``[Gamma5_L, H] = [Gamma5_R, H] = 0``.
    """
    N = couplings.N if N is None else N
    H = eternal_hamiltonian(couplings, kind, mu)
    Q = q_operator(N)
    GL, GR = side_parity("L", N), side_parity("R", N)
    Q2 = Q * Q
    sigma = (-1) ** (N // 2)
    sector = (OperatorSum.identity(N) + Q2.scale(sigma)).scale(0.5)
    rel = Q * GL - GL * Q.scale(sigma)
    checks = {
        "[Q,H]": _norm(Q.commutator(H)),
        "Q^2-G5L*G5R": _norm(Q2 - GL * GR),
        "[G5L,G5R]": _norm(GL.commutator(GR)),
        "Q-G5L sector relation": _norm(rel * sector),
        "G5 on |I>": 0.0,
    }
    from .states import max_entangled_state
    I = max_entangled_state(N)
    checks["G5 on |I>"] = float(np.linalg.norm((GL * GR).apply(I) - sigma * I))
    if kind == "Vb":
        checks["[G5L,H]"] = _norm(GL.commutator(H))
        checks["[G5R,H]"] = _norm(GR.commutator(H))
    ev = None
    if eigenvalues:
        ev = np.linalg.eigvals(Q.to_dense())
    return SymmetryReport(N, kind, checks, ev)


def degeneracy_report(spectrum: SpectrumResult, n_levels: int | None = None) -> list[int]:
    """Multiplicities of the lowest clusters (dropping a possibly truncated last one)."""
    m = spectrum.multiplicities[:-1]
    return m if n_levels is None else m[:n_levels]
