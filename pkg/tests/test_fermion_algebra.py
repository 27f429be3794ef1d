import numpy as np
import pytest
from hypothesis import given, strategies as st

from whlab.fermion_algebra import (GammaIndex, OperatorSum, PauliTerm, all_gamma_indices,
                                   apply_term, gamma_operator, majorana, pauli_mul)
from whlab.states import max_entangled_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])


def kron_le(*ops):
    """Dense operator with ``ops[k]`` on qubit ``k`` (little-endian)."""
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(op, out)
    return out


def terms(n):
    return st.builds(lambda x, z, p: PauliTerm(n, x, z, p),
                     st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1), st.integers(0, 3))


def test_majorana_examples_N2():
    assert np.allclose(majorana(("L", 0), 2).to_dense(), kron_le(X, np.eye(2)) / np.sqrt(2))
    # right fermion: Z on the left qubit, X on the right qubit
    assert np.allclose(majorana(("R", 0), 2).to_dense(), kron_le(Z, X) / np.sqrt(2))


def test_majorana_out_of_range():
    with pytest.raises(ValueError):
        majorana(("L", 4), 4)
    with pytest.raises(ValueError):
        majorana(("M", 0), 4)


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_clifford_relations(N):
    ops = [majorana((s, j), N) for s in "LR" for j in range(N)]
    eye = OperatorSum.identity(N)
    for a, A in enumerate(ops):
        for b, B in enumerate(ops):
            want = eye if a == b else OperatorSum.zero(N)
            assert A.anticommutator(B).equals(want), (a, b)


def test_pauli_products():
    x, y = PauliTerm.from_label("X"), PauliTerm.from_label("Y")
    assert pauli_mul(x, y) == PauliTerm.from_label("Z", phase=1)
    with pytest.raises(ValueError):
        pauli_mul(PauliTerm(1, 1, 0), PauliTerm(2, 1, 0))


@given(terms(5))
def test_square_is_identity(p):
    q = PauliTerm(p.n_qubits, p.x, p.z)
    assert q * q == PauliTerm(p.n_qubits)


@given(terms(4), terms(4), terms(4))
def test_associativity(a, b, c):
    assert pauli_mul(a, pauli_mul(b, c)) == pauli_mul(pauli_mul(a, b), c)


@given(terms(3), terms(3))
def test_product_matches_dense(a, b):
    assert np.allclose((a * b).to_dense(), a.to_dense() @ b.to_dense())


def test_pair_commutes_with_third_majorana():
    N = 4
    pair = majorana(("L", 0), N) * majorana(("R", 0), N)
    m = majorana(("L", 1), N)
    A, M = pair.to_dense(), m.to_dense()
    assert np.allclose(A @ M - M @ A, 0)
    assert np.allclose(A @ A, -np.eye(A.shape[0]) / 4)


def test_gamma_examples():
    N = 6
    assert gamma_operator(("L", (2,)), N).equals(majorana(("L", 2), N).scale(np.sqrt(2)))
    g2 = (majorana(("L", 2), N) * majorana(("L", 3), N)).scale(2j)
    assert gamma_operator(("L", (2, 3)), N).equals(g2)
    with pytest.raises(ValueError):
        gamma_operator(("L", (3, 2)), N)
    with pytest.raises(ValueError):
        gamma_operator(("L", (1, 1)), N)


@pytest.mark.parametrize("N", [2, 4])
def test_gamma_hermitian_unitary(N):
    eye = OperatorSum.identity(N)
    for side in "LR":
        for g in all_gamma_indices(side, N):
            G = gamma_operator(g, N)
            assert G.is_hermitian()
            assert (G * G).equals(eye)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_gamma_states_orthonormal(N):
    I = max_entangled_state(N)
    vecs = np.array([gamma_operator(g, N).apply(I) for g in all_gamma_indices("L", N)])
    assert np.allclose(vecs.conj() @ vecs.T, np.eye(1 << N), atol=1e-12)


def test_apply_examples():
    psi = np.zeros(8, dtype=complex)
    psi[0] = 1
    out = apply_term(PauliTerm.from_label("XII"), psi)
    assert out[1] == 1 and np.count_nonzero(out) == 1
    assert np.array_equal(apply_term(OperatorSum.identity(3), psi), psi)
    with pytest.raises(ValueError):
        apply_term(PauliTerm.from_label("XX"), psi)


def test_apply_matches_dense_n8():
    rng = np.random.default_rng(1)
    op = OperatorSum(8, {(int(rng.integers(256)), int(rng.integers(256))): complex(*rng.normal(size=2))
                         for _ in range(30)})
    psi = rng.normal(size=256) + 1j * rng.normal(size=256)
    assert np.allclose(op.apply(psi), op.to_dense() @ psi, atol=1e-12)
    assert np.allclose(op.compiled.apply(psi), op.to_dense() @ psi, atol=1e-12)


def test_operator_sum_merges_duplicate_strings():
    a = OperatorSum.from_labels([(1.0, "XZ"), (2.0, "XZ")])
    assert len(a) == 1 and np.isclose(a.terms[next(iter(a.terms))], 3.0)
    assert (a - a).is_zero()
