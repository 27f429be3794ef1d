import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whlab.fermion_algebra import majorana
from whlab.models import build_interaction, pg_couplings, syk_couplings
from whlab.observables import (euclidean_2pt, euclidean_2pt_annealed, euclidean_2pt_parts,
                               max_entangled_expectation, mutual_info_record, otoc_anticommutator,
                               otoc_C, otoc_H, pg_2pt_closed_form, purity, renyi2_entropy,
                               renyi2_mutual, tripartite_info)


def bell():
    v = np.zeros(4, dtype=complex)
    v[[0, 3]] = 1 / np.sqrt(2)
    return v


def test_renyi_examples():
    assert np.isclose(renyi2_entropy(np.eye(2) / 2), 1)
    assert np.isclose(renyi2_entropy(np.diag([1.0, 0.0])), 0)
    assert np.isclose(renyi2_mutual(bell(), [0], [1]), 2)
    prod = np.kron([1, 0], [1, 1]) / np.sqrt(2) + 0j
    assert np.isclose(renyi2_mutual(prod, [0], [1]), 0)
    rho = np.outer(bell(), bell().conj())
    assert np.isclose(renyi2_mutual(rho, [0], [1]), 2)
    with pytest.raises(ValueError):
        renyi2_mutual(bell(), [0], [0])


def test_tripartite_ghz_and_product():
    ghz = np.zeros(8, dtype=complex)
    ghz[[0, 7]] = 1 / np.sqrt(2)
    rec = mutual_info_record(ghz, [0], [1], [2])
    assert np.isclose(rec.I_RT, 1) and np.isclose(rec.I_RL, 1) and np.isclose(rec.I_RLT, 2)
    assert np.isclose(rec.I3, 0)
    assert np.isclose(tripartite_info(np.kron(bell(), [1, 0]), [0], [2], [1]), 0)


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1))
def test_purity_bounds(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    from whlab.states import reduced_density
    p = purity(reduced_density(psi, [0, 2]))
    assert 0.25 - 1e-12 <= p <= 1 + 1e-12
    assert renyi2_mutual(psi, [0], [1, 2]) > -1e-10


@pytest.mark.parametrize("kind", ["V", "Vb"])
def test_otoc_C_matches_direct_anticommutator(kind):
    c = syk_couplings(6, 4, 1.0, 2)
    for tL, tR in [(0.0, 0.0), (1.0, -0.5), (-0.7, 1.3)]:
        a = otoc_C(c, kind, 0.4, tL, tR, j=2, beta=1.5)
        b = otoc_anticommutator(c, kind, 0.4, tL, tR, j=2, beta=1.5)
        assert abs(b.imag) < 1e-10 and abs(a - b.real) < 1e-9


def test_otoc_mu_zero_is_correlator():
    # at mu = 0 and beta = 0 this is the pair correlation of |I>, of modulus 1/2
    c = syk_couplings(4, 4, 1.0, 1)
    h = otoc_H(c, "V", 0.0, 0.0, 0.0, j=1)
    assert np.isclose(abs(h), 0.5)


def test_euclidean_2pt_examples():
    c = syk_couplings(8, 4, 1.0, 5)
    assert np.isclose(euclidean_2pt(c, 0, 0.0, 3.0), 1)
    assert np.isclose(euclidean_2pt(c, 0, 1.0, 3.0), euclidean_2pt(c, 0, 2.0, 3.0))
    num, Z = euclidean_2pt_parts(c, 0, 1.0, 3.0)
    assert np.isclose(num / Z, euclidean_2pt(c, 0, 1.0, 3.0))
    with pytest.raises(ValueError):
        euclidean_2pt(c, 0, 4.0, 3.0)


def test_annealed_single_member_is_channel_mean():
    c = pg_couplings(8, 4, 1.0, 3)
    parts = np.array([euclidean_2pt_parts(c, j, 0.5, 2.0) for j in range(8)])
    assert np.isclose(euclidean_2pt_annealed([c], 0.5, 2.0), parts[:, 0].mean() / parts[:, 1].mean())


def test_closed_form_shape():
    tau = np.linspace(0, 2, 5)
    g = pg_2pt_closed_form(tau, 2.0)
    assert np.isclose(g[0], 1) and np.allclose(g, g[::-1])


def test_max_entangled_expectation():
    assert np.isclose(max_entangled_expectation(build_interaction("V", 6), 6), -3)
    assert np.isclose(max_entangled_expectation(majorana(("L", 0), 4), 4), 0)
