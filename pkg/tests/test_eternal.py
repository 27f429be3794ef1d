import numpy as np
import pytest

from whlab.eternal import (boost_residual, cluster, degeneracy_report, discrete_symmetries,
                           eternal_hamiltonian, eternal_spectrum, fit_power_law,
                           minimize_figure_of_merit, optimal_beta, q_operator,
                           sl2r_figure_of_merit, sl2r_generators)
from whlab.models import syk_couplings
from whlab.states import thermofield_double


def test_cluster_examples():
    groups = cluster(np.array([0.0, 1e-10, 1.0, 2.0, 2.0]))
    assert [list(g) for g in groups] == [[0, 1], [2], [3, 4]]


def test_eternal_hamiltonian_hermitian():
    H = eternal_hamiltonian(syk_couplings(6, 4, 1.0, 0), "V", 0.2)
    assert H.is_hermitian()


def test_dense_vs_lanczos_n10():
    c = syk_couplings(10, 4, 1.0, 1)
    a = eternal_spectrum(c, "V", 0.1, k=6, method="dense")
    b = eternal_spectrum(c, "V", 0.1, k=6, method="lanczos")
    assert np.abs(a.eigenvalues - b.eigenvalues).max() < 1e-9
    assert abs(a.gap - b.gap) < 1e-9
    assert abs(a.overlap(b.ground_state) - 1) < 1e-8


def test_spectrum_validation():
    c = syk_couplings(4, 4, 1.0, 0)
    with pytest.raises(ValueError):
        eternal_spectrum(c, "V", 0.1, k=1)
    with pytest.raises(ValueError):
        eternal_spectrum(c, "V", 0.1, method="magic")


def test_power_law_synthetic():
    mu = np.arange(0.025, 0.3, 0.025)
    fit = fit_power_law(mu, 2.0 * mu ** (2 / 3) + 0.1)
    assert abs(fit.b - 2 / 3) < 1e-6 and abs(fit.a - 2) < 1e-5 and abs(fit.c - 0.1) < 1e-5
    lo, hi = fit.b_interval
    assert lo <= fit.b <= hi
    with pytest.raises(ValueError):
        fit_power_law([0.1, 0.2, 0.25], [1, 2, 3])


def test_overlap_and_figure_of_merit():
    c = syk_couplings(8, 4, 1.0, 2)
    spec = eternal_spectrum(c, "V", 0.3)
    res = optimal_beta(c, "V", 0.3, np.linspace(0.5, 30, 15), spec)
    assert 0 < res.overlap <= 1 + 1e-12
    assert res.overlap >= res.grid_overlaps.max() - 1e-12
    # the thermofield double is a trial state, so the figure of merit is non-negative
    for b in (1.0, 5.0, 20.0):
        assert sl2r_figure_of_merit(c, "V", 0.3, b, spec) >= -1e-12
    beta, fom = minimize_figure_of_merit(c, "V", 0.3, np.linspace(0.5, 30, 15), spec)
    assert fom >= -1e-12
    with pytest.raises(ValueError):
        optimal_beta(c, "V", 0.3, [1.0, 2.0], spec)


def test_sl2r_generators():
    c = syk_couplings(8, 4, 1.0, 3)
    assert boost_residual(c, 4.0) < 1e-9
    g = sl2r_generators(c, 0.2, -1.0)
    assert (g.P_plus + g.P_minus).equals(g.E.scale(-1))
    tfd = thermofield_double(c.hamiltonian("L"), 4.0)
    assert np.linalg.norm(g.B.apply(tfd)) < 1e-9


@pytest.mark.parametrize("N", [6, 8, 10])
@pytest.mark.parametrize("kind", ["V", "Vb"])
def test_discrete_symmetries(N, kind):
    rep = discrete_symmetries(syk_couplings(N, 4, 1.0, N), kind, mu=0.3)
    assert rep.passed(), rep.checks


def test_q_operator_unitary():
    Q = q_operator(6).to_dense()
    assert np.allclose(Q @ Q.conj().T, np.eye(Q.shape[0]))


def test_vb_spectrum_doubly_degenerate():
    spec = eternal_spectrum(syk_couplings(10, 4, 1.0, 0), "Vb", 0.2, k=12)
    assert all(m % 2 == 0 for m in degeneracy_report(spec))
