import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whlab.models import EnsembleSpec, syk_couplings
from whlab.teleport import (ProtocolConfig, _swap_qubits, causal_ordering_scan, mi_curve,
                            mutual_from_rho, register, run, run_classical, run_correlator,
                            run_quantum)


def check_density(rho):
    assert np.isclose(np.trace(rho), 1)
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho).min() > -1e-10


def test_register_layout():
    reg = register(6)
    assert reg["R"] == 0 and reg["Q"] == 1 and reg["T"] == 8 and reg["n"] == 9
    assert reg["L"] == [2, 3, 4] and reg["Rblock"] == [5, 6, 7]


@pytest.mark.parametrize("kw", [dict(N=5), dict(N=4, interaction="W"), dict(N=4, channel="x"),
                                dict(N=4, beta=-1.0),
                                dict(N=4, t0=1, t1=1, schedule=((2.0, 0.1),)),
                                dict(N=4, t0=1, t1=1, channel="classical",
                                     schedule=((0.0, 0.1), (0.5, 0.1)))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ProtocolConfig(**kw)


@settings(max_examples=8)
@given(st.sampled_from(["V", "Vb"]), st.floats(0, 4), st.floats(-1, 1), st.floats(0, 3),
       st.floats(0, 3), st.integers(0, 1000))
def test_register_matches_correlator(kind, beta, mu, t0, t1, seed):
    cfg = ProtocolConfig(N=4, beta=beta, mu=mu, t0=t0, t1=t1, interaction=kind, seed=seed)
    a, b = run_quantum(cfg), run_correlator(cfg)
    check_density(a.rho_TR)
    assert np.abs(a.rho_TR - b.rho_TR).max() < 1e-9
    assert a.I_RT > -1e-10


def test_multi_slice_schedule_matches_register():
    cfg = ProtocolConfig(N=6, beta=2.0, t0=1.5, t1=2.0, interaction="V",
                         schedule=((-1.0, 0.2), (0.5, -0.3)), seed=3)
    assert np.abs(run_quantum(cfg).rho_TR - run_correlator(cfg).rho_TR).max() < 1e-9


def test_mutual_info_limits():
    assert np.isclose(mutual_from_rho(np.eye(4) / 4), 0)
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    assert np.isclose(mutual_from_rho(np.outer(bell, bell)), 2)


def test_classical_channel_branches():
    cfg = ProtocolConfig(N=6, beta=1.0, mu=-0.5, t0=1.0, t1=1.0, interaction="Vb",
                         channel="classical", seed=2)
    res = run_classical(cfg)
    assert len(res.outcomes) == 8
    assert np.isclose(sum(r.probability for r in res.outcomes), 1)
    check_density(res.rho_TR)
    mix = sum(r.probability * r.rho_TR for r in res.outcomes)
    assert np.allclose(mix, res.rho_TR)
    assert run(cfg).I_RT == res.I_RT
    with pytest.raises(ValueError):
        run_classical(cfg.with_(interaction="V"))
    sampled = run_classical(cfg, policy="sample", sample_seed=4)
    assert len(sampled.outcomes) == 1


def test_swap_qubits_involution():
    psi = np.random.default_rng(0).normal(size=32) + 0j
    assert np.array_equal(_swap_qubits(_swap_qubits(psi, 1, 3), 1, 3), psi)
    e = np.zeros(4)
    e[1] = 1
    assert _swap_qubits(e, 0, 1)[2] == 1


def test_mi_curve_shapes_and_asymmetry():
    cfg = ProtocolConfig(N=4, beta=2.0, mu=0.3)
    curve = mi_curve(cfg, [0.5, 1.0, 1.5], EnsembleSpec(1, 2))
    assert curve.I_minus.shape == curve.I_plus.shape == (2, 3)
    assert np.allclose(curve.asymmetry, curve.I_minus - curve.I_plus)
    assert curve.mean_asymmetry.shape == (3,)


def test_causal_scan():
    c = syk_couplings(4, 4, 1.0, 0)
    cfg = ProtocolConfig(N=4, beta=2.0, mu=0.3, interaction="Vb")
    scan = causal_ordering_scan(cfg, [0.5, 1.0, 1.5], [0.0, 1.0, 2.0], couplings=c)
    assert scan.asymmetry.shape == (3, 3)
    assert np.allclose(scan.best_value, scan.asymmetry.max(axis=1))
    with pytest.raises(ValueError):
        causal_ordering_scan(cfg, [1.0, 0.5], [0.0], couplings=c)
