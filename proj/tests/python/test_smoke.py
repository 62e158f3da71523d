import numpy as np
import pytest

import _qmimo as q


def test_quantize():
    z = np.array([0.3 - 0.7j, 0.0 + 0.0j, -2 + 5j])
    out = q.quantize(z)
    assert np.array_equal(out, np.array([1 - 1j, 1 + 1j, -1 + 1j]))


def test_dft_and_circulant():
    f = q.dft_matrix(16)
    assert np.allclose(f.conj().T @ f, np.eye(16), atol=1e-12)
    h = np.array([1.0 + 0j, 0.5 - 0.25j])
    circ = q.circulant_from_taps(h, 8)
    d = f8 = q.dft_matrix(8)
    diag = f8 @ circ @ f8.conj().T
    assert np.allclose(diag - np.diag(np.diag(diag)), 0, atol=1e-12)


def test_estimators_recover_channel():
    rng = np.random.default_rng(0)
    k, p = 128, 4
    a = (rng.standard_normal((k, p)) + 1j * rng.standard_normal((k, p))) / np.sqrt(2)
    h = (rng.standard_normal(p) + 1j * rng.standard_normal(p)) / np.sqrt(2)
    nv = np.ones(k)
    y = q.simulate_observation(a, h, nv, seed=7)
    assert np.all(np.abs(y.real) == 1) and np.all(np.abs(y.imag) == 1)

    rhh = np.ones(p)
    em = q.em_estimate(a, nv, y, rhh)
    ign = q.ignoring_estimate(a, nv, y, rhh)
    buss = q.bussgang_estimate(a, nv, y, rhh)
    gamp = q.gamp_estimate_gaussian(a, nv, y, rhh)

    def err(est):
        return np.linalg.norm(est["estimate"] - h) ** 2 / np.linalg.norm(h) ** 2

    assert em["converged"]
    assert err(em) < 0.5
    assert err(gamp) < 0.5
    assert err(buss) < 1.0
    # The nonlinear estimate should not be worse than the raw linear one here.
    assert err(em) <= err(ign) * 1.5


def test_crlb_positive_and_scale_invariant():
    rng = np.random.default_rng(1)
    a = (rng.standard_normal((32, 3)) + 1j * rng.standard_normal((32, 3))) / np.sqrt(2)
    h = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) / np.sqrt(2)
    nv = np.ones(32)
    bound = q.crlb_trace(a, nv, h)
    assert bound > 0
    assert q.crlb_trace(3.0 * a, 9.0 * nv, h) == pytest.approx(bound, rel=1e-9)


def test_determinism_and_experiment():
    cfg = """
n = 16
n_rx = 2
n_tx = 2
taps = 2
pilot_blocks = 2
data_symbols = 4
tap_var = 1.0
waveform = sc
est_methods = em
eq_method = em
snr_db = -3
trials = 2
ber = on
crlb = on
seed = 11
workers = 1
"""
    csv1 = q.run_experiment_config(cfg)
    csv2 = q.run_experiment_config(cfg)
    assert csv1 == csv2
    assert csv1.startswith("snr_db,waveform,method,")
    assert "sc,em+em," in csv1


def test_dump_tables():
    tables = q.dump_tables()
    assert "constellation qpsk" in tables
    assert "generators_octal=133,171" in tables
