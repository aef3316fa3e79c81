import numpy as np
import pytest

from cfswipt.estimation import (PilotShortageError, gamma_coefficient,
                                orthonormal_pilots, run_pilot_phase,
                                run_pilot_phase_batch)
from cfswipt.ris_channel import (build_correlation_model, delta_table,
                                 sample_channel_batch, sample_channel_set)
from cfswipt.topology import build_config, generate_topology


def test_gamma_small_scale_limit():
    assert gamma_coefficient(8, 1e6, 1e-12) < 1e-11


def test_gamma_high_snr_limit():
    scale = 2.5
    gamma = gamma_coefficient(4.0, 1e5, scale)   # tau*rho*scale = 1e6
    assert gamma / scale > 0.999999
    assert gamma < scale


def test_gamma_one_line_evaluation():
    tau, rho_u, beta = 8, 0.2 / 10 ** (-12.2), 3e-9
    expected = tau * rho_u * beta**2 / (tau * rho_u * beta + 1.0)
    assert gamma_coefficient(tau, rho_u, beta) == pytest.approx(expected, rel=1e-12)


def test_gamma_monotone():
    g = gamma_coefficient(8, 1e3, np.array([0.1, 0.2, 0.4]))
    assert np.all(np.diff(g) > 0)
    assert gamma_coefficient(16, 1e3, 0.1) > gamma_coefficient(8, 1e3, 0.1)


def test_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        gamma_coefficient(8, 1e3, 0.0)


def _training_setup(seed=0, trials=1, **overrides):
    cfg = build_config({"M": 2, "L": 4, "K": 2, "J": 2, "N_H": 2, "N_V": 2,
                        **overrides})
    net = generate_topology(cfg, np.random.default_rng(seed))
    corr = build_correlation_model(cfg, net)
    theta = None
    batch = sample_channel_batch(net, corr, theta, np.random.default_rng(seed + 1),
                                 trials=trials, L=cfg.L)
    delta = delta_table(net, corr, theta)
    return cfg, net, batch, delta


def test_noiseless_limit_recovers_channel():
    # tau*rho*beta >~ 1e8 over a compact area: estimate converges to the truth.
    cfg, net, batch, delta = _training_setup(rho_u=1e19, area_side=100.0)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(3))
    rel = np.abs(est.ghat_iu - batch.g_iu).max() / np.abs(batch.g_iu).max()
    assert rel < 1e-3


def test_estimate_variance_matches_gamma():
    cfg, net, batch, delta = _training_setup(trials=100000)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(4))
    emp = np.mean(np.abs(est.ghat_iu) ** 2, axis=(0, 3))   # (M, K)
    np.testing.assert_allclose(emp, est.gamma_iu, rtol=0.02)
    emp_e = np.mean(np.abs(est.ghat_eu) ** 2, axis=(0, 3))
    np.testing.assert_allclose(emp_e, est.gamma_eu, rtol=0.02)


def test_estimate_error_orthogonality():
    cfg, net, batch, delta = _training_setup(trials=100000)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(5))
    err = batch.g_iu - est.ghat_iu
    cross = (est.ghat_iu.conj() * err).mean(axis=(0, 3))
    spread = (np.abs(est.ghat_iu) ** 2).mean(axis=(0, 3)) ** 0.5 \
        * (np.abs(err) ** 2).mean(axis=(0, 3)) ** 0.5
    se = spread / np.sqrt(batch.g_iu.shape[0] * cfg.L)
    assert np.all(np.abs(cross) < 4.0 * se)


def test_variance_split():
    # Var(estimate) + Var(error) = beta, statistically.
    cfg, net, batch, delta = _training_setup(trials=100000)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(6))
    err = batch.g_iu - est.ghat_iu
    total = (np.abs(est.ghat_iu) ** 2 + np.abs(err) ** 2).mean(axis=(0, 3))
    np.testing.assert_allclose(total, net.beta_iu, rtol=0.02)


def test_cross_user_estimates_uncorrelated():
    cfg, net, batch, delta = _training_setup(trials=100000)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(7))
    a = est.ghat_iu[:, 0, 0, :]
    b = batch.g_iu[:, 0, 1, :]
    cross = (a.conj() * b).mean()
    se = np.sqrt((np.abs(a) ** 2).mean() * (np.abs(b) ** 2).mean()
                 / (a.shape[0] * cfg.L))
    assert abs(cross) < 4.0 * se


def test_explicit_pilots_match_fast_path_statistics():
    cfg, net, batch, delta = _training_setup(trials=50000)
    pilots = orthonormal_pilots(cfg.K + cfg.J, cfg.tau)
    est = run_pilot_phase_batch(batch, cfg, net.beta_iu, delta,
                                np.random.default_rng(8), pilots=pilots)
    emp = np.mean(np.abs(est.ghat_iu) ** 2, axis=(0, 3))
    np.testing.assert_allclose(emp, est.gamma_iu, rtol=0.02)


def test_pilot_shortage_rejected():
    cfg, net, batch, delta = _training_setup()
    short = build_config({"M": 2, "L": 4, "K": 2, "J": 1})   # tau = 3
    with pytest.raises(PilotShortageError):
        run_pilot_phase_batch(batch, short, net.beta_iu, delta,
                              np.random.default_rng(9))
    with pytest.raises(PilotShortageError):
        orthonormal_pilots(5, 4)


def test_single_realization_wrapper():
    cfg = build_config({"M": 2, "L": 4, "K": 2, "J": 2, "N_H": 2, "N_V": 2})
    net = generate_topology(cfg, np.random.default_rng(0))
    corr = build_correlation_model(cfg, net)
    cs = sample_channel_set(net, corr, None, np.random.default_rng(1), cfg.L)
    delta = delta_table(net, corr, None)
    est = run_pilot_phase(cs, cfg, net.beta_iu, delta, np.random.default_rng(2))
    assert est.ghat_iu.shape == (cfg.M, cfg.K, cfg.L)
    assert np.all(est.gamma_iu < net.beta_iu)
    assert np.all(est.gamma_eu < delta)
