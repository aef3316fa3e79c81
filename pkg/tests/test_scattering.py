import numpy as np
import pytest
from scipy import stats

from cfswipt.ris_channel import build_correlation_model
from cfswipt.scattering import (DegenerateDesignError, heuristic_candidates,
                                heuristic_scattering, load_scattering,
                                random_scattering, save_scattering,
                                scattering_objective,
                                symmetric_unitary_projection,
                                validate_scattering)
from cfswipt.topology import build_config, generate_topology


def _desk_net(seed=3, **overrides):
    cfg = build_config({"M": 6, "L": 8, "K": 3, "J": 3, "N_H": 4, "N_V": 2,
                        "area_side": 450.0, "ris_link_gain_db": 68.0,
                        **overrides})
    net = generate_topology(cfg, np.random.default_rng(seed))
    return cfg, net, build_correlation_model(cfg, net)


def test_validate_identity():
    rep = validate_scattering(np.eye(5, dtype=complex))
    assert rep.symmetry_residual == 0.0
    assert rep.unitarity_residual == 0.0
    assert rep.passed


def test_validate_perturbed_identity():
    theta = np.eye(5, dtype=complex)
    theta[0, 1] += 1e-3
    rep = validate_scattering(theta)
    assert rep.symmetry_residual == pytest.approx(1e-3 * np.sqrt(2.0), rel=1e-9)
    assert 5e-4 < rep.unitarity_residual < 5e-3
    assert not rep.passed


def test_validate_scaled_identity():
    rep = validate_scattering(2.0 * np.eye(6, dtype=complex))
    assert rep.unitarity_residual == pytest.approx(3.0 * np.sqrt(6.0), rel=1e-12)
    assert rep.symmetry_residual == 0.0


def test_validate_rejects_non_square():
    with pytest.raises(ValueError):
        validate_scattering(np.ones((2, 3)))


def test_dft_factor_unitary_and_symmetric():
    # The D = I case: the unit-normalized DFT itself must pass both checks.
    n = 8
    dft = np.fft.fft(np.eye(n)) / np.sqrt(n)
    np.testing.assert_allclose(dft @ dft.conj().T, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(dft, dft.T, atol=1e-14)


def test_random_scattering_constraints():
    rng = np.random.default_rng(0)
    for _ in range(50):
        sm = random_scattering(8, rng)
        assert sm.symmetry_residual < 1e-12
        assert sm.unitarity_residual < 1e-12


def test_random_scattering_deterministic():
    a = random_scattering(4, np.random.default_rng(123)).theta
    b = random_scattering(4, np.random.default_rng(123)).theta
    assert np.array_equal(a, b)


def test_random_scattering_phases_uniform():
    # theta[0,0] = d_0^2 / sqrt(N); its angle doubles the seed phase and stays
    # uniform on the circle.
    rng = np.random.default_rng(42)
    n = 4
    angles = np.array([np.angle(random_scattering(n, rng).theta[0, 0])
                       for _ in range(10000)])
    u = (angles + np.pi) / (2.0 * np.pi)
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_symmetric_projection_of_symmetric_matrix():
    rng = np.random.default_rng(7)
    f = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    f = 0.5 * (f + f.T)   # complex symmetric, full rank a.s.
    theta = symmetric_unitary_projection(f)
    rep = validate_scattering(theta)
    assert rep.passed
    # full-rank case reduces to U V^H from the SVD of f itself
    u, _, vh = np.linalg.svd(f)
    np.testing.assert_allclose(theta, u @ vh, atol=1e-10)


def test_symmetric_projection_rank_deficient():
    rng = np.random.default_rng(8)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    f = np.outer(v, v)    # symmetric rank one
    theta = symmetric_unitary_projection(f)
    assert validate_scattering(theta).passed


def test_symmetric_projection_rejects_zero():
    with pytest.raises(DegenerateDesignError):
        symmetric_unitary_projection(np.zeros((4, 4), dtype=complex))


def test_heuristic_returns_argmax_over_candidates():
    cfg, net, corr = _desk_net()
    cands = heuristic_candidates(net, corr, cfg, 50, np.random.default_rng(11))
    best = heuristic_scattering(net, corr, cfg, 50, np.random.default_rng(11))
    objs = [scattering_objective(t, corr.R) for t in cands]
    assert scattering_objective(best.theta, corr.R) == pytest.approx(max(objs))
    assert len(cands) == cfg.M


def test_heuristic_deterministic():
    cfg, net, corr = _desk_net()
    a = heuristic_scattering(net, corr, cfg, 20, np.random.default_rng(5)).theta
    b = heuristic_scattering(net, corr, cfg, 20, np.random.default_rng(5)).theta
    assert np.array_equal(a, b)


def test_heuristic_beats_average_random():
    cfg, net, corr = _desk_net(N_H=4, N_V=4)
    heur = heuristic_scattering(net, corr, cfg, 100, np.random.default_rng(2))
    rng = np.random.default_rng(3)
    rand_objs = [scattering_objective(random_scattering(cfg.N, rng).theta, corr.R)
                 for _ in range(100)]
    assert scattering_objective(heur.theta, corr.R) >= np.mean(rand_objs)


def test_heuristic_requires_energy_ap():
    cfg, net, corr = _desk_net()
    net.a[:] = 1
    with pytest.raises(ValueError, match="energy AP"):
        heuristic_scattering(net, corr, cfg, 10, np.random.default_rng(0))
    net.a[0] = 0


def test_objective_identity_theta():
    rng = np.random.default_rng(4)
    r = rng.standard_normal((5, 5))
    r = r @ r.T
    expected = np.trace(r @ r)
    assert scattering_objective(np.eye(5, dtype=complex), r) == pytest.approx(expected)


def test_objective_identity_correlation():
    theta = random_scattering(6, np.random.default_rng(5)).theta
    assert scattering_objective(theta, np.eye(6)) == pytest.approx(6.0, rel=1e-10)


def test_objective_against_quadruple_loop():
    rng = np.random.default_rng(6)
    n = 4
    theta = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = rng.standard_normal((n, n))
    r = r @ r.T
    acc = 0.0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    acc += (np.conj(theta[b, a]) * r[b, c] * theta[c, d] * r[d, a])
    got = scattering_objective(theta, r)
    assert got == pytest.approx(acc.real, rel=1e-10)
    assert abs(acc.imag) < 1e-9 * abs(acc)


def test_export_import_round_trip(tmp_path):
    sm = random_scattering(5, np.random.default_rng(12))
    path = tmp_path / "theta.json"
    save_scattering(sm, path)
    back = load_scattering(path)
    np.testing.assert_allclose(back.theta, sm.theta, atol=1e-15)
    assert back.design_tag == "random"
