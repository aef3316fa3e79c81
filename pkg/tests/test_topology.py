import numpy as np
import pytest

from cfswipt.topology import (ConfigurationError, ThreeSlopeParams,
                              assign_ap_modes, build_config, generate_topology,
                              load_config, three_slope_pathloss)

# Independent hand evaluation of the far-branch formula at 100 m with the
# default constants (f=1900 MHz, h_ap=15 m, h_u=1.65 m, d1=50 m).
PL_100M_DB = -105.71508370390842


def test_defaults_match_operating_point():
    cfg = build_config({})
    assert cfg.tau_c == 200
    assert cfg.tau == cfg.K + cfg.J
    assert cfg.noise_power == pytest.approx(10.0 ** (-12.2))
    assert cfg.rho_d * cfg.noise_power == pytest.approx(1.0)      # 1 W downlink
    assert cfg.rho_u * cfg.noise_power == pytest.approx(0.2)      # 0.2 W pilots
    assert cfg.N == cfg.N_H * cfg.N_V
    assert cfg.d_H == pytest.approx(cfg.wavelength / 4.0)


def test_tau_tracks_user_counts():
    cfg = build_config({"K": 3, "J": 5})
    assert cfg.tau == 8


def test_nu_constant_value():
    cfg = build_config({"eh_xi": 150.0, "eh_chi": 0.014})
    assert cfg.nu == pytest.approx(1.0 / (1.0 + np.exp(2.1)), rel=1e-12)


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match="unknown configuration key"):
        build_config({"antennas": 4})


@pytest.mark.parametrize("bad,msg", [
    ({"tau": 5, "K": 3, "J": 5}, "tau >= K\\+J"),
    ({"tau_c": 8}, "tau < tau_c"),
    ({"rho_d": -1.0}, "rho_d > 0"),
    ({"M": 1, "L": 20}, "M >= 2"),
    ({"N_H": 0}, "N_H, N_V >= 1"),
    ({"M": 2, "L": 2, "K": 3, "J": 5}, "M\\*L > K\\+J"),
])
def test_invariant_violations_named(bad, msg):
    with pytest.raises(ConfigurationError, match=msg):
        build_config(bad)


def test_load_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"M": 6, "L": 10, "K": 2, "J": 2}')
    cfg = load_config(path)
    assert (cfg.M, cfg.L, cfg.tau) == (6, 10, 4)


def test_pathloss_branch_boundaries_continuous():
    p = ThreeSlopeParams()
    for d in (p.d0, p.d1):
        below = three_slope_pathloss(d * (1 - 1e-12), p)
        above = three_slope_pathloss(d * (1 + 1e-12), p)
        assert abs(below - above) < 1e-9


def test_pathloss_far_slope():
    p = ThreeSlopeParams()
    diff = three_slope_pathloss(2000.0, p) - three_slope_pathloss(1000.0, p)
    assert diff == pytest.approx(-35.0 * np.log10(2.0), abs=1e-12)


def test_pathloss_golden_value():
    assert three_slope_pathloss(100.0, ThreeSlopeParams()) == pytest.approx(
        PL_100M_DB, abs=1e-9)


def test_pathloss_monotone_and_negative():
    d = np.logspace(0, 4, 400)
    pl = three_slope_pathloss(d, ThreeSlopeParams())
    assert np.all(np.diff(pl) <= 1e-12)
    assert np.all(pl < 0.0)


def test_pathloss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        three_slope_pathloss(0.0, ThreeSlopeParams())


def test_topology_deterministic():
    cfg = build_config({"M": 6, "L": 10})
    a = generate_topology(cfg, np.random.default_rng(42))
    b = generate_topology(cfg, np.random.default_rng(42))
    for field in ("ap_positions", "iu_positions", "eu_positions", "beta_iu",
                  "beta_eu", "alpha_ap", "alpha_eu", "a"):
        assert np.array_equal(getattr(a, field), getattr(b, field))


def test_zero_shadowing_equals_pure_pathloss():
    cfg = build_config({"M": 6, "L": 10, "shadow_sigma_db": 0.0})
    net = generate_topology(cfg, np.random.default_rng(3))
    p = ThreeSlopeParams.from_config(cfg)
    d = np.sqrt(((net.ap_positions[:, None, :]
                  - net.iu_positions[None, :, :]) ** 2).sum(-1))
    expected = 10.0 ** (three_slope_pathloss(d, p) / 10.0)
    np.testing.assert_allclose(net.beta_iu, expected, rtol=1e-12)


def test_shadowing_mean_zero_db():
    # Monte Carlo over the shadowing sampler: mean log-term -> 0 dB.
    cfg = build_config({"M": 8, "L": 8, "shadow_sigma_db": 8.0,
                        "area_side": 2000.0})
    p = ThreeSlopeParams.from_config(cfg)
    rng = np.random.default_rng(11)
    devs = []
    for _ in range(300):
        net = generate_topology(cfg, rng)
        d = np.sqrt(((net.ap_positions[:, None, :]
                      - net.iu_positions[None, :, :]) ** 2).sum(-1))
        mask = d > p.d1
        sh = 10.0 * np.log10(net.beta_iu) - three_slope_pathloss(d, p)
        devs.extend(sh[mask].ravel())
    devs = np.asarray(devs)
    se = devs.std(ddof=1) / np.sqrt(devs.size)
    assert abs(devs.mean()) < 3.0 * se + 1e-9


def test_ris_links_have_no_shadowing_and_gain_applies():
    cfg0 = build_config({"M": 6, "L": 10, "ris_link_gain_db": 0.0})
    cfg1 = build_config({"M": 6, "L": 10, "ris_link_gain_db": 20.0})
    n0 = generate_topology(cfg0, np.random.default_rng(5))
    n1 = generate_topology(cfg1, np.random.default_rng(5))
    np.testing.assert_allclose(n1.alpha_ap, n0.alpha_ap * 100.0, rtol=1e-12)
    np.testing.assert_allclose(n1.alpha_eu, n0.alpha_eu * 100.0, rtol=1e-12)


def test_mode_counts():
    rng = np.random.default_rng(0)
    a = assign_ap_modes(8, 0.5, rng)
    assert (a == 0).sum() == 4 and (a == 1).sum() == 4
    a = assign_ap_modes(8, 0.125, rng)
    assert (a == 0).sum() == 1


def test_mode_assignment_uniform_frequency():
    rng = np.random.default_rng(7)
    counts = np.zeros(8)
    n = 10000
    for _ in range(n):
        counts += assign_ap_modes(8, 0.5, rng) == 0
    freq = counts / n
    se = np.sqrt(0.25 / n)
    assert np.all(np.abs(freq - 0.5) < 3.0 * se + 0.005)


def test_mode_assignment_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigurationError):
        assign_ap_modes(1, 0.5, rng)
    with pytest.raises(ConfigurationError):
        assign_ap_modes(8, 0.01, rng)


def test_eu_positions_cluster_near_ris():
    cfg = build_config({"M": 6, "L": 10, "J": 5})
    net = generate_topology(cfg, np.random.default_rng(9))
    center = net.ris_position[:2] + np.array([cfg.eu_disc_offset, 0.0])
    d = np.sqrt(((net.eu_positions[:, :2] - center) ** 2).sum(-1))
    assert np.all(d <= cfg.eu_disc_radius + 1e-9)
