"""Brute-force Monte Carlo estimators that validate every closed-form expression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import gamma_coefficient, run_pilot_phase_batch
from .metrics import logistic, nu_constant
from .precoding import build_precoders, power_control
from .ris_channel import (CorrelationModel, complex_normal, covariance_factor,
                          delta_table, sample_channel_batch)
from .scattering import ScatteringMatrix
from .topology import NetworkRealization, SystemConfig

MIN_TRIALS = 1000
DEFAULT_BATCHES = 100


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    se: float
    trials: int

    def within(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.se


def _batch_layout(trials: int, batches: int) -> tuple[int, int]:
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")
    batches = min(batches, trials)
    per_batch = trials // batches
    return batches, per_batch


def closed_form_norm_moments(beta: float, Omega: np.ndarray, Psi: np.ndarray,
                       theta: np.ndarray, L: int) -> tuple[float, float]:
    """Closed-form second and fourth moments of the aggregated channel norm.

    m2 = L * delta and m4 = L (L+1) (delta^2 + tr(Tbar^2)) with
    Tbar = Th^H Omega Th Psi and delta = beta + tr(Tbar).
    """
    if Omega.shape != theta.shape or Psi.shape != theta.shape:
        raise ValueError("dimension mismatch")
    tbar = theta.conj().T @ Omega @ theta @ Psi
    delta = beta + float(np.trace(tbar).real)
    tr_sq = float(np.trace(tbar @ tbar).real)
    m2 = L * delta
    m4 = L * (L + 1) * (delta**2 + tr_sq)
    return m2, m4


def mc_channel_moments(beta: float, Omega: np.ndarray, Psi: np.ndarray,
                       theta: np.ndarray | None, L: int, trials: int,
                       rng: np.random.Generator,
                       batches: int = DEFAULT_BATCHES):
    """Monte Carlo second/fourth moments of ||h + H^H Th z|| with standard errors."""
    n_b, per_b = _batch_layout(trials, batches)
    s_om = covariance_factor(Omega) if np.any(Omega) else None
    s_ps = covariance_factor(Psi) if np.any(Psi) else None

    n_dim = Omega.shape[0]
    bm2 = np.empty(n_b)
    bm4 = np.empty(n_b)
    for b in range(n_b):
        g = complex_normal(rng, (per_b, L)) * np.sqrt(beta)
        if s_om is not None and s_ps is not None and theta is not None:
            # Rows of ht are the transposed correlated columns of H.
            ht = (complex_normal(rng, (per_b * L, n_dim)) @ s_om.T).reshape(per_b, L, n_dim)
            z = complex_normal(rng, (per_b, n_dim)) @ s_ps.T
            v = z @ theta.T
            g = g + np.matmul(ht.conj(), v[:, :, None])[:, :, 0]
        norm_sq = np.sum(np.abs(g) ** 2, axis=1)
        bm2[b] = norm_sq.mean()
        bm4[b] = (norm_sq**2).mean()

    total = n_b * per_b
    m2 = MomentEstimate(float(bm2.mean()), float(bm2.std(ddof=1) / np.sqrt(n_b)), total)
    m4 = MomentEstimate(float(bm4.mean()), float(bm4.std(ddof=1) / np.sqrt(n_b)), total)
    return m2, m4


@dataclass(frozen=True)
class QuarticFormReport:
    """Monte Carlo check of E{X^H M X X^H N X} against its diagonal closed form."""

    closed_diag: complex
    mc_matrix: np.ndarray      # (L, L)
    mc_se: np.ndarray          # (L, L) per-entry standard error
    diag_rel_err: float        # worst diagonal relative error
    offdiag_max_sigma: float   # worst off-diagonal magnitude in se units
    trials: int


def quartic_form_check(mat_a: np.ndarray, mat_b: np.ndarray, rbar: np.ndarray,
                 L: int, trials: int, rng: np.random.Generator,
                 batches: int = DEFAULT_BATCHES) -> QuarticFormReport:
    """Validate the quartic-form identity used by the fourth-moment derivation.

    For X with i.i.d. CN(0, Rbar) columns, E{X^H A X X^H B X} is diagonal with
    entries L tr(A Rbar B Rbar) + tr(Rbar A) tr(Rbar B).
    """
    n = rbar.shape[0]
    if mat_a.shape != (n, n) or mat_b.shape != (n, n):
        raise ValueError("dimension mismatch")
    n_b, per_b = _batch_layout(trials, batches)
    s_r = covariance_factor(rbar)

    closed = (L * np.trace(mat_a @ rbar @ mat_b @ rbar)
              + np.trace(rbar @ mat_a) * np.trace(rbar @ mat_b))

    bm = np.empty((n_b, L, L), dtype=complex)
    for b in range(n_b):
        xt = (complex_normal(rng, (per_b * L, n)) @ s_r.T).reshape(per_b, L, n)
        xa = np.matmul(xt.conj(), np.matmul(mat_a, np.swapaxes(xt, -2, -1)))
        xb = np.matmul(xt.conj(), np.matmul(mat_b, np.swapaxes(xt, -2, -1)))
        bm[b] = np.mean(xa @ xb, axis=0)

    mc = bm.mean(axis=0)
    se = np.sqrt(bm.real.var(axis=0, ddof=1) + bm.imag.var(axis=0, ddof=1)) / np.sqrt(n_b)

    diag_idx = np.arange(L)
    if abs(closed) > 0:
        diag_rel = float(np.max(np.abs(mc[diag_idx, diag_idx] - closed)) / abs(closed))
    else:
        diag_rel = float(np.max(np.abs(mc[diag_idx, diag_idx])))
    off_mask = ~np.eye(L, dtype=bool)
    if L > 1:
        sigmas = np.abs(mc[off_mask]) / np.maximum(se[off_mask], 1e-300)
        off_sigma = float(sigmas.max())
    else:
        off_sigma = 0.0
    return QuarticFormReport(closed_diag=complex(closed), mc_matrix=mc, mc_se=se,
                        diag_rel_err=diag_rel, offdiag_max_sigma=off_sigma,
                        trials=n_b * per_b)


@dataclass(frozen=True)
class DownlinkInstance:
    """Frozen large-scale state shared by closed forms and Monte Carlo runs."""

    cfg: SystemConfig
    net: NetworkRealization
    corr: CorrelationModel
    theta: np.ndarray | None
    delta: np.ndarray      # (M, J)
    gamma_iu: np.ndarray   # (M, K)
    gamma_eu: np.ndarray   # (M, J)
    eta_iu: np.ndarray     # (M, K)
    eta_eu: np.ndarray     # (M, J)


def build_instance(cfg: SystemConfig, net: NetworkRealization,
                   corr: CorrelationModel, theta) -> DownlinkInstance:
    """Derive the gamma/eta tables for one topology and scattering design."""
    if isinstance(theta, ScatteringMatrix):
        theta = None if theta.design_tag == "none" else theta.theta
    delta = delta_table(net, corr, theta)
    gamma_iu = gamma_coefficient(cfg.tau, cfg.rho_u, net.beta_iu)
    gamma_eu = gamma_coefficient(cfg.tau, cfg.rho_u, delta)
    eta_iu, eta_eu = power_control(gamma_iu, gamma_eu, net.a)
    return DownlinkInstance(cfg=cfg, net=net, corr=corr, theta=theta, delta=delta,
                            gamma_iu=gamma_iu, gamma_eu=gamma_eu,
                            eta_iu=eta_iu, eta_eu=eta_eu)


def draw_downlink_batch(inst: DownlinkInstance, rng: np.random.Generator,
                        trials: int):
    """One batch of the full pipeline: channels, pilot training, precoders."""
    ch = sample_channel_batch(inst.net, inst.corr, inst.theta, rng, trials,
                              inst.cfg.L)
    est = run_pilot_phase_batch(ch, inst.cfg, inst.net.beta_iu, inst.delta, rng)
    pre = build_precoders(est.ghat_iu, est.ghat_eu, est.gamma_iu, est.gamma_eu)
    return ch, est, pre


@dataclass(frozen=True)
class SinrEstimate:
    """Monte Carlo SINR assembled from the hardening-bound signal decomposition."""

    sinr: np.ndarray          # (K,)
    se: np.ndarray            # (K,) jackknife standard error over batches
    ds: np.ndarray            # (K,) |E{s}|^2, squared after averaging
    bu: np.ndarray            # (K,) variance of s
    iui: np.ndarray           # (K,) total cross-IU interference power
    eui: np.ndarray           # (K,) total energy-beam interference power
    ergodic_se: np.ndarray    # (K,) genie-aided per-trial SE (upper reference)
    ergodic_se_err: np.ndarray
    trials: int


def mc_sinr(inst: DownlinkInstance, trials: int, rng: np.random.Generator,
            batches: int = DEFAULT_BATCHES) -> SinrEstimate:
    """Estimate the effective SINR of every IU from component moments.

    The desired-signal term is mean-then-square (hardening bound); beam gain
    uncertainty is the empirical variance; interference terms are empirical
    second moments of the coherent per-user sums.
    """
    cfg = inst.cfg
    n_b, per_b = _batch_layout(trials, batches)
    a = inst.net.a.astype(float)
    amp_i = np.sqrt(a[:, None] * cfg.rho_d * inst.eta_iu)       # (M, K)
    amp_e = np.sqrt((1 - a)[:, None] * cfg.rho_d * inst.eta_eu)  # (M, J)
    prelog = 1.0 - cfg.tau / cfg.tau_c

    K = cfg.K
    bm_mean_s = np.empty((n_b, K), dtype=complex)
    bm_m2_s = np.empty((n_b, K))
    bm_iui = np.empty((n_b, K))
    bm_eui = np.empty((n_b, K))
    bm_erg = np.empty((n_b, K))

    for b in range(n_b):
        ch, est, pre = draw_downlink_batch(inst, rng, per_b)
        # s[t, k, c]: coherent sum over APs of IU k's channel against beam c.
        s = np.einsum("mc,tmkl,tmcl->tkc", amp_i, ch.g_iu.conj(), pre.w_iu)
        eui = np.einsum("mj,tmkl,tmjl->tkj", amp_e, ch.g_iu.conj(), pre.w_eu)
        s_own = np.einsum("tkk->tk", s)
        cross = np.abs(s) ** 2
        cross[:, np.arange(K), np.arange(K)] = 0.0
        iui_pow = cross.sum(axis=2)
        eui_pow = (np.abs(eui) ** 2).sum(axis=2)

        bm_mean_s[b] = s_own.mean(axis=0)
        bm_m2_s[b] = (np.abs(s_own) ** 2).mean(axis=0)
        bm_iui[b] = iui_pow.mean(axis=0)
        bm_eui[b] = eui_pow.mean(axis=0)
        inst_sinr = np.abs(s_own) ** 2 / (iui_pow + eui_pow + 1.0)
        bm_erg[b] = (prelog * np.log2(1.0 + inst_sinr)).mean(axis=0)

    def assemble(mean_s, m2_s, iui, eui):
        ds = np.abs(mean_s) ** 2
        bu = m2_s - ds
        return ds / (bu + iui + eui + 1.0), ds, bu

    sinr_full, ds, bu = assemble(bm_mean_s.mean(0), bm_m2_s.mean(0),
                                 bm_iui.mean(0), bm_eui.mean(0))

    # Jackknife over batches handles the mean-then-square nonlinearity.
    loo = np.empty((n_b, K))
    for b in range(n_b):
        mask = np.arange(n_b) != b
        loo[b], _, _ = assemble(bm_mean_s[mask].mean(0), bm_m2_s[mask].mean(0),
                                bm_iui[mask].mean(0), bm_eui[mask].mean(0))
    se = np.sqrt((n_b - 1) / n_b * ((loo - loo.mean(0)) ** 2).sum(0))

    return SinrEstimate(
        sinr=sinr_full, se=se, ds=ds, bu=bu,
        iui=bm_iui.mean(0), eui=bm_eui.mean(0),
        ergodic_se=bm_erg.mean(0),
        ergodic_se_err=bm_erg.std(0, ddof=1) / np.sqrt(n_b),
        trials=n_b * per_b,
    )


@dataclass(frozen=True)
class EnergyEstimate:
    """Monte Carlo received energy and harvester statistics for every EU."""

    energy: np.ndarray            # (J,) mean received energy, per-AP expansion
    energy_se: np.ndarray
    lam: np.ndarray               # (J,) mean logistic output over trials
    lam_se: np.ndarray
    he: np.ndarray                # (J,) harvested energy from the MC logistic mean
    energy_coherent: np.ndarray   # (J,) diagnostic incl. cross-AP combining
    own_beam_sq: np.ndarray       # (M, J) E|ghat^H w_own|^2
    cross_beam_sq: np.ndarray     # (M, J, J) E|g_j^H w_j'|^2
    iu_leak_sq: np.ndarray        # (M, J, K) E|g_j^H w_k|^2
    trials: int


def mc_received_energy(inst: DownlinkInstance, trials: int,
                       rng: np.random.Generator,
                       batches: int = DEFAULT_BATCHES) -> EnergyEstimate:
    """Estimate the received RF energy at every EU and the harvester statistics.

    The headline estimator follows the per-AP expansion whose expectation the
    closed form computes (beam powers add across APs); the coherent diagnostic
    additionally keeps the cross-AP products of the shared energy symbols.
    """
    cfg = inst.cfg
    n_b, per_b = _batch_layout(trials, batches)
    a = inst.net.a.astype(float)
    pw_e = (1 - a)[:, None] * inst.eta_eu      # (M, J)
    pw_i = a[:, None] * inst.eta_iu            # (M, K)
    amp_e = np.sqrt(pw_e)
    amp_i = np.sqrt(pw_i)
    pref = cfg.dl_symbols * cfg.noise_power * cfg.symbol_duration

    M, J = inst.delta.shape
    K = cfg.K
    bm_energy = np.empty((n_b, J))
    bm_lam = np.empty((n_b, J))
    bm_coh = np.empty((n_b, J))
    own_acc = np.zeros((M, J))
    cross_acc = np.zeros((M, J, J))
    leak_acc = np.zeros((M, J, K))

    for b in range(n_b):
        ch, est, pre = draw_downlink_batch(inst, rng, per_b)
        ip_ee = np.einsum("tmjl,tmcl->tmjc", ch.g_eu.conj(), pre.w_eu)  # (T,M,J,J)
        ip_ei = np.einsum("tmjl,tmkl->tmjk", ch.g_eu.conj(), pre.w_iu)  # (T,M,J,K)
        ip_hat = np.einsum("tmjl,tmjl->tmj", est.ghat_eu.conj(), pre.w_eu)

        ee_sq = np.abs(ip_ee) ** 2
        ei_sq = np.abs(ip_ei) ** 2
        per_ap = (np.einsum("mc,tmjc->tj", pw_e, ee_sq)
                  + np.einsum("mk,tmjk->tj", pw_i, ei_sq))
        energy = pref * (cfg.rho_d * per_ap + 1.0)

        coh_e = np.einsum("mc,tmjc->tjc", amp_e, ip_ee)
        coh_i = np.einsum("mk,tmjk->tjk", amp_i, ip_ei)
        coh = (np.abs(coh_e) ** 2).sum(2) + (np.abs(coh_i) ** 2).sum(2)
        energy_coh = pref * (cfg.rho_d * coh + 1.0)

        bm_energy[b] = energy.mean(axis=0)
        bm_lam[b] = logistic(energy, cfg.eh_xi, cfg.eh_chi, cfg.eh_phi).mean(axis=0)
        bm_coh[b] = energy_coh.mean(axis=0)
        own_acc += (np.abs(ip_hat) ** 2).mean(axis=0)
        cross_acc += ee_sq.mean(axis=0)
        leak_acc += ei_sq.mean(axis=0)

    nu = nu_constant(cfg.eh_xi, cfg.eh_chi)
    lam_mean = bm_lam.mean(0)
    return EnergyEstimate(
        energy=bm_energy.mean(0),
        energy_se=bm_energy.std(0, ddof=1) / np.sqrt(n_b),
        lam=lam_mean,
        lam_se=bm_lam.std(0, ddof=1) / np.sqrt(n_b),
        he=(lam_mean - cfg.eh_phi * nu) / (1.0 - nu),
        energy_coherent=bm_coh.mean(0),
        own_beam_sq=own_acc / n_b,
        cross_beam_sq=cross_acc / n_b,
        iu_leak_sq=leak_acc / n_b,
        trials=n_b * per_b,
    )
