"""Closed-form performance expressions: per-IU SINR/SE and per-EU harvested energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .topology import SystemConfig


def closed_form_sinr(a, eta_iu, eta_eu, gamma_iu, beta_iu, rho_d, L, K, k) -> float:
    """Hardening-bound downlink SINR of IU k under PZF at I-APs, PMRT at E-APs.

    Numerator: (L-K) (sum_m sqrt(a_m eta_mk gamma_mk))^2. Every interference
    term carries user k's own estimation-error gap (beta_mk - gamma_mk), which
    is what zero-forced and protected beams leak through.
    """
    if L <= K:
        raise ValueError(f"closed form needs L > K (got L={L}, K={K})")
    a = np.asarray(a, dtype=float)
    gap = beta_iu[:, k] - gamma_iu[:, k]                       # (M,)
    num = (L - K) * np.sum(np.sqrt(a * eta_iu[:, k] * gamma_iu[:, k])) ** 2
    den_iu = np.sum(a[:, None] * eta_iu * gap[:, None])
    den_eu = np.sum((1.0 - a)[:, None] * eta_eu * gap[:, None])
    return float(num / (den_iu + den_eu + 1.0 / rho_d))


def se_from_sinr(sinr: float, tau: int, tau_c: int) -> float:
    """Downlink spectral efficiency with the pilot-overhead prelog."""
    if sinr < 0:
        raise ValueError("sinr must be nonnegative")
    if not tau < tau_c:
        raise ValueError("tau must be smaller than tau_c")
    return (1.0 - tau / tau_c) * float(np.log2(1.0 + sinr))


def logistic(energy, xi: float, chi: float, phi: float):
    """Sigmoidal harvester output phi / (1 + exp(-xi (E - chi))), in Watts."""
    energy = np.asarray(energy, dtype=float)
    out = phi * expit(xi * (energy - chi))
    return out if out.ndim else float(out)


def nu_constant(xi: float, chi: float) -> float:
    """Zero-input offset 1 / (1 + exp(xi chi)) of the normalized harvester."""
    return float(expit(-xi * chi))


def harvested_energy_bound(Q, xi: float, chi: float, phi: float):
    """Normalized harvester output (Lambda(Q) - phi nu) / (1 - nu).

    Exactly zero at Q = 0 by construction of nu, saturating at phi.
    """
    Q = np.asarray(Q, dtype=float)
    if np.any(Q < 0):
        raise ValueError("received energy must be nonnegative")
    nu = nu_constant(xi, chi)
    out = np.asarray((phi * expit(xi * (Q - chi)) - phi * nu) / (1.0 - nu))
    return out if out.ndim else float(out)


def closed_form_Q(a, eta_iu, eta_eu, gamma_eu, delta, cfg: SystemConfig,
                  j: int) -> float:
    """Expected received RF energy at EU j over one downlink phase.

    Terms: coherent own-beam gain (L-K+1) gamma, cross-EU beams and IU beams
    leaking the full aggregated gain delta, plus thermal noise. The prefactor
    (tau_c - tau) sigma_n^2 rho_d converts the normalized powers into energy
    per coherence block (Joules for the configured symbol duration).
    """
    L, K = cfg.L, cfg.K
    if L <= K:
        raise ValueError(f"closed form needs L > K (got L={L}, K={K})")
    a = np.asarray(a, dtype=float)
    e_mask = 1.0 - a
    own = (L - K + 1.0) * np.sum(e_mask * eta_eu[:, j] * gamma_eu[:, j])
    cross = 0.0
    J = eta_eu.shape[1]
    for jp in range(J):
        if jp != j:
            cross += np.sum(e_mask * eta_eu[:, jp] * delta[:, j])
    leak = np.sum(a[:, None] * eta_iu * delta[:, j][:, None])
    bracket = own + cross + leak + 1.0 / cfg.rho_d
    pref = cfg.dl_symbols * cfg.noise_power * cfg.rho_d * cfg.symbol_duration
    return float(pref * bracket)


@dataclass
class MetricsReport:
    """Closed-form metrics for one network realization, with optional MC columns."""

    sinr: np.ndarray                  # (K,)
    se: np.ndarray                    # (K,)
    Q: np.ndarray                     # (J,) received RF energy per block
    Lambda: np.ndarray                # (J,) logistic output (W)
    Phi: np.ndarray                   # (J,) harvested-energy lower bound (W)
    sinr_mc: np.ndarray | None = None
    se_mc: np.ndarray | None = None
    energy_mc: np.ndarray | None = None
    he_mc: np.ndarray | None = None

    @property
    def mean_se(self) -> float:
        return float(self.se.mean())

    @property
    def mean_he(self) -> float:
        return float(self.Phi.mean())

    @property
    def sum_he(self) -> float:
        return float(self.Phi.sum())


def evaluate_closed_form(cfg: SystemConfig, a, eta_iu, eta_eu, gamma_iu,
                         gamma_eu, beta_iu, delta) -> MetricsReport:
    """Assemble the full closed-form report from the large-scale tables."""
    K, J = cfg.K, cfg.J
    sinr = np.array([
        closed_form_sinr(a, eta_iu, eta_eu, gamma_iu, beta_iu, cfg.rho_d,
                         cfg.L, cfg.K, k)
        for k in range(K)
    ])
    se = np.array([se_from_sinr(s, cfg.tau, cfg.tau_c) for s in sinr])
    Q = np.array([
        closed_form_Q(a, eta_iu, eta_eu, gamma_eu, delta, cfg, j)
        for j in range(J)
    ])
    lam = logistic(Q, cfg.eh_xi, cfg.eh_chi, cfg.eh_phi)
    phi_bound = harvested_energy_bound(Q, cfg.eh_xi, cfg.eh_chi, cfg.eh_phi)
    return MetricsReport(sinr=sinr, se=se, Q=Q, Lambda=np.atleast_1d(lam),
                         Phi=np.atleast_1d(phi_bound))
