"""Uplink pilot training: linear MMSE channel estimates and their variances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ris_channel import ChannelBatch, ChannelSet, complex_normal
from .topology import SystemConfig


class PilotShortageError(ValueError):
    """Fewer pilot symbols than users; orthogonal training is impossible."""


def gamma_coefficient(tau, rho_u, scale):
    """Per-antenna variance of the LMMSE estimate: tau*rho*s^2 / (tau*rho*s + 1).

    `scale` is beta for direct IU links and delta for aggregated EU links.
    Vectorized over `scale`.
    """
    scale = np.asarray(scale, dtype=float)
    if tau <= 0 or rho_u <= 0 or np.any(scale <= 0):
        raise ValueError("tau, rho_u and the channel scale must be positive")
    snr = tau * rho_u * scale
    out = snr * scale / (snr + 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EstimateSet:
    """Channel estimates plus their closed-form per-antenna variances."""

    ghat_iu: np.ndarray    # (M, K, L)
    ghat_eu: np.ndarray    # (M, J, L)
    gamma_iu: np.ndarray   # (M, K)
    gamma_eu: np.ndarray   # (M, J)


@dataclass(frozen=True)
class EstimateBatch:
    ghat_iu: np.ndarray    # (T, M, K, L)
    ghat_eu: np.ndarray    # (T, M, J, L)
    gamma_iu: np.ndarray   # (M, K)
    gamma_eu: np.ndarray   # (M, J)


def orthonormal_pilots(n_users: int, tau: int) -> np.ndarray:
    """Default pilot matrix: truncated identity (rows are unit vectors)."""
    if tau < n_users:
        raise PilotShortageError(f"tau={tau} < number of users {n_users}")
    return np.eye(n_users, tau, dtype=complex)


def _lmmse_coeff(tau, rho_u, scale):
    # Projected pilot observation is sqrt(tau*rho)*g + CN(0, I).
    return np.sqrt(tau * rho_u) * scale / (tau * rho_u * scale + 1.0)


def run_pilot_phase_batch(channels: ChannelBatch, cfg: SystemConfig,
                          beta_iu: np.ndarray, delta_eu: np.ndarray,
                          rng: np.random.Generator,
                          pilots: np.ndarray | None = None) -> EstimateBatch:
    """Run uplink training for every trial in the batch.

    With the default orthonormal pilots the per-user projection of the
    received block is sqrt(tau*rho_u) * g + unit noise, so the noise is drawn
    directly in projected form. Passing an explicit (K+J) x tau pilot matrix
    with orthonormal rows exercises the full received-block path instead.
    """
    T, M, K, L = channels.g_iu.shape
    J = channels.g_eu.shape[2]
    tau, rho_u = cfg.tau, cfg.rho_u
    if tau < K + J:
        raise PilotShortageError(f"tau={tau} < K+J={K + J}")

    g_all = np.concatenate([channels.g_iu, channels.g_eu], axis=2)  # (T, M, K+J, L)
    if pilots is None:
        noise = complex_normal(rng, g_all.shape)
        y_proj = np.sqrt(tau * rho_u) * g_all + noise
    else:
        if pilots.shape != (K + J, tau):
            raise ValueError("pilot matrix must be (K+J) x tau")
        gram = pilots @ pilots.conj().T
        if not np.allclose(gram, np.eye(K + J), atol=1e-10):
            raise ValueError("pilot rows must be orthonormal")
        block_noise = complex_normal(rng, (T, M, L, tau))
        y = np.sqrt(tau * rho_u) * np.einsum("tmul,us->tmls", g_all, pilots.conj())
        y = y + block_noise
        y_proj = np.einsum("tmls,us->tmul", y, pilots)

    gamma_iu = gamma_coefficient(tau, rho_u, beta_iu)
    gamma_eu = gamma_coefficient(tau, rho_u, delta_eu)
    c_iu = _lmmse_coeff(tau, rho_u, beta_iu)   # (M, K)
    c_eu = _lmmse_coeff(tau, rho_u, delta_eu)  # (M, J)

    ghat_iu = c_iu[None, :, :, None] * y_proj[:, :, :K, :]
    ghat_eu = c_eu[None, :, :, None] * y_proj[:, :, K:, :]
    return EstimateBatch(ghat_iu=ghat_iu, ghat_eu=ghat_eu,
                         gamma_iu=gamma_iu, gamma_eu=gamma_eu)


def run_pilot_phase(channels: ChannelSet, cfg: SystemConfig,
                    beta_iu: np.ndarray, delta_eu: np.ndarray,
                    rng: np.random.Generator,
                    pilots: np.ndarray | None = None) -> EstimateSet:
    """Single-realization wrapper around the batched pilot phase."""
    batch = ChannelBatch(
        g_iu=channels.g_iu[None], h_eu=channels.h_eu[None],
        H=channels.H[None], z=channels.z[None], g_eu=channels.g_eu[None],
    )
    est = run_pilot_phase_batch(batch, cfg, beta_iu, delta_eu, rng, pilots)
    return EstimateSet(ghat_iu=est.ghat_iu[0], ghat_eu=est.ghat_eu[0],
                       gamma_iu=est.gamma_iu, gamma_eu=est.gamma_eu)
