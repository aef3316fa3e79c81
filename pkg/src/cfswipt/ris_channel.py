"""RIS spatial correlation, correlated channel sampling, and aggregated EU links."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import NetworkRealization, SystemConfig


def ris_correlation_matrix(N_H: int, N_V: int, d_H: float, d_V: float,
                           wavelength: float) -> np.ndarray:
    """Normalized sinc correlation among RIS elements laid out row-major.

    Element n sits at (0, (n mod N_H) * d_H, floor(n / N_H) * d_V); entry
    (n, n') is sinc(2 ||u_n - u_n'|| / lambda) with sinc(x) = sin(pi x)/(pi x).
    """
    if N_H < 1 or N_V < 1:
        raise ValueError("N_H and N_V must be at least 1")
    if d_H <= 0 or d_V <= 0 or wavelength <= 0:
        raise ValueError("spacings and wavelength must be positive")
    n = np.arange(N_H * N_V)
    pos = np.stack([(n % N_H) * d_H, (n // N_H) * d_V], axis=-1)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return np.sinc(2.0 * dist / wavelength)


def covariance_factor(sigma: np.ndarray, clamp_tol: float = 1e-12) -> np.ndarray:
    """Factor S with S S^H ~= sigma for sampling CN(0, sigma).

    Eigenvalues below clamp_tol times the largest one (including negative
    round-off) are clamped to zero, which handles the rank-deficient sinc
    correlation at sub-half-wavelength spacing.
    """
    sigma = np.asarray(sigma)
    norm = np.linalg.norm(sigma)
    if norm == 0:
        return np.zeros_like(sigma, dtype=complex)
    if np.linalg.norm(sigma - sigma.conj().T) > max(clamp_tol, 1e-12) * norm:
        raise ValueError("covariance must be Hermitian")
    w, v = np.linalg.eigh(sigma)
    w = np.where(w < clamp_tol * w.max(), 0.0, w)
    s = v * np.sqrt(w)[None, :]
    err = np.linalg.norm(s @ s.conj().T - sigma)
    if err > 10.0 * max(clamp_tol, 1e-15) * norm:
        raise ValueError("covariance factorization failed the reconstruction check")
    return s


@dataclass(frozen=True)
class CorrelationModel:
    """Shared RIS correlation with per-AP / per-EU covariance scales.

    The covariances factor as Omega_m = omega_scale[m] * R and
    Psi_j = psi_scale[j] * R, so only the scales are stored.
    """

    R: np.ndarray             # (N, N) real symmetric, unit diagonal
    factor_R: np.ndarray      # S with S S^H ~= R
    omega_scale: np.ndarray   # (M,) = alpha_m * d_H * d_V
    psi_scale: np.ndarray     # (J,) = alpha_j * d_H * d_V

    def omega(self, m: int) -> np.ndarray:
        return self.omega_scale[m] * self.R

    def psi(self, j: int) -> np.ndarray:
        return self.psi_scale[j] * self.R


def build_correlation_model(cfg: SystemConfig, net: NetworkRealization,
                            clamp_tol: float = 1e-12) -> CorrelationModel:
    R = ris_correlation_matrix(cfg.N_H, cfg.N_V, cfg.d_H, cfg.d_V, cfg.wavelength)
    area = cfg.d_H * cfg.d_V
    return CorrelationModel(
        R=R,
        factor_R=covariance_factor(R, clamp_tol),
        omega_scale=net.alpha_ap * area,
        psi_scale=net.alpha_eu * area,
    )


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def aggregate_eu_channel(h: np.ndarray, H: np.ndarray, theta: np.ndarray,
                         z: np.ndarray) -> np.ndarray:
    """Aggregated AP-to-EU link: direct part plus the RIS cascade H^H Theta z."""
    h = np.asarray(h)
    if H.shape[0] != theta.shape[0] or theta.shape[1] != z.shape[0]:
        raise ValueError("dimension mismatch in RIS cascade")
    if H.shape[1] != h.shape[0]:
        raise ValueError("direct link and AP-RIS link disagree on antenna count")
    return h + H.conj().T @ (theta @ z)


@dataclass(frozen=True)
class ChannelBatch:
    """Small-scale channels for a batch of trials (leading axis = trial)."""

    g_iu: np.ndarray    # (T, M, K, L)
    h_eu: np.ndarray    # (T, M, J, L)
    H: np.ndarray       # (T, M, N, L)
    z: np.ndarray       # (T, J, N)
    g_eu: np.ndarray    # (T, M, J, L)


@dataclass(frozen=True)
class ChannelSet:
    """One small-scale realization of every link in the network."""

    g_iu: np.ndarray    # (M, K, L)
    h_eu: np.ndarray    # (M, J, L)
    H: np.ndarray       # (M, N, L)
    z: np.ndarray       # (J, N)
    g_eu: np.ndarray    # (M, J, L)


def sample_channel_batch(net: NetworkRealization, corr: CorrelationModel,
                         theta: np.ndarray | None, rng: np.random.Generator,
                         trials: int, L: int) -> ChannelBatch:
    """Draw `trials` independent small-scale realizations of all links.

    Direct links are i.i.d. Rayleigh with the per-pair large-scale variance;
    AP-RIS columns and RIS-EU vectors share the spatial correlation R scaled
    by the per-link covariance factors. With theta=None the cascade is off and
    the aggregated EU channel equals the direct one.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    M, K = net.beta_iu.shape
    J = net.beta_eu.shape[1]
    N = corr.R.shape[0]
    if theta is not None and theta.shape != (N, N):
        raise ValueError("scattering matrix does not match the RIS element count")

    g_iu = complex_normal(rng, (trials, M, K, L)) * np.sqrt(net.beta_iu)[None, :, :, None]
    h_eu = complex_normal(rng, (trials, M, J, L)) * np.sqrt(net.beta_eu)[None, :, :, None]

    # Columns of H_m are CN(0, omega_m R), independent across antennas and APs.
    w = complex_normal(rng, (trials, M, N, L))
    H = np.einsum("ab,tmbl->tmal", corr.factor_R, w)
    H *= np.sqrt(corr.omega_scale)[None, :, None, None]

    wz = complex_normal(rng, (trials, J, N))
    z = np.einsum("ab,tjb->tja", corr.factor_R, wz)
    z *= np.sqrt(corr.psi_scale)[None, :, None]

    if theta is None:
        g_eu = h_eu.copy()
    else:
        v = np.einsum("ab,tjb->tja", theta, z)
        g_eu = h_eu + np.einsum("tmnl,tjn->tmjl", H.conj(), v)

    return ChannelBatch(g_iu=g_iu, h_eu=h_eu, H=H, z=z, g_eu=g_eu)


def sample_channel_set(net: NetworkRealization, corr: CorrelationModel,
                       theta: np.ndarray | None, rng: np.random.Generator,
                       L: int) -> ChannelSet:
    batch = sample_channel_batch(net, corr, theta, rng, trials=1, L=L)
    return ChannelSet(
        g_iu=batch.g_iu[0], h_eu=batch.h_eu[0], H=batch.H[0],
        z=batch.z[0], g_eu=batch.g_eu[0],
    )


def delta_coefficient(beta: float, Omega: np.ndarray, Psi: np.ndarray,
                      theta: np.ndarray) -> float:
    """Effective large-scale gain of the aggregated link: beta + tr(Th^H Omega Th Psi)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if Omega.shape != theta.shape or Psi.shape != theta.shape:
        raise ValueError("dimension mismatch")
    t = complex(np.trace(theta.conj().T @ Omega @ theta @ Psi))
    if abs(t) > 0 and abs(t.imag) > 1e-10 * abs(t):
        raise ValueError("trace term has a non-negligible imaginary part")
    return float(beta + t.real)


def delta_table(net: NetworkRealization, corr: CorrelationModel,
                theta: np.ndarray | None) -> np.ndarray:
    """(M, J) table of aggregated-channel gains delta_mj.

    Uses the factored form tr(Th^H Omega_m Th Psi_j) =
    omega_scale[m] * psi_scale[j] * tr(Th^H R Th R).
    """
    if theta is None:
        return net.beta_eu.copy()
    t0 = np.trace(theta.conj().T @ corr.R @ theta @ corr.R).real
    return net.beta_eu + np.outer(corr.omega_scale, corr.psi_scale) * t0
