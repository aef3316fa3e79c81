"""PZF / protected-MRT precoding, analytic normalizers, and power control."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RankDeficiencyError(np.linalg.LinAlgError):
    """Estimated IU channel matrix is (numerically) rank deficient."""


class DegenerateDirectionError(ValueError):
    """Projected MRT direction vanished: the estimate lies in the IU subspace."""


_RANK_TOL = 1e-10


def _qr_with_rank_check(ghat):
    """Stacked reduced QR of (..., L, K) with a relative rank guard."""
    q, r = np.linalg.qr(ghat)
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    if diag.size and np.any(diag.min(axis=-1) <= _RANK_TOL * diag.max(axis=-1)):
        raise RankDeficiencyError("IU channel estimates are rank deficient")
    return q, r


def zf_directions(ghat: np.ndarray) -> np.ndarray:
    """All zero-forcing directions Ghat (Ghat^H Ghat)^{-1} for a stack of (L, K).

    Computed through the QR factors (never an explicit Gram inverse), so the
    conditioning is that of Ghat itself.
    """
    ghat = np.asarray(ghat)
    L, K = ghat.shape[-2:]
    if L <= K:
        raise RankDeficiencyError(f"zero-forcing needs L > K (got L={L}, K={K})")
    q, r = _qr_with_rank_check(ghat)
    eye = np.broadcast_to(np.eye(K, dtype=ghat.dtype), r.shape)
    rinv_h = np.linalg.solve(np.swapaxes(r, -2, -1).conj(), eye)
    return q @ rinv_h


def orthogonal_projection(ghat: np.ndarray, L: int | None = None) -> np.ndarray:
    """Projector onto the orthogonal complement of the estimated IU subspace.

    B = I - Ghat (Ghat^H Ghat)^{-1} Ghat^H; with no IU columns this is the
    identity.
    """
    ghat = np.asarray(ghat)
    if ghat.shape[-1] == 0:
        dim = L if L is not None else ghat.shape[-2]
        return np.eye(dim, dtype=complex)
    q, _ = _qr_with_rank_check(ghat)
    dim = ghat.shape[-2]
    return np.eye(dim, dtype=ghat.dtype) - q @ np.swapaxes(q, -2, -1).conj()


def analytic_normalizers(L: int, K: int, gamma):
    """Closed-form squared normalizers: ((L-K)*gamma, 1/((L-K)*gamma)).

    The first scales zero-forcing beams, the second projected-MRT beams, both
    to unit mean square norm.
    """
    if L <= K:
        raise ValueError(f"normalizers need L > K (got L={L}, K={K})")
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0):
        raise ValueError("gamma must be positive")
    alpha_pzf_sq = (L - K) * gamma
    alpha_pmrt_sq = 1.0 / ((L - K) * gamma)
    return alpha_pzf_sq, alpha_pmrt_sq


def pzf_precoder(ghat: np.ndarray, gamma_k: float, k: int) -> np.ndarray:
    """Unit-mean-norm zero-forcing beam for IU k from the (L, K) estimate matrix."""
    L, K = ghat.shape[-2:]
    alpha_sq, _ = analytic_normalizers(L, K, gamma_k)
    return np.sqrt(alpha_sq) * zf_directions(ghat)[..., :, k]


def pmrt_precoder(B: np.ndarray, ghat_e: np.ndarray, gamma_j: float,
                  j: int) -> np.ndarray:
    """Unit-mean-norm protected MRT beam for EU j: B ghat_j over its analytic norm.

    The nulled-subspace dimension is recovered from trace(B) = L - K.
    """
    L = B.shape[-1]
    K = L - int(round(float(np.trace(B).real)))
    direction = B @ ghat_e[..., :, j]
    norm = np.linalg.norm(direction, axis=-1)
    ref = np.linalg.norm(ghat_e[..., :, j], axis=-1)
    if np.any(norm <= 1e-9 * ref):
        raise DegenerateDirectionError(
            "projected MRT direction vanished (estimate inside the IU subspace)"
        )
    _, alpha_sq = analytic_normalizers(L, K, gamma_j)
    return np.sqrt(alpha_sq) * direction


@dataclass(frozen=True)
class PrecoderSet:
    """Per-AP beams (unit mean square norm) and the projector they share."""

    w_iu: np.ndarray       # (..., M, K, L) zero-forcing beams
    w_eu: np.ndarray       # (..., M, J, L) protected MRT beams
    B: np.ndarray          # (..., M, L, L) orthogonal-complement projectors


def build_precoders(ghat_iu: np.ndarray, ghat_eu: np.ndarray,
                    gamma_iu: np.ndarray, gamma_eu: np.ndarray) -> PrecoderSet:
    """Construct every AP's PZF and PMRT beams from stacked estimates.

    Shapes: ghat_iu (..., M, K, L), ghat_eu (..., M, J, L); gamma tables
    (M, K) and (M, J). The trailing user axis of the estimates is transposed
    internally so the linear algebra sees (L, K) matrices.
    """
    gI = np.swapaxes(np.asarray(ghat_iu), -2, -1)   # (..., M, L, K)
    gE = np.swapaxes(np.asarray(ghat_eu), -2, -1)   # (..., M, L, J)
    L, K = gI.shape[-2:]
    J = gE.shape[-1]

    x = zf_directions(gI)                            # (..., M, L, K)
    alpha_pzf = np.sqrt((L - K) * gamma_iu)          # (M, K)
    w_iu = np.swapaxes(x, -2, -1) * alpha_pzf[..., :, :, None]

    q, _ = _qr_with_rank_check(gI)
    B = np.eye(L, dtype=gI.dtype) - q @ np.swapaxes(q, -2, -1).conj()
    proj = B @ gE                                    # (..., M, L, J)
    norms = np.linalg.norm(proj, axis=-2)
    refs = np.linalg.norm(gE, axis=-2)
    if np.any(norms <= 1e-9 * refs):
        raise DegenerateDirectionError("a projected MRT direction vanished")
    alpha_pmrt = 1.0 / np.sqrt((L - K) * gamma_eu)   # (M, J)
    w_eu = np.swapaxes(proj, -2, -1) * alpha_pmrt[..., :, :, None]

    return PrecoderSet(w_iu=w_iu, w_eu=w_eu, B=B)


def power_control(gamma_iu: np.ndarray, gamma_eu: np.ndarray,
                  a: np.ndarray | None = None):
    """Reciprocal-sum power coefficients: eta = 1 / sum_of_gammas per AP.

    Every AP gets one coefficient per served user, constant across users of
    the same type, so the gamma-weighted budget sum_k eta_mk gamma_mk equals
    one at each AP regardless of its operation mode.
    """
    gamma_iu = np.asarray(gamma_iu, dtype=float)
    gamma_eu = np.asarray(gamma_eu, dtype=float)
    sum_iu = gamma_iu.sum(axis=1)
    sum_eu = gamma_eu.sum(axis=1)
    if np.any(sum_iu <= 0) or np.any(sum_eu <= 0):
        raise ValueError("gamma sums must be positive")
    eta_iu = np.repeat((1.0 / sum_iu)[:, None], gamma_iu.shape[1], axis=1)
    eta_eu = np.repeat((1.0 / sum_eu)[:, None], gamma_eu.shape[1], axis=1)
    return eta_iu, eta_eu


def power_budget(eta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Per-AP gamma-weighted power budget sum_u eta_mu gamma_mu (equals 1 here)."""
    return np.sum(np.asarray(eta) * np.asarray(gamma), axis=-1)


def transmit_vector(w_iu: np.ndarray, w_eu: np.ndarray, eta_iu: np.ndarray,
                    eta_eu: np.ndarray, x_iu: np.ndarray, x_eu: np.ndarray,
                    a_m: int, rho_d: float) -> np.ndarray:
    """One AP's transmitted signal for unit-power symbols.

    x = sqrt(a rho_d) sum_k sqrt(eta_k) w_k x_k
      + sqrt((1-a) rho_d) sum_j sqrt(eta_j) w_j x_j,
    so an information AP emits no energy symbols and vice versa.
    """
    w_iu = np.asarray(w_iu)    # (K, L)
    w_eu = np.asarray(w_eu)    # (J, L)
    info = np.sqrt(a_m * rho_d) * ((np.sqrt(eta_iu) * x_iu) @ w_iu)
    energy = np.sqrt((1 - a_m) * rho_d) * ((np.sqrt(eta_eu) * x_eu) @ w_eu)
    return info + energy
