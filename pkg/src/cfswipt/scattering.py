"""Scattering matrix designs for the fully-connected RIS: symmetric and unitary."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ris_channel import CorrelationModel, complex_normal
from .topology import NetworkRealization, SystemConfig

SYM_TOL = 1e-8    # relative symmetry residual bound
UNIT_TOL = 1e-6   # absolute unitarity residual bound
RANK_TOL = 1e-10  # singular values below RANK_TOL * s_max count as zero


class DegenerateDesignError(RuntimeError):
    """The synthesis matrix vanished; no direction to project onto."""


@dataclass(frozen=True)
class ScatteringReport:
    symmetry_residual: float    # ||Th - Th^T||_F
    unitarity_residual: float   # ||Th^H Th - I||_F
    norm: float                 # ||Th||_F
    symmetric: bool
    unitary: bool

    @property
    def passed(self) -> bool:
        return self.symmetric and self.unitary


@dataclass(frozen=True)
class ScatteringMatrix:
    theta: np.ndarray
    design_tag: str             # "heuristic", "random", or "none"
    symmetry_residual: float
    unitarity_residual: float


def validate_scattering(theta: np.ndarray, tol_sym: float = SYM_TOL,
                        tol_unit: float = UNIT_TOL) -> ScatteringReport:
    """Report symmetry and unitarity residuals of a candidate matrix."""
    theta = np.asarray(theta)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ValueError("scattering matrix must be square")
    n = theta.shape[0]
    norm = float(np.linalg.norm(theta))
    sym = float(np.linalg.norm(theta - theta.T))
    unit = float(np.linalg.norm(theta.conj().T @ theta - np.eye(n)))
    return ScatteringReport(
        symmetry_residual=sym,
        unitarity_residual=unit,
        norm=norm,
        symmetric=sym <= tol_sym * max(norm, 1e-300),
        unitary=unit <= tol_unit,
    )


def _checked(theta: np.ndarray, tag: str) -> ScatteringMatrix:
    report = validate_scattering(theta)
    if not report.passed:
        raise RuntimeError(
            f"{tag} design violates the scattering constraints "
            f"(sym={report.symmetry_residual:.3e}, unit={report.unitarity_residual:.3e})"
        )
    return ScatteringMatrix(theta=theta, design_tag=tag,
                            symmetry_residual=report.symmetry_residual,
                            unitarity_residual=report.unitarity_residual)


def random_scattering(N: int, rng: np.random.Generator) -> ScatteringMatrix:
    """Random symmetric-unitary matrix D F D: unit-normalized DFT with random phases.

    The DFT factor is divided by sqrt(N) so the product stays exactly unitary;
    the diagonal phase matrices keep it symmetric while randomizing it.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    dft = np.fft.fft(np.eye(N)) / np.sqrt(N)
    phases = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=N))
    theta = phases[:, None] * dft * phases[None, :]
    return _checked(theta, "random")


def scattering_objective(theta: np.ndarray, R: np.ndarray) -> float:
    """Correlation-alignment score tr(Th^H R Th R) used to rank candidates."""
    if theta.shape != R.shape:
        raise ValueError("dimension mismatch")
    val = complex(np.trace(theta.conj().T @ R @ theta @ R))
    if abs(val) > 0 and abs(val.imag) > 1e-10 * abs(val):
        raise ValueError("objective has a non-negligible imaginary part")
    return float(val.real)


def symmetric_unitary_projection(sym: np.ndarray) -> np.ndarray:
    """Project a complex symmetric matrix onto the symmetric unitary set.

    With SVD sym = U S V^H and rank r, returns [U_r, conj(V_{N-r})] V^H.
    For a symmetric input the left singular vectors are conjugates of the
    right ones (up to phase), which makes the result symmetric; padding the
    rank-deficient block with conj(V) keeps it exactly unitary.
    """
    n = sym.shape[0]
    u, s, vh = np.linalg.svd(sym)
    if s[0] <= 0.0:
        raise DegenerateDesignError("synthesis matrix is identically zero")
    r = int(np.sum(s > RANK_TOL * s[0]))
    v = vh.conj().T
    u_hat = np.concatenate([u[:, :r], v[:, r:].conj()], axis=1)
    return u_hat @ vh


def heuristic_candidates(net: NetworkRealization, corr: CorrelationModel,
                         cfg: SystemConfig, n_realizations: int,
                         rng: np.random.Generator) -> list[np.ndarray]:
    """Per-AP symmetric-unitary candidates from averaged cascade synthesis.

    For each AP, the cascade synthesis matrix H_m H^E_m Z^H is symmetrized and
    averaged over `n_realizations` small-scale draws, then projected onto the
    symmetric unitary set.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be at least 1")
    if np.all(net.a == 1):
        raise ValueError("heuristic design needs at least one energy AP")
    M, J = net.beta_eu.shape
    N = corr.R.shape[0]
    L = cfg.L

    acc = np.zeros((M, N, N), dtype=complex)
    sqrt_beta = np.sqrt(net.beta_eu)          # (M, J)
    sqrt_omega = np.sqrt(corr.omega_scale)    # (M,)
    sqrt_psi = np.sqrt(corr.psi_scale)        # (J,)
    for _ in range(n_realizations):
        H = np.einsum("ab,mbl->mal", corr.factor_R, complex_normal(rng, (M, N, L)))
        H *= sqrt_omega[:, None, None]
        He = complex_normal(rng, (M, L, J)) * sqrt_beta[:, None, :]
        Z = np.einsum("ab,jb->ja", corr.factor_R, complex_normal(rng, (J, N))).T
        Z = Z * sqrt_psi[None, :]             # (N, J)
        F = np.einsum("mal,mlj,bj->mab", H, He, Z.conj())
        acc += 0.5 * (F + F.transpose(0, 2, 1))
    acc /= n_realizations
    return [symmetric_unitary_projection(acc[m]) for m in range(M)]


def heuristic_scattering(net: NetworkRealization, corr: CorrelationModel,
                         cfg: SystemConfig, n_realizations: int,
                         rng: np.random.Generator) -> ScatteringMatrix:
    """Channel-driven symmetric-unitary design.

    Returns the per-AP candidate with the largest correlation alignment
    tr(Th^H R Th R); ties go to the lowest AP index.
    """
    best_theta, best_obj = None, -np.inf
    for theta_m in heuristic_candidates(net, corr, cfg, n_realizations, rng):
        obj = scattering_objective(theta_m, corr.R)
        if obj > best_obj:
            best_theta, best_obj = theta_m, obj
    return _checked(best_theta, "heuristic")


def save_scattering(sm: ScatteringMatrix, path) -> None:
    """Dump a scattering matrix as JSON: row-major interleaved real/imag."""
    theta = np.asarray(sm.theta)
    flat = np.empty(2 * theta.size)
    flat[0::2] = theta.real.ravel()
    flat[1::2] = theta.imag.ravel()
    doc = {"n": theta.shape[0], "design": sm.design_tag, "data": flat.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_scattering(path) -> ScatteringMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    n = int(doc["n"])
    flat = np.asarray(doc["data"], dtype=float)
    theta = (flat[0::2] + 1j * flat[1::2]).reshape(n, n)
    if doc["design"] == "none":
        report = validate_scattering(theta)
        return ScatteringMatrix(theta, "none", report.symmetry_residual,
                                report.unitarity_residual)
    return _checked(theta, doc["design"])
