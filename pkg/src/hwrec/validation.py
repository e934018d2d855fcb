"""Input validation helpers shared by the public functions and estimators."""

from __future__ import annotations

from math import comb

import numpy as np


def check_square(A, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def check_unitary(U, atol: float = 1e-8, name: str = "matrix") -> np.ndarray:
    """Reject matrices whose ``||U^dagger U - I||_F`` exceeds ``atol``."""
    U = check_square(U, name)
    dev = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if dev > atol:
        raise ValueError(f"{name} is not unitary (Frobenius deviation {dev:.3g})")
    return U


def as_density_matrix(state) -> np.ndarray:
    """Turn a state vector into ``|psi><psi|``; pass matrices through."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return check_square(state, "density matrix")


def check_density_matrix(rho, atol: float = 1e-8, name: str = "density matrix") -> np.ndarray:
    """Hermitian, trace one and positive semidefinite within ``atol``."""
    rho = check_square(rho, name)
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > atol:
        raise ValueError(f"{name} is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"{name} has trace {tr:.12g}, expected 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -atol:
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3g})")
    return rho


def infer_photon_number(dim: int, M: int) -> int:
    """Photon number ``N`` with ``binomial(M + N - 1, N) == dim``."""
    if M == 1:
        raise ValueError("photon number is ambiguous for a single mode; pass N")
    N = 0
    while comb(M + N - 1, N) < dim:
        N += 1
    if comb(M + N - 1, N) != dim:
        raise ValueError(f"dimension {dim} is not a Fock sector size for M={M}")
    return N


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


def check_dqc1_sector(M: int, N: int) -> None:
    """The two-detector scheme needs a prime mode count and ``1 <= N < M``."""
    if not is_prime(M):
        raise ValueError(f"M must be prime for DQC1 reconstruction, got {M}")
    if not 1 <= N < M:
        raise ValueError(f"need 1 <= N < M for DQC1 reconstruction, got N={N}, M={M}")
