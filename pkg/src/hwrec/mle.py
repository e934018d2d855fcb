"""Maximum-likelihood restoration of physical HW-reduced density matrices.

The density matrix is parametrized as ``T^dagger T / tr(T^dagger T)`` with a
lower-triangular ``T`` packed row by row: row ``i`` contributes the real and
imaginary parts of ``T[i, 0..i-1]`` followed by the real diagonal ``T[i, i]``.
For ``M = 2`` this gives ``t = (T00, Re T10, Im T10, T11)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .hw import ExpectationTable, hw_matrix, reconstruct_hw_reduced
from .validation import check_density_matrix

DENOMINATOR_FLOOR = 1e-6


@lru_cache(maxsize=None)
def _layout(M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays mapping ``t`` onto ``T``: (rows, cols, is_imag)."""
    rows, cols, imag = [], [], []
    for i in range(M):
        for j in range(i):
            rows += [i, i]
            cols += [j, j]
            imag += [False, True]
        rows.append(i)
        cols.append(i)
        imag.append(False)
    return np.array(rows), np.array(cols), np.array(imag)


def t_to_matrix(t, M: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (M * M,):
        raise ValueError(f"expected {M * M} parameters, got shape {t.shape}")
    rows, cols, imag = _layout(M)
    T = np.zeros((M, M), dtype=complex)
    np.add.at(T, (rows, cols), np.where(imag, 1j * t, t))
    return T


def matrix_to_t(T) -> np.ndarray:
    T = np.asarray(T, dtype=complex)
    rows, cols, imag = _layout(T.shape[0])
    vals = T[rows, cols]
    return np.where(imag, vals.imag, vals.real)


def cholesky_density(t, M: int) -> np.ndarray:
    T = t_to_matrix(t, M)
    G = T.conj().T @ T
    s = np.trace(G).real
    if s == 0:
        raise ValueError("all-zero parameter vector has no density matrix")
    return G / s


def density_to_t(rho, floor: float = 1e-9) -> np.ndarray:
    """Parameters reproducing ``rho`` (after PSD projection and a small
    admixture of the identity to keep ``T`` invertible)."""
    rho = project_psd(rho)
    M = rho.shape[0]
    rho = (1 - floor) * rho + floor * np.eye(M) / M
    # rho = T^dagger T with T lower triangular: factor the index-reversed matrix
    rev = rho[::-1, ::-1]
    L = np.linalg.cholesky(rev)
    T = L.conj().T[::-1, ::-1]
    return matrix_to_t(T)


def project_psd(rho) -> np.ndarray:
    """Nearest trace-one PSD matrix in Frobenius norm (eigenvalue projection
    onto the simplex)."""
    rho = np.asarray(rho, dtype=complex)
    rho = (rho + rho.conj().T) / 2
    vals, vecs = np.linalg.eigh(rho)
    mu_sorted = np.sort(vals)[::-1]
    cums = np.cumsum(mu_sorted) - 1.0
    idx = np.arange(1, len(vals) + 1)
    k = np.nonzero(mu_sorted - cums / idx > 0)[0][-1]
    shift = cums[k] / (k + 1)
    vals = np.clip(vals - shift, 0.0, None)
    return (vecs * vals) @ vecs.conj().T


@lru_cache(maxsize=None)
def _observables(M: int, N: int) -> np.ndarray:
    """Stack ``(2, M, M, M, M)`` of ``(-i)^r L_{k, N l}`` with ``r, k, l`` leading."""
    B = np.empty((2, M, M, M, M), dtype=complex)
    for k in range(M):
        for l in range(M):
            L = hw_matrix(k, (N * l) % M, M)
            B[0, k, l] = L
            B[1, k, l] = -1j * L
    B.setflags(write=False)
    return B


def _mask(M: int) -> np.ndarray:
    mask = np.ones((2, M, M), dtype=bool)
    mask[:, 0, 0] = False
    return mask


def predicted_lambdas(rho, N: int) -> np.ndarray:
    """All ``Re((-i)^r tr(L_{k, N l} rho))`` as a ``(2, M, M)`` array."""
    M = rho.shape[0]
    return np.einsum("rklab,ba->rkl", _observables(M, N), rho).real


def predicted_lambda(t, M: int, N: int, r: int, k: int, l: int) -> float:
    if math.gcd(N, M) != 1:
        raise ValueError(f"prediction requires gcd(N, M) = 1, got N={N}, M={M}")
    return float(predicted_lambdas(cholesky_density(t, M), N)[r, k % M, l % M])


def likelihood_of_density(rho, observed: ExpectationTable, eps: float = DENOMINATOR_FLOOR) -> float:
    """The same objective evaluated directly on a density matrix."""
    pred = predicted_lambdas(np.asarray(rho, dtype=complex), observed.N)
    mask = _mask(observed.M)
    resid = (observed.lam - pred)[mask]
    return float(np.sum(resid**2 / np.maximum(1.0 - pred[mask] ** 2, eps)))


def log_likelihood(t, observed: ExpectationTable, eps: float = DENOMINATOR_FLOOR) -> float:
    """Gaussian surrogate ``sum (lam - lam~)^2 / max(1 - lam~^2, eps)``
    over every ``(r, k, l)`` with ``(k, l) != (0, 0)``."""
    return _objective(t, observed, eps)[0]


def _objective(t, observed: ExpectationTable, eps: float, with_grad: bool = False):
    M, N = observed.M, observed.N
    T = t_to_matrix(t, M)
    G = T.conj().T @ T
    s = np.trace(G).real
    rho = G / s
    pred = predicted_lambdas(rho, N)
    mask = _mask(M)
    resid = (observed.lam - pred)[mask]
    raw = 1.0 - pred[mask] ** 2
    den = np.maximum(raw, eps)
    value = float(np.sum(resid**2 / den))
    if not with_grad:
        return value, None
    # d value / d pred, the floor is treated as constant where active
    g = -2 * resid / den + np.where(raw > eps, 2 * pred[mask] * resid**2 / den**2, 0.0)
    B = _observables(M, N)[mask]
    # d pred_j = Re tr((B_j - pred_j I) dG) / s
    K = np.einsum("j,jab->ab", g, B) - np.sum(g * pred[mask]) * np.eye(M)
    K = (K + K.conj().T) / (2 * s)
    Q = (K @ T.conj().T).T
    rows, cols, imag = _layout(M)
    q = Q[rows, cols]
    grad = np.where(imag, -2 * q.imag, 2 * q.real)
    return value, grad


def log_likelihood_grad(t, observed: ExpectationTable, eps: float = DENOMINATOR_FLOOR) -> np.ndarray:
    return _objective(t, observed, eps, with_grad=True)[1]


@dataclass
class FitResult:
    rho: np.ndarray
    final_objective: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


def linear_inversion(observed: ExpectationTable) -> np.ndarray:
    return reconstruct_hw_reduced(observed)


def fit(
    observed: ExpectationTable,
    max_iter: int = 10_000,
    tol: float = 1e-10,
    restarts: int = 0,
    seed: int | None = None,
    eps: float = DENOMINATOR_FLOOR,
) -> FitResult:
    """Minimize the likelihood from a linear-inversion warm start.

    ``restarts`` additional starts are drawn by perturbing the warm start with
    seeded Gaussian noise; the lowest objective wins.
    """
    M, N = observed.M, observed.N
    if math.gcd(N, M) != 1:
        raise ValueError(f"MLE requires gcd(N, M) = 1, got N={N}, M={M}")
    if not np.all(np.isfinite(observed.lam)):
        raise ValueError("observed table contains non-finite values")
    t0 = density_to_t(linear_inversion(observed))
    starts = [t0]
    if restarts:
        rng = np.random.default_rng(seed)
        scale = np.linalg.norm(t0) / np.sqrt(len(t0))
        starts += [t0 + scale * rng.standard_normal(len(t0)) for _ in range(restarts)]
    best = None
    for start in starts:
        result = _run(start, observed, max_iter, tol, eps)
        if best is None or result.final_objective < best.final_objective:
            best = result
    return best


def _run(t0, observed, max_iter, tol, eps) -> FitResult:
    M = observed.M
    history = [log_likelihood(t0, observed, eps)]

    def record(tk):
        history.append(log_likelihood(tk, observed, eps))

    res = minimize(
        _objective,
        t0,
        args=(observed, eps, True),
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-12},
    )
    rho = cholesky_density(res.x, M)
    rho = (rho + rho.conj().T) / 2
    return FitResult(
        rho=rho / np.trace(rho).real,
        final_objective=float(res.fun),
        iterations=int(res.nit),
        converged=bool(res.success),
        history=history,
    )


def fidelity(rho_a, rho_b, atol: float = 1e-8) -> float:
    """Uhlmann fidelity ``tr(sqrt(sqrt(b) a sqrt(b)))^2``, clipped to [0, 1]."""
    a = check_density_matrix(rho_a, atol, "first state")
    b = check_density_matrix(rho_b, atol, "second state")
    vals, vecs = np.linalg.eigh((b + b.conj().T) / 2)
    sqrt_b = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
    inner = sqrt_b @ a @ sqrt_b
    ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)
    return min(max(f, 0.0), 1.0)
