"""Fixed photon-number Fock sectors, matrix permanents and the Fock lift of
mode transformations.

A Fock vector is a plain tuple of occupation numbers.  Sectors are ordered
reverse-lexicographically, so ``(N, 0, ..., 0)`` comes first and
``(0, ..., 0, N)`` last.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

FockVector = tuple[int, ...]


class NotInSectorError(ValueError):
    """Raised when an occupation vector does not belong to a Fock sector."""


@dataclass(frozen=True)
class FockBasis:
    """Ordered basis of the ``N``-photon sector over ``M`` modes."""

    M: int
    N: int
    states: tuple[FockVector, ...]
    index: dict[FockVector, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def mode_lists(self) -> np.ndarray:
        """``(dim, N)`` array listing the mode of each photon, sorted."""
        return _mode_lists(self.M, self.N)

    @property
    def norms(self) -> np.ndarray:
        """``sqrt(prod_m n_m!)`` for each state."""
        return _norms(self.M, self.N)

    def embed(self, other: "FockBasis") -> np.ndarray:
        """Positions in ``other`` of this basis' states padded with empty modes."""
        if other.N != self.N or other.M < self.M:
            raise ValueError("target basis must have the same N and at least M modes")
        pad = (0,) * (other.M - self.M)
        return np.array([other.index[s + pad] for s in self.states], dtype=int)


@lru_cache(maxsize=None)
def enumerate_basis(M: int, N: int) -> FockBasis:
    """All occupation vectors with ``N`` photons in ``M`` modes."""
    if M < 1 or N < 0:
        raise ValueError(f"need M >= 1 and N >= 0, got M={M}, N={N}")
    states = []
    for modes in itertools.combinations_with_replacement(range(M), N):
        occ = [0] * M
        for m in modes:
            occ[m] += 1
        states.append(tuple(occ))
    states = tuple(states)
    return FockBasis(M, N, states, {s: i for i, s in enumerate(states)})


def basis_index(basis: FockBasis, n) -> int:
    n = tuple(int(x) for x in n)
    if len(n) != basis.M or sum(n) != basis.N or min(n, default=0) < 0:
        raise NotInSectorError(f"{n} is not in the N={basis.N}, M={basis.M} sector")
    return basis.index[n]


@lru_cache(maxsize=None)
def _mode_lists(M: int, N: int) -> np.ndarray:
    basis = enumerate_basis(M, N)
    out = np.zeros((basis.dim, N), dtype=int)
    for i, s in enumerate(basis.states):
        out[i] = [m for m, c in enumerate(s) for _ in range(c)]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _norms(M: int, N: int) -> np.ndarray:
    basis = enumerate_basis(M, N)
    out = np.array(
        [math.sqrt(math.prod(math.factorial(c) for c in s)) for s in basis.states]
    )
    out.setflags(write=False)
    return out


def permanent(A) -> complex:
    """Permanent of a square matrix by Ryser's formula in Gray-code order.

    Runs in ``O(2^k k)``.  The empty matrix has permanent 1.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {A.shape}")
    k = A.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    if k > 20:
        raise ValueError("permanent is limited to k <= 20")
    A = A.astype(complex)
    row_sums = np.zeros(k, dtype=complex)
    total = 0.0 + 0.0j
    gray_prev = 0
    for i in range(1, 2**k):
        gray = i ^ (i >> 1)
        changed = gray ^ gray_prev
        col = changed.bit_length() - 1
        if gray & changed:
            row_sums += A[:, col]
        else:
            row_sums -= A[:, col]
        gray_prev = gray
        # subset size parity: popcount(gray)
        sign = -1 if (bin(gray).count("1") % 2) else 1
        total += sign * np.prod(row_sums)
    return complex((-1) ** k * total)


def permanent_bruteforce(A) -> complex:
    """Direct sum over permutations; a test oracle for small matrices."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {A.shape}")
    k = A.shape[0]
    cols = np.arange(k)
    return complex(
        sum(np.prod(A[list(sigma), cols]) for sigma in itertools.permutations(range(k)))
    )


@lru_cache(maxsize=None)
def _ryser_masks(k: int) -> tuple[np.ndarray, np.ndarray]:
    masks = np.array(
        [[(s >> j) & 1 for j in range(k)] for s in range(1, 2**k)], dtype=float
    )
    signs = (-1.0) ** (k - masks.sum(axis=1))
    return masks, signs


def _batched_permanent(sub: np.ndarray) -> np.ndarray:
    """Ryser permanents of a stack ``(..., k, k)`` of matrices."""
    k = sub.shape[-1]
    if k == 0:
        return np.ones(sub.shape[:-2], dtype=complex)
    masks, signs = _ryser_masks(k)
    # row sums restricted to each column subset: (..., k, 2^k - 1)
    row_sums = sub @ masks.T
    return np.prod(row_sums, axis=-2) @ signs


def lift_columns(A, basis: FockBasis, columns=None) -> np.ndarray:
    """Selected columns of the Fock lift of ``A``.

    ``columns`` indexes input states of ``basis``; rows always span the full
    sector.  Entry ``(nu, n)`` is ``Perm(A[nu, n]) / sqrt(nu! n!)``.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (basis.M, basis.M):
        raise ValueError(
            f"mode matrix shape {A.shape} does not match M={basis.M}"
        )
    rows = basis.mode_lists
    norms = basis.norms
    if columns is None:
        columns = np.arange(basis.dim)
    columns = np.asarray(columns, dtype=int)
    cols = rows[columns]
    sub = A[rows[:, None, :, None], cols[None, :, None, :]]
    perms = _batched_permanent(sub)
    return perms / np.outer(norms, norms[columns])


def lift_operator(A, basis: FockBasis) -> np.ndarray:
    """Fock-sector matrix of the mode transformation ``A``.

    ``A`` need not be unitary.  The lift is multiplicative and maps unitaries
    to unitaries.
    """
    return lift_columns(A, basis)
