"""Heisenberg-Weyl operators on M modes and the HW-reduced density matrix.

``Lambda_{k,l} = X^k Z^l`` where ``X`` shifts a photon from mode ``m`` to
``m + 1 (mod M)`` and ``Z`` multiplies mode ``m`` by ``omega^m`` with
``omega = exp(2 pi i / M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockBasis, enumerate_basis, lift_operator
from .validation import as_density_matrix, infer_photon_number


class RepresentativeNotFoundError(ValueError):
    """An HW orbit contains no Fock vector with vanishing total mode index."""


def omega(M: int) -> complex:
    return np.exp(2j * np.pi / M)


def mode_shift(M: int) -> np.ndarray:
    """Cyclic shift matrix: entry ``(j, k)`` is 1 iff ``j = k + 1 mod M``."""
    return np.roll(np.eye(M, dtype=complex), 1, axis=0)


def phase_shift(M: int) -> np.ndarray:
    return np.diag(omega(M) ** np.arange(M))


def hw_matrix(k: int, l: int, M: int) -> np.ndarray:
    """Single-photon matrix ``L_{k,l} = X^k Z^l``."""
    k, l = k % M, l % M
    # X^k Z^l [j, i] = omega^(l i) if j = i + k
    w = omega(M) ** (l * np.arange(M))
    return np.roll(np.diag(w), k, axis=0)


def mu(n, M: int | None = None) -> int:
    """Total mode index ``sum_m m n_m mod M``."""
    M = len(n) if M is None else M
    return int(sum(m * c for m, c in enumerate(n)) % M)


def shift_vector(n, times: int = 1) -> tuple[int, ...]:
    """Occupation vector of ``X^times |n>``."""
    return tuple(int(x) for x in np.roll(np.asarray(n), times))


@dataclass(frozen=True)
class HWOrbit:
    """Orbit ``{X^m |n>}`` of a Fock vector under the mode shift.

    ``members[m]`` is ``X^m`` applied to ``representative`` for
    ``m = 0..M-1``, so members repeat when the orbit is shorter than ``M``.
    ``representative`` is ``None`` for orbits without a ``mu == 0`` member;
    these only appear in non-strict decompositions, with ``members`` then
    starting from the earliest state of the orbit.
    """

    representative: tuple[int, ...] | None
    size: int
    members: tuple[tuple[int, ...], ...]


def orbit_decomposition(basis: FockBasis, strict: bool = True) -> list[HWOrbit]:
    """Partition the sector into mode-shift orbits.

    Each orbit is represented by its earliest member (in basis order) with
    ``mu == 0``.  If some orbit has no such member (possible only when
    ``gcd(N, M) != 1``) a strict decomposition raises
    :class:`RepresentativeNotFoundError`.
    """
    M = basis.M
    seen: set[tuple[int, ...]] = set()
    orbits = []
    for s in basis.states:
        if s in seen:
            continue
        cycle = [s]
        nxt = shift_vector(s)
        while nxt != s:
            cycle.append(nxt)
            nxt = shift_vector(nxt)
        seen.update(cycle)
        candidates = [c for c in cycle if mu(c, M) == 0]
        if not candidates:
            if strict:
                raise RepresentativeNotFoundError(
                    f"orbit of {s} has no member with mu = 0 "
                    f"(gcd(N={basis.N}, M={M}) = {math.gcd(basis.N, M)})"
                )
            orbits.append(HWOrbit(None, len(cycle), tuple(shift_vector(s, m) for m in range(M))))
            continue
        rep = min(candidates, key=basis.index.__getitem__)
        members = tuple(shift_vector(rep, m) for m in range(M))
        orbits.append(HWOrbit(rep, len(cycle), members))
    return orbits


def hw_reduce(rho, M: int, N: int | None = None, atol: float = 1e-14) -> np.ndarray:
    """HW-reduced ``M x M`` density matrix of an ``N``-photon state.

    Every orbit contributes ``(d_E / M) <X^m n|rho|X^m' n>`` with ``n`` its
    representative, so orbits shorter than ``M`` are counted ``M / d_E``
    times over the ``M`` slots and renormalized.  Accepts a state vector or
    a density matrix.  Weight above ``atol`` on an orbit without a
    ``mu == 0`` member raises :class:`RepresentativeNotFoundError`.
    """
    rho = as_density_matrix(rho)
    N = infer_photon_number(rho.shape[0], M) if N is None else N
    basis = enumerate_basis(M, N)
    out = np.zeros((M, M), dtype=complex)
    for orbit in orbit_decomposition(basis, strict=False):
        idx = [basis.index[m] for m in orbit.members]
        block = rho[np.ix_(idx, idx)]
        if orbit.representative is None:
            if np.abs(block).max() > atol:
                raise RepresentativeNotFoundError(
                    f"state has weight on the orbit of {orbit.members[0]}, "
                    "which has no member with mu = 0"
                )
            continue
        out += (orbit.size / M) * block
    return out


@dataclass
class ExpectationTable:
    """HW expectation values for an ``N``-photon, ``M``-mode state.

    ``lam[r, k, l]`` holds ``Re((-i)^r <Lambda_{k,l}>)``, so ``r = 0`` is the
    real part and ``r = 1`` the imaginary part.  Entry ``(0, 0)`` is pinned to
    exactly 1.  Shot-estimated values are stored raw, without clipping.
    """

    M: int
    N: int
    lam: np.ndarray

    def __post_init__(self):
        self.lam = np.array(self.lam, dtype=float)
        if self.lam.shape != (2, self.M, self.M):
            raise ValueError(
                f"lam must have shape (2, {self.M}, {self.M}), got {self.lam.shape}"
            )
        self.lam[0, 0, 0] = 1.0
        self.lam[1, 0, 0] = 0.0

    @classmethod
    def from_values(cls, values, M: int, N: int) -> "ExpectationTable":
        values = np.asarray(values, dtype=complex)
        return cls(M, N, np.stack([values.real, values.imag]))

    @property
    def values(self) -> np.ndarray:
        """Complex ``<Lambda_{k,l}>`` as an ``M x M`` array indexed ``[k, l]``."""
        return self.lam[0] + 1j * self.lam[1]

    def __getitem__(self, kl) -> complex:
        k, l = kl
        return complex(self.values[k % self.M, l % self.M])


def hw_expectations_exact(rho, M: int, N: int | None = None, phase_convention=None):
    """``<Lambda_{k,l}> = tr(lift(X^k Z^l) rho)`` for every ``(k, l)``.

    With a ``phase_convention`` ``theta[k, l]`` the table holds the
    generalized operators ``omega^(theta_{k,l} N) Lambda_{k,l}`` instead.
    """
    rho = as_density_matrix(rho)
    N = infer_photon_number(rho.shape[0], M) if N is None else N
    basis = enumerate_basis(M, N)
    X = lift_operator(mode_shift(M), basis)
    Z = lift_operator(phase_shift(M), basis)
    values = np.empty((M, M), dtype=complex)
    Xk = np.eye(basis.dim, dtype=complex)
    for k in range(M):
        op = Xk.copy()
        for l in range(M):
            values[k, l] = np.trace(op @ rho)
            op = op @ Z
        Xk = Xk @ X
    if phase_convention is not None:
        theta = np.asarray(phase_convention, dtype=float)
        values = values * omega(M) ** (N * theta)
    return ExpectationTable.from_values(values, M, N)


def reconstruct_hw_reduced(table: ExpectationTable, phase_convention=None) -> np.ndarray:
    """Linear inversion ``rho_HW = (1/M) sum_{k,l} <Lambda_{k,l}> L_{k, N l}^dagger``.

    Requires ``gcd(N, M) == 1``.  When the table was taken with generalized
    phases ``theta``, pass the same ``phase_convention`` so each term picks up
    the conjugate of ``omega^(N theta_{k,l} - theta_{k,Nl})`` times the
    phased single-photon matrix.
    """
    M, N = table.M, table.N
    if math.gcd(N, M) != 1:
        raise ValueError(f"reconstruction requires gcd(N, M) = 1, got N={N}, M={M}")
    if not np.all(np.isfinite(table.lam)):
        raise ValueError("expectation table is incomplete (non-finite entries)")
    theta = (
        np.zeros((M, M)) if phase_convention is None
        else np.asarray(phase_convention, dtype=float)
    )
    w = omega(M)
    values = table.values
    out = np.zeros((M, M), dtype=complex)
    for k in range(M):
        for l in range(M):
            nl = (N * l) % M
            single = w ** theta[k, nl] * hw_matrix(k, nl, M)
            factor = w ** (N * theta[k, l] - theta[k, nl])
            out += values[k, l] * (factor * single).conj().T
    return out / M
