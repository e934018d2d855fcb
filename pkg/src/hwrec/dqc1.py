"""Two-detector DQC1 interferometer: circuits, the arm-parity observable and
the aggregation of erasing-channel runs into HW expectation values.

The 2M-mode transformation is

    T = (W^dagger (+) I) H^dagger (I (+) V) H (W (+) I),
    H = [[I, I], [I, -I]] / sqrt(2),

with the input state in the upper M modes and vacuum in the lower ones.
Two bucket detectors record the photon numbers ``N_A`` and ``N_B`` of the
arms; ``zeta = (-1)^N_B`` then has expectation ``<(U + U^dagger)/2>`` for
``U = W^dagger V W`` lifted to the N-photon sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .fock import enumerate_basis, lift_columns, lift_operator
from .hw import ExpectationTable, hw_matrix, phase_shift
from .validation import (
    check_dqc1_sector,
    check_unitary,
    infer_photon_number,
)

W_IDENTITY = "identity"
W_FOURIER = "fourier"


def beam_splitter(M: int) -> np.ndarray:
    I = np.eye(M)
    return np.block([[I, I], [I, -I]]).astype(complex) / np.sqrt(2)


def fourier_matrix(M: int) -> np.ndarray:
    """Generalized Hadamard ``H_{1,0}`` with ``H Z H^dagger = X``.

    Entry ``(j, k)`` is ``omega^(-j k) / sqrt(M)``, the inverse DFT.
    """
    j = np.arange(M)
    return np.exp(-2j * np.pi * np.outer(j, j) / M) / np.sqrt(M)


@dataclass(frozen=True)
class DQC1Circuit:
    M: int
    W: np.ndarray
    V: np.ndarray
    T: np.ndarray

    @property
    def U(self) -> np.ndarray:
        return self.W.conj().T @ self.V @ self.W


def build_circuit(W, V) -> DQC1Circuit:
    W = check_unitary(W, name="W")
    V = check_unitary(V, name="V")
    if W.shape != V.shape:
        raise ValueError(f"W and V shapes differ: {W.shape} vs {V.shape}")
    M = W.shape[0]
    I = np.eye(M, dtype=complex)
    Z = np.zeros((M, M), dtype=complex)
    H = beam_splitter(M)
    T = (
        np.block([[W.conj().T, Z], [Z, I]])
        @ H.conj().T
        @ np.block([[I, Z], [Z, V]])
        @ H
        @ np.block([[W, Z], [Z, I]])
    )
    return DQC1Circuit(M, W, V, T)


@lru_cache(maxsize=None)
def _output_layout(M: int, N: int):
    inner = enumerate_basis(M, N)
    outer = enumerate_basis(2 * M, N)
    cols = inner.embed(outer)
    n_b = np.array([sum(s[M:]) for s in outer.states])
    return outer, cols, n_b


def _state_and_photons(state, M: int):
    state = np.asarray(state, dtype=complex)
    return state, infer_photon_number(state.shape[0], M)


def outcome_distribution(state, circuit_or_T, N: Optional[int] = None) -> np.ndarray:
    """Probability of each lower-arm count ``N_B = 0..N``.

    ``circuit_or_T`` is a :class:`DQC1Circuit` or a raw ``2M x 2M`` unitary
    (for instance a noisy realization of the circuit).
    """
    T = circuit_or_T.T if isinstance(circuit_or_T, DQC1Circuit) else np.asarray(circuit_or_T)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] % 2:
        raise ValueError(f"expected a 2M x 2M interferometer, got shape {T.shape}")
    M = T.shape[0] // 2
    state = np.asarray(state, dtype=complex)
    if N is None:
        N = infer_photon_number(state.shape[0], M)
    outer, cols, n_b = _output_layout(M, N)
    if state.shape[0] != len(cols):
        raise ValueError(
            f"state dimension {state.shape[0]} does not match the N={N}, M={M} sector"
        )
    amps = lift_columns(T, outer, cols)
    if state.ndim == 1:
        probs = np.abs(amps @ state) ** 2
    else:
        probs = np.einsum("ai,ij,aj->a", amps, state, amps.conj()).real
    dist = np.bincount(n_b, weights=probs, minlength=N + 1)
    return dist


def zeta_from_distribution(dist) -> float:
    dist = np.asarray(dist, dtype=float)
    return float(np.sum((-1.0) ** np.arange(len(dist)) * dist))


def zeta_exact(state, circuit_or_T, N: Optional[int] = None) -> float:
    """Exact ``<zeta> = sum_{N_B} (-1)^N_B p(N_B)``."""
    return zeta_from_distribution(outcome_distribution(state, circuit_or_T, N))


@dataclass(frozen=True)
class ShotTally:
    counts: np.ndarray
    total: int


def sample_zeta(distribution, n_shots: int, rng: np.random.Generator):
    """Multinomial shot estimate of ``<zeta>`` from an outcome distribution.

    Returns ``(estimate, tally)``.
    """
    p = np.asarray(distribution, dtype=float)
    if p.size == 0:
        raise ValueError("empty outcome distribution")
    if n_shots < 1:
        raise ValueError(f"n_shots must be positive, got {n_shots}")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    counts = rng.multinomial(n_shots, p)
    signs = (-1.0) ** np.arange(len(p))
    return float(signs @ counts / n_shots), ShotTally(counts, int(n_shots))


@dataclass(frozen=True)
class MeasurementConfig:
    """One DQC1 setting.

    ``k, l`` name the HW operator being estimated.  For ``k >= 1`` the lower
    arm applies ``e^{i theta} Lambda_{k,l}`` with ``W = I``; for ``k = 0`` it
    applies ``e^{i theta} Lambda_{l,0}`` conjugated by the Fourier matrix.
    ``theta`` is the total phase ``-r pi / (2N) + 2 pi kappa m / M`` with
    ``kappa`` the shift power of the applied operator.
    """

    r: int
    k: int
    l: int
    m: int
    W_tag: str
    theta: float

    @property
    def kappa(self) -> int:
        return self.k if self.W_tag == W_IDENTITY else self.l

    def mode_matrices(self, M: int) -> tuple[np.ndarray, np.ndarray]:
        if self.W_tag == W_IDENTITY:
            W = np.eye(M, dtype=complex)
            V = hw_matrix(self.k, self.l, M)
        else:
            W = fourier_matrix(M)
            V = hw_matrix(self.l, 0, M)
        return W, np.exp(1j * self.theta) * V

    def circuit(self, M: int) -> DQC1Circuit:
        return build_circuit(*self.mode_matrices(M))


def _config(r: int, k: int, l: int, m: int, M: int, N: int) -> MeasurementConfig:
    tag = W_IDENTITY if k >= 1 else W_FOURIER
    kappa = k if k >= 1 else l
    theta = -r * np.pi / (2 * N) + 2 * np.pi * kappa * m / M
    return MeasurementConfig(r, k, l, m, tag, theta)


def configs_for(k: int, l: int, r: int, M: int, N: int) -> list[MeasurementConfig]:
    """The ``M`` erasing-channel settings for one ``(r, k, l)``."""
    if (k % M, l % M) == (0, 0):
        raise ValueError("<Lambda_{0,0}> = 1 is never measured")
    return [_config(r, k % M, l % M, m, M, N) for m in range(M)]


def measurement_schedule(M: int, N: int) -> list[MeasurementConfig]:
    """All ``2 M^3 - 2 M`` settings, ordered by ``(k, l, r, m)``."""
    check_dqc1_sector(M, N)
    out = []
    for k in range(M):
        for l in range(M):
            if (k, l) == (0, 0):
                continue
            for r in (0, 1):
                out.extend(configs_for(k, l, r, M, N))
    return out


def aggregation_weights(kappa: int, M: int, N: int) -> np.ndarray:
    """Coefficients ``2^(N - delta) cos(2 pi kappa m N / M) / M`` over ``m``.

    ``delta = 1`` when ``2 kappa N = 0 mod M``.  Requires
    ``N <= M / gcd(2 kappa, M)``.
    """
    if kappa % M == 0:
        raise ValueError("the erasing channel needs a nonzero shift power")
    limit = M // math.gcd(2 * kappa, M)
    if N > limit:
        raise ValueError(
            f"erasing channel requires N <= M / gcd(2k, M) = {limit}, got N={N}"
        )
    delta = 1 if (2 * kappa * N) % M == 0 else 0
    m = np.arange(M)
    return 2.0 ** (N - delta) / M * np.cos(2 * np.pi * kappa * m * N / M)


CircuitHook = Callable[[np.ndarray, MeasurementConfig, np.random.Generator], np.ndarray]


def _zeta(state, config, M, N, n_shots, rng, hook):
    T = config.circuit(M).T
    if hook is not None:
        T = hook(T, config, rng)
    dist = outcome_distribution(state, T, N)
    if n_shots is None:
        return zeta_from_distribution(dist)
    return sample_zeta(dist, n_shots, rng)[0]


def estimate_hw_expectation(
    state,
    k: int,
    l: int,
    r: int,
    M: int,
    n_shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    circuit_hook: Optional[CircuitHook] = None,
) -> float:
    """DQC1 estimate of ``lambda_{r,k,l} = Re((-i)^r <Lambda_{k,l}>)``.

    ``n_shots=None`` uses exact parity expectations.  Each of the ``M``
    erasing-channel runs gets its own substream spawned from ``rng``.
    """
    state, N = _state_and_photons(state, M)
    configs = configs_for(k, l, r, M, N)
    weights = aggregation_weights(configs[0].kappa, M, N)
    if n_shots is not None or circuit_hook is not None:
        if rng is None:
            raise ValueError("shot sampling and noisy circuits need an rng")
        streams = rng.spawn(len(configs))
    else:
        streams = [None] * len(configs)
    zetas = [
        _zeta(state, c, M, N, n_shots, s, circuit_hook) for c, s in zip(configs, streams)
    ]
    return float(weights @ np.array(zetas))


def estimate_full_table(
    state,
    M: int,
    n_shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    circuit_hook: Optional[CircuitHook] = None,
) -> ExpectationTable:
    """Run the whole schedule and assemble an :class:`ExpectationTable`.

    Configuration ``i`` of :func:`measurement_schedule` draws from the
    ``i``-th child of ``rng``, so results do not depend on evaluation order.
    ``circuit_hook(T, config, rng)`` may replace each ideal 2M-mode unitary,
    e.g. by a noisy realization.
    """
    state, N = _state_and_photons(state, M)
    schedule = measurement_schedule(M, N)
    if n_shots is not None or circuit_hook is not None:
        if rng is None:
            raise ValueError("shot sampling and noisy circuits need an rng")
        streams = rng.spawn(len(schedule))
    else:
        streams = [None] * len(schedule)
    zetas = np.array(
        [_zeta(state, c, M, N, n_shots, s, circuit_hook) for c, s in zip(schedule, streams)]
    )
    lam = np.zeros((2, M, M))
    for start in range(0, len(schedule), M):
        c = schedule[start]
        w = aggregation_weights(c.kappa, M, N)
        lam[c.r, c.k, c.l] = w @ zetas[start:start + M]
    return ExpectationTable(M, N, lam)


def erase(op: np.ndarray, kN: int, M: int, N: int, sign: int = 1) -> np.ndarray:
    """``(1/M) sum_m omega^(sign m kN) lift(Z)^-m op lift(Z)^m`` on the sector.

    Keeps exactly the entries ``(nu, n)`` with ``mu(n - nu) = -sign kN``.
    """
    basis = enumerate_basis(M, N)
    Zf = lift_operator(phase_shift(M), basis)
    Zinv = Zf.conj().T
    w = np.exp(2j * np.pi / M)
    out = np.zeros_like(op, dtype=complex)
    Zm = np.eye(basis.dim, dtype=complex)
    Zm_inv = np.eye(basis.dim, dtype=complex)
    for m in range(M):
        out += w ** (sign * m * kN) * (Zm_inv @ op @ Zm)
        Zm = Zm @ Zf
        Zm_inv = Zm_inv @ Zinv
    return out / M

