"""Rectangular Mach-Zehnder mesh decomposition and Gaussian angle noise.

Each MZ acts on adjacent modes ``(i, i + 1)`` as

    [[e^{i phi} cos(theta), -sin(theta)],
     [e^{i phi} sin(theta),  cos(theta)]]

and the mesh ends with a diagonal layer of output phases.  ``compose``
multiplies the elements in plan order (first element acts first) and then
applies the phase layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .validation import check_unitary


@dataclass(frozen=True)
class MZElement:
    i: int
    j: int
    theta: float
    phi: float


@dataclass(frozen=True)
class ClementsPlan:
    dim: int
    elements: tuple[MZElement, ...]
    output_phases: tuple[float, ...]


@dataclass(frozen=True)
class NoiseSpec:
    """Standard deviations (radians) of the MZ reflectivity and phase angles."""

    delta_theta: float = 0.0
    delta_phi: float = 0.0

    def __post_init__(self):
        if self.delta_theta < 0 or self.delta_phi < 0:
            raise ValueError("noise standard deviations must be non-negative")

    @property
    def is_zero(self) -> bool:
        return self.delta_theta == 0 and self.delta_phi == 0


def mz_block(theta: float, phi: float) -> np.ndarray:
    e = np.exp(1j * phi)
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[e * c, -s], [e * s, c]])


def _apply_left(U, i, B):
    U[[i, i + 1], :] = B @ U[[i, i + 1], :]


def _apply_right(U, i, B):
    U[:, [i, i + 1]] = U[:, [i, i + 1]] @ B


def _null_from_right(U, row, col):
    """Angles of the block on columns ``(col, col+1)`` whose inverse, applied
    from the right, zeroes ``U[row, col]``."""
    x, y = U[row, col], U[row, col + 1]
    theta = np.arctan2(abs(x), abs(y))
    phi = np.angle(x) - np.angle(y) if abs(x) > 0 else 0.0
    return theta, phi


def _null_from_left(U, row, col):
    """Angles of the block on rows ``(row-1, row)`` that zeroes ``U[row, col]``."""
    x, y = U[row - 1, col], U[row, col]
    theta = np.arctan2(abs(y), abs(x))
    phi = np.pi + np.angle(y) - np.angle(x) if abs(y) > 0 else 0.0
    return theta, phi


def _swap_through_phases(theta, phi, d0, d1):
    """Rewrite ``B(theta, phi)^dagger diag(d0, d1)`` as ``diag(a, b) B(t', p')``."""
    A = mz_block(theta, phi).conj().T @ np.diag([d0, d1])
    s, c = abs(A[0, 1]), abs(A[1, 1])
    t = np.arctan2(s, c)
    if s < 1e-15:
        a, b, p = A[0, 0], A[1, 1], 0.0
    elif c < 1e-15:
        a, b, p = -A[0, 1], A[1, 0], 0.0
    else:
        a = -A[0, 1] / s
        b = A[1, 1] / c
        p = np.angle(A[0, 0] / (a * c))
    return t, p, a / abs(a), b / abs(b)


def decompose(U) -> ClementsPlan:
    """Rectangular-mesh decomposition of a unitary into ``n(n-1)/2`` MZs."""
    U = check_unitary(U, name="U").copy()
    n = U.shape[0]
    right: list[tuple[int, float, float]] = []
    left: list[tuple[int, float, float]] = []
    for i in range(n - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, col = n - 1 - j, i - j
                theta, phi = _null_from_right(U, row, col)
                _apply_right(U, col, mz_block(theta, phi).conj().T)
                right.append((col, theta, phi))
        else:
            for j in range(i + 1):
                row, col = n - 1 - i + j, j
                theta, phi = _null_from_left(U, row, col)
                _apply_left(U, row - 1, mz_block(theta, phi))
                left.append((row - 1, theta, phi))
    # U is now diagonal: U_in = L_1^dag ... L_k^dag D R_p ... R_1
    phases = np.diag(U).copy()
    moved = []
    for mode, theta, phi in reversed(left):
        t, p, a, b = _swap_through_phases(theta, phi, phases[mode], phases[mode + 1])
        phases[mode], phases[mode + 1] = a, b
        moved.append((mode, t, p))
    # U_in = D' B'_1 ... B'_k R_p ... R_1; moved holds B'_k first, i.e. in action order
    ordered = right + moved
    elements = tuple(MZElement(m, m + 1, float(t), float(p)) for m, t, p in ordered)
    return ClementsPlan(n, elements, tuple(float(x) for x in np.angle(phases)))


def compose(plan: ClementsPlan) -> np.ndarray:
    U = np.eye(plan.dim, dtype=complex)
    for el in plan.elements:
        _apply_left(U, el.i, mz_block(el.theta, el.phi))
    return np.exp(1j * np.asarray(plan.output_phases))[:, None] * U


def sample_offsets(n_elements: int, noise: NoiseSpec, rng: np.random.Generator):
    """Gaussian angle offsets ``(d_theta, d_phi)`` for ``n_elements`` MZs."""
    z = rng.standard_normal((2, n_elements))
    return noise.delta_theta * z[0], noise.delta_phi * z[1]


def apply_offsets(plan: ClementsPlan, d_theta, d_phi) -> ClementsPlan:
    elements = tuple(
        replace(el, theta=el.theta + float(dt), phi=el.phi + float(dp))
        for el, dt, dp in zip(plan.elements, d_theta, d_phi)
    )
    return replace(plan, elements=elements)


def perturb(plan: ClementsPlan, noise: NoiseSpec, rng: np.random.Generator) -> ClementsPlan:
    """Draw every ``theta ~ N(theta, dtheta^2)`` and ``phi ~ N(phi, dphi^2)``.

    Output phases are left untouched.
    """
    return apply_offsets(plan, *sample_offsets(len(plan.elements), noise, rng))


def noisy_unitary(U, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    return compose(perturb(decompose(U), noise, rng))


GRANULARITIES = ("configuration", "state")


def circuit_noise_hook(noise: NoiseSpec, granularity: str = "configuration"):
    """Circuit hook for :func:`hwrec.dqc1.estimate_full_table`.

    With ``"configuration"`` every DQC1 setting gets fresh angle errors drawn
    from the stream handed to the hook.  With ``"state"`` one offset vector
    is drawn on the first call and reused by every setting, modelling static
    fabrication errors for the whole reconstruction.
    """
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    frozen: list = []

    def hook(T, config, rng):
        plan = decompose(T)
        if granularity == "configuration":
            return compose(perturb(plan, noise, rng))
        if not frozen:
            frozen.append(sample_offsets(len(plan.elements), noise, rng))
        return compose(apply_offsets(plan, *frozen[0]))

    return hook
