"""scikit-learn style front ends for MLE fitting and two-detector reconstruction.

Both classes follow the estimator contract: hyperparameters are set in
``__init__`` and exposed through ``get_params``/``set_params``; fitted state
lives in attributes with a trailing underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import mle
from .clements import NoiseSpec, circuit_noise_hook
from .dqc1 import estimate_full_table
from .hw import ExpectationTable, hw_reduce
from .validation import as_density_matrix, check_dqc1_sector, infer_photon_number


class HWReducedMLE(BaseEstimator):
    """Physical HW-reduced density matrix from an :class:`ExpectationTable`.

    Parameters
    ----------
    max_iter : int
        Iteration cap of the local optimizer.
    tol : float
        Stop once the objective changes by less than this.
    restarts : int
        Extra randomly perturbed starts besides the linear-inversion one.
    random_state : int or None
        Seed for the restarts.
    eps : float
        Floor of the ``1 - lambda~^2`` denominator.
    """

    def __init__(self, max_iter=10_000, tol=1e-10, restarts=0, random_state=None, eps=1e-6):
        self.max_iter = max_iter
        self.tol = tol
        self.restarts = restarts
        self.random_state = random_state
        self.eps = eps

    def fit(self, X: ExpectationTable, y=None):
        if not isinstance(X, ExpectationTable):
            raise TypeError(f"expected an ExpectationTable, got {type(X).__name__}")
        result = mle.fit(
            X,
            max_iter=self.max_iter,
            tol=self.tol,
            restarts=self.restarts,
            seed=self.random_state,
            eps=self.eps,
        )
        self.M_, self.N_ = X.M, X.N
        self.rho_ = result.rho
        self.objective_ = result.final_objective
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.history_ = result.history
        return self

    def predict(self, X=None) -> ExpectationTable:
        """Expectation table implied by the fitted density matrix."""
        check_is_fitted(self, "rho_")
        return ExpectationTable(self.M_, self.N_, mle.predicted_lambdas(self.rho_, self.N_))

    def score(self, X: ExpectationTable, y=None) -> float:
        """Negative likelihood objective of ``X`` under the fitted state."""
        check_is_fitted(self, "rho_")
        return -mle.likelihood_of_density(self.rho_, X, self.eps)


class DQC1Reconstructor(BaseEstimator):
    """Simulated two-detector reconstruction of a multiphoton state.

    ``fit`` takes an ``N``-photon state over ``M`` modes (amplitude vector
    or density matrix), simulates every DQC1 setting with ``n_shots`` shots
    (``None`` for exact parities), optionally through noisy Mach-Zehnder
    meshes, and fits the MLE density matrix.
    """

    def __init__(
        self,
        M=3,
        n_shots=2048,
        delta_theta=0.0,
        delta_phi=0.0,
        noise_granularity="configuration",
        max_iter=10_000,
        tol=1e-10,
        random_state=None,
    ):
        self.M = M
        self.n_shots = n_shots
        self.delta_theta = delta_theta
        self.delta_phi = delta_phi
        self.noise_granularity = noise_granularity
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _hook(self):
        noise = NoiseSpec(self.delta_theta, self.delta_phi)
        if noise.is_zero:
            return None
        return circuit_noise_hook(noise, self.noise_granularity)

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=complex)
        N = infer_photon_number(X.shape[0], self.M)
        check_dqc1_sector(self.M, N)
        rng = np.random.default_rng(self.random_state)
        self.table_ = estimate_full_table(X, self.M, self.n_shots, rng, self._hook())
        self.mle_ = HWReducedMLE(max_iter=self.max_iter, tol=self.tol).fit(self.table_)
        self.N_ = N
        self.rho_ = self.mle_.rho_
        return self

    def transform(self, X):
        """Reconstruct ``X`` and return the MLE density matrix."""
        return self.fit(X).rho_

    def fit_transform(self, X, y=None):
        return self.transform(X)

    def score(self, X, y=None) -> float:
        """Fidelity of the fitted reconstruction with the HW-reduced ``X``."""
        check_is_fitted(self, "rho_")
        truth = hw_reduce(as_density_matrix(X), self.M, self.N_)
        return mle.fidelity(truth, self.rho_)
