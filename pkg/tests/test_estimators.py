import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import random_state
from hwrec.estimators import DQC1Reconstructor, HWReducedMLE
from hwrec.hw import hw_expectations_exact, hw_reduce
from hwrec.mle import fidelity


def test_params_round_trip():
    est = DQC1Reconstructor(M=5, n_shots=64, delta_theta=0.1)
    params = est.get_params()
    assert params["M"] == 5 and params["n_shots"] == 64 and params["delta_theta"] == 0.1
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(n_shots=None)
    assert est.n_shots is None
    assert HWReducedMLE(tol=1e-8).get_params()["tol"] == 1e-8


def test_mle_estimator_on_exact_table(rng):
    psi = random_state(3, 2, rng)
    table = hw_expectations_exact(psi, 3, 2)
    est = HWReducedMLE().fit(table)
    assert fidelity(hw_reduce(psi, 3, 2), est.rho_) >= 1 - 1e-6
    assert est.n_iter_ >= 0 and est.history_
    np.testing.assert_allclose(est.predict().lam, table.lam, atol=1e-4)
    assert est.score(table) <= 0
    assert est.score(table) == pytest.approx(-est.objective_, abs=1e-12)


def test_mle_estimator_input_checks():
    with pytest.raises(TypeError):
        HWReducedMLE().fit(np.zeros((2, 3, 3)))
    with pytest.raises(NotFittedError):
        HWReducedMLE().predict()


def test_reconstructor_exact_mode(rng):
    psi = random_state(3, 2, rng)
    est = DQC1Reconstructor(M=3, n_shots=None)
    rho = est.fit_transform(psi)
    assert rho.shape == (3, 3)
    assert est.N_ == 2
    assert est.score(psi) >= 1 - 1e-6


def test_reconstructor_shots_and_noise_are_seeded(rng):
    psi = random_state(3, 2, rng)
    a = DQC1Reconstructor(M=3, n_shots=256, delta_theta=0.05, random_state=3).fit(psi)
    b = DQC1Reconstructor(M=3, n_shots=256, delta_theta=0.05, random_state=3).fit(psi)
    np.testing.assert_array_equal(a.rho_, b.rho_)
    assert 0.5 < a.score(psi) < 1


def test_reconstructor_rejects_bad_sector():
    with pytest.raises(ValueError):
        DQC1Reconstructor(M=4).fit(np.ones(10) / np.sqrt(10))
    with pytest.raises(ValueError):
        DQC1Reconstructor(M=3).fit(np.ones(7) / np.sqrt(7))
