import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nlgames.estimator import DPOSolver, check_questions
from nlgames.games import nps_game


def test_params_round_trip():
    est = DPOSolver(layer="u3ry", n_trials=3, eps_phi=1e-6, random_state=4)
    params = est.get_params()
    assert params["layer"] == "u3ry" and params["n_trials"] == 3
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(n_trials=5)
    assert est.n_trials == 5


def test_fit_chsh(chsh):
    est = DPOSolver(random_state=7).fit(chsh)
    assert est.energy_ == pytest.approx(-(2 + np.sqrt(2)) / 4, abs=1e-6)
    assert est.score() == pytest.approx((2 + np.sqrt(2)) / 4, abs=1e-6)
    assert len(est.trials_) == 1
    probs = est.predict_proba([(0, 0), (1, 1)])
    assert probs.shape == (2, 4) and np.allclose(probs.sum(axis=1), 1)
    wins = est.transform(chsh.questions)
    assert np.allclose(wins, np.cos(np.pi / 8) ** 2, atol=1e-6)
    answers = est.predict([(0, 1)] * 5, random_state=0)
    assert answers.shape == (5, 2)
    assert set(answers.ravel()) <= {0, 1}


def test_fit_is_reproducible(chsh):
    a = DPOSolver(random_state=3).fit(chsh)
    b = DPOSolver(random_state=3).fit(chsh)
    assert a.energy_ == b.energy_
    assert np.array_equal(a.strategy_.layer.phi, b.strategy_.layer.phi)


def test_nps_score_is_the_inequality():
    est = DPOSolver(random_state=0, max_adapt_ops=5, n_trials=1).fit(nps_game(3))
    assert est.score() == pytest.approx(est.energy_)


def test_refine_and_prune(k3):
    est = DPOSolver(layer="u3ry", random_state=0, refine=True, prune_threshold=1e-4).fit(k3)
    assert est.score() == pytest.approx(1.0, abs=1e-9)


def test_not_fitted(chsh):
    with pytest.raises(NotFittedError):
        DPOSolver().predict([(0, 0)])
    with pytest.raises(NotFittedError):
        DPOSolver().score()


@pytest.mark.parametrize(
    "kwargs",
    [{"layer": "rx"}, {"n_trials": 0}, {"eps_theta": -1.0}, {"reference": "one"}, {"n_trials": 1.5}],
)
def test_bad_params(kwargs, chsh):
    with pytest.raises(ValueError):
        DPOSolver(**kwargs).fit(chsh)


def test_bad_inputs(chsh):
    with pytest.raises(TypeError):
        DPOSolver().fit(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        check_questions([(0, 2)], chsh)
    with pytest.raises(ValueError):
        check_questions([], chsh)
    assert check_questions((0, 1), chsh) == [(0, 1)]
