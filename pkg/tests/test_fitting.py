import numpy as np
import pytest
from scipy.optimize import least_squares

from stabres.errors import NoConvergence, SingularJacobian
from stabres.fitting import MODELS, FitProblem, evaluate, least_squares_fit


def test_linear_exact():
    x = np.linspace(-2, 3, 20)
    res = least_squares_fit(FitProblem(x, 1.5 - 0.25 * x, "linear", [0.0, 0.0]))
    assert np.allclose(res.params, [1.5, -0.25], atol=1e-12)
    assert res.residual_norm < 1e-12


def test_lorentzian_roundtrip():
    truth = np.array([0.02, 8.97, 0.246, 0.3, 0.01])
    x = np.linspace(8.5, 9.5, 300)
    y = evaluate("lorentzian", truth, x)
    res = least_squares_fit(FitProblem(x, y, "lorentzian", [0.03, 8.9, 0.4, 0.0, 0.0]))
    assert np.allclose(res.params, truth, rtol=1e-8)


def test_plateau_roundtrip():
    truth = np.array([8.97, 0.258, 3.9, 0.33])
    x = np.linspace(4.55, 4.75, 60)
    y = evaluate("plateau", truth, x)
    res = least_squares_fit(FitProblem(x, y, "plateau", [9.0, 0.3, 4.0, 0.3]))
    assert np.allclose(res.params, truth, rtol=1e-6)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_analytic_jacobians(name, rng):
    m = MODELS[name]
    p = {"linear": [1.0, 2.0], "lorentzian": [0.5, 1.0, 0.7, 0.1, 0.2], "plateau": [2.0, 0.4, -0.3, 0.9]}[name]
    p = np.array(p)
    x = np.linspace(0.1, 1.2, 9)
    J = m.jacobian(p, x)
    for k in range(m.n_params):
        h = 1e-6 * max(1, abs(p[k]))
        dp = np.zeros_like(p)
        dp[k] = h
        fd = (m.value(p + dp, x) - m.value(p - dp, x)) / (2 * h)
        assert np.allclose(J[:, k], fd, rtol=1e-6, atol=1e-8)


def test_agrees_with_scipy_on_noisy_data(rng):
    truth = np.array([0.1, 5.0, 0.8, 1.0, -0.05])
    x = np.linspace(3, 7, 200)
    y = evaluate("lorentzian", truth, x) + rng.normal(0, 0.01, x.size)
    p0 = [0.2, 4.8, 1.0, 0.9, 0.0]
    ours = least_squares_fit(FitProblem(x, y, "lorentzian", p0))
    ref = least_squares(lambda p: evaluate("lorentzian", p, x) - y, p0, method="lm", xtol=1e-15, ftol=1e-15)
    assert np.allclose(ours.params, ref.x, rtol=1e-6)
    assert ours.residual_norm == pytest.approx(np.linalg.norm(ref.fun), rel=1e-9)


def test_singular_and_nonconvergent():
    x = np.linspace(0, 1, 10)
    with pytest.raises(SingularJacobian):
        # zero amplitude makes the centre and width invisible
        least_squares_fit(FitProblem(x, np.ones_like(x), "lorentzian", [0.0, 0.5, 0.2, 1.0, 0.0]))
    y = evaluate("lorentzian", [0.01, 0.5, 0.05, 0.0, 0.0], x)
    with pytest.raises(NoConvergence):
        least_squares_fit(FitProblem(x, y, "lorentzian", [0.02, 0.4, 0.2, 0.1, 0.0]), max_iter=2)


def test_bounds_are_respected():
    x = np.linspace(-1, 1, 11)
    res = least_squares_fit(FitProblem(x, 2 + 3 * x, "linear", [0, 0], bounds=([-np.inf, -np.inf], [np.inf, 1.0])))
    assert res.params[1] <= 1.0


@pytest.mark.parametrize("kwargs", [
    dict(xs=[0, 1, 2], ys=[0, 1, 2], model_id="lorentzian", p0=[1, 1, 1, 1, 1]),
    dict(xs=[0, 2, 1], ys=[0, 1, 2], model_id="linear", p0=[0, 0]),
    dict(xs=[0, 1, 2], ys=[0, 1], model_id="linear", p0=[0, 0]),
    dict(xs=[0, 1, 2], ys=[0, 1, 2], model_id="linear", p0=[0]),
])
def test_problem_validation(kwargs):
    with pytest.raises(ValueError):
        FitProblem(**kwargs)
    with pytest.raises(KeyError):
        FitProblem([0, 1, 2], [0, 1, 2], "cubic", [0])
