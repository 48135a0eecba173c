"""Levenberg-Marquardt least squares for the small parametric models used here."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NoConvergence, SingularJacobian


@dataclass(frozen=True)
class CurveModel:
    n_params: int
    value: Callable
    jacobian: Callable
    names: tuple


def _linear(p, x):
    return p[0] + p[1] * x


def _linear_jac(p, x):
    return np.column_stack([np.ones_like(x), x])


def _lorentzian(p, x):
    A, Er, Gamma, b0, b1 = p
    return A / ((x - Er) ** 2 + Gamma ** 2 / 4) + b0 + b1 * x


def _lorentzian_jac(p, x):
    A, Er, Gamma, _, _ = p
    d = (x - Er) ** 2 + Gamma ** 2 / 4
    return np.column_stack([1 / d, 2 * A * (x - Er) / d ** 2, -0.5 * A * Gamma / d ** 2,
                            np.ones_like(x), x])


def _plateau(p, x):
    Er, Gamma, LN, dL = p
    return Er + Gamma / (2 * np.tan((x - LN) / dL))


def _plateau_jac(p, x):
    Er, Gamma, LN, dL = p
    u = (x - LN) / dL
    s2 = np.sin(u) ** 2
    return np.column_stack([np.ones_like(x), 1 / (2 * np.tan(u)), Gamma / (2 * dL * s2),
                            Gamma * (x - LN) / (2 * dL ** 2 * s2)])


MODELS = {
    "linear": CurveModel(2, _linear, _linear_jac, ("b0", "b1")),
    "lorentzian": CurveModel(5, _lorentzian, _lorentzian_jac, ("A", "E_r", "Gamma", "b0", "b1")),
    "plateau": CurveModel(4, _plateau, _plateau_jac, ("E_r", "Gamma", "L_N", "dL_N")),
}


@dataclass(frozen=True, eq=False)
class FitProblem:
    xs: np.ndarray
    ys: np.ndarray
    model_id: str
    p0: np.ndarray
    bounds: Optional[tuple] = None  # (lower, upper) arrays, +-inf allowed

    def __post_init__(self):
        if self.model_id not in MODELS:
            raise KeyError(f"unknown model {self.model_id!r}")
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "p0", p0)
        k = MODELS[self.model_id].n_params
        if len(p0) != k:
            raise ValueError(f"{self.model_id} takes {k} parameters")
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs and ys must be 1-d arrays of equal length")
        if len(xs) < k + 1:
            raise ValueError(f"need at least {k + 1} points")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing")


@dataclass(frozen=True, eq=False)
class FitResult:
    params: np.ndarray
    residual_norm: float
    iterations: int


def least_squares_fit(problem: FitProblem, xtol: float = 1e-10, max_iter: int = 500) -> FitResult:
    """Minimize the squared residuals of ``problem`` by Levenberg-Marquardt.

    Damping is scaled by the running maximum of the Jacobian column norms
    (Marquardt scaling).  Converges when an accepted step changes the scaled
    parameter vector by less than ``xtol`` relative.
    """
    model = MODELS[problem.model_id]
    x, y = problem.xs, problem.ys
    lo, hi = (None, None) if problem.bounds is None else map(np.asarray, problem.bounds)

    def clip(p):
        return p if lo is None else np.clip(p, lo, hi)

    def residual(p):
        return model.value(p, x) - y

    p = clip(problem.p0.copy())
    r = residual(p)
    if not np.all(np.isfinite(r)):
        raise SingularJacobian("model is not finite at the initial guess")
    cost = r @ r
    lam = 1e-3
    scale = np.zeros(model.n_params)
    for it in range(1, max_iter + 1):
        J = model.jacobian(p, x)
        if not np.all(np.isfinite(J)):
            raise SingularJacobian("non-finite Jacobian")
        col = np.linalg.norm(J, axis=0)
        if np.any(col == 0):
            raise SingularJacobian("a parameter does not affect the model")
        scale = np.maximum(scale, col)
        if np.linalg.matrix_rank(J / col) < model.n_params:
            raise SingularJacobian("Jacobian is rank deficient")
        while True:
            A = np.vstack([J, np.diag(np.sqrt(lam) * scale)])
            b = np.concatenate([-r, np.zeros(model.n_params)])
            step = np.linalg.lstsq(A, b, rcond=None)[0]
            trial = clip(p + step)
            r_new = residual(trial)
            c_new = r_new @ r_new if np.all(np.isfinite(r_new)) else np.inf
            if c_new <= cost:
                break
            lam *= 10.0
            if lam > 1e20:
                # no downhill step exists at working precision
                return FitResult(p, float(np.sqrt(cost)), it)
        dp = trial - p
        p, r, cost = trial, r_new, c_new
        lam = max(lam / 10.0, 1e-15)
        if np.linalg.norm(scale * dp) <= xtol * (np.linalg.norm(scale * p) + xtol) or cost == 0:
            return FitResult(p, float(np.sqrt(cost)), it)
    raise NoConvergence(f"no convergence after {max_iter} iterations")


def evaluate(model_id, params, x):
    return MODELS[model_id].value(np.asarray(params, dtype=float), np.asarray(x, dtype=float))
