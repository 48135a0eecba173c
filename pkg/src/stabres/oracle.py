"""Reference values: the exact S-matrix, its resonance poles, and a three-level toy model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence
from .io import write_csv
from .model import UNITS, ShellModel


def pole_function(q, G):
    """Denominator of S times ``sin q``: ``i q sin q - q cos q - G sin q``."""
    return 1j * q * np.sin(q) - q * np.cos(q) - G * np.sin(q)


def pole_function_dq(q, G):
    s, c = np.sin(q), np.cos(q)
    return 1j * s + 1j * q * c - c + q * s - G * c


def s_matrix(q, G):
    """Reflection amplitude ``(iq + q cot q + G) / (iq - q cot q - G)``.

    Evaluated with numerator and denominator multiplied by ``sin q`` so the
    cotangent poles at ``q = n pi`` drop out.  Equals ``-exp(2 i eta)`` with
    ``eta`` from :func:`stabres.spectrum.phase_shift`.
    """
    q = np.asarray(q, dtype=complex)
    num = 1j * q * np.sin(q) + q * np.cos(q) + G * np.sin(q)
    out = num / pole_function(q, G)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class PoleResult:
    n: int
    q: complex
    residual: float

    @property
    def E_complex(self):
        return self.q * self.q

    @property
    def E_r(self):
        return self.E_complex.real

    @property
    def Gamma(self):
        return -2.0 * self.E_complex.imag


def newton_pole(q0, G, max_iter=200, tol=1e-14):
    """Complex Newton iteration on :func:`pole_function` from ``q0``."""
    q = complex(q0)
    for _ in range(max_iter):
        d = pole_function_dq(q, G)
        if d == 0:
            break
        step = pole_function(q, G) / d
        q -= step
        if not np.isfinite(q):
            break
        if abs(step) <= tol * max(1.0, abs(q)):
            return q
    raise NoConvergence(f"Newton iteration from {q0} did not converge")


def default_seeds(G, n_poles):
    # the n-th interior level is pushed down (G > 0) or up (G < 0) by ~1/G
    return [n * np.pi * (1 - 1 / G) - 0.05j for n in range(1, n_poles + 1)]


def _grid_seeds(G, n_poles, re_points=None, im_points=60):
    re_max = n_poles * np.pi + 2
    re = np.linspace(0.05, re_max, re_points or int(40 * re_max))
    im = np.linspace(-3.0, -0.005, im_points)
    Q = re[None, :] + 1j * im[:, None]
    mag = np.abs(pole_function(Q, G)) / np.abs(np.exp(-1j * Q))
    inner = mag[1:-1, 1:-1]
    is_min = np.ones_like(inner, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= inner <= mag[1 + di:mag.shape[0] - 1 + di, 1 + dj:mag.shape[1] - 1 + dj]
    rows, cols = np.nonzero(is_min)
    return list(Q[rows + 1, cols + 1])


def find_poles(model: ShellModel, n_poles: int, seeds=None, grid_search: bool = True) -> list[PoleResult]:
    """Lowest ``n_poles`` resonance poles (``Re q > 0``, ``Im q < 0``) by ascending ``Re q``.

    Each seed is refined by Newton's method and retried from small
    perturbations if it fails; local minima of ``|P(q)| e^{Im q}`` on a
    coarse grid of the fourth quadrant supply extra seeds.
    """
    G = model.G
    if n_poles < 1:
        raise ValueError("n_poles must be >= 1")
    if G == 0:
        raise DomainError("the free wall has no resonance poles")
    seeds = list(seeds) if seeds is not None else default_seeds(G, n_poles)
    found = []
    failures = 0

    def accept(q):
        if q.real <= 1e-8 or q.imag >= -1e-12:
            return
        if abs(pole_function(q, G)) >= 1e-10:
            return
        if all(abs(q - f) > 1e-6 for f in found):
            found.append(q)

    for s in seeds:
        for kick in (0, 0.1, -0.1, 0.1j, -0.3j):
            try:
                accept(newton_pole(s + kick, G))
                break
            except NoConvergence:
                continue
        else:
            failures += 1
    if grid_search:
        for s in _grid_seeds(G, n_poles):
            try:
                accept(newton_pole(s, G))
            except NoConvergence:
                pass
    found.sort(key=lambda q: q.real)
    if len(found) < n_poles:
        raise NoConvergence(f"located {len(found)} of {n_poles} poles ({failures} seeds failed)")
    return [PoleResult(n=i + 1, q=q, residual=float(abs(pole_function(q, G)))) for i, q in enumerate(found[:n_poles])]


def write_poles_csv(poles, G, path):
    rows = [(p.n, p.q.real, p.q.imag, p.E_r, p.Gamma) for p in poles]
    write_csv(path, ["n", "Re_q", "Im_q", "E_r", "Gamma"], rows, comments=[f"units: {UNITS}, G={G:g}"])


# -- three-level toy model ---------------------------------------------------

def interior_slope(n=1):
    """``dpsi/dxi`` at the shell of unit-normalized level ``n`` of the interior box ``[-1, 0]``."""
    return np.sqrt(2.0) * n * np.pi * np.cos(n * np.pi)


def exterior_slope(i, c):
    """``dpsi/dxi`` at the shell of unit-normalized level ``i`` of the exterior box ``[0, c]``."""
    return np.sqrt(2.0 / c) * i * np.pi / c


def toy_couplings(model: ShellModel, interior_slope_value, exterior_slope_values):
    """Tunnelling couplings ``-(1/G) psi_int' psi_ext'`` at the shell.

    Arguments are the interface derivatives of the unit-normalized decoupled
    states (see :func:`interior_slope` and :func:`exterior_slope`).
    """
    if model.G == 0:
        raise DomainError("couplings are defined in the strong-barrier limit, G != 0")
    return tuple(float(-interior_slope_value * e / model.G) for e in exterior_slope_values)


@dataclass(frozen=True)
class ToyModel:
    """Interior level ``E_int`` coupled to exterior levels ``(i pi / L)^2``, ``i = 1, 2``."""

    E_int: float
    Delta: tuple

    def exterior_level(self, i, L):
        return (i * np.pi / np.asarray(L, dtype=float)) ** 2

    def matrices(self, L):
        L = np.atleast_1d(np.asarray(L, dtype=float))
        H = np.zeros((len(L), 3, 3))
        H[:, 0, 0] = self.E_int
        H[:, 1, 1] = self.exterior_level(1, L)
        H[:, 2, 2] = self.exterior_level(2, L)
        H[:, 0, 1] = H[:, 1, 0] = self.Delta[0]
        H[:, 0, 2] = H[:, 2, 0] = self.Delta[1]
        return H


def default_toy(G=50.0):
    """Toy model for the ground interior state; each coupling is taken where its exterior level crosses it."""
    model = ShellModel(G)
    E_int = np.pi ** 2
    # exterior level i meets the interior level at L = i
    Delta = tuple(toy_couplings(model, interior_slope(1), [exterior_slope(i, float(i))])[0] for i in (1, 2))
    return ToyModel(E_int=E_int, Delta=Delta)


def symmetric_eigvals3(H):
    """Ascending eigenvalues of real symmetric 3x3 matrices (closed-form cubic)."""
    H = np.asarray(H, dtype=float)
    a11, a22, a33 = H[..., 0, 0], H[..., 1, 1], H[..., 2, 2]
    a12, a13, a23 = H[..., 0, 1], H[..., 0, 2], H[..., 1, 2]
    q = (a11 + a22 + a33) / 3
    p2 = (a11 - q) ** 2 + (a22 - q) ** 2 + (a33 - q) ** 2 + 2 * (a12 ** 2 + a13 ** 2 + a23 ** 2)
    p = np.sqrt(p2 / 6)
    safe = np.where(p > 0, p, 1.0)
    b11, b22, b33 = (a11 - q) / safe, (a22 - q) / safe, (a33 - q) / safe
    b12, b13, b23 = a12 / safe, a13 / safe, a23 / safe
    r = 0.5 * (b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) + b13 * (b12 * b23 - b22 * b13))
    phi = np.arccos(np.clip(r, -1.0, 1.0)) / 3
    hi = q + 2 * p * np.cos(phi)
    lo = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    mid = 3 * q - hi - lo
    return np.stack([lo, mid, hi], axis=-1)


def toy_spectrum(toy: ToyModel, L_grid):
    """Sorted eigenvalues ``(lambda1, lambda2, lambda3)`` at each ``L``; shape ``(len(L), 3)``."""
    L = np.atleast_1d(np.asarray(L_grid, dtype=float))
    if np.any(L <= 0):
        raise DomainError("L must be positive")
    return symmetric_eigvals3(toy.matrices(L))


def write_toy_csv(toy, L_grid, path):
    lam = toy_spectrum(toy, L_grid)
    rows = np.column_stack([np.asarray(L_grid, dtype=float), lam])
    comments = [f"units: {UNITS}",
                f"E_int={toy.E_int:.6g}, Delta1={toy.Delta[0]:.6g}, Delta2={toy.Delta[1]:.6g}"]
    write_csv(path, ["L", "lambda1", "lambda2", "lambda3"], rows, comments=comments)
