"""Resonance parameters from finite-volume spectra.

Three estimators share the least-squares engine in :mod:`stabres.fitting`:

* ``fit``: the cotangent plateau model on a single level curve ``E_N(c)``;
* ``dos``: a Lorentzian plus linear background fitted to the summed inverse
  slopes ``sum_N |dE_N/dc|^-1`` as a function of energy;
* ``qbp``: the same Lorentzian fitted to the odds ``P/(1-P)`` of finding the
  particle inside ``[-1, x0]``, sampled along one level curve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import LevelSweep, Plateau, StabilizationDiagram, build_diagram, find_plateaus, level_sweep, nearest_plateau
from .errors import EnergyOutOfRange, ExtractionFailure, NoPeak, WeakPeak
from .fitting import FitProblem, least_squares_fit
from .io import round_sig
from .model import UNITS, BoxGrid, ShellModel
from .spectrum import illinois, interior_fraction, quantization_residual, residual_dc, residual_dq

METHODS = ("fit", "dos", "qbp")


@dataclass(frozen=True)
class Resonance:
    E_r: float
    Gamma: float
    method: str
    level_indices: tuple
    window: tuple
    residual_norm: float
    params: tuple
    x0: float | None = None


@dataclass
class ExtractionSettings:
    """Numerical choices shared by the three estimators."""

    c_min: float = 1.0
    c_max: float = 30.0
    points_per_unit: float = 200.0
    fit_N: int = 5
    window_fraction: float = 0.2
    dos_levels: tuple = (8, 9, 10)
    qbp_N: int = 10
    x0: float = 0.0
    smoothing: int = 5
    prominence: float = 1e-6
    max_asymmetry: float = 3.0
    weak_ratio: float = 1.0
    subtract_trend: bool = False
    energy_points: int = 8001
    fit_points: int = 401

    def grid(self):
        return BoxGrid.with_density(self.c_min, self.c_max, self.points_per_unit)


# -- plateau fit ---------------------------------------------------------------

def extract_plateau_fit(sweep: LevelSweep, plateau: Plateau, window_fraction: float = 0.2) -> Resonance:
    """Fit ``E_r + Gamma / (2 tan((c - L_N)/dL_N))`` around a plateau center.

    The window has length ``window_fraction * (c_right - c_left)``.  The pole
    of the cotangent is placed a quarter period before the center so the
    start point sits on the flat branch.
    """
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    c = sweep.c
    width = window_fraction * (plateau.c_right - plateau.c_left)
    lo, hi = plateau.c_center - width / 2, plateau.c_center + width / 2
    mask = (c >= lo) & (c <= hi)
    if mask.sum() < 6:
        raise ExtractionFailure("plateau window holds too few grid points; refine the grid")
    x, y = c[mask], sweep.E_of_c[mask]
    dL = (plateau.c_right - plateau.c_left) / np.pi
    slope = np.interp(plateau.c_center, c, sweep.dE_dc)
    p0 = [np.interp(plateau.c_center, c, sweep.E_of_c), 2 * abs(slope) * dL,
          plateau.c_center - 0.5 * np.pi * dL, dL]
    fit = least_squares_fit(FitProblem(x, y, "plateau", p0))
    Er, Gamma, LN, dLN = fit.params
    # (Gamma, dL) -> (-Gamma, -dL) with a shifted L_N describes the same curve
    Gamma, dLN = abs(Gamma), abs(dLN)
    if not (Er > 0 and Gamma > 0):
        raise ExtractionFailure("plateau fit produced a non-physical resonance")
    return Resonance(E_r=float(Er), Gamma=float(Gamma), method="fit", level_indices=(sweep.N,),
                     window=(float(y.min()), float(y.max())), residual_norm=fit.residual_norm,
                     params=(float(Er), float(Gamma), float(LN), float(dLN)))


# -- density of states ------------------------------------------------------

def invert_level(sweep: LevelSweep, energies):
    """Box sizes where level ``sweep.N`` has the given energies."""
    E = sweep.E_of_c
    c = sweep.c
    energies = np.asarray(energies, dtype=float)
    # E_N(c) is non-increasing, so search on the negated curve
    i = np.searchsorted(-E, -energies) - 1
    i = np.where(energies == E[0], 0, i)
    if np.any((i < 0) | (i >= len(c) - 1)):
        raise EnergyOutOfRange(f"level {sweep.N} covers E in [{E[-1]:.6g}, {E[0]:.6g}] only")
    q = np.sqrt(energies)
    G = sweep.G
    return illinois(lambda cc: quantization_residual(q, G, cc), c[i], c[i + 1])


def build_dos(diagram: StabilizationDiagram, levels, energy_grid):
    """Unnormalized density of states ``sum_N |dE_N/dc|^-1`` on ``energy_grid``."""
    E = np.asarray(energy_grid, dtype=float)
    if np.any(E <= 0):
        raise EnergyOutOfRange("density of states is built for positive energies")
    G = diagram.model.G
    rho = np.zeros_like(E)
    for N in levels:
        c = invert_level(diagram.sweep(N), E)
        q = np.sqrt(E)
        rho += np.abs(residual_dq(q, G, c) / (2 * q * residual_dc(q, G, c)))
    return E, rho


def _local_maxima(y):
    return np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1


def select_peak_window(E, y, target=None, subtract_trend=False):
    """Symmetric fit window around a peak of the sampled curve ``(E, y)``.

    The peak is the global maximum, or the local maximum nearest ``target``.
    On each side the candidates are the distance to the nearest local minimum
    and twice the distance to the half-maximum crossing; the half-width is
    the smallest candidate.  Returns ``(E_lo, E_hi, i_peak)``.
    """
    E = np.asarray(E, dtype=float)
    y = np.asarray(y, dtype=float)
    if target is None:
        i = int(np.argmax(y))
        if i == 0 or i == len(y) - 1:
            raise NoPeak("maximum lies on the boundary of the sampled range")
    else:
        peaks = _local_maxima(y)
        if len(peaks) == 0:
            raise NoPeak("curve has no interior local maximum")
        i = int(peaks[np.argmin(np.abs(E[peaks] - target))])
    base = y[0] + (y[-1] - y[0]) * (E - E[0]) / (E[-1] - E[0]) if subtract_trend else 0.0
    h = y - base
    half = h[i] / 2
    cands = []
    for step, end in ((-1, 0), (1, len(y) - 1)):
        j = i
        while j != end and y[j + step] < y[j]:
            j += step
        if j != end:
            cands.append(abs(E[j] - E[i]))
        k = i
        while k != end and h[k] > half:
            k += step
        if h[k] <= half:
            cands.append(2 * abs(E[k] - E[i]))
    if not cands:
        raise NoPeak("peak has no resolvable width inside the sampled range")
    d = min(cands)
    return max(E[i] - d, E[0]), min(E[i] + d, E[-1]), i


def peak_contrast(E, y, lo, hi, i):
    """Peak height above the window's endpoint line over the line's rise."""
    ylo, yhi = np.interp(lo, E, y), np.interp(hi, E, y)
    line = ylo + (yhi - ylo) * (E[i] - lo) / (hi - lo)
    rise = abs(yhi - ylo)
    return np.inf if rise == 0 else (y[i] - line) / rise


def fit_lorentzian(x, y, lo, hi):
    """Lorentzian plus line on the samples inside ``[lo, hi]``."""
    m = (x >= lo) & (x <= hi)
    x, y = x[m], y[m]
    if len(x) < 6:
        raise ExtractionFailure("peak window holds too few samples")
    i = int(np.argmax(y))
    b1 = (y[-1] - y[0]) / (x[-1] - x[0])
    b0 = y[0] - b1 * x[0]
    width = (hi - lo) / 2
    A = (y[i] - b0 - b1 * x[i]) * width ** 2 / 4
    fit = least_squares_fit(FitProblem(x, y, "lorentzian", [A, x[i], width, b0, b1]))
    A, Er, Gamma, b0, b1 = fit.params
    Gamma = abs(Gamma)
    if not (Er > 0 and Gamma > 0 and lo <= Er <= hi):
        raise ExtractionFailure("Lorentzian fit left the peak window")
    return float(Er), float(Gamma), fit.residual_norm, (float(A), float(Er), float(Gamma), float(b0), float(b1))


def default_energy_range(E_target):
    return 0.5 * E_target, 1.5 * E_target


def extract_dos(diagram: StabilizationDiagram, levels, window=None, E_target=None,
                energy_range=None, settings: ExtractionSettings | None = None) -> Resonance:
    """Lorentzian fit to the density of states built from ``levels``.

    Without an explicit ``window`` the peak nearest ``E_target`` is located on
    a uniform energy grid over ``energy_range`` and windowed with
    :func:`select_peak_window`.  Raises :class:`WeakPeak` when the peak does
    not stand out from the background line across the window.
    """
    s = settings or ExtractionSettings()
    levels = tuple(int(N) for N in levels)
    if window is None:
        if energy_range is None:
            if E_target is None:
                raise ValueError("need a window, an energy range or a target energy")
            energy_range = default_energy_range(E_target)
        Es = np.linspace(*energy_range, s.energy_points)
        E, rho = build_dos(diagram, levels, Es)
        lo, hi, i = select_peak_window(E, rho, E_target, s.subtract_trend)
        contrast = peak_contrast(E, rho, lo, hi, i)
        if contrast < s.weak_ratio:
            raise WeakPeak(f"peak contrast {contrast:.3g} below {s.weak_ratio:g}")
    else:
        lo, hi = map(float, window)
    E, rho = build_dos(diagram, levels, np.linspace(lo, hi, s.fit_points))
    Er, Gamma, norm, params = fit_lorentzian(E, rho, lo, hi)
    return Resonance(E_r=Er, Gamma=Gamma, method="dos", level_indices=levels, window=(float(lo), float(hi)),
                     residual_norm=norm, params=params)


# -- quasi-bound probability --------------------------------------------------

def qbp_curve(sweep: LevelSweep, x0=0.0):
    """Energies and interior odds ``P/(1-P)`` along a level, ascending in E."""
    c = sweep.c
    keep = c > max(x0, 0.0)
    P = interior_fraction(sweep.q_of_c[keep], sweep.G, c[keep], x0)
    R = P / (1 - P)
    E = sweep.E_of_c[keep]
    order = np.argsort(E)
    return E[order], R[order]


def extract_qbp(model: ShellModel, sweep: LevelSweep, x0=0.0, window=None, E_target=None,
                energy_range=None, settings: ExtractionSettings | None = None) -> Resonance:
    """Lorentzian fit to the interior odds sampled at the sweep's grid points."""
    s = settings or ExtractionSettings()
    if not -1.0 < x0 < sweep.grid.c_max:
        raise ValueError("x0 must lie in (-1, c_max)")
    E, R = qbp_curve(sweep, x0)
    if window is None:
        if energy_range is None and E_target is not None:
            energy_range = default_energy_range(E_target)
        if energy_range is not None:
            m = (E >= energy_range[0]) & (E <= energy_range[1])
            E, R = E[m], R[m]
        if len(E) < 7:
            raise NoPeak("sweep does not cover the requested energy range")
        lo, hi, _ = select_peak_window(E, R, E_target, s.subtract_trend)
    else:
        lo, hi = map(float, window)
    Er, Gamma, norm, params = fit_lorentzian(E, R, lo, hi)
    return Resonance(E_r=Er, Gamma=Gamma, method="qbp", level_indices=(sweep.N,), window=(float(lo), float(hi)),
                     residual_norm=norm, params=params, x0=float(x0))


# -- drivers -------------------------------------------------------------------

def run_method(model: ShellModel, method: str, E_target: float, settings: ExtractionSettings | None = None,
               diagram: StabilizationDiagram | None = None) -> Resonance:
    """Run one estimator for the resonance nearest ``E_target``.

    ``E_target`` only selects which plateau or peak to analyse.
    """
    s = settings or ExtractionSettings()
    grid = diagram.grid if diagram is not None else s.grid()
    if method == "fit":
        sweep = diagram.sweep(s.fit_N) if diagram is not None and len(diagram) >= s.fit_N else level_sweep(model, grid, s.fit_N)
        plateaus = find_plateaus(sweep, s.smoothing, s.prominence, s.max_asymmetry)
        return extract_plateau_fit(sweep, nearest_plateau(plateaus, E_target), s.window_fraction)
    if method == "dos":
        need = max(s.dos_levels)
        if diagram is None or len(diagram) < need:
            diagram = build_diagram(model, grid, need)
        return extract_dos(diagram, s.dos_levels, E_target=E_target, settings=s)
    if method == "qbp":
        sweep = diagram.sweep(s.qbp_N) if diagram is not None and len(diagram) >= s.qbp_N else level_sweep(model, grid, s.qbp_N)
        return extract_qbp(model, sweep, s.x0, E_target=E_target, settings=s)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def report(res: Resonance, G: float) -> dict:
    out = {"method": res.method, "G": G, "level_indices": list(res.level_indices)}
    if res.x0 is not None:
        out["x0"] = res.x0
    out.update({
        "window": [round_sig(v) for v in res.window],
        "E_r": round_sig(res.E_r),
        "Gamma": round_sig(res.Gamma),
        "residual_norm": round_sig(res.residual_norm),
        "params": [round_sig(v) for v in res.params],
    })
    return out


def failure_report(method: str, G: float, error: Exception) -> dict:
    return {"method": method, "G": G, "status": "failed", "error": f"{type(error).__name__}: {error}"}


def report_document(entries) -> dict:
    return {"units": UNITS, "results": list(entries)}
