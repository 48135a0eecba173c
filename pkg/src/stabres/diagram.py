"""Stabilization diagrams: level energies as functions of the box size."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import DegenerateRoot, NoPlateau
from .io import write_csv
from .model import UNITS, BoxGrid, ShellModel
from .spectrum import Level, level_momenta, residual_dc, residual_dq


@dataclass(frozen=True, eq=False)
class LevelSweep:
    """Energy of level ``N`` (ordered by energy at each ``c``) over a grid."""

    N: int
    grid: BoxGrid
    G: float
    q_of_c: np.ndarray
    E_of_c: np.ndarray
    dE_dc: np.ndarray
    d2E_dc2: np.ndarray

    @property
    def c(self):
        return self.grid.values()


@dataclass(frozen=True)
class Plateau:
    N: int
    c_left: float
    c_right: float
    c_center: float
    E_center: float
    c_flat: float  # location of the smallest |dE/dc|
    E_span: tuple = field(default=(0.0, 0.0))

    def contains_energy(self, E):
        lo, hi = self.E_span
        return lo <= E <= hi


@dataclass(frozen=True, eq=False)
class StabilizationDiagram:
    model: ShellModel
    grid: BoxGrid
    sweeps: tuple

    def __iter__(self):
        return iter(self.sweeps)

    def __len__(self):
        return len(self.sweeps)

    def sweep(self, N):
        if not 1 <= N <= len(self.sweeps):
            raise IndexError(f"level {N} not in diagram (1..{len(self.sweeps)})")
        return self.sweeps[N - 1]

    def energies(self):
        return np.column_stack([s.E_of_c for s in self.sweeps])


def _slope(q, G, c):
    fq = residual_dq(q, G, c)
    if np.any(np.abs(fq) < 1e-12):
        raise DegenerateRoot("quantization residual is tangent at the root; perturb c")
    return -2.0 * q * residual_dc(q, G, c) / fq


def level_derivative(level: Level, G: float) -> float:
    """Exact ``dE/dc`` of a converged level by implicit differentiation."""
    return float(_slope(level.q, G, level.c))


def make_sweep(N, grid, G, q):
    c = grid.values()
    dE = _slope(q, G, c)
    d2 = np.gradient(dE, grid.spacing)
    return LevelSweep(N=N, grid=grid, G=G, q_of_c=q, E_of_c=q * q, dE_dc=dE, d2E_dc2=d2)


def build_diagram(model: ShellModel, grid: BoxGrid, n_levels: int) -> StabilizationDiagram:
    """Lowest ``n_levels`` energies at every grid point, one sweep per index."""
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    q = level_momenta(model.G, grid.values(), n_levels)
    sweeps = tuple(make_sweep(N + 1, grid, model.G, q[:, N]) for N in range(n_levels))
    return StabilizationDiagram(model=model, grid=grid, sweeps=sweeps)


def level_sweep(model: ShellModel, grid: BoxGrid, N: int) -> LevelSweep:
    q = level_momenta(model.G, grid.values(), N)[:, N - 1]
    return make_sweep(N, grid, model.G, q)


def smooth(y, width=5):
    """Centered moving average; the ends use the shrinking available window."""
    if width <= 1:
        return np.asarray(y, dtype=float)
    kernel = np.ones(width)
    num = np.convolve(y, kernel, mode="same")
    den = np.convolve(np.ones_like(y), kernel, mode="same")
    return num / den


def find_plateaus(sweep: LevelSweep, smoothing: int = 5, prominence: float = 1e-6,
                  max_asymmetry: float = 3.0) -> list[Plateau]:
    """Flat stretches of a level curve bounded by extrema of ``d2E/dc2``.

    Each local minimum of ``|dE/dc|`` is a candidate.  Its left edge is the
    nearest preceding maximum of the smoothed second derivative and its right
    edge the nearest following minimum (roles swap for rising curves).
    ``prominence`` is relative to ``max|d2E/dc2|``.  A candidate qualifies
    when the curvature changes sign across it and the flat point is not more
    than ``max_asymmetry`` times closer to one edge than the other.

    Returns ``[]`` if the curve has no flat candidates; raises
    :class:`NoPlateau` if candidates exist but none qualifies.
    """
    c = sweep.c
    if len(c) < 5:
        raise ValueError("sweep needs at least 5 points")
    slope = np.abs(sweep.dE_dc)
    d2 = smooth(sweep.d2E_dc2, smoothing)
    if np.mean(sweep.dE_dc) > 0:
        d2 = -d2
    scale = np.max(np.abs(d2[2:-2])) if len(d2) > 4 else np.max(np.abs(d2))
    prom = prominence * scale
    upper, _ = find_peaks(d2, prominence=prom)
    lower, _ = find_peaks(-d2, prominence=prom)
    flats, _ = find_peaks(-slope)
    if len(flats) == 0:
        return []
    found = []
    for i in flats:
        left = upper[upper < i]
        right = lower[lower > i]
        if len(left) == 0 or len(right) == 0:
            continue
        il, ir = left[-1], right[0]
        if not d2[il] > 0 > d2[ir]:
            continue
        dl, dr = c[i] - c[il], c[ir] - c[i]
        if max(dl, dr) > max_asymmetry * min(dl, dr):
            continue
        E = sweep.E_of_c[il:ir + 1]
        cc = 0.5 * (c[il] + c[ir])
        found.append(Plateau(N=sweep.N, c_left=float(c[il]), c_right=float(c[ir]), c_center=float(cc),
                             E_center=float(np.interp(cc, c, sweep.E_of_c)), c_flat=float(c[i]),
                             E_span=(float(E.min()), float(E.max()))))
    out = []
    for p in sorted(found, key=lambda p: p.c_left):
        if out and p.c_left < out[-1].c_right:
            continue
        out.append(p)
    if not out:
        raise NoPlateau(f"no plateau identifiable on level {sweep.N}")
    return out


def nearest_plateau(plateaus, E_target):
    """Plateau whose center energy is nearest ``E_target`` and spans it."""
    hits = [p for p in plateaus if p.contains_energy(E_target)]
    if not hits:
        raise NoPlateau(f"no plateau spans E={E_target:g}")
    return min(hits, key=lambda p: abs(p.E_center - E_target))


def write_diagram_csv(diagram: StabilizationDiagram, path):
    n = len(diagram)
    header = ["c"] + [f"E_{N}" for N in range(1, n + 1)]
    rows = np.column_stack([diagram.grid.values(), diagram.energies()])
    write_csv(path, header, rows, comments=[f"units: {UNITS}, G={diagram.model.G:g}"])
