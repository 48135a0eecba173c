"""Finite-volume spectrum of the wall-plus-delta-shell system.

The box is the interval ``[-1, c]`` with the delta shell at ``xi = 0``.  A
positive-energy eigenfunction is

    psi(xi) = sin(q (xi + 1))                                  -1 < xi <= 0
    psi(xi) = sin(q (xi + 1)) + (G / q) sin(q) sin(q xi)         0 < xi <= c

and the allowed momenta are the positive zeros of

    F(q) = q sin(q (c + 1)) + G sin(q) sin(q c).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, RootLoss
from .model import ShellModel

_SCAN_STEP = 0.01
_ROOT_RTOL = 4 * np.finfo(float).eps
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class Level:
    """Eigenpair ``N`` (1-based, ascending energy) of a box of size ``c``."""

    N: int
    q: float
    E: float
    c: float


@dataclass(frozen=True)
class BoundState:
    kappa: float
    E: float


# -- quantization condition -------------------------------------------------

def quantization_residual(q, G, c):
    """``F(q) = q sin(q(c+1)) + G sin(q) sin(qc)``; zero at allowed momenta."""
    return q * np.sin(q * (c + 1)) + G * np.sin(q) * np.sin(q * c)


def residual_dq(q, G, c):
    """Partial derivative of the quantization residual with respect to ``q``."""
    return (np.sin(q * (c + 1)) + q * (c + 1) * np.cos(q * (c + 1))
            + G * (np.cos(q) * np.sin(q * c) + c * np.sin(q) * np.cos(q * c)))


def residual_dc(q, G, c):
    """Partial derivative of the quantization residual with respect to ``c``."""
    return q * q * np.cos(q * (c + 1)) + G * q * np.sin(q) * np.cos(q * c)


def scan_step(c):
    """Bracketing step: a quarter of the free level spacing, at most 0.01."""
    return np.minimum(_SCAN_STEP, np.pi / (4.0 * (np.asarray(c, dtype=float) + 1.0)))


def illinois(f, a, b, fa=None, fb=None, rtol=_ROOT_RTOL, maxiter=200):
    """Vectorized Illinois (modified regula falsi) on sign-changing brackets.

    ``a``, ``b`` are arrays of bracket ends; ``f`` maps an array of abscissae
    to residuals elementwise.  Returns the refined roots.
    """
    a = np.array(a, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    fa = f(a) if fa is None else np.array(fa, dtype=float, copy=True)
    fb = f(b) if fb is None else np.array(fb, dtype=float, copy=True)
    if np.any((np.signbit(fa) == np.signbit(fb)) & (fa != 0) & (fb != 0)):
        raise ValueError("illinois requires sign-changing brackets")
    side = np.zeros(a.shape, dtype=np.int8)
    active = np.ones(a.shape, dtype=bool)
    for _ in range(maxiter):
        denom = fb - fa
        with np.errstate(invalid="ignore", divide="ignore"):
            x = np.where(denom != 0, (a * fb - b * fa) / denom, 0.5 * (a + b))
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        x = np.where((x >= lo) & (x <= hi), x, 0.5 * (a + b))
        x = np.where(active, x, a)
        fx = np.where(active, f(x), fa)
        same = np.signbit(fx) == np.signbit(fa)
        na, nfa = np.where(same, x, a), np.where(same, fx, fa)
        nb, nfb = np.where(same, b, x), np.where(same, fb, fx)
        # halve the stale endpoint when the same side is retained twice
        nfb = np.where(same & (side == 1), 0.5 * nfb, nfb)
        nfa = np.where(~same & (side == -1), 0.5 * nfa, nfa)
        side = np.where(same, 1, -1).astype(np.int8)
        a = np.where(active, na, a)
        b = np.where(active, nb, b)
        fa = np.where(active, nfa, fa)
        fb = np.where(active, nfb, fb)
        done = (np.abs(b - a) <= rtol * np.maximum(np.abs(a), np.abs(b))) | (fx == 0)
        active &= ~done
        if not active.any():
            break
    return np.where(np.abs(fa) <= np.abs(fb), a, b)


def _bracket_rows(G, cs, n, qmax):
    """Lower bracket ends of the first ``n`` sign changes for each box size."""
    h = scan_step(cs)
    ncols = int(np.max(np.ceil(qmax / h))) + 2
    k = np.arange(ncols, dtype=float)
    k[0] = 1e-3
    qs = k[None, :] * h[:, None]
    f = quantization_residual(qs, G, cs[:, None])
    change = np.signbit(f[:, :-1]) != np.signbit(f[:, 1:])
    counts = change.sum(axis=1)
    lower = np.full((len(cs), n), np.nan)
    ok = counts >= n
    if ok.any():
        rows, cols = np.nonzero(change[ok])
        first = np.searchsorted(rows, np.arange(ok.sum()))
        rank = np.arange(len(rows)) - first[rows]
        keep = rank < n
        sub = lower[ok]
        sub[rows[keep], rank[keep]] = qs[ok][rows[keep], cols[keep]]
        lower[ok] = sub
    return lower, ok


def level_momenta(G: float, cs, n_levels: int) -> np.ndarray:
    """Lowest ``n_levels`` positive momenta for every box size in ``cs``.

    Returns an array of shape ``(len(cs), n_levels)``, ascending along rows.
    Roots are bracketed on a uniform ``q`` grid and refined with a vectorized
    Illinois iteration.
    """
    cs = np.atleast_1d(np.asarray(cs, dtype=float))
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if np.any(cs <= 0):
        raise DomainError("box sizes must be positive")
    out = np.empty((len(cs), n_levels))
    h = scan_step(cs)
    cols_per_row = np.ceil(((n_levels + 2) * np.pi / (cs + 1) + np.pi) / h) + 2
    order = np.argsort(cols_per_row)
    start = 0
    while start < len(cs):
        stop = start + 1
        while stop < len(cs) and (stop - start + 1) * cols_per_row[order[stop]] <= _CHUNK_CELLS:
            stop += 1
        idx = order[start:stop]
        c = cs[idx]
        qmax = (n_levels + 2) * np.pi / (c + 1) + np.pi
        lower = np.full((len(idx), n_levels), np.nan)
        pending = np.ones(len(idx), dtype=bool)
        for _ in range(12):
            lo, ok = _bracket_rows(G, c[pending], n_levels, qmax[pending])
            sel = np.nonzero(pending)[0]
            lower[sel[ok]] = lo[ok]
            pending[sel[ok]] = False
            if not pending.any():
                break
            qmax = np.where(pending, 2 * qmax, qmax)
        else:
            raise RootLoss("could not bracket the requested number of levels")
        hh = scan_step(c)[:, None] * np.ones((1, n_levels))
        cc = c[:, None] * np.ones((1, n_levels))
        a = lower.ravel()
        b = (lower + hh).ravel()
        cflat = cc.ravel()
        roots = illinois(lambda q: quantization_residual(q, G, cflat), a, b)
        out[idx] = roots.reshape(len(idx), n_levels)
        start = stop
    if np.any(np.diff(out, axis=1) <= 0):
        raise RootLoss("refined roots are not strictly increasing")
    return out


def solve_levels(model: ShellModel, c: float, n_levels: int) -> list[Level]:
    """Lowest ``n_levels`` positive-energy levels of a box of size ``c``."""
    if not c > 0:
        raise DomainError("box size must be positive")
    q = level_momenta(model.G, [c], n_levels)[0]
    return [Level(N=i + 1, q=float(qi), E=float(qi * qi), c=float(c)) for i, qi in enumerate(q)]


def track_levels(model: ShellModel, c: float, n_levels: int, max_step: float = 0.5) -> np.ndarray:
    """Follow the free-box momenta ``n pi/(c+1)`` to coupling ``G``.

    Independent check on :func:`level_momenta`: the coupling is ramped in
    steps of at most ``max_step`` and each root is re-bracketed locally.
    Raises :class:`RootLoss` if two tracked roots merge or a bracket fails.
    """
    spare = 2
    q = np.arange(1, n_levels + spare + 1) * np.pi / (c + 1)
    nsteps = max(1, int(math.ceil(abs(model.G) / max_step)))
    for g in np.linspace(0.0, model.G, nsteps + 1)[1:]:
        new = []
        for qi in q:
            new_q = _local_root(g, c, qi)
            if new_q is None:
                raise RootLoss(f"lost root near q={qi:.6g} at G={g:.6g}")
            if new_q > 1e-8:  # roots crossing q=0 become bound states
                new.append(new_q)
        q = np.array(new)
        if len(q) < n_levels:
            raise RootLoss("fewer tracked roots than requested levels")
        if np.any(np.diff(q) <= 1e-10 * q[1:]):
            raise RootLoss(f"tracked roots merged at G={g:.6g}; reduce the step")
    return q[:n_levels]


def _local_root(G, c, q0):
    width = 0.5 * float(scan_step(c))
    for grow in range(30):
        lo, hi = max(q0 - width, 1e-12), q0 + width
        flo, fhi = quantization_residual(lo, G, c), quantization_residual(hi, G, c)
        if flo == 0:
            return lo
        if np.signbit(flo) != np.signbit(fhi):
            # reject if the window caught more than one root
            mid = np.linspace(lo, hi, 33)
            fm = quantization_residual(mid, G, c)
            if np.count_nonzero(np.signbit(fm[:-1]) != np.signbit(fm[1:])) > 1:
                width *= 0.5
                continue
            return brentq(quantization_residual, lo, hi, args=(G, c), xtol=1e-15, rtol=_ROOT_RTOL)
        width *= 1.5
        if lo <= 1e-12 and flo * fhi > 0 and grow > 3:
            return 0.0
    return None


# -- wavefunctions -----------------------------------------------------------

def _coefficients(q, G):
    """``(A, B)`` with ``psi = A sin(q xi) + B cos(q xi)`` inside and outside."""
    s, co = np.sin(q), np.cos(q)
    return (co, s), (co + G * s / q, s)


def _segment_overlap(q1, ab1, q2, ab2, lo, hi):
    """``int_lo^hi (A1 sin q1 x + B1 cos q1 x)(A2 sin q2 x + B2 cos q2 x) dx``.

    Uses ``A sin + B cos = Re[(B - iA) e^{iqx}]`` and a sinc form of the
    exponential integral so equal frequencies need no special branch.
    """
    u = ab1[1] - 1j * ab1[0]
    v = ab2[1] - 1j * ab2[0]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def expint(w):
        return np.exp(1j * w * mid) * (hi - lo) * np.sinc(w * half / np.pi)

    return 0.5 * np.real(u * v * expint(q1 + q2) + u * np.conj(v) * expint(q1 - q2))


def _partial_norm(q, G, x0):
    interior, exterior = _coefficients(q, G)
    x_in = np.minimum(x0, 0.0)
    part = _segment_overlap(q, interior, q, interior, -1.0, x_in)
    x_out = np.maximum(x0, 0.0)
    return part + _segment_overlap(q, exterior, q, exterior, 0.0, x_out)


def interior_fraction(q, G, c, x0=0.0):
    """Vectorized ``int_{-1}^{x0} psi^2 / int_{-1}^{c} psi^2``."""
    return _partial_norm(q, G, x0) / _partial_norm(q, G, c)


def _check_level(level: Level):
    if not level.q > 0:
        raise DomainError("wavefunctions are defined for positive momenta only")


def wavefunction(level: Level, G: float, xi, normalized: bool = True):
    """Amplitude ``psi(xi)`` of ``level``; unit norm over ``[-1, c]`` if requested."""
    _check_level(level)
    x = np.asarray(xi, dtype=float)
    if np.any(x < -1.0) or np.any(x > level.c):
        raise DomainError(f"xi must lie in [-1, {level.c}]")
    q = level.q
    psi = np.sin(q * (x + 1.0)) + np.where(x > 0, G * np.sin(q) * np.sin(q * x) / q, 0.0)
    if normalized:
        psi = psi / math.sqrt(_partial_norm(q, G, level.c))
    return psi if psi.ndim else float(psi)


def overlap(m: Level, n: Level, G: float) -> float:
    """Closed-form ``<psi_m | psi_n>`` for two unit-normalized levels of one box."""
    if m.c != n.c:
        raise DomainError("levels belong to different boxes")
    in_m, out_m = _coefficients(m.q, G)
    in_n, out_n = _coefficients(n.q, G)
    raw = (_segment_overlap(m.q, in_m, n.q, in_n, -1.0, 0.0)
           + _segment_overlap(m.q, out_m, n.q, out_n, 0.0, m.c))
    norm = math.sqrt(_partial_norm(m.q, G, m.c) * _partial_norm(n.q, G, n.c))
    return float(raw / norm)


def interior_probability(level: Level, G: float, x0: float = 0.0) -> float:
    """Probability of finding the particle in ``[-1, x0]``."""
    _check_level(level)
    if not -1.0 < x0 <= level.c:
        raise DomainError(f"x0 must lie in (-1, {level.c}]")
    return float(interior_fraction(level.q, G, level.c, x0))


# -- continuum quantities ----------------------------------------------------

def _raw_phase(q, G):
    return np.arctan2(q * np.sin(q), q * np.cos(q) + G * np.sin(q))


def phase_shift(q, G: float, step: float = 1e-3):
    """Continuous phase shift ``eta(q)`` with ``psi_ext ~ sin(q xi + eta)``.

    ``tan(eta) = q sin q / (q cos q + G sin q)``; the branch is fixed by
    unwrapping along a grid of spacing ``step`` from ``q -> 0+``, which gives
    ``eta = q`` for ``G = 0``.
    """
    qa = np.asarray(q, dtype=float)
    if np.any(qa <= 0):
        raise DomainError("phase shift is defined for q > 0")
    qmax = float(np.max(qa))
    grid = np.arange(1, int(math.ceil(qmax / step)) + 2) * step
    grid[0] = min(grid[0], float(np.min(qa)))
    unwrapped = np.unwrap(_raw_phase(grid, G))
    guess = np.interp(qa, grid, unwrapped)
    raw = _raw_phase(qa, G)
    eta = raw + 2 * np.pi * np.round((guess - raw) / (2 * np.pi))
    return eta if eta.ndim else float(eta)


def bound_state(model: ShellModel) -> Optional[BoundState]:
    """Infinite-volume bound state, present only for ``G < -1``.

    The binding momentum solves ``G = -kappa (1 + coth kappa)``.
    """
    G = model.G
    if not G < -1.0:
        return None

    def g(kappa):
        return -kappa * (1.0 + 1.0 / math.tanh(kappa)) - G

    kappa = brentq(g, 1e-14, max(1.0, abs(G)), xtol=1e-15, rtol=_ROOT_RTOL)
    return BoundState(kappa=kappa, E=-kappa * kappa)
