import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabres.diagram import build_diagram
from stabres.errors import DomainError, NoConvergence
from stabres.model import BoxGrid, ShellModel
from stabres.oracle import (ToyModel, default_toy, exterior_slope, find_poles, interior_slope, pole_function,
                            s_matrix, symmetric_eigvals3, toy_couplings, toy_spectrum, write_poles_csv)
from stabres.spectrum import bound_state, phase_shift


@pytest.mark.parametrize("G", [-20.0, -10.0, -5.0, 5.0, 10.0, 20.0])
def test_unitarity(G, rng):
    q = rng.uniform(1e-6, 30.0, 1000)
    assert np.allclose(np.abs(s_matrix(q, G)), 1.0, atol=1e-10)


def test_s_matrix_phase_convention():
    assert s_matrix(np.pi / 4, 0.0) == pytest.approx(-np.exp(2j * np.pi / 4), abs=1e-14)
    for G in (20.0, -7.0, 3.0):
        q = np.linspace(0.1, 15, 50)
        assert np.allclose(s_matrix(q, G), -np.exp(2j * phase_shift(q, G)), atol=1e-12)


def test_s_matrix_finite_at_cot_poles():
    assert np.isfinite(s_matrix(np.pi, 5.0))
    assert abs(s_matrix(2 * np.pi, 5.0)) == pytest.approx(1.0)


def test_s_matrix_diverges_near_pole():
    p = find_poles(ShellModel(20.0), 1)[0]
    assert abs(s_matrix(p.q * (1 + 1e-9), 20.0)) > 1e6


@pytest.mark.parametrize("G", [-20.0, -10.0, -5.0, -0.5, 0.7, 5.0, 10.0, 20.0, 80.0])
def test_poles_valid(G):
    poles = find_poles(ShellModel(G), 6)
    assert [p.n for p in poles] == list(range(1, 7))
    for p in poles:
        assert p.q.real > 0 and p.q.imag < 0 and p.Gamma > 0
        assert p.residual < 1e-10
        assert p.E_complex == pytest.approx(p.E_r - 0.5j * p.Gamma)
    assert np.all(np.diff([p.q.real for p in poles]) > 0)
    assert np.all(np.diff([p.Gamma for p in poles]) > 0)


def test_six_lowest_poles_descend_into_lower_plane():
    poles = find_poles(ShellModel(20.0), 6)
    im = np.array([p.q.imag for p in poles])
    assert np.all(im < 0) and np.all(np.diff(np.abs(im)) > 0)


def test_poles_without_grid_search_and_bad_seeds():
    ref = find_poles(ShellModel(-5.0), 2)
    seeded = find_poles(ShellModel(-5.0), 2, grid_search=False)
    assert [p.q for p in seeded] == pytest.approx([p.q for p in ref])
    with pytest.raises(NoConvergence):
        find_poles(ShellModel(20.0), 3, seeds=[], grid_search=False)
    with pytest.raises(DomainError):
        find_poles(ShellModel(0.0), 1)


@pytest.mark.parametrize("G", [-1.5, -5.0, -20.0])
def test_bound_state_is_pole_on_imaginary_axis(G):
    b = bound_state(ShellModel(G))
    assert abs(pole_function(1j * b.kappa, G)) < 1e-10


def test_pole_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_poles_csv(find_poles(ShellModel(10.0), 2), 10.0, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# units:") and lines[1] == "n,Re_q,Im_q,E_r,Gamma"
    assert lines[2].startswith("1,")


def test_couplings_scale_as_inverse_coupling():
    a = toy_couplings(ShellModel(20.0), interior_slope(), [exterior_slope(1, 3.0), exterior_slope(2, 3.0)])
    b = toy_couplings(ShellModel(40.0), interior_slope(), [exterior_slope(1, 3.0), exterior_slope(2, 3.0)])
    assert np.allclose(np.array(b), np.array(a) / 2, rtol=1e-15)
    big = toy_couplings(ShellModel(1e12), interior_slope(), [exterior_slope(1, 3.0)])
    assert abs(big[0]) < 1e-10
    assert a[0] == pytest.approx(2 * np.pi ** 2 / (20.0 * 3.0 ** 1.5))


def test_couplings_match_exact_avoided_crossings():
    G = 20.0
    model = ShellModel(G)
    E_r = find_poles(model, 1)[0].E_r
    for i in (1, 2):
        c0 = i * np.pi / np.sqrt(E_r)
        grid = BoxGrid(0.85 * c0, 1.15 * c0, 1201)
        E = build_diagram(model, grid, i + 2).energies()
        gaps = np.diff(E, axis=1)
        k, n = np.unravel_index(np.argmin(gaps), gaps.shape)
        half_gap = gaps[k, n] / 2
        c_cross = grid.values()[k]
        delta = toy_couplings(model, interior_slope(), [exterior_slope(i, c_cross)])[0]
        assert abs(delta) == pytest.approx(half_gap, rel=0.25)


def test_toy_without_coupling_gives_bare_levels():
    toy = ToyModel(E_int=np.pi ** 2, Delta=(0.0, 0.0))
    L = np.linspace(0.6, 3.0, 50)
    lam = toy_spectrum(toy, L)
    bare = np.sort(np.column_stack([np.full_like(L, np.pi ** 2), (np.pi / L) ** 2, (2 * np.pi / L) ** 2]), axis=1)
    assert np.allclose(lam, bare, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=6, max_size=6))
def test_closed_form_eigenvalues(v):
    H = np.array([[v[0], v[3], v[4]], [v[3], v[1], v[5]], [v[4], v[5], v[2]]])
    lam = symmetric_eigvals3(H)
    assert np.allclose(lam, np.linalg.eigvalsh(H), atol=1e-8 * max(1.0, np.abs(H).max()))


def test_toy_trace_and_crossing_gap():
    toy = default_toy(50.0)
    assert max(np.abs(toy.Delta)) < 0.1 * toy.E_int
    L = np.linspace(0.5, 3.0, 2001)
    lam = toy_spectrum(toy, L)
    trace = toy.E_int + toy.exterior_level(1, L) + toy.exterior_level(2, L)
    assert np.allclose(lam.sum(axis=1), trace, atol=1e-12 * trace.max())
    # at L = 1 the first exterior level meets E_int; the second is far away
    at = toy_spectrum(toy, [1.0])[0]
    detuning = 4 * np.pi ** 2 - toy.E_int
    assert at[1] - at[0] == pytest.approx(2 * toy.Delta[0], abs=toy.Delta[1] ** 2 / detuning * 4)


def test_toy_rejects_nonpositive_length():
    with pytest.raises(DomainError):
        toy_spectrum(default_toy(), [0.0, 1.0])
