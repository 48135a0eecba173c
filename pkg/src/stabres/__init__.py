"""Resonance extraction for a delta-shell barrier next to a hard wall, from finite-box spectra."""
from .diagram import build_diagram, find_plateaus, level_derivative
from .errors import StabilizationError
from .extract import ExtractionSettings, Resonance, extract_dos, extract_plateau_fit, extract_qbp, run_method
from .model import UNITS, BoxGrid, ShellModel
from .oracle import ToyModel, find_poles, s_matrix, toy_couplings, toy_spectrum
from .spectrum import bound_state, interior_probability, phase_shift, solve_levels, wavefunction

__version__ = "0.1.0"

__all__ = [
    "UNITS", "BoxGrid", "ShellModel", "StabilizationError",
    "solve_levels", "wavefunction", "interior_probability", "phase_shift", "bound_state",
    "build_diagram", "find_plateaus", "level_derivative",
    "ExtractionSettings", "Resonance", "extract_plateau_fit", "extract_dos", "extract_qbp", "run_method",
    "ToyModel", "find_poles", "s_matrix", "toy_couplings", "toy_spectrum",
]
