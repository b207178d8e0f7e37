"""Sparse Fock-space linear optics with bucket detection and a heralded singlet source."""

__version__ = "0.1.0"

from .detection import ClickPattern, DetectorModel, conditional_state, pattern_probabilities, pattern_probability
from .elements import Circuit, ElementKind, ElementSpec, apply_circuit, apply_element
from .fock import (
    BellVariant,
    DensityOperator,
    ModeRegistry,
    Polarization,
    PureState,
    bell_state,
    create,
    fidelity_pure,
    make_single_photon,
    partial_trace,
    tensor,
    to_density,
    vacuum,
)
from .scheme import ComponentLabel, CoincidenceMode, SchemeConfig, SchemeReport, classify_components, run_scheme

__all__ = [
    "__version__",
    "BellVariant",
    "Circuit",
    "ClickPattern",
    "CoincidenceMode",
    "ComponentLabel",
    "DensityOperator",
    "DetectorModel",
    "ElementKind",
    "ElementSpec",
    "ModeRegistry",
    "Polarization",
    "PureState",
    "SchemeConfig",
    "SchemeReport",
    "apply_circuit",
    "apply_element",
    "bell_state",
    "classify_components",
    "conditional_state",
    "create",
    "fidelity_pure",
    "make_single_photon",
    "partial_trace",
    "pattern_probabilities",
    "pattern_probability",
    "run_scheme",
    "tensor",
    "to_density",
    "vacuum",
]
