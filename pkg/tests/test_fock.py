import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockline.fock import (
    BellVariant,
    ModeRegistry,
    Polarization,
    PureState,
    RegistryError,
    TruncationError,
    ZeroStateError,
    bell_state,
    create,
    fidelity_pure,
    fock_state,
    inner,
    make_single_photon,
    mix,
    partial_trace,
    purity,
    superpose,
    tensor,
    to_density,
    truncated_basis,
    vacuum,
)

R2 = 1 / math.sqrt(2)


def test_registry_orders_paths_and_polarizations():
    reg = ModeRegistry(["b", "a"])
    assert reg.paths == ("a", "b")
    assert reg.index("a", "H") == 0
    assert reg.index("a", Polarization.V) == 1
    assert reg.index("b", "H") == 2
    with pytest.raises(RegistryError):
        reg.index("c", "H")


def test_polarization_parse():
    assert Polarization.parse("v") is Polarization.V
    with pytest.raises(ValueError):
        Polarization.parse("D")


def test_vacuum_and_single_photon(reg2):
    assert vacuum(reg2).amplitude((0, 0, 0, 0)) == 1
    s = make_single_photon(reg2, "b", "V")
    assert s.amplitude((0, 0, 0, 1)) == 1
    assert s.photon_numbers() == {1}
    assert s.occupied_paths() == ("b",)


def test_repeated_creation_carries_sqrt_factorial(reg2):
    # (a_H^dag)^2 |0> = sqrt(2) |2>
    s = create(reg2, ("a", "H"), ("a", "H"))
    assert s.amplitude((2, 0, 0, 0)) == pytest.approx(math.sqrt(2))
    assert fock_state(reg2, {("a", "H"): 2}).norm() == pytest.approx(1.0)


def test_truncation_is_enforced():
    reg = ModeRegistry(["a"], n_max=2)
    with pytest.raises(TruncationError):
        create(reg, ("a", "H"), ("a", "H"), ("a", "V"))


def test_zero_state_cannot_be_normalized(reg2):
    s = make_single_photon(reg2, "a", "H")
    with pytest.raises(ZeroStateError):
        (s - s).normalize()


def test_tensor_rejects_overlapping_modes(reg2):
    a = make_single_photon(reg2, "a", "H")
    b = make_single_photon(reg2, "b", "V")
    assert tensor(a, b).amplitude((1, 0, 0, 1)) == 1
    with pytest.raises(ValueError):
        tensor(a, a)


def test_inner_is_antilinear_in_first_argument(reg2):
    h = make_single_photon(reg2, "a", "H")
    assert inner(h * 1j, h) == pytest.approx(-1j)
    assert inner(h, h * 1j) == pytest.approx(1j)


def test_bell_states_are_orthonormal(reg2):
    states = [bell_state(reg2, v, "a", "b") for v in BellVariant]
    gram = np.array([[inner(s, t) for t in states] for s in states])
    assert np.allclose(gram, np.eye(4), atol=1e-15)


def test_singlet_amplitudes(reg2):
    s = bell_state(reg2, "Psi-", "a", "b")
    assert s.amplitude({("a", "H"): 1, ("b", "V"): 1}) == pytest.approx(R2)
    assert s.amplitude({("a", "V"): 1, ("b", "H"): 1}) == pytest.approx(-R2)


def test_truncated_basis_size():
    # number of occupations of 4 modes with <= 2 photons: C(6, 2) = 15
    assert len(truncated_basis(4, 2)) == 15
    assert truncated_basis(4, 2)[0] == (0, 0, 0, 0)


def test_partial_trace_of_bell_state_is_maximally_mixed(reg2):
    rho = to_density(bell_state(reg2, "Phi+", "a", "b"))
    red = partial_trace(rho, ["a"])
    assert red.trace() == pytest.approx(1.0)
    assert purity(red) == pytest.approx(0.5)
    assert red.sector_weight({"a": 1}) == pytest.approx(1.0)


def test_fidelity_and_mixture(reg2):
    s = bell_state(reg2, "Psi-", "a", "b")
    t = bell_state(reg2, "Psi+", "a", "b")
    rho = mix([(0.75, to_density(s, ["a", "b"])), (0.25, to_density(t, ["a", "b"]))])
    assert fidelity_pure(rho, s) == pytest.approx(0.75)
    assert rho.hermiticity_error() < 1e-15
    assert min(rho.eigenvalues()) > -1e-15


def test_phase_distance_ignores_global_phase(reg2):
    s = bell_state(reg2, "Psi-", "a", "b")
    assert s.phase_distance(-s) < 1e-15
    assert s.distance(-s) == pytest.approx(2.0)


def test_states_are_immutable(reg2):
    s = vacuum(reg2)
    with pytest.raises(AttributeError):
        s.registry = reg2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=4, max_size=4))
def test_superpose_normalizes(coeffs):
    reg = ModeRegistry(["a", "b"])
    singles = [make_single_photon(reg, p, q) for p in "ab" for q in "HV"]
    if sum(abs(c) ** 2 for c in coeffs) < 1e-6:
        return
    s = superpose(zip(coeffs, singles), normalize=True)
    assert isinstance(s, PureState)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
