import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockline.elements import (
    Circuit,
    ElementSpec,
    apply_beamsplitter,
    apply_circuit,
    apply_element,
    apply_hwp,
    apply_pbs,
)
from fockline.fock import ModeRegistry, bell_state, create, inner, make_single_photon, vacuum
from fockline.verify import random_state

R2 = 1 / math.sqrt(2)


@pytest.fixture
def reg():
    return ModeRegistry(["a", "b", "c", "d"])


def test_beamsplitter_single_photon(reg):
    out = apply_beamsplitter(make_single_photon(reg, "a", "H"), "a", "b", "c", "d")
    assert out.amplitude({("c", "H"): 1}) == pytest.approx(R2)
    assert out.amplitude({("d", "H"): 1}) == pytest.approx(R2)
    out = apply_beamsplitter(make_single_photon(reg, "b", "V"), "a", "b", "c", "d")
    assert out.amplitude({("c", "V"): 1}) == pytest.approx(R2)
    assert out.amplitude({("d", "V"): 1}) == pytest.approx(-R2)


def test_hong_ou_mandel(reg):
    # |1,1> -> (|2,0> - |0,2>)/sqrt2, no coincidence term
    s = create(reg, ("a", "H"), ("b", "H"))
    out = apply_beamsplitter(s, "a", "b", "c", "d")
    assert out.amplitude({("c", "H"): 1, ("d", "H"): 1}) == 0
    assert out.amplitude({("c", "H"): 2}) == pytest.approx(R2)
    assert out.amplitude({("d", "H"): 2}) == pytest.approx(-R2)


def test_distinguishable_photons_do_not_bunch(reg):
    s = create(reg, ("a", "H"), ("b", "V"))
    out = apply_beamsplitter(s, "a", "b", "c", "d")
    coinc = abs(out.amplitude({("c", "H"): 1, ("d", "V"): 1})) ** 2 + abs(
        out.amplitude({("c", "V"): 1, ("d", "H"): 1})
    ) ** 2
    assert coinc == pytest.approx(0.5)


def test_pbs_transmits_h_and_reflects_v(reg):
    h = apply_pbs(make_single_photon(reg, "a", "H"), "a", "b", "c", "d")
    v = apply_pbs(make_single_photon(reg, "a", "V"), "a", "b", "c", "d")
    assert h.amplitude({("c", "H"): 1}) == 1
    assert v.amplitude({("d", "V"): 1}) == 1
    v2 = apply_pbs(make_single_photon(reg, "b", "V"), "a", "b", "c", "d")
    assert v2.amplitude({("c", "V"): 1}) == 1


def test_pbs_with_vacuum_port(reg):
    out = apply_pbs(create(reg, ("a", "H"), ("a", "V")), "a", None, "c", "d")
    assert out.amplitude({("c", "H"): 1, ("d", "V"): 1}) == pytest.approx(1.0)


def test_hwp_rotates_and_squares_to_identity(reg):
    h = make_single_photon(reg, "a", "H")
    once = apply_hwp(h, "a")
    assert once.amplitude({("a", "H"): 1}) == pytest.approx(R2)
    assert once.amplitude({("a", "V"): 1}) == pytest.approx(R2)
    assert apply_hwp(once, "a").distance(h) < 1e-15
    moved = apply_hwp(h, "a", out="b")
    assert moved.occupied_paths() == ("b",)


def test_singlet_is_invariant_under_dual_hwp_up_to_phase(reg):
    s = bell_state(reg, "Psi-", "a", "b")
    out = apply_hwp(apply_hwp(s, "a"), "b")
    assert abs(abs(inner(s, out)) - 1) < 1e-14


def test_element_spec_validation():
    with pytest.raises(ValueError):
        ElementSpec("BS", ("a", None), ("c", "d"))
    with pytest.raises(ValueError):
        ElementSpec("PBS", ("a", "a"), ("c", "d"))
    with pytest.raises(ValueError):
        ElementSpec("HWP", ("a", "b"), ("c",))
    with pytest.raises(ValueError):
        ElementSpec("BS", ("a", "b"), ("b", "c"))
    ElementSpec("BS", ("a", "b"), ("a", "b"))


def test_unknown_path_is_reported(reg):
    circuit = Circuit((ElementSpec("HWP", ("zz",), ("a",)),))
    with pytest.raises(ValueError):
        circuit.validate(reg)


def test_empty_circuit_is_identity(reg):
    s = create(reg, ("a", "H"), ("b", "V"))
    assert apply_circuit(s, Circuit(())).distance(s) == 0


def test_element_leaves_vacuum_alone(reg):
    e = ElementSpec("BS", ("a", "b"), ("c", "d"))
    assert apply_element(vacuum(reg), e).distance(vacuum(reg)) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4), st.sampled_from(["BS", "PBS", "HWP"]))
def test_elements_preserve_norm_and_photon_number(seed, photons, kind):
    reg = ModeRegistry(["a", "b", "c", "d"])
    s = random_state(reg, ["a", "b"], photons, np.random.default_rng(seed))
    if kind == "HWP":
        e = ElementSpec(kind, ("a",), ("c",))
    else:
        e = ElementSpec(kind, ("a", "b"), ("c", "d"))
    out = apply_element(s, e)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    assert out.photon_numbers() == {photons}


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_beamsplitter_preserves_inner_products(seed):
    reg = ModeRegistry(["a", "b", "c", "d"])
    rng = np.random.default_rng(seed)
    s, t = (random_state(reg, ["a", "b"], 2, rng) for _ in range(2))
    before = inner(s, t)
    after = inner(*(apply_beamsplitter(x, "a", "b", "c", "d") for x in (s, t)))
    assert abs(before - after) < 1e-12
