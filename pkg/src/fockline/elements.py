"""Passive optical elements acting on :class:`~fockline.fock.PureState`.

Each element is a linear substitution of creation operators.  A basis term
``prod_m (a_m^dag)^n_m / sqrt(n_m!) |0>`` is rewritten by replacing every
input creation operator with a combination of output ones, expanding the
product and re-normalizing each resulting monomial with ``sqrt(e!)`` factors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fock import NORM_TOL, ModeRegistry, Occupation, Polarization, PureState, RegistryError

SQRT_HALF = 1 / math.sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF

# column j gives the image of input port j: a -> (a+b)/sqrt2, b -> (a-b)/sqrt2
BS_MATRIX = HADAMARD
# column j gives the image of H (j=0) or V (j=1)
HWP_MATRIX = HADAMARD


class ElementError(ValueError):
    pass


LinearMap = Mapping[int, Sequence[tuple[int, complex]]]


def substitute(state: PureState, mapping: LinearMap) -> PureState:
    """Apply ``a_i^dag -> sum_k c_k a_k^dag`` for every input mode ``i`` in ``mapping``.

    Modes absent from ``mapping`` are left untouched.  Output modes may overlap
    untouched modes.
    """
    if not mapping:
        return state
    size = len(state.registry)
    inputs = sorted(mapping)
    out: dict[Occupation, complex] = {}
    for occ, amp in state.terms.items():
        coef = amp / math.prod(math.sqrt(math.factorial(n)) for n in occ)
        base = list(occ)
        for i in inputs:
            base[i] = 0
        poly: dict[Occupation, complex] = {tuple(base): coef}
        for i in inputs:
            for _ in range(occ[i]):
                nxt: dict[Occupation, complex] = {}
                for mono, c in poly.items():
                    for k, w in mapping[i]:
                        if w == 0:
                            continue
                        m = list(mono)
                        m[k] += 1
                        key = tuple(m)
                        nxt[key] = nxt.get(key, 0j) + c * w
                poly = nxt
        for mono, c in poly.items():
            a = c * math.prod(math.sqrt(math.factorial(n)) for n in mono)
            out[mono] = out.get(mono, 0j) + a
    if any(len(k) != size for k in out):
        raise ElementError("internal occupation length mismatch")
    result = PureState(state.registry, out)
    if state.normalized and abs(result.norm_squared() - 1) < NORM_TOL:
        return PureState(state.registry, result.terms, normalized=True)
    return result


def _two_port_map(
    reg: ModeRegistry,
    in_paths: Sequence[str | None],
    out_paths: Sequence[str],
    matrix: np.ndarray,
) -> dict[int, list[tuple[int, complex]]]:
    mapping: dict[int, list[tuple[int, complex]]] = {}
    for pol in Polarization:
        outs = [reg.index(p, pol) for p in out_paths]
        for j, p in enumerate(in_paths):
            if p is None:
                continue
            mapping[reg.index(p, pol)] = [(outs[i], complex(matrix[i, j])) for i in range(2)]
    return mapping


def apply_beamsplitter(
    s: PureState,
    path_a: str,
    path_b: str,
    out_a: str,
    out_b: str,
    matrix: np.ndarray | None = None,
) -> PureState:
    """Balanced, polarization-independent beam splitter.

    ``a^dag -> (a'^dag + b'^dag)/sqrt2`` and ``b^dag -> (a'^dag - b'^dag)/sqrt2``
    for both polarizations.  ``matrix`` overrides the 2x2 transfer matrix.
    """
    m = BS_MATRIX if matrix is None else np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ElementError("beam splitter transfer matrix must be 2x2")
    reg = s.registry
    return substitute(s, _two_port_map(reg, [path_a, path_b], [out_a, out_b], m))


def pbs_map(
    reg: ModeRegistry, in1: str | None, in2: str | None, out1: str, out2: str
) -> dict[int, list[tuple[int, complex]]]:
    H, V = Polarization.H, Polarization.V
    mapping: dict[int, list[tuple[int, complex]]] = {}
    if in1 is not None:
        mapping[reg.index(in1, H)] = [(reg.index(out1, H), 1.0)]
        mapping[reg.index(in1, V)] = [(reg.index(out2, V), 1.0)]
    if in2 is not None:
        mapping[reg.index(in2, H)] = [(reg.index(out2, H), 1.0)]
        mapping[reg.index(in2, V)] = [(reg.index(out1, V), 1.0)]
    return mapping


def apply_pbs(s: PureState, in1: str | None, in2: str | None, out1: str, out2: str) -> PureState:
    """Polarizing beam splitter: H transmits (in1->out1, in2->out2), V reflects.

    Either input may be ``None`` for an unused (vacuum) port.  No phase is
    attached to reflection.
    """
    if in1 is None and in2 is None:
        raise ElementError("PBS needs at least one input path")
    return substitute(s, pbs_map(s.registry, in1, in2, out1, out2))


def apply_hwp(s: PureState, path: str, out: str | None = None) -> PureState:
    """Half-wave plate |H> -> (|H>+|V>)/sqrt2, |V> -> (|H>-|V>)/sqrt2."""
    reg = s.registry
    out = path if out is None else out
    ins = reg.path_indices(path)
    outs = reg.path_indices(out)
    mapping = {
        ins[j]: [(outs[i], complex(HWP_MATRIX[i, j])) for i in range(2)] for j in range(2)
    }
    return substitute(s, mapping)


class ElementKind(str, enum.Enum):
    BS = "BS"
    PBS = "PBS"
    HWP = "HWP"


_ARITY = {ElementKind.BS: 2, ElementKind.PBS: 2, ElementKind.HWP: 1}


@dataclass(frozen=True)
class ElementSpec:
    kind: ElementKind
    inputs: tuple[str | None, ...]
    outputs: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        kind = ElementKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        n = _ARITY[kind]
        if len(self.inputs) != n or len(self.outputs) != n:
            raise ElementError(f"{kind.value} takes {n} input and {n} output paths")
        if any(p is None for p in self.outputs):
            raise ElementError("output paths must be named")
        if kind is not ElementKind.PBS and any(p is None for p in self.inputs):
            raise ElementError("only a PBS may leave an input port empty")
        if all(p is None for p in self.inputs):
            raise ElementError("element has no input path")
        if len(set(self.outputs)) != n:
            raise ElementError("duplicate output paths")
        named = [p for p in self.inputs if p is not None]
        if len(set(named)) != len(named):
            raise ElementError("duplicate input paths")
        in_place = tuple(self.inputs) == tuple(self.outputs)
        if not in_place and set(named) & set(self.outputs):
            raise ElementError("input and output paths overlap without being in place")

    @property
    def label(self) -> str:
        return self.name or self.kind.value

    def paths(self) -> set[str]:
        return {p for p in self.inputs + self.outputs if p is not None}

    def validate(self, registry: ModeRegistry) -> None:
        for p in self.paths():
            if p not in registry.paths:
                raise RegistryError(f"{self.label}: path {p!r} is not registered")


def apply_element(s: PureState, element: ElementSpec, bs_matrix: np.ndarray | None = None) -> PureState:
    element.validate(s.registry)
    if element.kind is ElementKind.BS:
        return apply_beamsplitter(s, *element.inputs, *element.outputs, matrix=bs_matrix)
    if element.kind is ElementKind.PBS:
        return apply_pbs(s, *element.inputs, *element.outputs)
    return apply_hwp(s, element.inputs[0], element.outputs[0])


@dataclass(frozen=True)
class Circuit:
    elements: tuple[ElementSpec, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def paths(self) -> set[str]:
        out: set[str] = set()
        for e in self.elements:
            out |= e.paths()
        return out

    def validate(self, registry: ModeRegistry) -> None:
        for e in self.elements:
            e.validate(registry)


def apply_circuit(
    s: PureState,
    circuit: Circuit | Iterable[ElementSpec],
    bs_matrix: np.ndarray | None = None,
) -> PureState:
    """Apply elements in order; the empty circuit is the identity."""
    elements = list(circuit)
    for e in elements:
        e.validate(s.registry)
    for e in elements:
        s = apply_element(s, e, bs_matrix=bs_matrix)
    return s
