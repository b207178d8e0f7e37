"""Heralded singlet source built from four single photons and bucket detectors.

Wiring (paths are opaque labels)::

    PBS1 (1, 2)   -> (1', 2')          PBS2 (3, 4) -> (3', 4')
    BS   (1', 3') -> (1'', 3'')
    HWP  1''      -> alpha             HWP  3''    -> beta
    PBS3 alpha    -> x (H), y (V)      PBS4 beta   -> z (H), w (V)

    D1 on x, D2 on y, D3 on z, D4 on w

Paths 2' and 4' carry the heralded pair.  A coincidence is D2 and D3 clicking
or D1 and D4 clicking; under this wiring the singlet on (alpha, beta) leaves as
``(|x>|w> - |y>|z>)/sqrt2``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from . import analytics
from .detection import (
    ClickPattern,
    DetectorModel,
    all_patterns,
    conditional_state,
    pattern_probability,
)
from .elements import Circuit, ElementSpec, apply_circuit
from .fock import (
    BellVariant,
    DensityOperator,
    ModeRegistry,
    PureState,
    bell_state,
    create,
    fidelity_pure,
    inner,
    make_single_photon,
    purity,
    superpose,
    tensor,
    tensor_all,
)

INPUT_PATHS = ("1", "2", "3", "4")
OUTCOME_PATHS = ("2'", "4'")
FIG1_PATHS = ("1", "2", "3", "4", "1'", "2'", "3'", "4'", "1''", "3''", "alpha", "beta", "x", "y", "z", "w")
DETECTOR_PATHS = {"D1": "x", "D2": "y", "D3": "z", "D4": "w"}
HERALD_PAIRS = (("D2", "D3"), ("D1", "D4"))
PERTURBATIVE_LIMIT = 0.3


class CoincidenceMode(str, enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


class ComponentLabel(str, enum.Enum):
    X0 = "X0"
    X1 = "X1"
    A = "A"
    B = "B"
    C_PHI_PLUS = "C_PhiPhi+"
    C_PHI_MINUS = "C_PhiPhi-"
    C_PSI_PLUS = "C_PsiPsi+"
    C_PSI_MINUS = "C_PsiPsi-"
    HIGHER_ORDER = "HigherOrder"


# ruled out by a coincidence, in the order they are usually listed
EXCLUDED_COMPONENTS = (
    ComponentLabel.X0,
    ComponentLabel.X1,
    ComponentLabel.A,
    ComponentLabel.B,
    ComponentLabel.C_PHI_PLUS,
    ComponentLabel.C_PHI_MINUS,
    ComponentLabel.C_PSI_PLUS,
)


@lru_cache(maxsize=None)
def scheme_registry(n_max: int = 4) -> ModeRegistry:
    return ModeRegistry(FIG1_PATHS, n_max=n_max)


@lru_cache(maxsize=None)
def build_fig1_circuit() -> Circuit:
    return Circuit(
        (
            ElementSpec("PBS", ("1", "2"), ("1'", "2'"), name="PBS1"),
            ElementSpec("PBS", ("3", "4"), ("3'", "4'"), name="PBS2"),
            ElementSpec("BS", ("1'", "3'"), ("1''", "3''"), name="BS"),
            ElementSpec("HWP", ("1''",), ("alpha",), name="HWP1"),
            ElementSpec("HWP", ("3''",), ("beta",), name="HWP2"),
            ElementSpec("PBS", ("alpha", None), ("x", "y"), name="PBS3"),
            ElementSpec("PBS", ("beta", None), ("z", "w"), name="PBS4"),
        ),
        name="fig1",
    )


def source_layer() -> Circuit:
    c = build_fig1_circuit()
    return Circuit(c.elements[:2], name="fig1-source")


def analyzer_layer() -> Circuit:
    c = build_fig1_circuit()
    return Circuit(c.elements[2:], name="fig1-analyzer")


def fig1_detectors(eta: float = 1.0) -> tuple[DetectorModel, ...]:
    return tuple(DetectorModel(i, p, eta) for i, p in DETECTOR_PATHS.items())


def herald_events(
    detectors: Sequence[DetectorModel], mode: CoincidenceMode | str = CoincidenceMode.STRICT
) -> dict[str, list[ClickPattern]]:
    """Patterns making up each heralding event, keyed ``"D2+D3"`` / ``"D1+D4"``.

    Strict: the named pair clicks and the other detectors stay silent.
    Lenient: the named pair clicks, the rest is unconstrained.
    """
    mode = CoincidenceMode(mode)
    events: dict[str, list[ClickPattern]] = {}
    for pair in HERALD_PAIRS:
        key = "+".join(pair)
        if mode is CoincidenceMode.STRICT:
            events[key] = [ClickPattern.from_clicked(detectors, pair)]
        else:
            events[key] = [p for p in all_patterns(detectors) if set(pair) <= set(p.clicked)]
    return events


def coincidence_patterns(
    detectors: Sequence[DetectorModel], mode: CoincidenceMode | str = CoincidenceMode.STRICT
) -> list[ClickPattern]:
    """Distinct click patterns that count as a coincidence."""
    seen: dict[ClickPattern, None] = {}
    for pats in herald_events(detectors, mode).values():
        for p in pats:
            seen[p] = None
    return list(seen)


# ---------------------------------------------------------------------------
# inputs and components


def polarized_photon(registry: ModeRegistry, path: str, h: complex, v: complex) -> PureState:
    return superpose(
        [(h, make_single_photon(registry, path, "H")), (v, make_single_photon(registry, path, "V"))],
        normalize=True,
    )


def h_prime(registry: ModeRegistry, path: str, epsilon: complex) -> PureState:
    """(|H> + eps|V>) / sqrt(1+|eps|^2)."""
    return polarized_photon(registry, path, 1, epsilon)


def v_prime(registry: ModeRegistry, path: str, epsilon: complex) -> PureState:
    """(eps|H> - |V>) / sqrt(1+|eps|^2); equals -|V> at eps = 0."""
    return polarized_photon(registry, path, epsilon, -1)


def prepare_inputs(epsilon: complex, registry: ModeRegistry | None = None) -> PureState:
    """|V'>_1 |H'>_2 |V'>_3 |H'>_4."""
    reg = scheme_registry() if registry is None else registry
    for p in INPUT_PATHS:
        reg.check_path(p)
    eps = complex(epsilon)
    return tensor_all(
        [v_prime(reg, "1", eps), h_prime(reg, "2", eps), v_prime(reg, "3", eps), h_prime(reg, "4", eps)]
    )


def _x0(reg: ModeRegistry) -> PureState:
    return create(reg, ("2'", "V"), ("2'", "H"), ("4'", "V"), ("4'", "H"))


def _x1(reg: ModeRegistry) -> PureState:
    t1 = superpose([(1, create(reg, ("1'", "V"), ("2'", "V"))), (-1, create(reg, ("1'", "H"), ("2'", "H")))])
    t2 = superpose([(1, create(reg, ("3'", "V"), ("4'", "V"))), (-1, create(reg, ("3'", "H"), ("4'", "H")))])
    return tensor(t1, create(reg, ("4'", "V"), ("4'", "H"))) + tensor(t2, create(reg, ("2'", "V"), ("2'", "H")))


_BELL_LABELS = {
    ComponentLabel.C_PHI_PLUS: BellVariant.PHI_PLUS,
    ComponentLabel.C_PHI_MINUS: BellVariant.PHI_MINUS,
    ComponentLabel.C_PSI_PLUS: BellVariant.PSI_PLUS,
    ComponentLabel.C_PSI_MINUS: BellVariant.PSI_MINUS,
}


def component_state(label: ComponentLabel | str, registry: ModeRegistry | None = None) -> PureState:
    """Normalized component of the post-PBS state, phase fixed by its defining product.

    Higher-order terms have no fixed shape; use :func:`higher_order_state`.
    """
    reg = scheme_registry() if registry is None else registry
    label = ComponentLabel(label)
    if label is ComponentLabel.X0:
        s = _x0(reg)
    elif label is ComponentLabel.X1:
        s = _x1(reg)
    elif label is ComponentLabel.A:
        s = create(reg, ("1'", "H"), ("1'", "V"), ("4'", "V"), ("4'", "H"))
    elif label is ComponentLabel.B:
        s = create(reg, ("2'", "V"), ("2'", "H"), ("3'", "H"), ("3'", "V"))
    elif label in _BELL_LABELS:
        v = _BELL_LABELS[label]
        s = tensor(bell_state(reg, v, "1'", "3'"), bell_state(reg, v, "2'", "4'"))
    else:
        raise ValueError("HigherOrder has no fixed component state")
    return s.normalize()


def c_component(registry: ModeRegistry | None = None) -> PureState:
    """(H1'H2' - V1'V2')(H3'H4' - V3'V4'), unnormalized."""
    reg = scheme_registry() if registry is None else registry
    a = superpose([(1, create(reg, ("1'", "H"), ("2'", "H"))), (-1, create(reg, ("1'", "V"), ("2'", "V")))])
    b = superpose([(1, create(reg, ("3'", "H"), ("4'", "H"))), (-1, create(reg, ("3'", "V"), ("4'", "V")))])
    return tensor(a, b)


FIXED_COMPONENTS = tuple(label for label in ComponentLabel if label is not ComponentLabel.HIGHER_ORDER)


@dataclass(frozen=True)
class ComponentWeight:
    amplitude: complex
    prior: float


def _check_four_photons(state: PureState) -> None:
    if state.photon_numbers() != {4}:
        raise ValueError("component classification needs a state with exactly 4 photons")


def higher_order_state(state: PureState) -> PureState:
    """Part of ``state`` orthogonal to every fixed component (unnormalized)."""
    _check_four_photons(state)
    pairs = [(1, state)]
    for label in FIXED_COMPONENTS:
        c = component_state(label, state.registry)
        pairs.append((-inner(c, state), c))
    return superpose(pairs)


def classify_components(state: PureState) -> dict[ComponentLabel, ComponentWeight]:
    """Project the post-PBS1/PBS2 state on each component.

    The amplitude is ``<component|state>`` for the normalized component; the
    higher-order entry carries the residual norm.
    """
    _check_four_photons(state)
    out = {}
    for label in FIXED_COMPONENTS:
        a = inner(component_state(label, state.registry), state)
        out[label] = ComponentWeight(a, abs(a) ** 2)
    rest = higher_order_state(state)
    out[ComponentLabel.HIGHER_ORDER] = ComponentWeight(complex(rest.norm()), rest.norm_squared())
    return out


def coincidence_probability(
    state: PureState,
    eta: float = 1.0,
    mode: CoincidenceMode | str = CoincidenceMode.STRICT,
) -> float:
    """Coincidence probability of a state sitting just after the source PBS pair."""
    if state.is_zero:
        return 0.0
    out = apply_circuit(state, analyzer_layer())
    detectors = fig1_detectors(eta)
    return sum(pattern_probability(out, p, detectors) for p in coincidence_patterns(detectors, mode))


def component_coincidence(
    label: ComponentLabel | str,
    eta: float = 1.0,
    mode: CoincidenceMode | str = CoincidenceMode.STRICT,
    epsilon: complex | None = None,
) -> float:
    """Probability that a normalized component on its own triggers a coincidence.

    ``epsilon`` is needed only for the higher-order remainder.
    """
    label = ComponentLabel(label)
    if label is ComponentLabel.HIGHER_ORDER:
        if epsilon is None:
            raise ValueError("higher-order coincidence needs epsilon")
        rest = higher_order_state(apply_circuit(prepare_inputs(epsilon), source_layer()))
        if rest.is_zero:
            return 0.0
        state = rest.normalize()
    else:
        state = component_state(label)
    return coincidence_probability(state, eta, mode)


# ---------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True)
class SchemeConfig:
    epsilon: complex = 0.05
    eta: float = 1.0
    coincidence: CoincidenceMode = CoincidenceMode.STRICT

    def __post_init__(self):
        object.__setattr__(self, "epsilon", complex(self.epsilon))
        object.__setattr__(self, "coincidence", CoincidenceMode(self.coincidence))
        eta = float(self.eta)
        if not 0 < eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {eta}")
        object.__setattr__(self, "eta", eta)
        if abs(self.epsilon) >= 1:
            raise ValueError("|epsilon| must be below 1")
        if abs(self.epsilon) > PERTURBATIVE_LIMIT:
            warnings.warn(
                f"|epsilon|={abs(self.epsilon):.3g} is outside the perturbative regime",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ComponentRow:
    label: ComponentLabel
    amplitude: complex
    prior: float
    coincidence_given_component: float
    contribution: float

    @property
    def excluded(self) -> bool:
        return self.contribution < 1e-12


@dataclass(frozen=True)
class SchemeReport:
    config: SchemeConfig
    p_coincidence: float
    event_probabilities: dict[str, float]
    fidelity: float | None
    event_fidelities: dict[str, float | None]
    purity: float | None
    two_photon_weight: float | None
    rho: DensityOperator | None
    components: tuple[ComponentRow, ...]
    analytic: analytics.AnalyticReport
    notes: tuple[str, ...] = field(default_factory=tuple)

    def component(self, label: ComponentLabel | str) -> ComponentRow:
        label = ComponentLabel(label)
        return next(r for r in self.components if r.label is label)


def singlet(registry: ModeRegistry | None = None, paths: tuple[str, str] = OUTCOME_PATHS) -> PureState:
    reg = scheme_registry() if registry is None else registry
    return bell_state(reg, BellVariant.PSI_MINUS, *paths)


def component_rows(
    post_source: PureState, epsilon: complex, eta: float, mode: CoincidenceMode | str
) -> tuple[ComponentRow, ...]:
    weights = classify_components(post_source)
    rows = []
    for label, w in weights.items():
        given = component_coincidence(label, eta, mode, epsilon=epsilon)
        rows.append(ComponentRow(label, w.amplitude, w.prior, given, w.prior * given))
    return tuple(rows)


def run_scheme(config: SchemeConfig, with_components: bool = True) -> SchemeReport:
    reg = scheme_registry()
    eps, eta, mode = config.epsilon, config.eta, config.coincidence
    post_source = apply_circuit(prepare_inputs(eps, reg), source_layer())
    out = apply_circuit(post_source, analyzer_layer())
    detectors = fig1_detectors(eta)
    events = herald_events(detectors, mode)
    patterns = coincidence_patterns(detectors, mode)

    event_p = {
        key: sum(pattern_probability(out, p, detectors) for p in pats) for key, pats in events.items()
    }
    p_total = sum(pattern_probability(out, p, detectors) for p in patterns)

    notes: list[str] = []
    fidelity = purity_ = two_photon = None
    rho = None
    event_f: dict[str, float | None] = {key: None for key in events}
    if p_total > 0:
        target = singlet(reg)
        _, rho = conditional_state(out, patterns, detectors, OUTCOME_PATHS)
        fidelity = fidelity_pure(rho, target)
        purity_ = purity(rho)
        two_photon = rho.sector_weight({"2'": 1, "4'": 1})
        for key, pats in events.items():
            if event_p[key] > 0:
                _, r = conditional_state(out, pats, detectors, OUTCOME_PATHS)
                event_f[key] = fidelity_pure(r, target)
    else:
        notes.append("coincidence probability is zero; fidelity undefined")

    rows = component_rows(post_source, eps, eta, mode) if with_components else ()
    return SchemeReport(
        config=config,
        p_coincidence=float(p_total),
        event_probabilities=event_p,
        fidelity=fidelity,
        event_fidelities=event_f,
        purity=purity_,
        two_photon_weight=two_photon,
        rho=rho,
        components=rows,
        analytic=analytics.analytic_report(eps, eta),
        notes=tuple(notes),
    )


def final_layer_output(state_on_alpha_beta: PureState) -> PureState:
    """Send a state on (alpha, beta) through the two output PBSs."""
    c = build_fig1_circuit()
    return apply_circuit(state_on_alpha_beta, c.elements[5:])


def clicked_pairs(state: PureState, eta: float = 1.0, tol: float = 1e-12) -> set[tuple[str, ...]]:
    """Click patterns with non-negligible probability, as tuples of detector ids."""
    detectors = fig1_detectors(eta)
    return {p.clicked for p in all_patterns(detectors) if pattern_probability(state, p, detectors) > tol}


def ratio_to_leading_order(report: SchemeReport) -> float:
    """p_coincidence / (eta^2 |eps|^4); NaN at eps = 0."""
    approx = report.analytic.approx_coincidence
    return report.p_coincidence / approx if approx > 0 else math.nan
