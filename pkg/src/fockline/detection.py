"""Bucket (vacuum / non-vacuum) detectors with finite efficiency.

Each photon reaching a detector is registered independently with probability
``eta``, so ``n`` photons on the monitored path leave it silent with
probability ``(1 - eta)**n``.  Both POVM elements are diagonal in the Fock
basis, which lets probabilities and conditional states be accumulated term
by term from a sparse ket.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fock import (
    DensityOperator,
    FockError,
    ModeRegistry,
    Occupation,
    PureState,
    RegistryError,
    truncated_basis,
)


class DetectionError(ValueError):
    pass


class ZeroProbabilityError(DetectionError):
    """Conditioning on an outcome that cannot occur."""


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0 < eta <= 1:
        raise DetectionError(f"detector efficiency must lie in (0, 1], got {eta}")
    return eta


def no_click_weight(n: int, eta: float) -> float:
    """Probability that ``n`` photons all go unregistered."""
    eta = _check_eta(eta)
    if n < 0:
        raise DetectionError("photon number must be non-negative")
    return (1.0 - eta) ** n


def click_weight(n: int, eta: float) -> float:
    return 1.0 - no_click_weight(n, eta)


@dataclass(frozen=True)
class DetectorModel:
    id: str
    path: str
    eta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eta", _check_eta(self.eta))


def check_detectors(detectors: Sequence[DetectorModel], registry: ModeRegistry | None = None) -> None:
    ids = [d.id for d in detectors]
    paths = [d.path for d in detectors]
    if not detectors:
        raise DetectionError("no detectors declared")
    if len(set(ids)) != len(ids):
        raise DetectionError("detector ids must be unique")
    if len(set(paths)) != len(paths):
        raise DetectionError("each path may be monitored by one detector only")
    if registry is not None:
        for p in paths:
            registry.check_path(p)


@dataclass(frozen=True)
class ClickPattern:
    """Outcome per detector, stored as ``((id, clicked), ...)`` in detector order."""

    outcomes: tuple[tuple[str, bool], ...]

    @classmethod
    def from_clicked(cls, detectors: Sequence[DetectorModel], clicked: Iterable[str]) -> "ClickPattern":
        clicked = set(clicked)
        unknown = clicked - {d.id for d in detectors}
        if unknown:
            raise DetectionError(f"unknown detector ids {sorted(unknown)}")
        return cls(tuple((d.id, d.id in clicked) for d in detectors))

    @classmethod
    def from_mapping(cls, detectors: Sequence[DetectorModel], outcomes: Mapping[str, bool]) -> "ClickPattern":
        if set(outcomes) != {d.id for d in detectors}:
            raise DetectionError("pattern must assign an outcome to every detector exactly once")
        return cls(tuple((d.id, bool(outcomes[d.id])) for d in detectors))

    @property
    def clicked(self) -> tuple[str, ...]:
        return tuple(i for i, c in self.outcomes if c)

    @property
    def label(self) -> str:
        return "+".join(self.clicked) or "none"

    def matches(self, detectors: Sequence[DetectorModel]) -> bool:
        return tuple(i for i, _ in self.outcomes) == tuple(d.id for d in detectors)


def all_patterns(detectors: Sequence[DetectorModel]) -> list[ClickPattern]:
    """All 2**len(detectors) patterns, silent-first binary order."""
    return [
        ClickPattern(tuple((d.id, bool(b)) for d, b in zip(detectors, bits)))
        for bits in itertools.product((0, 1), repeat=len(detectors))
    ]


def _path_modes(registry: ModeRegistry, detectors: Sequence[DetectorModel]) -> list[tuple[int, int]]:
    return [registry.path_indices(d.path) for d in detectors]


def _pattern_weight(
    occ: Occupation,
    pattern: ClickPattern,
    detectors: Sequence[DetectorModel],
    modes: Sequence[tuple[int, int]],
) -> float:
    w = 1.0
    for d, (ih, iv), (_, clicked) in zip(detectors, modes, pattern.outcomes):
        silent = (1.0 - d.eta) ** (occ[ih] + occ[iv])
        w *= (1.0 - silent) if clicked else silent
        if w == 0.0:
            break
    return w


def _check_pattern(pattern: ClickPattern, detectors: Sequence[DetectorModel]) -> None:
    if not pattern.matches(detectors):
        raise DetectionError("click pattern does not cover the declared detectors")


def pattern_probability(s: PureState, pattern: ClickPattern, detectors: Sequence[DetectorModel]) -> float:
    check_detectors(detectors, s.registry)
    _check_pattern(pattern, detectors)
    modes = _path_modes(s.registry, detectors)
    p = sum(abs(a) ** 2 * _pattern_weight(occ, pattern, detectors, modes) for occ, a in s.terms.items())
    return float(min(max(p, 0.0), 1.0))


def pattern_probabilities(s: PureState, detectors: Sequence[DetectorModel]) -> dict[ClickPattern, float]:
    return {pat: pattern_probability(s, pat, detectors) for pat in all_patterns(detectors)}


def _as_patterns(patterns: ClickPattern | Iterable[ClickPattern]) -> list[ClickPattern]:
    if isinstance(patterns, ClickPattern):
        return [patterns]
    return list(patterns)


def conditional_state(
    s: PureState,
    patterns: ClickPattern | Iterable[ClickPattern],
    detectors: Sequence[DetectorModel],
    keep: Iterable[str],
) -> tuple[float, DensityOperator]:
    """Probability of the outcome(s) and the normalized state left on ``keep``.

    Several patterns are treated as one coarse-grained event: their
    post-measurement states are summed with their probabilities.  Every path
    outside ``keep`` is traced out.
    """
    reg = s.registry
    check_detectors(detectors, reg)
    pats = _as_patterns(patterns)
    if not pats:
        raise DetectionError("no click pattern given")
    for p in pats:
        _check_pattern(p, detectors)
    keep = sorted(set(keep))
    if not keep:
        raise FockError("keep set must not be empty")
    for p in keep:
        reg.check_path(p)
    if set(keep) & {d.path for d in detectors}:
        raise DetectionError("kept paths may not be monitored by a detector")

    kept_modes = tuple(sorted(i for p in keep for i in reg.path_indices(p)))
    kept_set = set(kept_modes)
    basis = truncated_basis(len(kept_modes), reg.n_max)
    index = {b: i for i, b in enumerate(basis)}
    dmodes = _path_modes(reg, detectors)

    groups: dict[Occupation, list[tuple[int, complex]]] = {}
    for occ, a in s.terms.items():
        traced = tuple(n for i, n in enumerate(occ) if i not in kept_set)
        kept = tuple(occ[i] for i in kept_modes)
        groups.setdefault(traced, []).append((index[kept], a))

    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    total = 0.0
    # traced-out occupation fixes the detector counts, so weights are per group
    size = len(reg)
    traced_positions = [i for i in range(size) if i not in kept_set]
    for traced, entries in groups.items():
        full = [0] * size
        for pos, n in zip(traced_positions, traced):
            full[pos] = n
        w = sum(_pattern_weight(tuple(full), pat, detectors, dmodes) for pat in pats)
        if w == 0.0:
            continue
        v = np.zeros(len(basis), dtype=complex)
        for i, a in entries:
            v[i] += a
        rho += w * np.outer(v, v.conj())
        total += w * float(np.vdot(v, v).real)

    if total <= 0.0:
        raise ZeroProbabilityError("the requested click outcome has zero probability")
    return total, DensityOperator(reg, kept_modes, basis, rho / total)
