"""Sparse polarized Fock states, density operators and fidelity.

A :class:`ModeRegistry` fixes the ordered list of (path, polarization) modes.
A :class:`PureState` maps occupation tuples (one count per registry mode) to
complex amplitudes.  Every value is immutable; operations return new values.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

PRUNE_THRESHOLD = 1e-15
NORM_TOL = 1e-12
DEFAULT_N_MAX = 4

Occupation = tuple[int, ...]


class FockError(ValueError):
    """Base class for state-algebra errors."""


class RegistryError(FockError):
    pass


class TruncationError(FockError):
    pass


class ZeroStateError(FockError):
    pass


class Polarization(enum.IntEnum):
    H = 0
    V = 1

    @classmethod
    def parse(cls, value: "Polarization | str") -> "Polarization":
        if isinstance(value, Polarization):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise RegistryError(f"unknown polarization {value!r}") from None


@dataclass(frozen=True, order=True)
class Mode:
    path: str
    pol: Polarization

    def __str__(self) -> str:
        return f"{self.path}:{self.pol.name}"


class ModeRegistry:
    """Ordered set of modes, two polarizations per spatial path.

    Modes are ordered lexicographically by (path label, polarization) and the
    order never changes after construction.
    """

    def __init__(self, paths: Iterable[str], n_max: int = DEFAULT_N_MAX):
        paths = tuple(sorted({str(p) for p in paths}))
        if not paths:
            raise RegistryError("registry needs at least one path")
        if n_max < 0:
            raise RegistryError("n_max must be non-negative")
        self.paths = paths
        self.n_max = int(n_max)
        self.modes = tuple(Mode(p, pol) for p in paths for pol in Polarization)
        self._index = {m: i for i, m in enumerate(self.modes)}

    def __len__(self) -> int:
        return len(self.modes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModeRegistry):
            return NotImplemented
        return self.paths == other.paths and self.n_max == other.n_max

    def __hash__(self) -> int:
        return hash((self.paths, self.n_max))

    def __repr__(self) -> str:
        return f"ModeRegistry({list(self.paths)!r}, n_max={self.n_max})"

    def index(self, path: str, pol: Polarization | str) -> int:
        mode = Mode(str(path), Polarization.parse(pol))
        try:
            return self._index[mode]
        except KeyError:
            raise RegistryError(f"mode {mode} is not registered") from None

    def path_indices(self, path: str) -> tuple[int, int]:
        return self.index(path, Polarization.H), self.index(path, Polarization.V)

    def check_path(self, path: str) -> str:
        if path not in self.paths:
            raise RegistryError(f"path {path!r} is not registered")
        return path

    def occupation(self, counts: Mapping[tuple[str, Polarization | str], int]) -> Occupation:
        """Build an occupation tuple from ``{(path, pol): n}``."""
        occ = [0] * len(self.modes)
        for (path, pol), n in counts.items():
            if n < 0:
                raise FockError("photon counts must be non-negative")
            occ[self.index(path, pol)] += int(n)
        return tuple(occ)

    def describe(self, occ: Occupation) -> dict[str, dict[str, int]]:
        """Occupied paths of ``occ`` as ``{path: {"H": n, "V": n}}``."""
        out: dict[str, dict[str, int]] = {}
        for i, n in enumerate(occ):
            if n:
                m = self.modes[i]
                out.setdefault(m.path, {"H": 0, "V": 0})[m.pol.name] = n
        return out

    def vacuum_occupation(self) -> Occupation:
        return (0,) * len(self.modes)


def _prune(terms: Mapping[Occupation, complex]) -> dict[Occupation, complex]:
    return {k: complex(v) for k, v in terms.items() if abs(v) >= PRUNE_THRESHOLD}


class PureState:
    """Sparse ket over a registry's truncated Fock basis."""

    __slots__ = ("registry", "terms", "normalized")

    def __init__(
        self,
        registry: ModeRegistry,
        terms: Mapping[Occupation, complex],
        normalized: bool = False,
    ):
        pruned = _prune(terms)
        size = len(registry)
        for occ in pruned:
            if len(occ) != size:
                raise RegistryError("occupation length does not match registry")
            if sum(occ) > registry.n_max:
                raise TruncationError(
                    f"total photon number {sum(occ)} exceeds n_max={registry.n_max}"
                )
        object.__setattr__(self, "registry", registry)
        object.__setattr__(self, "terms", MappingProxyType(pruned))
        if normalized and abs(self.norm_squared() - 1.0) >= NORM_TOL:
            raise FockError("state flagged normalized but its norm is not 1")
        object.__setattr__(self, "normalized", bool(normalized))

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def __repr__(self) -> str:
        return f"PureState({len(self.terms)} terms, normalized={self.normalized})"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalize(self) -> "PureState":
        if self.is_zero:
            raise ZeroStateError("cannot normalize the zero state")
        n = self.norm()
        return PureState(self.registry, {k: v / n for k, v in self.terms.items()}, True)

    def amplitude(self, occ: Occupation | Mapping) -> complex:
        if isinstance(occ, Mapping):
            occ = self.registry.occupation(occ)
        return self.terms.get(tuple(occ), 0j)

    def photon_numbers(self) -> set[int]:
        return {sum(k) for k in self.terms}

    def occupied_paths(self) -> tuple[str, ...]:
        used = set()
        for occ in self.terms:
            used.update(self.registry.modes[i].path for i, n in enumerate(occ) if n)
        return tuple(sorted(used))

    def scale(self, c: complex) -> "PureState":
        return PureState(self.registry, {k: c * v for k, v in self.terms.items()})

    def __add__(self, other: "PureState") -> "PureState":
        return superpose([(1, self), (1, other)])

    def __sub__(self, other: "PureState") -> "PureState":
        return superpose([(1, self), (-1, other)])

    def __neg__(self) -> "PureState":
        return self.scale(-1)

    def __mul__(self, c: complex) -> "PureState":
        return self.scale(c)

    __rmul__ = __mul__

    def distance(self, other: "PureState") -> float:
        """Euclidean distance between two kets."""
        return (self - other).norm()

    def phase_distance(self, other: "PureState") -> float:
        """Distance after removing the best global phase between the kets."""
        ov = inner(other, self)
        phase = ov / abs(ov) if abs(ov) > 0 else 1.0
        return (self - other.scale(phase)).norm()


def _same_registry(states: Sequence[PureState]) -> ModeRegistry:
    reg = states[0].registry
    for s in states[1:]:
        if s.registry != reg:
            raise RegistryError("states do not share one registry")
    return reg


def vacuum(registry: ModeRegistry) -> PureState:
    return PureState(registry, {registry.vacuum_occupation(): 1.0}, normalized=True)


def make_single_photon(registry: ModeRegistry, path: str, pol: Polarization | str) -> PureState:
    occ = registry.occupation({(path, pol): 1})
    return PureState(registry, {occ: 1.0}, normalized=True)


def fock_state(registry: ModeRegistry, counts: Mapping[tuple[str, Polarization | str], int]) -> PureState:
    """Normalized number state, e.g. ``{("1''", "H"): 2}`` for two H photons on 1''."""
    return PureState(registry, {registry.occupation(counts): 1.0}, normalized=True)


def create(registry: ModeRegistry, *modes: tuple[str, Polarization | str]) -> PureState:
    """Product of creation operators on the vacuum (repeated modes pick up sqrt(n!))."""
    counts: dict[tuple[str, Polarization], int] = {}
    for path, pol in modes:
        key = (path, Polarization.parse(pol))
        counts[key] = counts.get(key, 0) + 1
    weight = math.prod(math.sqrt(math.factorial(n)) for n in counts.values())
    return PureState(registry, {registry.occupation(counts): weight})


def superpose(pairs: Iterable[tuple[complex, PureState]], normalize: bool = False) -> PureState:
    pairs = list(pairs)
    if not pairs:
        raise FockError("superpose needs at least one state")
    reg = _same_registry([s for _, s in pairs])
    acc: dict[Occupation, complex] = {}
    for c, s in pairs:
        for k, v in s.terms.items():
            acc[k] = acc.get(k, 0j) + c * v
    out = PureState(reg, acc)
    return out.normalize() if normalize else out


def tensor(s1: PureState, s2: PureState) -> PureState:
    """Product of two states living on disjoint modes of one registry."""
    reg = _same_registry([s1, s2])
    occ1 = {i for k in s1.terms for i, n in enumerate(k) if n}
    occ2 = {i for k in s2.terms for i, n in enumerate(k) if n}
    overlap = occ1 & occ2
    if overlap:
        names = ", ".join(str(reg.modes[i]) for i in sorted(overlap))
        raise FockError(f"tensor factors share occupied modes: {names}")
    acc: dict[Occupation, complex] = {}
    for k1, a1 in s1.terms.items():
        for k2, a2 in s2.terms.items():
            key = tuple(x + y for x, y in zip(k1, k2))
            acc[key] = acc.get(key, 0j) + a1 * a2
    return PureState(reg, acc, normalized=s1.normalized and s2.normalized)


def tensor_all(states: Iterable[PureState]) -> PureState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def inner(s1: PureState, s2: PureState) -> complex:
    """<s1|s2>, antilinear in the first argument."""
    _same_registry([s1, s2])
    small, big = (s1, s2) if len(s1.terms) <= len(s2.terms) else (s2, s1)
    total = 0j
    for k, a in small.terms.items():
        b = big.terms.get(k)
        if b is not None:
            total += a.conjugate() * b if small is s1 else b.conjugate() * a
    return total


class BellVariant(enum.Enum):
    PHI_PLUS = "Phi+"
    PHI_MINUS = "Phi-"
    PSI_PLUS = "Psi+"
    PSI_MINUS = "Psi-"


def bell_state(registry: ModeRegistry, variant: BellVariant | str, path_i: str, path_j: str) -> PureState:
    """|Phi+-> = (HH +- VV)/sqrt2 and |Psi+-> = (HV +- VH)/sqrt2 on paths (i, j)."""
    variant = BellVariant(variant)
    H, V = Polarization.H, Polarization.V

    def pair(p, q):
        return create(registry, (path_i, p), (path_j, q))

    if variant in (BellVariant.PHI_PLUS, BellVariant.PHI_MINUS):
        first, second = pair(H, H), pair(V, V)
    else:
        first, second = pair(H, V), pair(V, H)
    sign = 1 if variant in (BellVariant.PHI_PLUS, BellVariant.PSI_PLUS) else -1
    return superpose([(1 / math.sqrt(2), first), (sign / math.sqrt(2), second)], normalize=True)


# ---------------------------------------------------------------------------
# density operators


def truncated_basis(n_modes: int, n_max: int) -> tuple[Occupation, ...]:
    """All occupations of ``n_modes`` modes with total <= n_max, ordered by (total, tuple)."""
    out = []
    for total in range(n_max + 1):
        for combo in itertools.combinations_with_replacement(range(n_modes), total):
            occ = [0] * n_modes
            for i in combo:
                occ[i] += 1
            out.append(tuple(occ))
    out.sort(key=lambda o: (sum(o), o))
    return tuple(out)


@dataclass(frozen=True)
class DensityOperator:
    """Dense operator on the truncated Fock basis of a subset of registry modes.

    ``modes`` are registry mode indices (ascending); ``basis[i]`` is the
    occupation of those modes for row/column ``i``.
    """

    registry: ModeRegistry
    modes: tuple[int, ...]
    basis: tuple[Occupation, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (len(self.basis), len(self.basis)):
            raise FockError("matrix shape does not match basis size")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(sorted({self.registry.modes[i].path for i in self.modes}))

    @property
    def index(self) -> dict[Occupation, int]:
        return {b: i for i, b in enumerate(self.basis)}

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)

    def normalize(self) -> "DensityOperator":
        t = np.trace(self.matrix).real
        if t <= 0:
            raise ZeroStateError("cannot normalize an operator with zero trace")
        return DensityOperator(self.registry, self.modes, self.basis, self.matrix / t)

    def sector_weight(self, photons_per_path: Mapping[str, int]) -> float:
        """Diagonal weight on basis states with the given photon count on each path."""
        reg = self.registry
        total = 0.0
        for i, occ in enumerate(self.basis):
            counts: dict[str, int] = {}
            for mode, n in zip(self.modes, occ):
                p = reg.modes[mode].path
                counts[p] = counts.get(p, 0) + n
            if all(counts.get(p, 0) == n for p, n in photons_per_path.items()):
                total += self.matrix[i, i].real
        return total


def _modes_for_paths(registry: ModeRegistry, paths: Iterable[str]) -> tuple[int, ...]:
    idx = []
    for p in paths:
        idx.extend(registry.path_indices(registry.check_path(p)))
    return tuple(sorted(idx))


def state_vector(s: PureState, modes: Sequence[int], basis: Sequence[Occupation]) -> np.ndarray:
    """Coefficients of ``s`` in a sub-basis; ``s`` must vanish outside ``modes``."""
    index = {b: i for i, b in enumerate(basis)}
    mode_set = set(modes)
    vec = np.zeros(len(basis), dtype=complex)
    for occ, a in s.terms.items():
        if any(n for i, n in enumerate(occ) if i not in mode_set):
            raise FockError("state has support outside the operator's modes")
        vec[index[tuple(occ[i] for i in modes)]] += a
    return vec


def to_density(s: PureState, paths: Iterable[str] | None = None) -> DensityOperator:
    """Projector |s><s| on ``paths`` (default: the paths ``s`` occupies)."""
    if s.is_zero:
        raise ZeroStateError("cannot form a density operator from the zero state")
    if not s.normalized and abs(s.norm_squared() - 1) >= NORM_TOL:
        raise FockError("to_density needs a normalized state")
    reg = s.registry
    paths = s.occupied_paths() if paths is None else tuple(paths)
    if not paths:
        paths = (reg.paths[0],)
    modes = _modes_for_paths(reg, paths)
    basis = truncated_basis(len(modes), reg.n_max)
    v = state_vector(s, modes, basis)
    return DensityOperator(reg, modes, basis, np.outer(v, v.conj()))


def mix(pairs: Iterable[tuple[float, DensityOperator]]) -> DensityOperator:
    pairs = list(pairs)
    if not pairs:
        raise FockError("mix needs at least one operator")
    probs = [float(p) for p, _ in pairs]
    if any(p < 0 for p in probs):
        raise FockError("mixture probabilities must be non-negative")
    if abs(sum(probs) - 1) > NORM_TOL:
        raise FockError("mixture probabilities must sum to 1")
    first = pairs[0][1]
    for _, rho in pairs[1:]:
        if rho.registry != first.registry or rho.modes != first.modes:
            raise FockError("mixed operators must share modes")
    m = sum(p * rho.matrix for p, rho in zip(probs, (r for _, r in pairs)))
    return DensityOperator(first.registry, first.modes, first.basis, m)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    keep = set(keep)
    if not keep:
        raise FockError("partial_trace needs a non-empty keep set")
    reg = rho.registry
    missing = keep - set(rho.paths)
    if missing:
        raise RegistryError(f"paths {sorted(missing)} are not part of the operator")
    kept_pos = [j for j, m in enumerate(rho.modes) if reg.modes[m].path in keep]
    traced_pos = [j for j, m in enumerate(rho.modes) if reg.modes[m].path not in keep]
    if not traced_pos:
        return rho
    new_modes = tuple(rho.modes[j] for j in kept_pos)
    new_basis = truncated_basis(len(new_modes), reg.n_max)
    new_index = {b: i for i, b in enumerate(new_basis)}
    groups: dict[Occupation, tuple[list[int], list[int]]] = {}
    for i, occ in enumerate(rho.basis):
        t = tuple(occ[j] for j in traced_pos)
        k = tuple(occ[j] for j in kept_pos)
        rows, cols = groups.setdefault(t, ([], []))
        rows.append(i)
        cols.append(new_index[k])
    out = np.zeros((len(new_basis), len(new_basis)), dtype=complex)
    for rows, cols in groups.values():
        out[np.ix_(cols, cols)] += rho.matrix[np.ix_(rows, rows)]
    return DensityOperator(reg, new_modes, new_basis, out)


def fidelity_pure(rho: DensityOperator, psi: PureState, tol: float = 1e-10) -> float:
    """<psi|rho|psi> for normalized ``psi`` supported on the operator's modes."""
    if psi.registry != rho.registry:
        raise RegistryError("state and operator use different registries")
    if abs(psi.norm_squared() - 1) >= NORM_TOL:
        raise FockError("fidelity_pure needs a normalized state")
    v = state_vector(psi, rho.modes, rho.basis)
    f = float(np.real(v.conj() @ rho.matrix @ v))
    if -tol <= f < 0:
        return 0.0
    if 1 < f <= 1 + tol:
        return 1.0
    if not 0 <= f <= 1:
        raise FockError(f"fidelity {f} outside [0, 1]; operator is not a state")
    return f


def purity(rho: DensityOperator) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))
