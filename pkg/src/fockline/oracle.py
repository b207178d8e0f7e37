"""Brute-force dense reference for the heralding scheme.

Shares no code with the sparse simulator.  The circuit is laid out in place on
six spatial lines (12 modes)::

    line 0: 1 -> 1' -> 1'' -> HWP -> x      line 4: vacuum -> y
    line 1: 2 -> 2'                         line 5: vacuum -> w
    line 2: 3 -> 3' -> 3'' -> HWP -> z
    line 3: 4 -> 4'

Every element is a 12x12 single-particle unitary lifted to the complete
<=4-photon Fock space through permanents,
``<m|U|n> = perm(U[m, n]) / sqrt(m! n!)``, and applied as a dense matrix.
Click probabilities are summed exhaustively over all 16 patterns.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

N_LINES = 6
N_MODES = 2 * N_LINES
N_PHOTONS = 4
H, V = 0, 1
DETECTOR_LINES = {"D1": 0, "D2": 4, "D3": 2, "D4": 5}
KEPT_LINES = (1, 3)


def mode(line: int, pol: int) -> int:
    return 2 * line + pol


@lru_cache(maxsize=None)
def basis() -> tuple[tuple[tuple[int, ...], ...], dict]:
    """Complete basis: mode multisets of size 0..4, grouped by photon number."""
    states = []
    for n in range(N_PHOTONS + 1):
        states.extend(itertools.combinations_with_replacement(range(N_MODES), n))
    return tuple(states), {s: i for i, s in enumerate(states)}


def occupation(multiset: tuple[int, ...]) -> np.ndarray:
    occ = np.zeros(N_MODES, dtype=int)
    for m in multiset:
        occ[m] += 1
    return occ


def _bs(a: int, b: int) -> np.ndarray:
    u = np.eye(N_MODES, dtype=complex)
    r = 1 / math.sqrt(2)
    for p in (H, V):
        i, j = mode(a, p), mode(b, p)
        u[i, i], u[j, i], u[i, j], u[j, j] = r, r, r, -r
    return u


def _hwp(line: int) -> np.ndarray:
    u = np.eye(N_MODES, dtype=complex)
    r = 1 / math.sqrt(2)
    h, v = mode(line, H), mode(line, V)
    u[h, h], u[v, h], u[h, v], u[v, v] = r, r, r, -r
    return u


def _pbs(l1: int, l2: int) -> np.ndarray:
    """H stays on its line, V swaps lines."""
    u = np.zeros((N_MODES, N_MODES), dtype=complex)
    for k in range(N_MODES):
        u[k, k] = 1
    for src, dst in ((l1, l2), (l2, l1)):
        u[mode(src, V), mode(src, V)] = 0
        u[mode(dst, V), mode(src, V)] = 1
    return u


def single_particle_circuit() -> list[np.ndarray]:
    return [
        _pbs(0, 1),  # PBS1: 1,2 -> 1',2'
        _pbs(2, 3),  # PBS2: 3,4 -> 3',4'
        _bs(0, 2),   # BS: 1',3' -> 1'',3''
        _hwp(0),
        _hwp(2),
        _pbs(0, 4),  # PBS3: x stays on line 0, y on line 4
        _pbs(2, 5),  # PBS4: z stays on line 2, w on line 5
    ]


_PERMS = {n: np.array(list(itertools.permutations(range(n))), dtype=int) for n in range(1, N_PHOTONS + 1)}


def _permanents(sub: np.ndarray) -> np.ndarray:
    """Permanents of a stack of n x n matrices by summing over all permutations."""
    n = sub.shape[-1]
    perms = _PERMS[n]
    rows = np.arange(n)
    return np.prod(sub[..., rows, perms], axis=-1).sum(axis=-1)


def _permanents_4(cols: list[list[np.ndarray]]) -> np.ndarray:
    """Elementwise 4x4 permanents, ``cols[i][j]`` holding entry (i, j) for every pair.

    Laplace expansion along rows (0, 1) against rows (2, 3).
    """
    total = 0
    for j, k in itertools.combinations(range(4), 2):
        l, m = (c for c in range(4) if c not in (j, k))
        top = cols[0][j] * cols[1][k] + cols[0][k] * cols[1][j]
        bottom = cols[2][l] * cols[3][m] + cols[2][m] * cols[3][l]
        total = total + top * bottom
    return total


def lift(u: np.ndarray) -> np.ndarray:
    """Dense Fock-space matrix of single-particle unitary ``u`` on the full basis."""
    states, _ = basis()
    dim = len(states)
    out = np.zeros((dim, dim), dtype=complex)
    start = 0
    for n in range(N_PHOTONS + 1):
        block = [s for s in states[start:] if len(s) == n]
        size = len(block)
        if n == 0:
            out[start, start] = 1
        else:
            idx = np.array(block, dtype=int)
            norms = np.array([math.prod(math.factorial(c) for c in occupation(s) if c) for s in block])
            scale = 1 / np.sqrt(np.outer(norms, norms))
            if n == 4:
                cols = [[u[idx[:, i][:, None], idx[:, j][None, :]] for j in range(4)] for i in range(4)]
                perm = _permanents_4(cols)
            else:
                perm = _permanents(u[idx[:, None, :, None], idx[None, :, None, :]])
            out[start : start + size, start : start + size] = perm * scale
        start += size
    return out


@lru_cache(maxsize=None)
def lifted_circuit() -> tuple[np.ndarray, ...]:
    return tuple(lift(u) for u in single_particle_circuit())


def input_vector(epsilon: complex) -> np.ndarray:
    states, index = basis()
    eps = complex(epsilon)
    norm = 1 / math.sqrt(1 + abs(eps) ** 2)
    v_prime = {H: eps * norm, V: -norm}
    h_prime = {H: norm, V: eps * norm}
    photons = [v_prime, h_prime, v_prime, h_prime]
    vec = np.zeros(len(states), dtype=complex)
    for pols in itertools.product((H, V), repeat=4):
        key = tuple(sorted(mode(line, p) for line, p in enumerate(pols)))
        vec[index[key]] += math.prod(ph[p] for ph, p in zip(photons, pols))
    return vec


def evolve(epsilon: complex) -> np.ndarray:
    vec = input_vector(epsilon)
    for m in lifted_circuit():
        vec = m @ vec
    return vec


def _click_probability(n: int, eta: float, clicked: bool) -> float:
    silent = (1 - eta) ** n
    return 1 - silent if clicked else silent


def _singlet_overlap_table() -> dict[tuple[int, ...], complex]:
    """Singlet (H V - V H)/sqrt2 on the kept lines, keyed by kept-mode occupation."""
    a, b = KEPT_LINES
    kept = [mode(a, H), mode(a, V), mode(b, H), mode(b, V)]

    def key(*ms):
        occ = [0] * 4
        for m in ms:
            occ[kept.index(m)] += 1
        return tuple(occ)

    r = 1 / math.sqrt(2)
    return {key(mode(a, H), mode(b, V)): r, key(mode(a, V), mode(b, H)): -r}


@lru_cache(maxsize=None)
def _grouping() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per basis state: traced-occupation group id and singlet coefficient; per group: detector counts."""
    states, _ = basis()
    a, b = KEPT_LINES
    kept_modes = [mode(a, H), mode(a, V), mode(b, H), mode(b, V)]
    other_modes = [m for m in range(N_MODES) if m not in kept_modes]
    singlet = _singlet_overlap_table()
    group_of: dict[tuple[int, ...], int] = {}
    gid = np.zeros(len(states), dtype=int)
    coeff = np.zeros(len(states), dtype=complex)
    counts = []
    for i, s in enumerate(states):
        occ = occupation(s)
        traced = tuple(occ[other_modes])
        if traced not in group_of:
            group_of[traced] = len(group_of)
            counts.append([occ[mode(l, H)] + occ[mode(l, V)] for l in DETECTOR_LINES.values()])
        gid[i] = group_of[traced]
        coeff[i] = singlet.get(tuple(occ[kept_modes]), 0)
    return gid, coeff, np.array(counts, dtype=int)


def pattern_table(epsilon: complex, eta: float) -> dict[tuple[str, ...], tuple[float, float]]:
    """For each of the 16 patterns (clicked ids): (probability, unnormalized singlet weight)."""
    psi = evolve(epsilon)
    gid, coeff, counts = _grouping()
    n_groups = len(counts)
    group_prob = np.bincount(gid, weights=np.abs(psi) ** 2, minlength=n_groups)
    overlap = np.zeros(n_groups, dtype=complex)
    np.add.at(overlap, gid, np.conj(coeff) * psi)
    group_overlap = np.abs(overlap) ** 2
    ids = list(DETECTOR_LINES)
    table = {}
    for bits in itertools.product((False, True), repeat=len(ids)):
        w = np.ones(n_groups)
        for k, clicked in enumerate(bits):
            w *= np.array([_click_probability(n, eta, clicked) for n in counts[:, k]])
        key = tuple(d for d, c in zip(ids, bits) if c)
        table[key] = (float(w @ group_prob), float(w @ group_overlap))
    return table


def coincidence(epsilon: complex, eta: float, strict: bool = True) -> tuple[float, float]:
    """(p_coincidence, fidelity) from the dense reference; fidelity is NaN when p = 0."""
    table = pattern_table(epsilon, eta)
    heralds = (("D2", "D3"), ("D1", "D4"))
    p = f = 0.0
    for clicked, (prob, weight) in table.items():
        if strict:
            hit = clicked in heralds
        else:
            hit = any(set(h) <= set(clicked) for h in heralds)
        if hit:
            p += prob
            f += weight
    return p, (f / p if p > 0 else math.nan)


def total_probability(epsilon: complex, eta: float) -> float:
    return sum(p for p, _ in pattern_table(epsilon, eta).values())
