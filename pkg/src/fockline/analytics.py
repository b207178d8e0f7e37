"""Closed-form probabilities and fidelity bounds of the heralding scheme.

Everything here is a function of ``x = |epsilon|**2`` (and ``eta``) only and
serves as an independent cross-check of the exact simulation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


def _x(epsilon: complex) -> float:
    x = abs(epsilon) ** 2
    if x >= 1:
        raise ValueError("|epsilon| must be below 1")
    return x


def _norm4(x: float) -> float:
    return (1 + x) ** 4


def p1(epsilon: complex) -> float:
    """Prior weight of the all-nominal component (no photon towards the detectors)."""
    return 1 / _norm4(_x(epsilon))


def p2(epsilon: complex) -> float:
    x = _x(epsilon)
    return 4 * x / _norm4(x)


def p3(epsilon: complex) -> float:
    x = _x(epsilon)
    return 6 * x**2 / _norm4(x)


def p_im(epsilon: complex) -> float:
    """Prior weight of every component a coincidence rules out."""
    x = _x(epsilon)
    return (1 + 4 * x + 5 * x**2) / _norm4(x)


def p_singlet(epsilon: complex) -> float:
    """Prior weight of the heralding term (singlet on both path pairs)."""
    x = _x(epsilon)
    return x**2 / _norm4(x)


def p_higher_order(epsilon: complex) -> float:
    x = _x(epsilon)
    return (4 * x**3 + x**4) / _norm4(x)


def _check_eta(eta: float) -> float:
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return float(eta)


def fidelity_lower_bound_exact(epsilon: complex) -> float:
    """Worst case where every omitted higher-order term heralds: x^2 / ((1+x)^4 - (1+4x+5x^2))."""
    x = _x(epsilon)
    if x == 0:
        return float("nan")
    return x**2 / (_norm4(x) - (1 + 4 * x + 5 * x**2))


def fidelity_lower_bound(epsilon: complex) -> float:
    """Leading-order approximation ``1 - 4|eps|^2``."""
    return 1 - 4 * _x(epsilon)


def fidelity_lower_bound_eta(epsilon: complex, eta: float) -> float:
    """``1 - 4|eps|^2 / eta^2``."""
    return 1 - 4 * _x(epsilon) / _check_eta(eta) ** 2


def fidelity_lower_bound_eta_exact(epsilon: complex, eta: float) -> float:
    """Worst-case bound with the heralding term attenuated by eta^2 and all higher orders heralding."""
    x = _x(epsilon)
    eta = _check_eta(eta)
    if x == 0:
        return float("nan")
    return eta**2 * x**2 / (eta**2 * x**2 + 4 * x**3 + x**4)


def approx_coincidence(epsilon: complex, eta: float) -> float:
    return _check_eta(eta) ** 2 * abs(epsilon) ** 4


def _clamp(v: float) -> float:
    if v != v:
        return v
    return min(max(v, 0.0), 1.0)


@dataclass(frozen=True)
class AnalyticReport:
    epsilon_abs: float
    eta: float
    p1: float
    p2: float
    p3: float
    p_im: float
    fidelity_lower_bound: float
    fidelity_lower_bound_exact: float
    fidelity_lower_bound_eta: float
    fidelity_lower_bound_eta_exact: float
    approx_coincidence: float
    fidelity_lower_bound_raw: float
    fidelity_lower_bound_eta_raw: float

    def to_dict(self) -> dict:
        return asdict(self)


def analytic_report(epsilon: complex, eta: float = 1.0) -> AnalyticReport:
    raw = fidelity_lower_bound(epsilon)
    raw_eta = fidelity_lower_bound_eta(epsilon, eta)
    return AnalyticReport(
        epsilon_abs=abs(epsilon),
        eta=float(eta),
        p1=p1(epsilon),
        p2=p2(epsilon),
        p3=p3(epsilon),
        p_im=p_im(epsilon),
        fidelity_lower_bound=_clamp(raw),
        fidelity_lower_bound_exact=fidelity_lower_bound_exact(epsilon),
        fidelity_lower_bound_eta=_clamp(raw_eta),
        fidelity_lower_bound_eta_exact=fidelity_lower_bound_eta_exact(epsilon, eta),
        approx_coincidence=approx_coincidence(epsilon, eta),
        fidelity_lower_bound_raw=raw,
        fidelity_lower_bound_eta_raw=raw_eta,
    )
