import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockline import analytics


def test_priors_at_five_percent():
    x = 0.05**2
    n4 = (1 + x) ** 4
    assert analytics.p1(0.05) == pytest.approx(1 / n4)
    assert analytics.p2(0.05) == pytest.approx(4 * x / n4)
    assert analytics.p3(0.05) == pytest.approx(6 * x**2 / n4)
    assert analytics.p_im(0.05) == pytest.approx((1 + 4 * x + 5 * x**2) / n4)
    assert analytics.p_singlet(0.05) == pytest.approx(x**2 / n4)


@given(st.complex_numbers(max_magnitude=0.99, allow_nan=False, allow_infinity=False))
def test_priors_sum_to_one(eps):
    total = analytics.p_im(eps) + analytics.p_singlet(eps) + analytics.p_higher_order(eps)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_bounds():
    assert analytics.fidelity_lower_bound(0.05) == pytest.approx(0.99)
    assert analytics.fidelity_lower_bound_eta(0.05, 0.5) == pytest.approx(0.96)
    x = 0.05**2
    assert analytics.fidelity_lower_bound_exact(0.05) == pytest.approx(1 / (1 + 4 * x + x**2))
    assert analytics.fidelity_lower_bound_eta_exact(0.05, 1.0) == pytest.approx(
        analytics.fidelity_lower_bound_exact(0.05)
    )
    assert analytics.approx_coincidence(0.05, 0.5) == pytest.approx(0.25 * 0.05**4)


def test_report_clamps_but_keeps_raw():
    r = analytics.analytic_report(0.6, 1.0)
    assert r.fidelity_lower_bound == 0.0
    assert r.fidelity_lower_bound_raw == pytest.approx(1 - 4 * 0.36)
    d = r.to_dict()
    assert d["eta"] == 1.0


def test_domain_is_checked():
    with pytest.raises(ValueError):
        analytics.p1(1.0)
    with pytest.raises(ValueError):
        analytics.fidelity_lower_bound_eta(0.05, 0.0)
