import sys
import os
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from collection import (
    RiverSite, cross_section, throughput, expected_yield, observed_vs_expected, metric_site
)
from units import Quantity, convert
from errors import DomainError


@pytest.fixture
def milwaukee():
    """Measured Milwaukee River site (imperial inputs)."""
    return RiverSite()


def test_cross_section():
    assert cross_section(1.2, 106.0) == pytest.approx(127.2)
    with pytest.raises(DomainError):
        cross_section(0.0, 106.0)


def test_throughput_width_divisor():
    flow = throughput(Quantity(423, 'ft3/s'), Quantity(106, 'ft2'), Quantity(5.38, 'ft2'))
    assert flow.unit.value == 'm3/s'
    assert flow.value == pytest.approx(0.6079, abs=1e-4)
    assert convert(flow, 'ft3/s').value == pytest.approx(21.469, abs=1e-3)


def test_throughput_cross_section_divisor():
    flow = throughput(Quantity(423, 'ft3/s'), Quantity(127.2, 'ft2'), Quantity(5.38, 'ft2'))
    assert convert(flow, 'ft3/s').value == pytest.approx(17.89, abs=0.01)


def test_throughput_full_mouth_returns_discharge():
    flow = throughput(Quantity(3.0, 'm3/s'), Quantity(2.0, 'm2'), Quantity(2.0, 'm2'))
    assert flow.value == pytest.approx(3.0)


def test_expected_yield_paper(milwaukee):
    estimate = expected_yield(milwaukee, rounding='paper')
    assert estimate.throughput_m3s == pytest.approx(0.61)
    assert estimate.volume_m3 == pytest.approx(2196.0)
    assert estimate.expected == 3469
    assert (estimate.band_lo, estimate.band_hi) == (3122, 3816)


def test_expected_yield_exact(milwaukee):
    estimate = expected_yield(milwaukee, rounding='exact')
    assert abs(estimate.expected - 3458) <= 1, f"Exact yield should be about 3458, got {estimate.expected}"
    paper = expected_yield(milwaukee, rounding='paper')
    assert abs(paper.expected - estimate.expected) / paper.expected < 0.005


def test_expected_yield_linear_in_duration(milwaukee):
    for rounding in ('paper', 'exact'):
        one = expected_yield(milwaukee, duration=1.0, rounding=rounding)
        two = expected_yield(milwaukee, duration=2.0, rounding=rounding)
        assert two.expected_raw == pytest.approx(2 * one.expected_raw, rel=1e-12)


def test_band_contains_expected(milwaukee):
    for fraction in (0.0, 0.05, 0.1, 0.25):
        estimate = expected_yield(milwaukee, band_fraction=fraction)
        assert estimate.band_lo <= estimate.expected <= estimate.band_hi


def test_cross_section_divisor_is_smaller(milwaukee):
    width = expected_yield(milwaukee, rounding='exact', divisor='width')
    cross = expected_yield(milwaukee, rounding='exact', divisor='cross_section')
    assert cross.expected < width.expected
    assert cross.throughput_m3s == pytest.approx(width.throughput_m3s / 1.2, rel=1e-12)


def test_metric_site_gives_same_exact_yield(milwaukee):
    """Converting the site to metric first does not change the cross-section estimate."""
    imperial = expected_yield(milwaukee, rounding='exact', divisor='cross_section')
    metric = expected_yield(metric_site(milwaukee), mouth_area=Quantity(5.38, 'ft2'), rounding='exact',
                            divisor='cross_section')
    assert metric.expected_raw == pytest.approx(imperial.expected_raw, rel=1e-9)


def test_expected_yield_rejects_bad_inputs(milwaukee):
    with pytest.raises(DomainError):
        expected_yield(RiverSite(discharge=1.0, mean_depth=1.0, width=2.0))
    with pytest.raises(DomainError):
        expected_yield(milwaukee, duration=0.0)
    with pytest.raises(DomainError):
        expected_yield(milwaukee, divisor='depth')
    with pytest.raises(DomainError):
        RiverSite(concentration=0.0)


def test_observed_vs_expected_examples():
    result = observed_vs_expected(4438, 3469, 0.20)
    assert result['ratio'] == pytest.approx(1.279, abs=1e-3)
    assert result['observed_range'] == (3550, 5326)
    assert observed_vs_expected(4438, 3458)['ratio'] == pytest.approx(1.283, abs=1e-3)


def test_observed_equals_expected():
    result = observed_vs_expected(1000, 1000, 0.0)
    assert result['ratio'] == 1.0
    assert result['observed_range'] == (1000, 1000)


def test_observed_vs_expected_rejects_zero_expectation():
    with pytest.raises(DomainError):
        observed_vs_expected(10, 0)
