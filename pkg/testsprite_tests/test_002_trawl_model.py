import sys
import os
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from trawl_model import (
    TrawlSpec, ParticleSpec, trawl_volume, particle_capacity, fill_time, design_throughput,
    collection_rate, fill_time_at_concentration
)
from errors import DomainError


@pytest.fixture
def default_spec():
    """Built trawl: 1 m x 0.5 m mouth, 1.5 m net."""
    return TrawlSpec()


def test_trawl_volume_examples(default_spec):
    """Pyramid volume L*W*H/3 for the built and variant nets."""
    assert trawl_volume(default_spec) == pytest.approx(0.25)
    assert trawl_volume(TrawlSpec(net_length=3.0)) == pytest.approx(0.5)
    assert trawl_volume(TrawlSpec(mouth_width=2.0)) == pytest.approx(0.5)


def test_capacity_paper_and_exact(default_spec):
    """Rounded particle volume reproduces the printed count; exact is slightly larger."""
    volume = trawl_volume(default_spec)
    paper = particle_capacity(volume, ParticleSpec(5.0), 'paper')
    exact = particle_capacity(volume, ParticleSpec(5.0), 'exact')
    assert paper == 3816793, f"Paper-mode capacity should be 3816793, got {paper}"
    assert abs(exact - 3819718) <= 1, f"Exact capacity should be about 3819718, got {exact}"
    assert exact > paper


def test_single_particle_volume_holds_one():
    """A net exactly one rounded particle in size holds one particle."""
    assert particle_capacity(65.5e-9, ParticleSpec(5.0), 'paper') == 1


def test_capacity_monotone_in_particle_size(default_spec):
    volume = trawl_volume(default_spec)
    counts = [particle_capacity(volume, ParticleSpec(d), 'exact') for d in (1.0, 2.0, 3.0, 4.0, 5.0)]
    assert counts == sorted(counts, reverse=True)
    assert len(set(counts)) == len(counts)


def test_capacity_grows_with_volume():
    small = particle_capacity(0.25, rounding='exact')
    large = particle_capacity(0.5, rounding='exact')
    assert large >= 2 * small


def test_invalid_inputs_rejected():
    with pytest.raises(DomainError):
        ParticleSpec(6.0)
    with pytest.raises(DomainError):
        ParticleSpec(0.0)
    with pytest.raises(DomainError):
        particle_capacity(0.0)
    with pytest.raises(DomainError):
        particle_capacity(0.25, rounding='nearest')
    with pytest.raises(DomainError):
        TrawlSpec(pore_diameter=600000.0)   # 0.6 m pores in a 0.5 m mouth


@pytest.mark.parametrize("capacity, rate, duty, expected", [
    (3816793, 220.0, 24.0, 722.877),
    (220, 220.0, 24.0, 1.0 / 24.0),
    (3816793, 880.0, 24.0, 180.719),
])
def test_fill_time_examples(capacity, rate, duty, expected):
    assert fill_time(capacity, rate, duty) == pytest.approx(expected, rel=1e-4)


def test_fill_time_identity():
    """fill_time * rate * duty recovers the capacity."""
    for capacity, rate, duty in [(3816793, 220.0, 24.0), (1000, 7.5, 12.0), (5, 0.1, 0.5)]:
        assert fill_time(capacity, rate, duty) * rate * duty == pytest.approx(capacity, rel=1e-12)


def test_fill_time_rejects_bad_rate_and_duty():
    with pytest.raises(DomainError):
        fill_time(100, 0.0)
    with pytest.raises(DomainError):
        fill_time(100, 10.0, duty=25.0)
    with pytest.raises(DomainError):
        fill_time(100, 10.0, duty=0.0)


def test_design_throughput_and_hot_spot_fill(default_spec):
    """The 0.5 m^2 mouth at 2 knots filters about 1852 m^3/h."""
    throughput = design_throughput(default_spec)
    assert throughput == pytest.approx(1851.9984, rel=1e-9)
    assert collection_rate(0.104, throughput) == pytest.approx(192.608, rel=1e-4)
    # hot-spot water fills the net in roughly three months
    assert fill_time_at_concentration(default_spec, 0.932) == pytest.approx(92.14, rel=1e-3)


def test_collection_rate_rejects_negative():
    with pytest.raises(DomainError):
        collection_rate(-1.0, 100.0)
