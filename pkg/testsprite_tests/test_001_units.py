import sys
import os
import pytest
import numpy as np

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from units import Quantity, Unit, convert, speed_cap_check, to_si, dimension_of, parse_unit
from errors import IncompatibleUnitsError, DomainError, ModelError


@pytest.mark.parametrize("value, source, target, expected", [
    (21.47, 'ft3/s', 'm3/s', 0.6079),
    (0.0, 'knots', 'm/s', 0.0),
    (2.0, 'knots', 'm/s', 1.028888),
    (1.0, 'ft', 'm', 0.3048),
    (106.0, 'ft2', 'm2', 9.84772224),
])
def test_convert_examples(value, source, target, expected):
    result = convert(Quantity(value, source), target)
    assert result.unit is parse_unit(target)
    assert result.value == pytest.approx(expected, abs=1e-4)


def test_two_knots_is_exact_multiple_of_constant():
    assert convert(Quantity(2, Unit.KNOT), Unit.METRE_PER_SECOND).value == pytest.approx(1.028888, rel=1e-15)


@pytest.mark.parametrize("pair", [
    ('ft', 'm'), ('ft2', 'm2'), ('ft3', 'm3'), ('ft3/s', 'm3/s'), ('knots', 'm/s'), ('kg', 'kg'),
])
def test_round_trip_identity_over_random_magnitudes(pair):
    rng = np.random.default_rng(42)
    source, target = pair
    for value in 10.0 ** rng.uniform(-6, 6, 200):
        back = convert(convert(Quantity(value, source), target), source)
        assert back.value == pytest.approx(value, rel=1e-12)


def test_incompatible_units_name_both_units():
    with pytest.raises(IncompatibleUnitsError) as excinfo:
        convert(Quantity(1.0, 'm'), 'kg')
    message = str(excinfo.value)
    assert 'm' in message and 'kg' in message
    assert excinfo.value.module == 'units'
    assert isinstance(excinfo.value, ModelError)


def test_unknown_unit_rejected():
    with pytest.raises(IncompatibleUnitsError):
        Quantity(1.0, 'furlongs')


def test_dimension_and_si_helpers():
    assert dimension_of('ft3/s') == 'flow'
    assert dimension_of(Unit.NEWTON_METRE) == 'torque'
    assert to_si(1.0, 'ft3') == pytest.approx(0.0283168)
    assert str(Quantity(2, 'knots')) == '2 knots'


@pytest.mark.parametrize("speed, expected", [
    (2.0, True),
    (3.0, False),
    (2.999, True),
    (Quantity(1.028888, 'm/s'), True),
    (Quantity(1.6, 'm/s'), False),
])
def test_speed_cap_check(speed, expected):
    assert speed_cap_check(speed) is expected


def test_speed_cap_rejects_negative_and_non_speed():
    with pytest.raises(DomainError):
        speed_cap_check(-0.5)
    with pytest.raises(IncompatibleUnitsError):
        speed_cap_check(Quantity(1.0, 'm'))
