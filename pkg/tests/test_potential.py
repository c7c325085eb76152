import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwell.errors import ConfigError
from multiwell.grid import Grid
from multiwell.potential import (
    agmon_distance,
    barrier_maxima,
    make_double_well,
    make_n_well,
    make_tabulated,
    modified_potential,
    validate_hypothesis1,
    well_component,
)


def second_derivative(f, x, h=1e-4):
    return (f(x + h) - 2 * f(x) + f(x - h)) / h**2


def test_double_well_values():
    V = make_double_well(1.0, 1.0)
    assert V(0.0) == pytest.approx(2.0)
    assert V(-1.0) == pytest.approx(1.0)
    assert V(1.0) == pytest.approx(1.0)
    assert second_derivative(V, 1.0) == pytest.approx(8.0, rel=1e-6)
    assert second_derivative(V, -1.0) == pytest.approx(8.0, rel=1e-6)


def test_double_well_symmetric_on_grid():
    V = make_double_well(1.0, 1.0)
    x = Grid(6.0, 1024).x[1:]  # drop -L, whose mirror is not a grid point
    np.testing.assert_array_equal(V(x), V(-x))


def test_double_well_other_parameters():
    V = make_double_well(2.0, 0.5)
    assert V.wells == (-2.0, 2.0)
    assert V(2.0) == V(-2.0) == 1.0


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, -1.0)])
def test_double_well_rejects_nonpositive(a, b):
    with pytest.raises(ConfigError):
        make_double_well(a, b)


def test_n_well_two_matches_double_well_geometry():
    V = make_n_well(2, 2.0)
    dw = make_double_well(1.0, 1.0)
    np.testing.assert_allclose(V.wells, dw.wells)
    for x in V.wells:
        assert V(x) == pytest.approx(1.0, abs=1e-12)
        assert second_derivative(V, x) == pytest.approx(second_derivative(dw, x), rel=1e-5)


def test_n_well_three_minima():
    V = make_n_well(3, 2.0)
    assert V.n == 3
    for x in V.wells:
        assert V(x) == pytest.approx(1.0, abs=1e-12)
        assert second_derivative(V, x) > 0


def test_n_well_four_passes_validator():
    V = make_n_well(4, 1.5)
    assert validate_hypothesis1(V, Grid(8.0, 4096)).passed


def test_validator_double_well_passes():
    assert validate_hypothesis1(make_double_well(1.0, 1.0), Grid(6.0, 2048)).passed


def test_validator_rejects_single_well():
    x = np.linspace(-6, 6, 201)
    V = make_tabulated(x, 1 + x**2, wells=(0.0,))
    with pytest.raises(ConfigError):
        validate_hypothesis1(V, Grid(6.0, 2048))


def test_validator_flags_perturbed_minimum():
    x = np.linspace(-6, 6, 4001)
    v = 1 + (x**2 - 1) ** 2 + 0.01 * np.exp(-8 * (x - 1) ** 2)
    rep = validate_hypothesis1(make_tabulated(x, v, wells=(-1.0, 1.0)), Grid(6.0, 2048))
    assert not rep.passed
    assert not rep.clauses["i"].passed


def test_agmon_unit_double_well():
    assert agmon_distance(make_double_well(1.0, 1.0), 1) == pytest.approx(4.0 / 3.0, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.5, 2.0), b=st.floats(0.25, 4.0))
def test_agmon_closed_form(a, b):
    # integral of sqrt(b) (a^2 - x^2) over [-a, a]
    assert agmon_distance(make_double_well(a, b), 1) == pytest.approx(4.0 / 3.0 * np.sqrt(b) * a**3, rel=1e-8)


def test_agmon_flat_barrier_is_zero():
    # plateau well beyond the wells so spline ringing from its edges has decayed
    x = np.linspace(-4, 4, 801)
    v = np.where(np.abs(x) <= 2, 1.0, 1 + (np.abs(x) - 2) ** 4)
    assert agmon_distance(make_tabulated(x, v, wells=(-1.0, 1.0)), 1) == pytest.approx(0.0, abs=1e-12)


def test_agmon_rejects_bad_index():
    with pytest.raises(ConfigError):
        agmon_distance(make_double_well(1.0, 1.0), 2)


def test_barrier_top():
    (loc, height), = barrier_maxima(make_double_well(1.0, 1.0))
    assert loc == pytest.approx(0.0, abs=1e-8)
    assert height == pytest.approx(2.0)


def test_modified_potential_branches():
    V = make_double_well(1.0, 1.0)
    x = Grid(6.0, 1024).x
    V2 = modified_potential(V, 2, 1.5, x)
    left, right = well_component(V, 2, 1.5)
    inside = (x > left) & (x < right)
    np.testing.assert_array_equal(V2[inside], V(x[inside]))
    low_left = (x < 0) & (V(x) < 1.5)
    np.testing.assert_array_equal(V2[low_left], 1.5)
    assert np.all(V2 >= np.minimum(V(x), 1.5))


def test_threshold_at_barrier_rejected():
    with pytest.raises(ConfigError):
        modified_potential(make_double_well(1.0, 1.0), 2, 2.0, np.zeros(3))
