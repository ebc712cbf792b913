"""Exact group arithmetic: shears, cut maps, jump indices, sign actions."""

import numpy as np
import pytest

from cartograph import (
    CutShear,
    FocusFocusDatum,
    PiecewiseShear,
    TauElement,
    ValidationError,
    cut_shear,
    epsilon_to_cuts,
    jump_index,
    shear_power,
    sign_change_shear,
)


def matrix_shear(k, p):
    """Oracle: apply T^k by repeated 2x2 integer matrix multiplication."""
    t = np.array([[1, 0], [1, 1]])
    m = np.linalg.matrix_power(t, k) if k >= 0 else np.linalg.matrix_power(
        np.array([[1, 0], [-1, 1]]), -k)
    return tuple(m @ np.asarray(p))


def test_shear_power_examples():
    assert shear_power(1, (1.0, 0.0)) == (1.0, 1.0)
    assert shear_power(5, (0.0, 3.25)) == (0.0, 3.25)  # the vertical axis is fixed
    assert shear_power(-2, (3.0, 1.0)) == (3.0, -5.0)


def test_shear_power_matches_matrix_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = int(rng.integers(-6, 7))
        p = tuple(rng.uniform(-5, 5, 2))
        assert shear_power(k, p) == pytest.approx(matrix_shear(k, p), abs=1e-12)


def test_shear_power_composition_law():
    rng = np.random.default_rng(2)
    for _ in range(300):
        a, b = (int(v) for v in rng.integers(-8, 9, 2))
        p = tuple(rng.uniform(-4, 4, 2))
        once = shear_power(a + b, p)
        twice = shear_power(a, shear_power(b, p))
        assert once == pytest.approx(twice, abs=1e-12)
    assert shear_power(0, (2.5, -1.5)) == (2.5, -1.5)


def test_cut_shear_examples():
    assert cut_shear(CutShear(1, 2.0), (1.0, 5.0)) == (1.0, 5.0)
    assert cut_shear(CutShear(1, 2.0), (2.0, -3.0)) == (2.0, -3.0)  # fixed on the line
    assert cut_shear(CutShear(2, 0.0), (3.0, 1.0)) == (3.0, 7.0)


def test_cut_shear_continuity_across_line():
    c = CutShear(3, 0.7)
    eps = 1e-9
    left = c.apply((0.7 - eps, 1.0))[1]
    right = c.apply((0.7 + eps, 1.0))[1]
    assert abs(left - right) < 1e-8


def test_cut_commutativity_random_orders():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        cuts = [CutShear(int(rng.integers(-3, 4)), float(rng.uniform(-2, 2)))
                for _ in range(n)]
        pts = rng.uniform(-3, 3, (10, 2))
        order = list(range(n))
        rng.shuffle(order)
        for p in pts:
            p1 = tuple(p)
            p2 = tuple(p)
            for c in cuts:
                p1 = c.apply(p1)
            for i in order:
                p2 = cuts[i].apply(p2)
            assert p1 == pytest.approx(p2, abs=1e-12)


def test_tau_element_group():
    a = TauElement(2, 1.5)
    b = TauElement(-1, 0.25)
    p = (1.2, -0.3)
    assert a.compose(b).apply(p) == pytest.approx(a.apply(b.apply(p)), abs=1e-14)
    assert a.compose(a.inverse()).is_identity
    with pytest.raises(ValidationError):
        TauElement(0.5, 0.0)


def test_piecewise_shear_offset_is_continuous_piecewise_linear():
    ps = PiecewiseShear(cuts=(CutShear(2, 0.0), CutShear(-1, 1.0)),
                        tau=TauElement(1, 0.5))
    xs = np.linspace(-2, 3, 501)
    offs = np.array([ps.offset(float(x)) for x in xs])
    slopes = np.diff(offs) / np.diff(xs)
    # slopes take the cumulative integer values 1, 3, 2 left to right
    assert slopes[0] == pytest.approx(1.0, abs=1e-9)
    assert slopes[len(xs) // 2] == pytest.approx(3.0, abs=1e-9)
    assert slopes[-1] == pytest.approx(2.0, abs=1e-9)


def test_jump_index_examples():
    up2 = FocusFocusDatum(0.0, 1.0, 2, 1)
    assert jump_index((0.0, 3.0), [up2]) == 2
    assert jump_index((5.0, 5.0), [up2]) == 0  # empty incidence set
    both = [FocusFocusDatum(0.0, 0.0, 2, 1), FocusFocusDatum(0.0, 5.0, 3, -1)]
    # on the up half-line of the first and the down half-line of the second
    assert jump_index((0.0, 2.0), both) == 2 - 3
    # above both values: only the up half-line remains
    assert jump_index((0.0, 6.0), both) == 2
    # below both: only the down half-line remains
    assert jump_index((0.0, -1.0), both) == -3


def test_jump_index_stacked_lines_sum():
    data = [FocusFocusDatum(0.0, 0.0, 2, 1), FocusFocusDatum(0.0, 1.0, 3, 1)]
    assert jump_index((0.0, 2.0), data) == 5
    assert jump_index((0.0, 0.5), data) == 2


def test_jump_index_additive_over_disjoint_unions():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        data = [FocusFocusDatum(float(rng.integers(-2, 3)), float(rng.uniform(-2, 2)),
                                int(rng.integers(1, 4)), int(rng.choice([-1, 1])))
                for _ in range(n)]
        c = (float(rng.integers(-2, 3)), float(rng.uniform(-3, 3)))
        m = int(rng.integers(0, n + 1))
        assert jump_index(c, data) == jump_index(c, data[:m]) + jump_index(c, data[m:])


def test_epsilon_to_cuts():
    assert epsilon_to_cuts([1], [3]) == [0]
    assert epsilon_to_cuts([-1], [3]) == [3]
    assert epsilon_to_cuts([1, -1, -1], [2, 3, 1]) == [0, 3, 1]
    with pytest.raises(ValidationError):
        epsilon_to_cuts([1, -1], [2])
    with pytest.raises(ValidationError):
        epsilon_to_cuts([2], [1])


def test_sign_change_shear_powers():
    data = (FocusFocusDatum(0.0, 1.0, 1, 1), FocusFocusDatum(2.0, 0.0, 3, -1))
    ps = sign_change_shear(data, (-1, -1))
    powers = {c.x_line: c.u for c in ps.cuts}
    assert powers == {0.0: 1}  # the second datum already has sign -1
    ps2 = sign_change_shear(data, (1, 1))
    assert {c.x_line: c.u for c in ps2.cuts} == {2.0: -3}


def test_focus_datum_validation():
    with pytest.raises(ValidationError):
        FocusFocusDatum(0.0, 0.0, 0, 1)
    with pytest.raises(ValidationError):
        FocusFocusDatum(0.0, 0.0, 1, 2)
