"""Typed strips: construction, classification, slices, shears, equivalence."""

import math

import numpy as np
import pytest

from cartograph import (
    BoundaryDescriptor,
    CartographicRegion,
    CutShear,
    FocusFocusDatum,
    PiecewiseShear,
    TauElement,
    DomainError,
    ValidationError,
    apply_shear,
    classify_region,
    construct_region,
    equivalence_witness,
    normalize_mod_tau,
    region_from_json,
    region_to_json,
    regions_equivalent,
    slice_length,
)

INF = math.inf


def const(v, a, b):
    return BoundaryDescriptor.constant(v, a, b)


def square_region(y0=0.0, y1=1.0, x0=0.0, x1=1.0, slope=0):
    lower = BoundaryDescriptor.from_vertices(
        [(x0, y0 + slope * x0), (x1, y0 + slope * x1)], convexity="convex")
    upper = BoundaryDescriptor.from_vertices(
        [(x0, y1 + slope * x0), (x1, y1 + slope * x1)], convexity="concave")
    strip = construct_region((x0, x1), "I", lower, upper, ("closed", "closed"))
    return CartographicRegion((strip,))


def test_construct_unit_square_type_I():
    reg = square_region()
    assert reg.strips[0].type_tag == "I"
    assert slice_length(reg, 0.5) == pytest.approx(1.0)


def test_construct_left_pendulum_strip_type_II():
    lower = const(0.0, -5.0, 0.0)
    upper = BoundaryDescriptor.from_samples([-5.0, 0.0], [INF, INF],
                                            semicontinuity="lower")
    strip = construct_region((-INF, 0.0), "II", lower, upper,
                             ("closed", "open"), (False, False))
    assert strip.type_tag == "II"
    reg = CartographicRegion((strip,))
    assert slice_length(reg, -3.0) == INF


def test_construct_full_open_strip_type_IV():
    lower = BoundaryDescriptor.from_samples([0.0, 1.0], [-INF, -INF],
                                            semicontinuity="upper")
    upper = BoundaryDescriptor.from_samples([0.0, 1.0], [INF, INF],
                                            semicontinuity="lower")
    strip = construct_region((0.0, 1.0), "IV", lower, upper,
                             ("open", "open"), (False, False))
    assert strip.type_tag == "IV"


def test_type_invariant_violations_name_the_clause():
    concave_lower = BoundaryDescriptor.from_vertices([(0, 0), (1, 1), (2, 0)])
    upper = const(5.0, 0.0, 2.0)
    with pytest.raises(ValidationError, match="lower not convex"):
        construct_region((0, 2), "II", concave_lower,
                         BoundaryDescriptor.from_samples([0, 2], [5.0, 5.0],
                                                         semicontinuity="lower"),
                         ("closed", "open"))
    with pytest.raises(ValidationError, match="must be closed"):
        construct_region((0, 1), "I", const(0, 0, 1), const(1, 0, 1),
                         ("closed", "open"))
    with pytest.raises(ValidationError, match="upper boundary below lower"):
        construct_region((0, 1), "I", const(1, 0, 1), const(0, 0, 1),
                         ("closed", "closed"))


def test_semicontinuity_check_rejects_wrong_jump_direction():
    xs = [0.0, 0.25, 0.5, 0.75, 1.0]
    bad = [2.0, 2.0, 5.0, 2.0, 2.0]  # isolated spike: not lower-semicontinuous
    upper = BoundaryDescriptor.from_samples(xs, bad, semicontinuity="lower")
    with pytest.raises(ValidationError, match="not lower-semicontinuous"):
        construct_region((0, 1), "II", const(0.0, 0.0, 1.0), upper,
                         ("closed", "open"))
    good = [2.0, 2.0, 1.5, 2.0, 2.0]  # dip is fine for lower semicontinuity
    upper_ok = BoundaryDescriptor.from_samples(xs, good, semicontinuity="lower")
    construct_region((0, 1), "II", const(0.0, 0.0, 1.0), upper_ok,
                     ("closed", "open"))


def test_classify_prefers_type_I():
    lower, upper = const(0.0, 0.0, 1.0), const(1.0, 0.0, 1.0)
    assert classify_region((0, 1), lower, upper, ("closed", "closed")) == "I"
    upper_open = BoundaryDescriptor.from_samples(
        [0.0, 0.5, 1.0], [1.0, 1.0, 1.0], semicontinuity="lower")
    assert classify_region((0, 1), lower, upper_open, ("closed", "open")) == "II"
    both_open_inf = classify_region(
        (0, 1),
        BoundaryDescriptor.from_samples([0, 1], [-INF, -INF], semicontinuity="upper"),
        BoundaryDescriptor.from_samples([0, 1], [INF, INF], semicontinuity="lower"),
        ("open", "open"), (False, False))
    assert both_open_inf == "IV"


def test_classify_no_match_raises():
    concave = BoundaryDescriptor.from_vertices([(0, 0), (1, 1), (2, 0)])
    with pytest.raises(ValidationError, match="no region type matches"):
        classify_region((0, 2), concave, const(5.0, 0.0, 2.0),
                        ("closed", "closed"))


def test_classify_round_trips_constructed_strips():
    reg = square_region()
    s = reg.strips[0]
    assert classify_region(s.interval, s.lower, s.upper,
                           (s.lower_inclusion, s.upper_inclusion),
                           s.interval_inclusion) == s.type_tag


def test_slice_length_empty_and_outside():
    lower = const(1.0, 0.0, 0.0)
    upper = BoundaryDescriptor.from_samples([0.0], [1.0], semicontinuity="lower")
    strip = construct_region((0.0, 0.0), "II", lower, upper, ("closed", "open"))
    reg = CartographicRegion((strip,))
    assert slice_length(reg, 0.0) == 0.0  # degenerate slice, not an error
    with pytest.raises(DomainError):
        slice_length(reg, 2.0)


def test_apply_shear_preserves_type_when_line_avoids_interior():
    reg = square_region()
    for cut in (CutShear(2, 1.0), CutShear(-3, 0.0), CutShear(1, 4.0)):
        out = apply_shear(reg, PiecewiseShear(cuts=(cut,)))
        assert out.strips[0].type_tag == "I"


def test_slice_length_invariant_under_shears():
    # square: arbitrary global shears plus cuts anchored off the interior
    reg = square_region()
    rng = np.random.default_rng(5)
    for _ in range(50):
        ps = PiecewiseShear(
            cuts=tuple(CutShear(int(rng.integers(-2, 3)), float(rng.choice([0.0, 1.0, -2.0])))
                       for _ in range(2)),
            tau=TauElement(int(rng.integers(-3, 4)), float(rng.uniform(-2, 2))))
        out = apply_shear(reg, ps)
        for x in (0.1, 0.5, 0.9):
            assert slice_length(out, x) == pytest.approx(slice_length(reg, x), abs=1e-12)

    # half-open strip: interior cut lines with nonnegative powers keep the
    # lower boundary convex, so the type survives and slices still agree
    lower = const(0.0, 0.0, 1.0)
    upper = BoundaryDescriptor.from_samples(
        np.linspace(0, 1, 9), [2.0] * 9, semicontinuity="lower")
    strip = construct_region((0, 1), "II", lower, upper, ("closed", "open"))
    reg2 = CartographicRegion((strip,))
    for _ in range(50):
        ps = PiecewiseShear(
            cuts=tuple(CutShear(int(rng.integers(0, 3)), float(rng.uniform(0, 1)))
                       for _ in range(2)),
            tau=TauElement(int(rng.integers(-3, 4)), float(rng.uniform(-2, 2))))
        out = apply_shear(reg2, ps)
        for x in (0.1, 0.5, 0.9):
            assert slice_length(out, x) == pytest.approx(2.0, abs=1e-9)


def test_type_I_slice_length_concave():
    lower = BoundaryDescriptor.from_vertices([(0, 0), (1, 0.2), (2, 1.0)])
    upper = BoundaryDescriptor.from_vertices([(0, 2), (1, 2.5), (2, 2.4)])
    strip = construct_region((0, 2), "I", lower, upper, ("closed", "closed"))
    reg = CartographicRegion((strip,))
    xs = np.linspace(0, 2, 21)
    ls = [slice_length(reg, float(x)) for x in xs]
    mids = [(ls[i - 1] + ls[i + 1]) / 2 - 1e-12 for i in range(1, len(ls) - 1)]
    assert all(ls[i + 1] >= m for i, m in enumerate(mids))


def test_normalize_examples():
    canonical = square_region()
    assert normalize_mod_tau(canonical) == canonical  # already canonical

    sheared = apply_shear(canonical, PiecewiseShear(tau=TauElement(1, 0.0)))
    back = normalize_mod_tau(sheared)
    assert back.strips[0].lower.value_at(0.5) == pytest.approx(0.0, abs=1e-12)
    assert back.strips[0].upper.value_at(0.5) == pytest.approx(1.0, abs=1e-12)

    lifted = apply_shear(canonical, PiecewiseShear(tau=TauElement(0, 7.0)))
    assert normalize_mod_tau(lifted).strips[0].lower.value_at(0.3) == pytest.approx(0.0)


def test_normalize_idempotent_and_orbit_invariant():
    rng = np.random.default_rng(6)
    base = square_region(slope=2)
    for _ in range(100):
        tau = TauElement(int(rng.integers(-4, 5)), float(rng.uniform(-3, 3)))
        moved = apply_shear(base, PiecewiseShear(tau=tau))
        n1 = normalize_mod_tau(moved)
        n2 = normalize_mod_tau(base)
        assert np.allclose(n1.strips[0].lower.vertices,
                           n2.strips[0].lower.vertices, atol=1e-9)
        again = normalize_mod_tau(n1)
        assert again.strips[0].lower.vertices == n1.strips[0].lower.vertices


def test_normalize_needs_finite_lower_boundary():
    lower = BoundaryDescriptor.from_samples([0, 1], [-INF, -INF], semicontinuity="upper")
    upper = BoundaryDescriptor.from_samples([0, 1], [INF, INF], semicontinuity="lower")
    strip = construct_region((0, 1), "IV", lower, upper, ("open", "open"), (False, False))
    with pytest.raises(ValidationError, match="normalization anchor"):
        normalize_mod_tau(CartographicRegion((strip,)))


def test_regions_equivalent_examples():
    square = square_region()
    assert regions_equivalent(square, apply_shear(
        square, PiecewiseShear(tau=TauElement(1, 0.0))))
    assert regions_equivalent(square, apply_shear(
        square, PiecewiseShear(tau=TauElement(0, 3.5))))

    triangle_upper = BoundaryDescriptor.from_vertices([(0, 1.0), (0.5, 1.5), (1, 1.0)])
    triangle = CartographicRegion((construct_region(
        (0, 1), "I", const(0.0, 0.0, 1.0), triangle_upper, ("closed", "closed")),))
    assert not regions_equivalent(square, triangle)


def test_equivalence_is_an_equivalence_relation_on_a_catalog():
    square = square_region()
    t_square = apply_shear(square, PiecewiseShear(tau=TauElement(1, 2.0)))
    tall = square_region(y1=2.0)
    catalog = [square, t_square, tall]
    for a in catalog:
        assert regions_equivalent(a, a)
    for a in catalog:
        for b in catalog:
            assert regions_equivalent(a, b) == regions_equivalent(b, a)
    for a in catalog:
        for b in catalog:
            for c in catalog:
                if regions_equivalent(a, b) and regions_equivalent(b, c):
                    assert regions_equivalent(a, c)
    assert not regions_equivalent(square, tall)


def test_equivalence_with_sign_flip_witness():
    # strips split at the cut abscissa, as built regions always are
    left = construct_region((0, 0.5), "I", const(0.0, 0.0, 0.5),
                            const(1.0, 0.0, 0.5), ("closed", "closed"),
                            (True, False))
    right = construct_region((0.5, 1.0), "I", const(0.0, 0.5, 1.0),
                             const(1.0, 0.5, 1.0), ("closed", "closed"))
    focus = (FocusFocusDatum(0.5, 0.5, 2, 1),)
    square = CartographicRegion((left, right), focus)
    flipped = apply_shear(square, PiecewiseShear(cuts=(CutShear(2, 0.5),)))
    flipped = CartographicRegion(
        flipped.strips,
        tuple(FocusFocusDatum(d.x, d.y, d.multiplicity, -1) for d in flipped.focus))
    witness = equivalence_witness(square, flipped)
    assert witness is not None
    _, signs, cut_powers = witness
    assert signs == (-1,)
    assert cut_powers == {0.5: 2}


def test_serialization_round_trip():
    focus = (FocusFocusDatum(0.5, 0.25, 1, 1),)
    reg = CartographicRegion((square_region().strips[0],), focus, system="demo")
    text = region_to_json(reg)
    back = region_from_json(text)
    assert back.system == "demo"
    assert back.focus[0].multiplicity == 1
    assert regions_equivalent(reg, back)
    tau, signs, cuts = equivalence_witness(reg, back)
    assert tau.is_identity and signs == (1,) and cuts == {}


def test_serialization_handles_infinities():
    lower = const(0.0, -2.0, 0.0)
    upper = BoundaryDescriptor.from_samples([-2.0, -1.0, 0.0], [INF, INF, INF],
                                            semicontinuity="lower")
    strip = construct_region((-INF, 0.0), "II", lower, upper,
                             ("closed", "open"), (False, False))
    reg = CartographicRegion((strip,))
    back = region_from_json(region_to_json(reg))
    assert back.strips[0].upper.value_at(-1.0) == INF
    assert back.strips[0].interval[0] == -INF


def test_malformed_documents_raise_validation_error():
    with pytest.raises(ValidationError):
        region_from_json("not json at all {")
    with pytest.raises(ValidationError):
        region_from_json('{"system": "x", "epsilon": [], "focus": []}')


def test_boundary_descriptor_validation():
    with pytest.raises(ValidationError):
        BoundaryDescriptor.from_vertices([(0, 0), (0, 1)])  # x not increasing
    with pytest.raises(ValidationError):
        BoundaryDescriptor.from_samples([], [])
    with pytest.raises(ValidationError):
        BoundaryDescriptor("weird")


def test_shear_off_interior_preserves_every_type():
    xs = list(np.linspace(0.0, 1.0, 9))
    flat = lambda v: BoundaryDescriptor.from_samples(xs, [v] * 9,
                                                     semicontinuity="lower")
    usc_flat = lambda v: BoundaryDescriptor.from_samples(xs, [v] * 9,
                                                         semicontinuity="upper")
    strips = [
        construct_region((0, 1), "I", const(0, 0, 1), const(1, 0, 1),
                         ("closed", "closed")),
        construct_region((0, 1), "II", const(0, 0, 1), flat(2.0),
                         ("closed", "open")),
        construct_region((0, 1), "III", usc_flat(-2.0), const(0, 0, 1),
                         ("open", "closed")),
        construct_region((0, 1), "IV", usc_flat(-2.0), flat(2.0),
                         ("open", "open")),
    ]
    for strip in strips:
        reg = CartographicRegion((strip,))
        for cut in (CutShear(2, 0.0), CutShear(-1, 1.0), CutShear(3, -5.0)):
            out = apply_shear(reg, PiecewiseShear(cuts=(cut,)))
            assert out.strips[0].type_tag == strip.type_tag
