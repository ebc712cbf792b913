"""Typed planar regions and their transformation/equivalence algebra.

A region here is a union of vertical strips, each bounded below and above by
the graph of a function of ``x`` (possibly infinite).  Four strip types are
distinguished by the regularity of those boundary functions and by which of
them is attained:

* type I   - slice of a convex polygon: both boundaries piecewise linear and
  attained, lower convex, upper concave;
* type II  - lower boundary piecewise linear, convex, continuous, attained;
  upper boundary lower-semicontinuous and not attained (may be ``+inf``);
* type III - mirror image of type II (upper attained and piecewise linear
  concave, lower upper-semicontinuous, open, may be ``-inf``);
* type IV  - both boundaries open, lower upper-semicontinuous, upper
  lower-semicontinuous.

Boundaries are either piecewise-linear vertex lists (exact) or monotone-grid
samples (with ``inf`` sentinels allowed).  Vertical shears act on regions by
adding a piecewise-linear function of ``x`` to every boundary, so slice
lengths are invariant under them; the canonical representative of an orbit
pins the leftmost finite piecewise-linear lower edge to slope zero and
value zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .affine import (
    FocusFocusDatum,
    PiecewiseShear,
    TauElement,
    sign_change_shear,
)
from .errors import DomainError, ValidationError

INF = math.inf

# Slope comparisons on exact vertex data tolerate only float noise.
_SLOPE_EPS = 1e-12
# Default tolerance for pointwise boundary comparison after normalization.
COMPARE_TOL = 1e-6

TYPE_TAGS = ("I", "II", "III", "IV")


# ---------------------------------------------------------------------------
# boundary descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryDescriptor:
    """One boundary curve of a strip.

    ``kind`` is ``"pl"`` (piecewise linear, ``vertices`` = ((x, y), ...) with
    strictly increasing x, linear extrapolation beyond the ends) or
    ``"sampled"`` (values ``ys`` on the strictly increasing grid ``xs``,
    entries may be ``+-inf``, linear interpolation between finite samples).

    ``semicontinuity`` declares the one-sided behaviour ("lower", "upper" or
    "continuous"); ``convexity`` declares shape ("convex", "concave", "none").
    Both declarations are checked against the data on construction.
    """

    kind: str
    vertices: tuple[tuple[float, float], ...] = ()
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()
    semicontinuity: str = "continuous"
    convexity: str = "none"

    def __post_init__(self):
        if self.kind not in ("pl", "sampled"):
            raise ValidationError(f"unknown boundary kind {self.kind!r}")
        if self.semicontinuity not in ("lower", "upper", "continuous"):
            raise ValidationError(f"unknown semicontinuity {self.semicontinuity!r}")
        if self.convexity not in ("convex", "concave", "none"):
            raise ValidationError(f"unknown convexity {self.convexity!r}")
        if self.kind == "pl":
            if not self.vertices:
                raise ValidationError("piecewise-linear boundary needs at least one vertex")
            xs = [v[0] for v in self.vertices]
            if any(b - a <= 0 for a, b in zip(xs, xs[1:])):
                raise ValidationError("piecewise-linear vertices must have strictly increasing x")
            if any(not math.isfinite(v[0]) or not math.isfinite(v[1]) for v in self.vertices):
                raise ValidationError("piecewise-linear vertices must be finite")
        else:
            if not self.xs or len(self.xs) != len(self.ys):
                raise ValidationError("sampled boundary needs matching non-empty xs/ys")
            if any(b - a <= 0 for a, b in zip(self.xs, self.xs[1:])):
                raise ValidationError("sampled grid must be strictly increasing")
            if any(not math.isfinite(x) for x in self.xs):
                raise ValidationError("sampled grid must be finite")
            if any(math.isnan(y) for y in self.ys):
                raise ValidationError("sampled values must not be NaN")

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def constant(value: float, x_lo: float, x_hi: float) -> "BoundaryDescriptor":
        """Constant boundary over [x_lo, x_hi] (pl when finite, sampled for inf)."""
        if math.isfinite(value):
            if x_hi > x_lo:
                verts = ((x_lo, value), (x_hi, value))
            else:
                verts = ((x_lo, value),)
            return BoundaryDescriptor("pl", vertices=verts, convexity="convex")
        xs = (x_lo, x_hi) if x_hi > x_lo else (x_lo,)
        return BoundaryDescriptor("sampled", xs=xs, ys=tuple(value for _ in xs))

    @staticmethod
    def from_vertices(vertices, semicontinuity="continuous", convexity="none"):
        return BoundaryDescriptor(
            "pl", vertices=tuple((float(x), float(y)) for x, y in vertices),
            semicontinuity=semicontinuity, convexity=convexity,
        )

    @staticmethod
    def from_samples(xs, ys, semicontinuity="continuous", convexity="none"):
        return BoundaryDescriptor(
            "sampled", xs=tuple(float(x) for x in xs), ys=tuple(float(y) for y in ys),
            semicontinuity=semicontinuity, convexity=convexity,
        )

    # -- evaluation -----------------------------------------------------------

    def value_at(self, x: float) -> float:
        if self.kind == "pl":
            return self._pl_value(x)
        return self._sampled_value(x)

    def _pl_value(self, x: float) -> float:
        vs = self.vertices
        if len(vs) == 1:
            return vs[0][1]
        if x <= vs[0][0]:
            (x0, y0), (x1, y1) = vs[0], vs[1]
        elif x >= vs[-1][0]:
            (x0, y0), (x1, y1) = vs[-2], vs[-1]
        else:
            for (x0, y0), (x1, y1) in zip(vs, vs[1:]):
                if x0 <= x <= x1:
                    break
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def _sampled_value(self, x: float) -> float:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        for i in range(len(xs) - 1):
            if xs[i] <= x <= xs[i + 1]:
                break
        if x == xs[i]:
            return ys[i]
        if x == xs[i + 1]:
            return ys[i + 1]
        y0, y1 = ys[i], ys[i + 1]
        if not math.isfinite(y0) and not math.isfinite(y1):
            if y0 == y1:
                return y0
            raise ValidationError("cannot interpolate between opposite infinities")
        if not math.isfinite(y0) or not math.isfinite(y1):
            # between a finite and an infinite sample the nearer one wins
            nearer_left = (x - xs[i]) <= (xs[i + 1] - x)
            return y0 if nearer_left else y1
        return y0 + (y1 - y0) * (x - xs[i]) / (xs[i + 1] - xs[i])

    # -- structural queries ----------------------------------------------------

    def is_finite(self) -> bool:
        if self.kind == "pl":
            return True
        return all(math.isfinite(y) for y in self.ys)

    def knots(self) -> tuple[float, ...]:
        return tuple(v[0] for v in self.vertices) if self.kind == "pl" else self.xs

    def segment_slopes(self) -> list[float]:
        if self.kind != "pl" or len(self.vertices) < 2:
            return []
        return [
            (y1 - y0) / (x1 - x0)
            for (x0, y0), (x1, y1) in zip(self.vertices, self.vertices[1:])
        ]

    def check_convexity(self, mode: str) -> bool:
        """Exact slope-monotonicity test on piecewise-linear data."""
        slopes = self.segment_slopes()
        scale = max([1.0] + [abs(s) for s in slopes])
        eps = _SLOPE_EPS * scale
        if mode == "convex":
            return all(b >= a - eps for a, b in zip(slopes, slopes[1:]))
        if mode == "concave":
            return all(b <= a + eps for a, b in zip(slopes, slopes[1:]))
        return True

    def check_semicontinuity(self, mode: str) -> bool:
        """Grid-point semicontinuity test against one-sided limits estimated
        by linear extrapolation from the neighbouring samples.

        A sample counts as a violation only when it lies on the wrong side
        of BOTH one-sided estimates: a kink between samples fools the
        estimate from the side that cannot see it, so isolated spikes are
        rejected while continuous-but-kinked data passes.
        """
        if self.kind == "pl" or mode == "continuous" or len(self.xs) < 3:
            return True
        for i in range(1, len(self.xs) - 1):
            y = self.ys[i]
            if not math.isfinite(y):
                continue
            estimates = [e for e in (self._one_sided_estimate(i, -1),
                                     self._one_sided_estimate(i, +1))
                         if e is not None]
            if len(estimates) < 2:
                continue  # one-sided data cannot separate a kink from a jump
            if mode == "lower":  # lower-semicontinuous: f(x) <= liminf
                if not any(y <= est + slack for est, slack in estimates):
                    return False
            else:  # upper-semicontinuous
                if not any(y >= est - slack for est, slack in estimates):
                    return False
        return True

    def _one_sided_estimate(self, i: int, side: int):
        # one-sided limit by linear extrapolation; a single neighbouring
        # sample is no estimate at all, since the function may jump there
        j1, j2 = i + side, i + 2 * side
        if not (0 <= j1 < len(self.xs) and 0 <= j2 < len(self.xs)):
            return None
        y1, y2 = self.ys[j1], self.ys[j2]
        if not (math.isfinite(y1) and math.isfinite(y2)):
            return None  # infinite neighbours never witness a violation
        x, x1, x2 = self.xs[i], self.xs[j1], self.xs[j2]
        est = y1 + (y1 - y2) * (x - x1) / (x1 - x2)
        slack = 1e-6 + 2.0 * abs(est - y1)
        return est, slack

    def shifted(self, shear: PiecewiseShear) -> "BoundaryDescriptor":
        """Image of the boundary under a vertical piecewise shear.

        Piecewise-linear data gains a vertex at every cut line crossing its
        span so the image is again exactly piecewise linear.
        """
        if self.kind == "sampled":
            xs = list(self.xs)
            lo, hi = xs[0], xs[-1]
            for xl in sorted({c.x_line for c in shear.cuts}):
                if lo < xl < hi and all(x != xl for x in xs):
                    xs.append(xl)
            xs.sort()
            ys = [self._sampled_value(x) for x in xs]
            return replace(
                self,
                xs=tuple(xs),
                ys=tuple(y + shear.offset(x) if math.isfinite(y) else y
                         for x, y in zip(xs, ys)),
            )
        xs = [v[0] for v in self.vertices]
        lo, hi = xs[0], xs[-1]
        for xl in sorted({c.x_line for c in shear.cuts}):
            if lo < xl < hi and all(xl != x for x in xs):
                xs.append(xl)
        xs.sort()
        new_vertices = tuple((x, self._pl_value(x) + shear.offset(x)) for x in xs)
        out = replace(self, vertices=new_vertices, convexity="none")
        for mode in ("convex", "concave"):
            if out.check_convexity(mode):
                return replace(out, convexity=mode)
        return out


# ---------------------------------------------------------------------------
# typed strips
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypedRegion:
    """One vertical strip of a region, with its type tag and boundary data."""

    interval: tuple[float, float]
    interval_inclusion: tuple[bool, bool]
    type_tag: str
    lower: BoundaryDescriptor
    upper: BoundaryDescriptor
    lower_inclusion: str  # "closed" | "open"
    upper_inclusion: str

    def contains_x(self, x: float, tol: float = 0.0) -> bool:
        a, b = self.interval
        inc_a, inc_b = self.interval_inclusion
        if a == b:
            return abs(x - a) <= tol
        left_ok = x > a + tol or (inc_a and x >= a - tol)
        right_ok = x < b - tol or (inc_b and x <= b + tol)
        return left_ok and right_ok

    def probe_xs(self, n_mid: int = 9) -> list[float]:
        """Representative abscissae inside the strip (knots plus midpoints)."""
        a, b = self.interval
        if a == b:
            return [a]
        lo = a if math.isfinite(a) else -INF
        hi = b if math.isfinite(b) else INF
        knots = [x for x in set(self.lower.knots()) | set(self.upper.knots()) if lo <= x <= hi]
        if not knots:
            return []
        knots = sorted(knots)
        xs = list(knots)
        span_lo, span_hi = knots[0], knots[-1]
        if span_hi > span_lo:
            for i in range(1, n_mid + 1):
                xs.append(span_lo + (span_hi - span_lo) * i / (n_mid + 1))
        return sorted(set(xs))


_TYPE_RULES = {
    "I": dict(lower_kind="pl", upper_kind="pl", lower_convex="convex",
              upper_convex="concave", lower_incl="closed", upper_incl="closed",
              lower_semi=None, upper_semi=None, lower_finite=True, upper_finite=True),
    "II": dict(lower_kind="pl", upper_kind=None, lower_convex="convex",
               upper_convex=None, lower_incl="closed", upper_incl="open",
               lower_semi=None, upper_semi="lower", lower_finite=True, upper_finite=False),
    "III": dict(lower_kind=None, upper_kind="pl", lower_convex=None,
                upper_convex="concave", lower_incl="open", upper_incl="closed",
                lower_semi="upper", upper_semi=None, lower_finite=False, upper_finite=True),
    "IV": dict(lower_kind=None, upper_kind=None, lower_convex=None,
               upper_convex=None, lower_incl="open", upper_incl="open",
               lower_semi="upper", upper_semi="lower", lower_finite=False, upper_finite=False),
}


def _validate_strip(strip: TypedRegion) -> None:
    tag = strip.type_tag
    if tag not in TYPE_TAGS:
        raise ValidationError(f"unknown type tag {tag!r}")
    a, b = strip.interval
    if math.isnan(a) or math.isnan(b) or a > b:
        raise ValidationError("invalid strip interval")
    rules = _TYPE_RULES[tag]

    def fail(clause):
        raise ValidationError(f"type {tag} {clause}")

    if rules["lower_kind"] and strip.lower.kind != rules["lower_kind"]:
        fail("lower boundary must be piecewise linear")
    if rules["upper_kind"] and strip.upper.kind != rules["upper_kind"]:
        fail("upper boundary must be piecewise linear")
    if rules["lower_finite"] and not strip.lower.is_finite():
        fail("lower boundary must be finite")
    if rules["upper_finite"] and not strip.upper.is_finite():
        fail("upper boundary must be finite")
    if rules["lower_convex"] and not strip.lower.check_convexity(rules["lower_convex"]):
        fail(f"lower not {rules['lower_convex']}")
    if rules["upper_convex"] and not strip.upper.check_convexity(rules["upper_convex"]):
        fail(f"upper not {rules['upper_convex']}")
    if strip.lower_inclusion != rules["lower_incl"]:
        fail(f"lower boundary must be {rules['lower_incl']}")
    if strip.upper_inclusion != rules["upper_incl"]:
        fail(f"upper boundary must be {rules['upper_incl']}")
    if rules["lower_semi"] and not strip.lower.check_semicontinuity(rules["lower_semi"]):
        fail(f"lower not {rules['lower_semi']}-semicontinuous")
    if rules["upper_semi"] and not strip.upper.check_semicontinuity(rules["upper_semi"]):
        fail(f"upper not {rules['upper_semi']}-semicontinuous")
    # boundaries must be ordered; equality is allowed (empty slice, length 0)
    for x in strip.probe_xs():
        lo, hi = strip.lower.value_at(x), strip.upper.value_at(x)
        if math.isfinite(lo) and math.isfinite(hi) and hi < lo - 1e-9:
            fail(f"upper boundary below lower boundary at x={x:g}")


def construct_region(
    interval,
    type_tag: str,
    lower: BoundaryDescriptor,
    upper: BoundaryDescriptor,
    inclusions=("closed", "open"),
    interval_inclusion=(True, True),
) -> TypedRegion:
    """Build and fully validate one typed strip.

    ``inclusions`` is the (lower, upper) boundary attainment pair; all
    type-tag invariants are checked and a violation names the failing clause.
    """
    strip = TypedRegion(
        interval=(float(interval[0]), float(interval[1])),
        interval_inclusion=(bool(interval_inclusion[0]), bool(interval_inclusion[1])),
        type_tag=type_tag,
        lower=lower,
        upper=upper,
        lower_inclusion=inclusions[0],
        upper_inclusion=inclusions[1],
    )
    _validate_strip(strip)
    return strip


def classify_region(
    interval,
    lower: BoundaryDescriptor,
    upper: BoundaryDescriptor,
    inclusions,
    interval_inclusion=(True, True),
) -> str:
    """Tag an untyped strip candidate, preferring I, then II/III, then IV."""
    last_error = None
    for tag in TYPE_TAGS:
        rules = _TYPE_RULES[tag]
        if (inclusions[0], inclusions[1]) != (rules["lower_incl"], rules["upper_incl"]):
            continue
        try:
            construct_region(interval, tag, lower, upper, inclusions, interval_inclusion)
            return tag
        except ValidationError as exc:
            last_error = exc
    raise ValidationError(f"no region type matches the candidate data ({last_error})")


# ---------------------------------------------------------------------------
# whole regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartographicRegion:
    """Ordered union of typed strips with focus data and the applied anchor."""

    strips: tuple[TypedRegion, ...]
    focus: tuple[FocusFocusDatum, ...] = ()
    anchor: TauElement = field(default_factory=TauElement)
    system: str = ""

    def __post_init__(self):
        ivals = [s.interval for s in self.strips]
        for (a0, b0), (a1, b1) in zip(ivals, ivals[1:]):
            if a1 < b0 - 1e-12:
                raise ValidationError("strip interiors overlap")

    @property
    def epsilon(self) -> tuple[int, ...]:
        return tuple(d.sign for d in self.focus)

    def strip_at(self, x: float) -> TypedRegion:
        # zero-width strips own their abscissa, so scan them first
        for s in self.strips:
            if s.interval[0] == s.interval[1] and s.contains_x(x):
                return s
        for s in self.strips:
            if s.contains_x(x):
                return s
        raise DomainError(f"x={x:g} lies outside every strip")


def slice_length(region: CartographicRegion, x: float) -> float:
    """Length of the vertical slice of the region at ``x`` (0 when empty,
    ``+inf`` for unbounded slices)."""
    strip = region.strip_at(x)
    lo = strip.lower.value_at(x)
    hi = strip.upper.value_at(x)
    if hi == INF or lo == -INF:
        return INF
    return max(0.0, hi - lo)


def apply_shear(region: CartographicRegion, shear: PiecewiseShear) -> CartographicRegion:
    """Image of a region under a vertical piecewise shear.

    Boundaries move pointwise by the shear offset and each strip is
    re-classified; cut lines must not cross strip interiors in a way that
    destroys every admissible type.
    """
    new_strips = []
    for s in region.strips:
        lower = s.lower.shifted(shear)
        upper = s.upper.shifted(shear)
        try:
            tag = classify_region(s.interval, lower, upper,
                                  (s.lower_inclusion, s.upper_inclusion),
                                  s.interval_inclusion)
        except ValidationError as exc:
            raise ValidationError(
                f"shear image of a type {s.type_tag} strip has no valid type: {exc}"
            ) from exc
        new_strips.append(TypedRegion(
            s.interval, s.interval_inclusion, tag, lower, upper,
            s.lower_inclusion, s.upper_inclusion,
        ))
    new_focus = tuple(
        replace(d, y=d.y + shear.offset(d.x)) for d in region.focus
    )
    return CartographicRegion(tuple(new_strips), new_focus,
                              shear.tau.compose(region.anchor), region.system)


def _anchor_tau(region: CartographicRegion) -> TauElement:
    """Tau element normalizing the leftmost finite piecewise-linear lower edge
    to slope zero and value zero."""
    for s in region.strips:
        if s.lower.kind == "pl" and s.lower.is_finite():
            verts = s.lower.vertices
            if len(verts) >= 2:
                (x0, y0), (x1, y1) = verts[0], verts[1]
                slope = (y1 - y0) / (x1 - x0)
            else:
                (x0, y0), slope = verts[0], 0.0
            k = -round(slope)
            c = -(y0 + k * x0)
            return TauElement(k, c)
    raise ValidationError("region has no finite lower boundary anywhere; "
                          "normalization anchor undefined")


def normalize_mod_tau(region: CartographicRegion) -> CartographicRegion:
    """Canonical representative of the region's orbit under global shears.

    Idempotent, and constant on orbits: normalizing ``tau . R`` gives the
    same result as normalizing ``R`` for every TauElement ``tau``.
    """
    tau = _anchor_tau(region)
    if tau.is_identity:
        return region
    return apply_shear(region, PiecewiseShear(tau=tau))


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------


def _boundary_close(a: BoundaryDescriptor, b: BoundaryDescriptor,
                    xs: Iterable[float], tol: float) -> bool:
    for x in xs:
        va, vb = a.value_at(x), b.value_at(x)
        if math.isfinite(va) != math.isfinite(vb):
            return False
        if math.isfinite(va) and abs(va - vb) > tol:
            return False
        if not math.isfinite(va) and va != vb:
            return False
    return True


def _strips_close(a: TypedRegion, b: TypedRegion, tol: float) -> bool:
    for pa, pb, inc_a, inc_b in zip(a.interval, b.interval,
                                    a.interval_inclusion, b.interval_inclusion):
        if math.isfinite(pa) != math.isfinite(pb):
            return False
        if math.isfinite(pa) and abs(pa - pb) > tol:
            return False
        if inc_a != inc_b:
            return False
    if a.type_tag != b.type_tag:
        return False
    if (a.lower_inclusion, a.upper_inclusion) != (b.lower_inclusion, b.upper_inclusion):
        return False
    xs = sorted(set(a.probe_xs()) | set(b.probe_xs()))
    return (_boundary_close(a.lower, b.lower, xs, tol)
            and _boundary_close(a.upper, b.upper, xs, tol))


def _regions_close(a: CartographicRegion, b: CartographicRegion, tol: float) -> bool:
    if len(a.strips) != len(b.strips):
        return False
    if not all(_strips_close(sa, sb, tol) for sa, sb in zip(a.strips, b.strips)):
        return False
    for da, db in zip(a.focus, b.focus):
        if abs(da.x - db.x) > tol or abs(da.y - db.y) > tol:
            return False
        if da.multiplicity != db.multiplicity:
            return False
    return True


def equivalence_witness(a: CartographicRegion, b: CartographicRegion,
                        tol: float = COMPARE_TOL):
    """Search for ``(tau, signs, cut_powers)`` with
    ``b = tau . (sign-change cuts) . a``; ``None`` when no witness exists.

    The sign search ranges over all cut-direction choices at ``a``'s focus
    values, so two representatives of the same orbit always match.
    """
    if len(a.focus) != len(b.focus):
        return None
    ax = sorted((d.x, d.multiplicity) for d in a.focus)
    bx = sorted((d.x, d.multiplicity) for d in b.focus)
    for (xa, ka), (xb, kb) in zip(ax, bx):
        if abs(xa - xb) > tol or ka != kb:
            return None
    nb = normalize_mod_tau(b)
    n = len(a.focus)
    for mask in range(2 ** n):
        signs = tuple(1 if not (mask >> i) & 1 else -1 for i in range(n))
        shear = sign_change_shear(a.focus, signs)
        try:
            candidate = apply_shear(a, shear) if not shear.is_identity else a
            na = normalize_mod_tau(candidate)
        except ValidationError:
            continue
        if _regions_close(na, nb, tol):
            tau = nb.anchor.inverse().compose(na.anchor)
            cut_powers = {c.x_line: c.u for c in shear.cuts}
            return tau, signs, cut_powers
    return None


def regions_equivalent(a: CartographicRegion, b: CartographicRegion,
                       tol: float = COMPARE_TOL) -> bool:
    """True when some global shear plus cut-direction flips maps ``a`` to ``b``."""
    return equivalence_witness(a, b, tol) is not None


# ---------------------------------------------------------------------------
# serialization (JSON document schema shared with the CLI)
# ---------------------------------------------------------------------------


def _num_to_json(y: float):
    if y == INF:
        return "inf"
    if y == -INF:
        return "-inf"
    return y


def _num_from_json(v) -> float:
    if v == "inf":
        return INF
    if v == "-inf":
        return -INF
    return float(v)


def _descriptor_to_json(d: BoundaryDescriptor) -> dict:
    if d.kind == "pl":
        return {"kind": "pl", "vertices": [[x, y] for x, y in d.vertices]}
    return {"kind": "sampled", "xs": list(d.xs), "ys": [_num_to_json(y) for y in d.ys]}


def _descriptor_from_json(obj: dict, semicontinuity="continuous") -> BoundaryDescriptor:
    try:
        if obj["kind"] == "pl":
            d = BoundaryDescriptor.from_vertices(obj["vertices"])
            for mode in ("convex", "concave"):
                if d.check_convexity(mode):
                    return replace(d, convexity=mode, semicontinuity=semicontinuity)
            return replace(d, semicontinuity=semicontinuity)
        if obj["kind"] == "sampled":
            ys = [_num_from_json(y) for y in obj["ys"]]
            return BoundaryDescriptor.from_samples(obj["xs"], ys,
                                                   semicontinuity=semicontinuity)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed boundary descriptor: {exc}") from exc
    raise ValidationError(f"unknown boundary kind {obj.get('kind')!r}")


# semicontinuity declarations implied by a strip's type tag
_IMPLIED_SEMI = {
    "I": ("continuous", "continuous"),
    "II": ("continuous", "lower"),
    "III": ("upper", "continuous"),
    "IV": ("upper", "lower"),
}


def region_to_dict(region: CartographicRegion) -> dict:
    return {
        "system": region.system,
        "epsilon": [d.sign for d in region.focus],
        "focus": [{"x": d.x, "y": d.y, "k": d.multiplicity} for d in region.focus],
        "strips": [
            {
                "interval": [_num_to_json(s.interval[0]), _num_to_json(s.interval[1])],
                "interval_inclusion": list(s.interval_inclusion),
                "type": s.type_tag,
                "lower": _descriptor_to_json(s.lower),
                "upper": _descriptor_to_json(s.upper),
                "lower_inclusion": s.lower_inclusion,
                "upper_inclusion": s.upper_inclusion,
            }
            for s in region.strips
        ],
    }


def region_from_dict(obj: dict) -> CartographicRegion:
    try:
        focus = tuple(
            FocusFocusDatum(float(f["x"]), float(f["y"]), int(f["k"]), int(sign))
            for f, sign in zip(obj["focus"], obj["epsilon"])
        )
        strips = []
        for raw in obj["strips"]:
            tag = raw["type"]
            lo_semi, hi_semi = _IMPLIED_SEMI.get(tag, ("continuous", "continuous"))
            strip = construct_region(
                (_num_from_json(raw["interval"][0]), _num_from_json(raw["interval"][1])),
                tag,
                _descriptor_from_json(raw["lower"], lo_semi),
                _descriptor_from_json(raw["upper"], hi_semi),
                (raw["lower_inclusion"], raw["upper_inclusion"]),
                tuple(bool(v) for v in raw["interval_inclusion"]),
            )
            strips.append(strip)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed region document: {exc}") from exc
    return CartographicRegion(tuple(strips), focus, system=str(obj.get("system", "")))


def region_to_json(region: CartographicRegion) -> str:
    return json.dumps(region_to_dict(region), sort_keys=True, indent=1)


def region_from_json(text: str) -> CartographicRegion:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"region document is not valid JSON: {exc}") from exc
    return region_from_dict(obj)
