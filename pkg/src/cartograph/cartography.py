"""Assembly of cartographic regions from catalog systems.

The map that straightens a system's singular affine structure preserves the
first momentum coordinate and sends the second to a continued action
integral: per fiber it is the normalized cumulative volume below the level,
and across the vertical line through a focus value it is continued smoothly
through the side opposite the chosen cut (below the value for an upward cut,
above it for a downward cut).  The continuation adds an integer multiple of
``x - x_i`` to the right of each focus abscissa; that integer is measured
numerically by matching one-sided derivatives on the continuation side and
must come out near an integer, which is itself a consistency check.

The region of such a map is assembled strip by strip.  The strip partition
splits the first-momentum image at focus abscissae, at boundaries of the
compactness sets (fibers truncated above/below height zero), and at
bifurcation values; the case of each piece fixes its type tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .affine import FocusFocusDatum, TauElement
from .errors import ConvergenceError, DomainError, ValidationError
from .numerics import DEFAULT_QUAD, QuadratureSpec
from .regions import (
    BoundaryDescriptor,
    CartographicRegion,
    TypedRegion,
    construct_region,
    normalize_mod_tau,
)
from .systems import SemitoricSystem

INF = math.inf

# strip cases, named by which half-infinite parts of the fibers are compact
CASE_BOTH = "K+&K-"
CASE_BELOW = "K-\\K+"
CASE_ABOVE = "K+\\K-"
CASE_NEITHER = "neither"

_CASE_TO_TYPE = {CASE_BOTH: "I", CASE_BELOW: "II", CASE_ABOVE: "III", CASE_NEITHER: "IV"}

# slope-change threshold for vertex detection on fitted lower boundaries
VERTEX_SLOPE_TOL = 1e-3


@dataclass(frozen=True)
class GridSpec:
    """Sampling resolution for region assembly."""

    nx: int = 200
    ny: int = 50
    x_window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ValidationError("grid must be at least 16 x 16")


@dataclass(frozen=True)
class StripSpec:
    interval: tuple[float, float]
    interval_inclusion: tuple[bool, bool]
    case: str
    type_tag: str


@dataclass(frozen=True)
class StripPlan:
    strips: tuple[StripSpec, ...]
    cut_abscissae: tuple[float, ...]

    @property
    def type_tags(self) -> tuple[str, ...]:
        return tuple(s.type_tag for s in self.strips)


# ---------------------------------------------------------------------------
# strip partition
# ---------------------------------------------------------------------------


def membership_case(s: SemitoricSystem, x: float) -> str:
    kp = bool(s.metadata.k_plus_member(x))
    km = bool(s.metadata.k_minus_member(x))
    if kp and km:
        return CASE_BOTH
    if km:
        return CASE_BELOW
    if kp:
        return CASE_ABOVE
    return CASE_NEITHER


def inferred_case(s: SemitoricSystem, x: float) -> str:
    """Compactness case read off numerically from the fiber boundaries:
    a half-infinite part is compact exactly when the corresponding boundary
    is finite and attained."""
    fb = s.fiber_boundaries(x, properized=s.has_properization)
    kp = math.isfinite(fb.hi) and fb.hi_attained
    km = math.isfinite(fb.lo) and fb.lo_attained
    if kp and km:
        return CASE_BOTH
    if km:
        return CASE_BELOW
    if kp:
        return CASE_ABOVE
    return CASE_NEITHER


def partition_strips(s: SemitoricSystem) -> StripPlan:
    """Split the first-momentum image into case-tagged strips.

    Focus abscissae always receive their own width-zero strip (the region
    boundary may break there).  Other split abscissae are merged into an
    adjacent strip of the same case when one exists, preferring the left,
    and otherwise also stand alone with width zero.
    """
    meta = s.metadata
    lo, hi = meta.j_image
    focus_xs = sorted({d.x for d in meta.focus})
    candidates = sorted({*meta.split_candidates, *focus_xs})
    inner = [x for x in candidates if lo < x < hi]

    edges = [lo] + inner + [hi]
    strips: list[StripSpec] = []

    def case_of_interval(a, b):
        if math.isinf(a) and math.isinf(b):
            mid = 0.0
        elif math.isinf(a):
            mid = b - 1.0
        elif math.isinf(b):
            mid = a + 1.0
        else:
            mid = 0.5 * (a + b)
        return membership_case(s, mid)

    open_intervals = []
    for a, b in zip(edges, edges[1:]):
        open_intervals.append([a, b, False, False, case_of_interval(a, b)])

    # decide ownership of each interior split abscissa
    for i, x in enumerate(inner):
        left, right = open_intervals[i], open_intervals[i + 1]
        if x in focus_xs:
            strips_own = True
        else:
            c = membership_case(s, x)
            if c == left[4]:
                left[3] = True
                continue
            if c == right[4]:
                right[2] = True
                continue
            strips_own = True
        if strips_own:
            case = membership_case(s, x)
            strips.append(StripSpec((x, x), (True, True), case, _CASE_TO_TYPE[case]))

    # endpoints of the image attach to the outer intervals when finite
    if math.isfinite(lo):
        c = membership_case(s, lo)
        if c == open_intervals[0][4]:
            open_intervals[0][2] = True
        else:
            strips.append(StripSpec((lo, lo), (True, True), c, _CASE_TO_TYPE[c]))
    if math.isfinite(hi):
        c = membership_case(s, hi)
        if c == open_intervals[-1][4]:
            open_intervals[-1][3] = True
        else:
            strips.append(StripSpec((hi, hi), (True, True), c, _CASE_TO_TYPE[c]))

    for a, b, ia, ib, case in open_intervals:
        strips.append(StripSpec((a, b), (ia, ib), case, _CASE_TO_TYPE[case]))

    strips.sort(key=lambda t: (t.interval[0], t.interval[1]))
    return StripPlan(tuple(strips), tuple(focus_xs))


# ---------------------------------------------------------------------------
# continued action map
# ---------------------------------------------------------------------------


def _one_sided_derivative(f: Callable[[float], float], x0: float, h: float,
                          side: int) -> float:
    """Second-order one-sided first derivative at ``x0``."""
    s = float(side)
    return (-3.0 * f(x0) + 4.0 * f(x0 + s * h) - f(x0 + 2.0 * s * h)) / (2.0 * s * h)


def derivative_jump(f: Callable[[float], float], x_line: float,
                    h: float = 1e-3) -> tuple[float, int]:
    """Jump of df/dx across a vertical line: left derivative minus right.

    Returns the raw jump and its nearest integer.
    """
    d_left = _one_sided_derivative(f, x_line, h, -1)
    d_right = _one_sided_derivative(f, x_line, h, +1)
    raw = d_left - d_right
    return raw, round(raw)


@lru_cache(maxsize=128)
def continuation_powers(s: SemitoricSystem, eps: tuple[int, ...],
                        spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[int, ...]:
    """Integer shear powers of the continued action at each focus abscissa.

    For an upward cut (sign +1) the map must be smooth across the part of
    the line below the focus value, so the power kills the derivative jump
    of the plain fiber-volume action measured there; a downward cut matches
    above the value instead.  The measured jump must lie near an integer.
    """
    foci = s.metadata.focus
    if len(eps) != len(foci):
        raise ValidationError(
            f"sign vector length {len(eps)} does not match {len(foci)} focus values")
    if any(e not in (-1, 1) for e in eps):
        raise ValidationError("signs must be +1 or -1")
    powers = []
    h = 1e-3
    for d, e in zip(foci, eps):
        y_ref = d.y - 0.5 if e == 1 else d.y + 0.75
        lo = s.fiber_bounds_fn(d.x, False).lo
        if y_ref <= lo:
            y_ref = 0.5 * (lo + d.y) if e == 1 else d.y + 0.75

        def action_at(x, y=y_ref):
            return s.cumulative_volume(x, y, spec)

        raw, k = derivative_jump(action_at, d.x, h)
        if abs(raw - k) > 5e-2:
            raise ConvergenceError(
                f"continuation power at x={d.x:g} is not close to an integer "
                f"(raw jump {raw:.4g})")
        powers.append(int(k))
    return tuple(powers)


def action_map(s: SemitoricSystem, eps: Sequence[int], p: tuple[float, float],
               base: Optional[tuple[float, float]] = None,
               spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Value of the straightening map at a point of the momentum image.

    The first coordinate is preserved; the second is the cumulative
    normalized fiber volume, anchored at the lower fiber boundary, plus the
    integer continuation shears to the right of each focus abscissa.
    ``base`` (default: the catalog base point) must lie in the leftmost
    strip, left of every cut.
    """
    x, y = float(p[0]), float(p[1])
    eps_t = tuple(int(e) for e in eps)
    foci = s.metadata.focus
    base_x = s.metadata.base_abscissa if base is None else float(base[0])
    if any(base_x > d.x for d in foci):
        raise ValidationError("base point must lie left of every cut abscissa")
    if not s.in_j_image(x):
        raise DomainError(f"x={x:g} outside the momentum image")
    fb = s.fiber_boundaries(x, properized=s.has_properization)
    if y < fb.lo - 1e-9 or y > fb.hi + 1e-9:
        raise DomainError(f"point ({x:g}, {y:g}) outside the momentum image")
    value = s.cumulative_volume(x, y, spec)
    if foci:
        powers = continuation_powers(s, eps_t, spec)
        for d, k in zip(foci, powers):
            if x > d.x:
                value += k * (x - d.x)
    return (x, value)


def monodromy_jump_check(s: SemitoricSystem, eps: Sequence[int],
                         c: tuple[float, float], h_step: float = 1e-3,
                         spec: QuadratureSpec = DEFAULT_QUAD) -> int:
    """Measured integer jump of the x-derivative of the straightening map
    across the vertical line through ``c``.

    On a cut half-line the jump equals the signed multiplicity sum there;
    away from every cut it is zero.  The unrounded residual must stay below
    1e-2, otherwise the measurement is rejected.
    """
    x0, y0 = float(c[0]), float(c[1])
    for d in s.metadata.focus:
        if abs(x0 - d.x) < 1e-9 and abs(y0 - d.y) < 10.0 * h_step:
            raise DomainError(
                "jump check point too close to a focus value for finite differences")

    def f(x):
        return action_map(s, eps, (x, y0), spec=spec)[1]

    raw, k = derivative_jump(f, x0, h_step)
    if abs(raw - k) > 1e-2:
        d_left = _one_sided_derivative(f, x0, h_step, -1)
        d_right = _one_sided_derivative(f, x0, h_step, +1)
        raise ConvergenceError(
            f"derivative jump at x={x0:g}, y={y0:g} is not close to an integer: "
            f"left {d_left:.6g}, right {d_right:.6g}, jump {raw:.6g}")
    return int(k)


def slope_jump_formula(weights: tuple[int, int], monodromy_k: int) -> Fraction:
    """Slope change across a vertex with circle-action weights ``(a, b)``
    and monodromy index ``k``: exactly ``-1/(a*b) + k``."""
    a, b = weights
    if a == 0 or b == 0:
        raise ValidationError("isotropy weights must be nonzero")
    return Fraction(-1, a * b) + Fraction(monodromy_k)


def rationalize_slope(slope: float, max_den: int = 12,
                      tol: float = 1e-6) -> Optional[Fraction]:
    """Report a fitted slope as a small-denominator rational when it is one."""
    frac = Fraction(slope).limit_denominator(max_den)
    if abs(float(frac) - slope) <= tol:
        return frac
    return None


# ---------------------------------------------------------------------------
# piecewise-linear fitting of sampled boundaries
# ---------------------------------------------------------------------------


def fit_piecewise_linear(xs: Sequence[float], ys: Sequence[float],
                         slope_tol: float = VERTEX_SLOPE_TOL,
                         residual_tol: float = 1e-5) -> BoundaryDescriptor:
    """Fit sampled boundary values by a piecewise-linear curve.

    A vertex is declared wherever consecutive sample slopes change by more
    than ``slope_tol``; each run of stable slopes is fitted by least squares
    and adjacent fits meet at their intersection.  The maximum fit residual
    must stay below ``residual_tol``.
    """
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) == 1:
        return BoundaryDescriptor.from_vertices([(xs[0], ys[0])], convexity="convex")
    slopes = [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1)
              in zip(zip(xs, ys), zip(xs[1:], ys[1:]))]
    breaks = [i + 1 for i in range(len(slopes) - 1)
              if abs(slopes[i + 1] - slopes[i]) > slope_tol]
    run_bounds = [0] + breaks + [len(xs) - 1]

    lines = []
    for a, b in zip(run_bounds, run_bounds[1:]):
        seg_x = np.asarray(xs[a:b + 1])
        seg_y = np.asarray(ys[a:b + 1])
        m, c = np.polyfit(seg_x, seg_y, 1)
        lines.append((float(m), float(c)))

    vertices = [(xs[0], lines[0][0] * xs[0] + lines[0][1])]
    for i, brk in enumerate(breaks):
        (m0, c0), (m1, c1) = lines[i], lines[i + 1]
        if abs(m1 - m0) > 1e-12:
            xv = (c0 - c1) / (m1 - m0)
            lo = xs[max(0, brk - 1)]
            hi = xs[min(len(xs) - 1, brk + 1)]
            if not (lo <= xv <= hi):
                xv = xs[brk]
        else:
            xv = xs[brk]
        vertices.append((xv, lines[i][0] * xv + lines[i][1]))
    vertices.append((xs[-1], lines[-1][0] * xs[-1] + lines[-1][1]))

    dedup = [vertices[0]]
    for v in vertices[1:]:
        if v[0] > dedup[-1][0] + 1e-12:
            dedup.append(v)
    desc = BoundaryDescriptor.from_vertices(dedup)

    residual = max(abs(desc.value_at(x) - y) for x, y in zip(xs, ys))
    if residual > residual_tol:
        raise ValidationError(
            f"piecewise-linear fit residual {residual:.3g} exceeds {residual_tol:g}")
    for mode in ("convex", "concave"):
        if desc.check_convexity(mode):
            return replace(desc, convexity=mode)
    return desc


# ---------------------------------------------------------------------------
# region assembly
# ---------------------------------------------------------------------------


def _strip_sample_xs(interval, inclusion, window, nx):
    a, b = interval
    if a == b:
        return [a] if window[0] <= a <= window[1] else []
    lo = max(a, window[0])
    hi = min(b, window[1])
    if hi <= lo:
        return []
    span = hi - lo
    n = max(8, int(round(nx * span / max(window[1] - window[0], span))))
    xs = list(np.linspace(lo, hi, n))
    # open interval endpoints belong to neighbouring fibers; nudge inward
    eps = 1e-9 * max(1.0, span)
    if lo == a and not inclusion[0] and math.isfinite(a):
        xs[0] = lo + eps
    if hi == b and not inclusion[1] and math.isfinite(b):
        xs[-1] = hi - eps
    return xs


def build_cartographic_region(s: SemitoricSystem, eps: Sequence[int],
                              grid: GridSpec = GridSpec(),
                              spec: QuadratureSpec = DEFAULT_QUAD) -> CartographicRegion:
    """Sample the straightening map along the fiber boundaries and assemble
    the normalized region, strip by strip.

    Lower boundaries of types I/II (and uppers of I/III) are fitted by
    piecewise-linear curves with vertex detection; open boundaries are kept
    as sampled descriptors; infinite boundaries keep their sentinels.  The
    result is passed through the canonical orbit normalization.
    """
    eps_t = tuple(int(e) for e in eps)
    plan = partition_strips(s)
    window = grid.x_window if grid.x_window is not None else s.metadata.default_window
    foci = s.metadata.focus
    if len(eps_t) != len(foci):
        raise ValidationError("sign vector length does not match the focus data")

    def f2(x, y):
        return action_map(s, eps_t, (x, y), spec=spec)[1]

    strips: list[TypedRegion] = []
    for sp in plan.strips:
        xs = _strip_sample_xs(sp.interval, sp.interval_inclusion, window, grid.nx)
        if not xs:
            continue
        # sampled descriptors get extra abscissae just inside the strip so a
        # boundary jump at an endpoint is not smeared over a whole grid cell
        xs_fine = list(xs)
        if len(xs) > 1:
            eps = 1e-9 * max(1.0, xs[-1] - xs[0])
            for extra in (xs[0] + eps, xs[-1] - eps):
                if all(abs(extra - x) > 0.5 * eps for x in xs_fine):
                    xs_fine.append(extra)
            xs_fine.sort()

        lower_map, upper_map = {}, {}
        for x in xs_fine:
            fb = s.fiber_boundaries(x, properized=s.has_properization)
            low = f2(x, fb.lo) if math.isfinite(fb.lo) else -INF
            lower_map[x] = low
            if math.isfinite(fb.hi):
                upper_map[x] = f2(x, fb.hi)
            else:
                # unbounded fiber height: the image boundary is the total
                # volume above the anchored lower edge, possibly infinite
                vol = s.volume_fn(x, spec)
                upper_map[x] = INF if not math.isfinite(vol) else low + vol

        tag = sp.type_tag
        if tag in ("I", "II"):
            lower = fit_piecewise_linear(xs, [lower_map[x] for x in xs])
        else:
            lower = BoundaryDescriptor.from_samples(
                xs_fine, [lower_map[x] for x in xs_fine], semicontinuity="upper")
        if tag in ("I", "III"):
            upper = fit_piecewise_linear(xs, [upper_map[x] for x in xs])
        else:
            upper = BoundaryDescriptor.from_samples(
                xs_fine, [upper_map[x] for x in xs_fine], semicontinuity="lower")

        inclusions = {
            "I": ("closed", "closed"), "II": ("closed", "open"),
            "III": ("open", "closed"), "IV": ("open", "open"),
        }[tag]
        strips.append(construct_region(
            sp.interval, tag, lower, upper, inclusions, sp.interval_inclusion))

    focus_imaged = tuple(
        FocusFocusDatum(d.x, f2(d.x, d.y), d.multiplicity, e)
        for d, e in zip(foci, eps_t)
    )
    region = CartographicRegion(tuple(strips), focus_imaged,
                                TauElement(), s.name)
    return normalize_mod_tau(region)


@dataclass(frozen=True)
class CartographicSample:
    """A grid of momentum-image points and their straightened images."""

    xs: tuple[float, ...]
    ys: tuple[tuple[float, ...], ...]   # per column
    f2: tuple[tuple[float, ...], ...]   # per column


def cartographic_sample(s: SemitoricSystem, eps: Sequence[int],
                        grid: GridSpec = GridSpec(nx=24, ny=16),
                        y_span: float = 2.5,
                        spec: QuadratureSpec = DEFAULT_QUAD) -> CartographicSample:
    """Sample the straightening map on an interior grid (for property checks)."""
    eps_t = tuple(int(e) for e in eps)
    window = grid.x_window if grid.x_window is not None else s.metadata.default_window
    meta = s.metadata
    skip = set(meta.j_critical_values) | {d.x for d in meta.focus}
    xs, ys_all, f2_all = [], [], []
    for x in np.linspace(window[0] + 1e-3, window[1] - 1e-3, grid.nx):
        if any(abs(x - c) < 5e-3 for c in skip):
            continue
        fb = s.fiber_boundaries(float(x), properized=s.has_properization)
        lo = fb.lo
        hi = fb.hi if math.isfinite(fb.hi) else lo + y_span
        col_ys = list(np.linspace(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo), grid.ny))
        col_f2 = [action_map(s, eps_t, (float(x), float(y)), spec=spec)[1]
                  for y in col_ys]
        xs.append(float(x))
        ys_all.append(tuple(col_ys))
        f2_all.append(tuple(col_f2))
    return CartographicSample(tuple(xs), tuple(ys_all), tuple(f2_all))
