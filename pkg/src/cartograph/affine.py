"""Exact arithmetic of vertical integer shears of the plane.

The ambient group is generated by the unipotent matrix ``T = [[1, 0], [1, 1]]``
(so ``T^k`` sends ``(x, y)`` to ``(x, k*x + y)``) together with vertical
translations.  Cut maps are piecewise versions of ``T^u`` that act as the
identity on the closed left half-plane of a vertical line and shear the right
half-plane, anchored so that the map is continuous across the line.  All such
maps only ever add a piecewise-linear function of ``x`` to the second
coordinate, hence they commute.

Shear powers and multiplicities are stored as exact integers; point
coordinates are floats, and membership of a point on a vertical line is
decided with the tolerance :data:`LINE_TOL`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

# Tolerance for deciding that a point lies on a given vertical line.
LINE_TOL = 1e-9

Point = tuple[float, float]


def shear_power(k: int, p: Point) -> Point:
    """Apply the k-th power of the basic shear: ``(x, y) -> (x, k*x + y)``."""
    x, y = p
    return (x, k * x + y)


@dataclass(frozen=True)
class TauElement:
    """A global plane transformation ``(x, y) -> (x, k*x + y + c)``.

    ``k`` is the integer shear power, ``c`` a vertical translation.  These
    elements form an abelian group under composition.
    """

    k: int = 0
    c: float = 0.0

    def __post_init__(self):
        if self.k != int(self.k):
            raise ValidationError("shear power must be an integer")

    def apply(self, p: Point) -> Point:
        x, y = p
        return (x, self.k * x + y + self.c)

    def offset(self, x: float) -> float:
        return self.k * x + self.c

    def compose(self, other: "TauElement") -> "TauElement":
        return TauElement(self.k + other.k, self.c + other.c)

    def inverse(self) -> "TauElement":
        return TauElement(-self.k, -self.c)

    @property
    def is_identity(self) -> bool:
        return self.k == 0 and self.c == 0.0


@dataclass(frozen=True)
class CutShear:
    """Shear ``T^u`` anchored on the vertical line ``x = x_line``.

    Identity for ``x <= x_line``; for ``x > x_line`` it maps ``(x, y)`` to
    ``(x, y + u*(x - x_line))``.  The anchor on the line makes the map
    continuous (and the identity on the line itself).
    """

    u: int
    x_line: float

    def __post_init__(self):
        if self.u != int(self.u):
            raise ValidationError("cut shear power must be an integer")

    def offset(self, x: float) -> float:
        return self.u * max(0.0, x - self.x_line)

    def apply(self, p: Point) -> Point:
        x, y = p
        return (x, y + self.offset(x))


def cut_shear(c: CutShear, p: Point) -> Point:
    """Apply a single cut shear to a point."""
    return c.apply(p)


@dataclass(frozen=True)
class FocusFocusDatum:
    """An isolated singular value ``(x, y)`` with multiplicity and cut sign.

    ``multiplicity`` counts the pinch points in the fiber over the value; the
    sign selects the vertical cut half-line, pointing up from the value for
    ``sign = +1`` and down for ``sign = -1``.
    """

    x: float
    y: float
    multiplicity: int = 1
    sign: int = 1

    def __post_init__(self):
        if self.multiplicity < 1 or self.multiplicity != int(self.multiplicity):
            raise ValidationError("focus-focus multiplicity must be a positive integer")
        if self.sign not in (-1, 1):
            raise ValidationError("focus-focus sign must be +1 or -1")

    def half_line_contains(self, p: Point, tol: float = LINE_TOL) -> bool:
        """True when ``p`` lies on this datum's cut half-line (within tol)."""
        x, y = p
        if abs(x - self.x) > tol:
            return False
        return self.sign * (y - self.y) >= -tol


@dataclass(frozen=True)
class PiecewiseShear:
    """A finite product of cut shears composed with a global TauElement.

    The total action is ``y -> y + g(x)`` with ``g`` piecewise linear and
    continuous, so all factors commute and the stored order is irrelevant.
    """

    cuts: tuple[CutShear, ...] = ()
    tau: TauElement = TauElement()

    def offset(self, x: float) -> float:
        return self.tau.offset(x) + sum(c.offset(x) for c in self.cuts)

    def apply(self, p: Point) -> Point:
        x, y = p
        return (x, y + self.offset(x))

    def compose(self, other: "PiecewiseShear") -> "PiecewiseShear":
        return PiecewiseShear(self.cuts + other.cuts, self.tau.compose(other.tau))

    @property
    def is_identity(self) -> bool:
        return self.tau.is_identity and all(c.u == 0 for c in self.cuts)


def jump_index(c: Point, data: Iterable[FocusFocusDatum]) -> int:
    """Signed sum of multiplicities of the cut half-lines through ``c``.

    Each datum whose half-line contains ``c`` contributes ``sign * mult``;
    an empty incidence set gives 0.  Several data may share a vertical line,
    in which case contributions add.
    """
    return sum(d.sign * d.multiplicity for d in data if d.half_line_contains(c))


def epsilon_to_cuts(signs: Sequence[int], mults: Sequence[int]) -> list[int]:
    """Cut powers induced by a sign vector: component i is (1 - s_i)/2 * k_i."""
    if len(signs) != len(mults):
        raise ValidationError(
            "sign vector and multiplicity vector have different lengths "
            f"({len(signs)} vs {len(mults)})"
        )
    out = []
    for s, k in zip(signs, mults):
        if s not in (-1, 1):
            raise ValidationError("signs must be +1 or -1")
        if k < 1 or k != int(k):
            raise ValidationError("multiplicities must be positive integers")
        out.append((1 - s) // 2 * k)
    return out


def sign_change_shear(data: Sequence[FocusFocusDatum], new_signs: Sequence[int]) -> PiecewiseShear:
    """Piecewise shear relating the region built with ``data``'s stored signs
    to the region built with ``new_signs`` at the same focus values.

    Flipping the sign of datum i from +1 to -1 composes with ``t^{k_i}`` on
    the line ``x = x_i`` (and the inverse power for the opposite flip).
    """
    if len(new_signs) != len(data):
        raise ValidationError("sign vector length does not match focus data")
    old = epsilon_to_cuts([d.sign for d in data], [d.multiplicity for d in data])
    new = epsilon_to_cuts(list(new_signs), [d.multiplicity for d in data])
    cuts = tuple(
        CutShear(n - o, d.x) for d, o, n in zip(data, old, new) if n - o != 0
    )
    return PiecewiseShear(cuts=cuts)
