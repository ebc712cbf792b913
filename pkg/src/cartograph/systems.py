"""Catalog of concrete integrable systems on four-dimensional phase spaces.

Every system exposes the same surface: evaluators for the momentum pair
``F = (J, H)`` (and a properized variant when the raw map is not proper),
fiber boundary data, normalized reduced volumes, Monte Carlo fiber sampling,
and local canonical charts used by the spectral singularity classifier.

Catalog entries
---------------
``spherical_pendulum``
    Cotangent bundle of the unit sphere with the angular momentum about the
    vertical axis and the total energy.  One focus-focus value at ``(0, 1)``,
    one stable equilibrium mapping to ``(0, -1)``, fibers unbounded in energy.

``toric_s2s2``
    Product of two spheres with the product area form and the pair of height
    functions.  The compact reference case: the image is the full square.

``coupled_m(chi, h)`` and ``coupled_n(chi, h)``
    Products of two spheres with a slit removed and the second area form
    rescaled by a profile that is 1 on one side and ``chi(z2)`` on the other.
    The raw map ``(z1, z2)`` is not proper; cartography uses the properized
    second component, which blows up along the removed slit:

        coupled_m:  (z2 + 2) / (z1^2 + h(z2))
        coupled_n:  (z2 + 2) / (((z2 - 1)^2 + h(z1)) (z1^2 + h(z2)))

    ``h`` vanishes exactly on [0, +inf) and is positive decreasing on the
    negative axis, so the denominators vanish exactly where points were
    removed.  Volumes per unit of the first momentum are 2 for ``x < 0``,
    1 at ``x = 0`` and ``1 + integral_0^1 chi`` for ``x > 0``.

``dh_counterexample(f)``
    The open subset ``{z2 < f(z1)}`` of the toric product, properized by
    ``1/(f(z1) - z2)``.  Its reduced volume ``1 + f(x)`` is not piecewise
    linear whenever ``f`` is not, which is the point of the example.

Normalization: all volumes are reported in units where the pushforward of
the fiberwise Liouville measure under the second action has density one
(raw symplectic areas divided by 2 pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .affine import FocusFocusDatum
from .errors import DomainError, ValidationError
from .numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    adaptive_quad,
    pendulum_action,
    potential_minimum,
)

CONSTRAINT_TOL = 1e-10
# finite-difference steps for derivatives/Hessians on chart coordinates
_FD_STEP = 1e-5
_RANK_TOL = 1e-7
# relative threshold separating real/imaginary spectral parts
_SPEC_TOL = 1e-4


class SingularityType(str, Enum):
    REGULAR = "regular"
    TRANSVERSALLY_ELLIPTIC = "transversally-elliptic"
    ELLIPTIC_ELLIPTIC = "elliptic-elliptic"
    FOCUS_FOCUS = "focus-focus"
    DEGENERATE = "degenerate-or-hyperbolic"

    def __str__(self):  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class FiberBounds:
    """Extended-real fiber boundary pair with attainment flags.

    Iterates as ``(lo, hi)`` so callers may unpack just the two values.
    """

    lo: float
    hi: float
    lo_attained: bool = True
    hi_attained: bool = True

    def __iter__(self):
        return iter((self.lo, self.hi))


@dataclass(frozen=True)
class Chart:
    """Local 4-coordinate parametrization around a phase-space point.

    ``embed`` maps chart coordinates to ambient points (chart origin = the
    base point); ``omega`` is the matrix of the symplectic form at the base
    point in the chart basis.
    """

    embed: Callable[[np.ndarray], np.ndarray]
    omega: np.ndarray


@dataclass(frozen=True)
class SystemMetadata:
    """Analytic side data for a catalog entry."""

    j_image: tuple[float, float]
    j_critical_values: tuple[float, ...]
    split_candidates: tuple[float, ...]
    focus: tuple[FocusFocusDatum, ...]
    k_plus_member: Callable[[float], bool]
    k_minus_member: Callable[[float], bool]
    known_critical_points: tuple[tuple[tuple[float, ...], SingularityType], ...]
    rank1_samples: Callable[[int], list[tuple[float, ...]]]
    default_window: tuple[float, float]
    base_abscissa: float
    compact: bool
    isotropy_weights_at_vertex: Optional[tuple[int, int]] = None


@dataclass(frozen=True, eq=False)  # identity hash: systems are cache keys
class SemitoricSystem:
    """A catalog system: evaluators plus analytic metadata.

    Immutable after construction; all evaluators are pure functions, so a
    system may be shared freely between threads.
    """

    name: str
    dim_ambient: int
    momentum: Callable[[np.ndarray], tuple[float, float]]
    properized_momentum: Optional[Callable[[np.ndarray], tuple[float, float]]]
    domain_predicate: Callable[[np.ndarray], bool]
    constraint_residual: Callable[[np.ndarray], float]
    fiber_bounds_fn: Callable[[float, bool], FiberBounds]
    volume_fn: Callable[[float, QuadratureSpec], float]
    cumulative_fn: Callable[[float, float, QuadratureSpec], float]
    mc_values_fn: Callable[[float, float, np.random.Generator, int], np.ndarray]
    chart_fn: Callable[[np.ndarray], Chart]
    metadata: SystemMetadata
    params: dict = field(default_factory=dict)

    # -- public operations ----------------------------------------------------

    @property
    def has_properization(self) -> bool:
        return self.properized_momentum is not None

    def check_point(self, p) -> np.ndarray:
        q = np.asarray(p, dtype=float).reshape(-1)
        if q.size != self.dim_ambient:
            raise ValidationError(
                f"{self.name} expects {self.dim_ambient} ambient coordinates, got {q.size}")
        res = self.constraint_residual(q)
        if res > CONSTRAINT_TOL:
            raise DomainError(
                f"constraint residual {res:.3g} exceeds {CONSTRAINT_TOL:g}")
        if not self.domain_predicate(q):
            raise DomainError("point lies in the removed set of the phase space")
        return q

    def eval_F(self, p, properized: bool = False) -> tuple[float, float]:
        q = self.check_point(p)
        if properized:
            if not self.has_properization:
                raise ValidationError(f"{self.name} has no properized momentum map")
            return self.properized_momentum(q)
        return self.momentum(q)

    def cartography_eval(self, p) -> tuple[float, float]:
        """Momentum pair in the coordinates cartography works in."""
        return self.eval_F(p, properized=self.has_properization)

    def in_j_image(self, x: float, tol: float = 1e-12) -> bool:
        lo, hi = self.metadata.j_image
        return lo - tol <= x <= hi + tol

    def fiber_boundaries(self, x: float, properized: bool = False) -> FiberBounds:
        if not self.in_j_image(x):
            raise DomainError(f"x={x:g} outside the first-momentum image")
        if properized and not self.has_properization:
            raise ValidationError(f"{self.name} has no properized momentum map")
        return self.fiber_bounds_fn(x, properized)

    def reduced_volume(self, x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
        if not self.in_j_image(x):
            raise DomainError(f"x={x:g} outside the first-momentum image")
        for c in self.metadata.j_critical_values:
            if abs(x - c) <= 1e-12:
                raise DomainError(
                    f"x={x:g} is a critical value of the first momentum")
        return self.volume_fn(x, spec)

    def cumulative_volume(self, x: float, y: float,
                          spec: QuadratureSpec = DEFAULT_QUAD) -> float:
        """Normalized volume of the part of the fiber over ``x`` below the
        cartography height ``y`` (the second action, anchored at the bottom)."""
        return self.cumulative_fn(x, y, spec)

    def mc_values(self, x: float, below_y: float, rng: np.random.Generator,
                  m: int) -> np.ndarray:
        return self.mc_values_fn(x, below_y, rng, m)

    def chart_at(self, p) -> Chart:
        return self.chart_fn(self.check_point(p))


# ---------------------------------------------------------------------------
# parameter functions (chi, h, f): named built-ins and piecewise polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomial pieces on consecutive intervals of a breakpoint grid.

    ``coeffs[i]`` are ascending-power coefficients in the absolute variable,
    valid on ``[breakpoints[i], breakpoints[i+1]]``; evaluation clamps to the
    outer pieces.
    """

    breakpoints: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.breakpoints) < 2 or len(self.coeffs) != len(self.breakpoints) - 1:
            raise ValidationError("piecewise polynomial needs n+1 breakpoints for n pieces")
        if any(b - a <= 0 for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValidationError("piecewise polynomial breakpoints must increase")

    def __call__(self, t: float) -> float:
        bp = self.breakpoints
        i = 0
        while i < len(bp) - 2 and t > bp[i + 1]:
            i += 1
        return sum(c * t ** j for j, c in enumerate(self.coeffs[i]))

    @staticmethod
    def from_spec(obj: dict) -> "PiecewisePolynomial":
        try:
            return PiecewisePolynomial(
                tuple(float(b) for b in obj["breakpoints"]),
                tuple(tuple(float(c) for c in piece) for piece in obj["coeffs"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed piecewise polynomial spec: {exc}") from exc


def _chi_default(t: float) -> float:
    return 1.0 if t <= 0.0 else 1.0 / (1.0 + t)


def _chi_soft(t: float) -> float:
    return 1.0 if t <= 0.0 else 1.0 - 0.5 * t * t


CHI_BUILTINS: dict[str, Callable[[float], float]] = {
    "default": _chi_default,
    "soft": _chi_soft,
    "one": lambda t: 1.0,  # deliberately invalid; rejected by validation
}

H_BUILTINS: dict[str, Callable[[float], float]] = {
    "default": lambda t: t * t if t < 0.0 else 0.0,
    "quartic": lambda t: t ** 4 if t < 0.0 else 0.0,
}

F_BUILTINS: dict[str, Callable[[float], float]] = {
    "linear": lambda x: x,
    "square": lambda x: x * x,
    "half": lambda x: 0.5,
    "cubic_mix": lambda x: 0.5 * x ** 3 - 0.2 * x,
}


def resolve_function(spec, registry: dict, label: str) -> Callable[[float], float]:
    """Turn a callable, a built-in name, or a piecewise-poly dict into a callable."""
    if callable(spec):
        return spec
    if isinstance(spec, str):
        if spec not in registry:
            raise ValidationError(f"unknown built-in {label} function {spec!r}")
        return registry[spec]
    if isinstance(spec, dict):
        return PiecewisePolynomial.from_spec(spec)
    raise ValidationError(f"cannot interpret {label} function spec {spec!r}")


def validate_chi(chi: Callable[[float], float]) -> None:
    """Sampled check of the profile conditions for the coupled systems."""
    for t in np.linspace(-1.0, 0.0, 41):
        if abs(chi(float(t)) - 1.0) > 1e-12:
            raise ValidationError(
                f"chi must be identically 1 for arguments <= 0; chi({t:g}) = {chi(float(t)):g}")
    for t in np.linspace(0.02, 1.0, 50):
        v = chi(float(t))
        if not v > 0.0:
            raise ValidationError(f"chi must be positive for arguments > 0; chi({t:g}) = {v:g}")
        if abs(v - 1.0) <= 1e-12:
            raise ValidationError(
                f"chi must differ from 1 for arguments > 0; chi({t:g}) = {v:g}")


def validate_h(h: Callable[[float], float]) -> None:
    for t in np.linspace(0.0, 1.0, 41):
        if abs(h(float(t))) > 1e-12:
            raise ValidationError(
                f"h must vanish for arguments >= 0; h({t:g}) = {h(float(t)):g}")
    step = 1e-6
    for t in np.linspace(-1.0, -0.02, 50):
        v = h(float(t))
        if not v > 0.0:
            raise ValidationError(
                f"h must be positive for arguments < 0; h({t:g}) = {v:g}")
        dv = (h(float(t) + step) - h(float(t) - step)) / (2 * step)
        if not dv < 0.0:
            raise ValidationError(
                f"h must be strictly decreasing for arguments < 0; h'({t:g}) = {dv:g}")


def validate_profile_f(f: Callable[[float], float]) -> None:
    for x in np.linspace(-0.98, 0.98, 50):
        v = f(float(x))
        if not (-1.0 + 1e-9 < v <= 1.0 + 1e-12):
            raise ValidationError(
                f"profile must map into (-1, 1]; f({x:g}) = {v:g}")


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

_OMEGA_CANONICAL = np.array([
    [0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
])  # matrix of sum(dp_i ^ dq_i) in the basis (q1, q2, p1, p2)


def _pendulum_chart(point: np.ndarray) -> Chart:
    q, mom = point[:3], point[3:]
    if abs(q[2]) > 0.92 and float(np.linalg.norm(mom)) < 0.25:
        s = 1.0 if q[2] > 0 else -1.0
        base = np.array([q[0], q[1], mom[0], mom[1]])

        def embed(u):
            q1, q2, p1, p2 = base + np.asarray(u, dtype=float)
            q3 = s * math.sqrt(max(0.0, 1.0 - q1 * q1 - q2 * q2))
            p3 = -(q1 * p1 + q2 * p2) / q3
            return np.array([q1, q2, q3, p1, p2, p3])

        # canonical at the equilibria: the momentum correction of the pole
        # chart is cubic in the coordinates there
        return Chart(embed, _OMEGA_CANONICAL.copy())

    theta0 = math.acos(max(-1.0, min(1.0, q[2])))
    phi0 = math.atan2(q[1], q[0])
    st = math.sin(theta0)
    p_theta0 = -mom[2] / st
    p_phi0 = q[0] * mom[1] - q[1] * mom[0]
    base = np.array([theta0, phi0, p_theta0, p_phi0])

    def embed(u):
        th, ph, pt, pp = base + np.asarray(u, dtype=float)
        stn, ctn = math.sin(th), math.cos(th)
        qv = np.array([stn * math.cos(ph), stn * math.sin(ph), ctn])
        e_th = np.array([ctn * math.cos(ph), ctn * math.sin(ph), -stn])
        e_ph = np.array([-math.sin(ph), math.cos(ph), 0.0])
        pv = pt * e_th + (pp / stn) * e_ph
        return np.concatenate([qv, pv])

    return Chart(embed, _OMEGA_CANONICAL.copy())


def _sphere_block(v: np.ndarray, weight: float):
    """Chart of one unit sphere and the matrix of ``weight * area form``.

    Returns ``(embed2, omega2x2)`` where ``embed2`` maps two chart
    coordinates to a point of the sphere.
    """
    z = v[2]
    if abs(z) > 0.92:
        s = 1.0 if z > 0 else -1.0
        base = np.array([v[0], v[1]])

        def embed2(a, b):
            aa, bb = base[0] + a, base[1] + b
            return np.array([aa, bb, s * math.sqrt(max(0.0, 1.0 - aa * aa - bb * bb))])

        w = weight / z  # area form is (1/z) da ^ db near the poles
    else:
        r = math.hypot(v[0], v[1])
        phi0 = math.atan2(v[1], v[0])
        base = np.array([phi0, z])

        def embed2(a, b):
            ph, zz = base[0] + a, base[1] + b
            rr = math.sqrt(max(0.0, 1.0 - zz * zz))
            return np.array([rr * math.cos(ph), rr * math.sin(ph), zz])

        w = weight  # cylindrical coordinates: area form is dphi ^ dz
    return embed2, np.array([[0.0, w], [-w, 0.0]])


def _product_chart(point: np.ndarray, weight_fn: Callable[[float, float], float]) -> Chart:
    v1, v2 = point[:3], point[3:]
    w2 = weight_fn(v1[2], v2[2])
    emb1, om1 = _sphere_block(v1, 1.0)
    emb2, om2 = _sphere_block(v2, w2)

    def embed(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([emb1(u[0], u[1]), emb2(u[2], u[3])])

    omega = np.zeros((4, 4))
    omega[:2, :2] = om1
    omega[2:, 2:] = om2
    return Chart(embed, omega)


# ---------------------------------------------------------------------------
# spectral singularity classification
# ---------------------------------------------------------------------------


def _fd_gradient(f, dim, h=_FD_STEP):
    g = np.zeros(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        g[i] = (f(e) - f(-e)) / (2 * h)
    return g


def _fd_hessian(f, dim, h=_FD_STEP):
    H = np.zeros((dim, dim))
    f0 = f(np.zeros(dim))
    for i in range(dim):
        ei = np.zeros(dim)
        ei[i] = h
        H[i, i] = (f(ei) - 2 * f0 + f(-ei)) / (h * h)
        for j in range(i + 1, dim):
            ej = np.zeros(dim)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(ei + ej) - f(ei - ej) - f(-ei + ej) + f(-ei - ej)
            ) / (4 * h * h)
    return 0.5 * (H + H.T)


def linearization_spectrum(system: SemitoricSystem, p, mu: float, nu: float) -> np.ndarray:
    """Eigenvalues of the linearized Hamiltonian vector field of
    ``mu*J + nu*H`` at ``p``, from the chart Hessian and the symplectic form."""
    chart = system.chart_at(p)

    def k_of(u):
        j, h = system.momentum(chart.embed(u))
        return mu * j + nu * h

    hess = _fd_hessian(k_of, 4)
    a = np.linalg.solve(chart.omega, hess)
    return np.linalg.eigvals(a)


def _classify_spectrum_rank0(eigs: np.ndarray) -> SingularityType:
    scale = float(np.max(np.abs(eigs)))
    if scale < 1e-9:
        return SingularityType.DEGENERATE
    re = np.abs(eigs.real) / scale
    im = np.abs(eigs.imag) / scale
    if np.all(re <= _SPEC_TOL) and np.all(im > _SPEC_TOL):
        return SingularityType.ELLIPTIC_ELLIPTIC
    if np.all(re > _SPEC_TOL) and np.all(im > _SPEC_TOL):
        return SingularityType.FOCUS_FOCUS
    return SingularityType.DEGENERATE


def classify_critical_point(system: SemitoricSystem, p) -> SingularityType:
    """Spectral classification of a critical point of the momentum map.

    Rank is decided from the singular values of the chart differential;
    the eigenvalue pattern of a few generic combinations of the two
    Hamiltonians then separates elliptic-elliptic, focus-focus and
    transversally elliptic points from everything else.
    """
    chart = system.chart_at(p)

    def j_of(u):
        return system.momentum(chart.embed(u))[0]

    def h_of(u):
        return system.momentum(chart.embed(u))[1]

    dj = _fd_gradient(j_of, 4)
    dh = _fd_gradient(h_of, 4)
    dF = np.vstack([dj, dh])
    svals = np.linalg.svd(dF, compute_uv=False)
    rank = int(np.sum(svals > _RANK_TOL * max(1.0, svals[0])))

    if rank == 2:
        raise ValidationError("point is not critical (momentum map has rank 2)")

    if rank == 0:
        verdicts = [
            _classify_spectrum_rank0(linearization_spectrum(system, p, mu, nu))
            for mu, nu in ((0.7071, 0.7071), (0.31, 0.94), (0.86, -0.43))
        ]
        for tag in (SingularityType.FOCUS_FOCUS, SingularityType.ELLIPTIC_ELLIPTIC):
            if verdicts.count(tag) >= 2:
                return tag
        return SingularityType.DEGENERATE

    # rank 1: kill the differential with the left null combination
    u2, _, _ = np.linalg.svd(dF)
    mu, nu = u2[:, -1]
    eigs = linearization_spectrum(system, p, float(mu), float(nu))
    order = np.argsort(np.abs(eigs))
    small, big = eigs[order[:2]], eigs[order[2:]]
    scale = float(np.max(np.abs(eigs)))
    if scale < 1e-9 or np.any(np.abs(big) <= 1e-3 * scale):
        return SingularityType.DEGENERATE
    if np.all(np.abs(small) <= 1e-3 * scale) and np.all(
            np.abs(big.real) <= _SPEC_TOL * scale) and np.all(
            np.abs(big.imag) > _SPEC_TOL * scale):
        return SingularityType.TRANSVERSALLY_ELLIPTIC
    return SingularityType.DEGENERATE


def pendulum_isotropy_weights() -> tuple[int, int]:
    """Circle-action weights at the pendulum's stable equilibrium.

    The quadratic part of the angular momentum in the tangent-plane chart
    splits into two harmonic oscillators rotating in opposite directions;
    the weights are read off from the linearized flow as the rotation rates
    signed by the Krein signature of each invariant plane.
    """
    # exact Hessian of q1 p2 - q2 p1 in the chart basis (q1, q2, p1, p2)
    S = np.zeros((4, 4))
    S[0, 3] = S[3, 0] = 1.0
    S[1, 2] = S[2, 1] = -1.0
    omega = _OMEGA_CANONICAL
    a = np.linalg.solve(omega, S)
    eigvals, eigvecs = np.linalg.eig(a)
    keep = eigvals.imag > 1e-9  # one of each conjugate pair
    basis = eigvecs[:, keep]
    rates = eigvals.imag[keep]
    # Hermitian Krein form on the positive-frequency eigenspace: a negative
    # signature direction is a positively rotating oscillator
    b = -1j * (basis.conj().T @ omega @ basis)
    signs = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
    weights = sorted(int(round(-math.copysign(r, s)))
                     for r, s in zip(sorted(rates), signs))
    if weights != [-1, 1]:
        raise ValidationError(
            f"isotropy-weight verification failed (got {weights})")
    return (-1, 1)


# ---------------------------------------------------------------------------
# spherical pendulum
# ---------------------------------------------------------------------------


def _pendulum_momentum(p: np.ndarray) -> tuple[float, float]:
    q, mom = p[:3], p[3:]
    j = q[0] * mom[1] - q[1] * mom[0]
    h = 0.5 * float(mom @ mom) + q[2]
    return float(j), float(h)


def _pendulum_constraint(p: np.ndarray) -> float:
    q, mom = p[:3], p[3:]
    return max(abs(float(q @ q) - 1.0), abs(float(q @ mom)))


def _pendulum_rank1_samples(n: int) -> list[tuple[float, ...]]:
    pts = []
    for ell in np.linspace(0.3, 1.8, n):
        theta, _ = potential_minimum(float(ell))
        st = math.sin(theta)
        q = (st, 0.0, math.cos(theta))
        mom = (0.0, float(ell) / st, 0.0)
        pts.append(q + mom)
    return pts


def _make_pendulum() -> SemitoricSystem:
    def fiber_bounds(x, properized):
        _, umin = potential_minimum(x)
        return FiberBounds(umin, math.inf, True, False)

    def volume(x, spec):
        return math.inf

    def cumulative(x, y, spec):
        return pendulum_action(x, y, spec)

    def mc_values(x, below_y, rng, m):
        if not math.isfinite(below_y):
            raise DomainError(
                "pendulum fibers are non-compact: mc sampling needs a finite level")
        _, umin = potential_minimum(x)
        if below_y <= umin:
            return np.zeros(m)
        pmax = math.sqrt(2.0 * (below_y - umin))
        theta = rng.uniform(0.0, math.pi, m)
        p_theta = rng.uniform(-pmax, pmax, m)
        s2 = np.clip(np.sin(theta) ** 2, 1e-300, None)
        u = x * x / (2.0 * s2) + np.cos(theta)
        inside = 0.5 * p_theta ** 2 + u < below_y
        # box area (pi * 2 pmax) over 2 pi, times the hit indicator
        return pmax * inside.astype(float)

    focus = (FocusFocusDatum(0.0, 1.0, 1, 1),)
    meta = SystemMetadata(
        j_image=(-math.inf, math.inf),
        j_critical_values=(0.0,),
        split_candidates=(0.0,),
        focus=focus,
        k_plus_member=lambda x: False,
        k_minus_member=lambda x: True,
        known_critical_points=(
            ((0.0, 0.0, 1.0, 0.0, 0.0, 0.0), SingularityType.FOCUS_FOCUS),
            ((0.0, 0.0, -1.0, 0.0, 0.0, 0.0), SingularityType.ELLIPTIC_ELLIPTIC),
        ),
        rank1_samples=_pendulum_rank1_samples,
        default_window=(-1.5, 1.5),
        base_abscissa=-0.75,
        compact=False,
        isotropy_weights_at_vertex=(-1, 1),
    )
    return SemitoricSystem(
        name="spherical_pendulum",
        dim_ambient=6,
        momentum=_pendulum_momentum,
        properized_momentum=None,
        domain_predicate=lambda p: True,
        constraint_residual=_pendulum_constraint,
        fiber_bounds_fn=fiber_bounds,
        volume_fn=volume,
        cumulative_fn=cumulative,
        mc_values_fn=mc_values,
        chart_fn=_pendulum_chart,
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# products of two spheres
# ---------------------------------------------------------------------------


def _product_constraint(p: np.ndarray) -> float:
    v1, v2 = p[:3], p[3:]
    return max(abs(float(v1 @ v1) - 1.0), abs(float(v2 @ v2) - 1.0))


def _pole(z: float) -> tuple[float, float, float]:
    return (0.0, 0.0, z)


def _product_rank1_samples() -> Callable[[int], list[tuple[float, ...]]]:
    def sample(n: int) -> list[tuple[float, ...]]:
        pts = []
        zs = np.linspace(-0.8, 0.6, n)
        for i, z in enumerate(zs):
            r = math.sqrt(1.0 - z * z)
            if i % 2 == 0:
                # pole on the first sphere, generic point on the second
                pts.append(_pole(1.0) + (r, 0.0, float(z)))
            else:
                # generic point on the first sphere, pole on the second
                z1 = float(z) if abs(z) > 0.05 else 0.35
                r1 = math.sqrt(1.0 - z1 * z1)
                pts.append((r1, 0.0, z1) + _pole(-1.0))
        return pts
    return sample


@dataclass(frozen=True)
class _ProductGeometry:
    """Concrete description of one product-of-spheres catalog entry."""

    name: str
    density: Callable[[float, float], float]      # fiber density in z2 at (x, z2)
    z_top: Callable[[float], tuple[float, bool]]  # supremum of z2 and attainment
    height: Optional[Callable[[float, float], float]]  # properized height, or None
    domain: Callable[[np.ndarray], bool]
    weight: Callable[[float, float], float]       # omega2 rescaling for charts
    j_image: tuple[float, float]
    split_candidates: tuple[float, ...]
    k_plus: Callable[[float], bool]
    k_minus: Callable[[float], bool]
    known_points: tuple
    window: tuple[float, float]
    base_abscissa: float
    params: dict


def _height_inverse(geom: _ProductGeometry, x: float, y: float) -> float:
    """Invert the properized height in z2 at fixed x (strictly increasing)."""
    z_sup, attained = geom.z_top(x)
    lo = -1.0
    if geom.height(x, lo) >= y:
        return lo
    hi = z_sup
    if attained:
        if geom.height(x, hi) <= y:
            return hi
    else:
        # walk toward the open top, where the height blows up
        gap = z_sup + 1.0
        hi = z_sup - gap * 0.5
        while geom.height(x, hi) < y:
            gap *= 0.5
            hi = z_sup - gap * 0.5
            if gap < 1e-15:
                return z_sup
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-14:
            break
        if geom.height(x, mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _make_product(geom: _ProductGeometry,
                  properize: bool) -> SemitoricSystem:
    def momentum(p):
        return float(p[2]), float(p[5])

    def properized_momentum(p):
        return float(p[2]), float(geom.height(p[2], p[5]))

    def fiber_bounds(x, properized):
        z_sup, attained = geom.z_top(x)
        if not properized:
            return FiberBounds(-1.0, z_sup, True, attained)
        lo = geom.height(x, -1.0)
        if attained:
            return FiberBounds(lo, geom.height(x, z_sup), True, True)
        # the properized height blows up along every removed boundary piece
        return FiberBounds(lo, math.inf, True, False)

    def volume(x, spec):
        z_sup, _ = geom.z_top(x)
        return adaptive_quad(lambda t: geom.density(x, t), -1.0, z_sup, spec)

    def cumulative(x, y, spec):
        z_sup, attained = geom.z_top(x)
        if properize:
            top_height = geom.height(x, z_sup) if attained else math.inf
            if y >= top_height:
                z = z_sup
            else:
                z = _height_inverse(geom, x, y)
        else:
            z = min(y, z_sup)
        if z <= -1.0:
            return 0.0
        return adaptive_quad(lambda t: geom.density(x, t), -1.0, z, spec)

    def mc_values(x, below_y, rng, m):
        z_sup, _ = geom.z_top(x)
        # uniform points of the second sphere by rejection from the ambient
        # cube; only the height coordinate matters for the fiber volume
        zs = np.empty(0)
        while zs.size < m:
            v = rng.uniform(-1.0, 1.0, size=(2 * m, 3))
            norms = np.einsum("ij,ij->i", v, v)
            keep = (norms <= 1.0) & (norms > 1e-12)
            zz = v[keep, 2] / np.sqrt(norms[keep])
            zs = np.concatenate([zs, zz])
        zs = zs[:m]
        inside = zs < z_sup
        if math.isfinite(below_y):
            if properize:
                heights = np.array([geom.height(x, float(z)) for z in zs])
            else:
                heights = zs
            inside = inside & (heights < below_y)
        dens = np.array([geom.density(x, float(z)) for z in zs])
        return 2.0 * dens * inside.astype(float)

    meta = SystemMetadata(
        j_image=geom.j_image,
        j_critical_values=(-1.0, 1.0),
        split_candidates=geom.split_candidates,
        focus=(),
        k_plus_member=geom.k_plus,
        k_minus_member=geom.k_minus,
        known_critical_points=geom.known_points,
        rank1_samples=_product_rank1_samples(),
        default_window=geom.window,
        base_abscissa=geom.base_abscissa,
        compact=False,
        isotropy_weights_at_vertex=None,
    )
    return SemitoricSystem(
        name=geom.name,
        dim_ambient=6,
        momentum=momentum,
        properized_momentum=properized_momentum if properize else None,
        domain_predicate=geom.domain,
        constraint_residual=_product_constraint,
        fiber_bounds_fn=fiber_bounds,
        volume_fn=volume,
        cumulative_fn=cumulative,
        mc_values_fn=mc_values,
        chart_fn=lambda p: _product_chart(p, geom.weight),
        metadata=meta,
        params=geom.params,
    )


def _coupled_density(chi):
    def density(x, z):
        return 1.0 if x <= 0.0 else float(chi(z))
    return density


_EE = SingularityType.ELLIPTIC_ELLIPTIC
_POLE_POINTS = {
    "NN": _pole(1.0) + _pole(1.0),
    "NS": _pole(1.0) + _pole(-1.0),
    "SN": _pole(-1.0) + _pole(1.0),
    "SS": _pole(-1.0) + _pole(-1.0),
}


def _make_toric_s2s2() -> SemitoricSystem:
    geom = _ProductGeometry(
        name="toric_s2s2",
        density=lambda x, z: 1.0,
        z_top=lambda x: (1.0, True),
        height=None,
        domain=lambda p: True,
        weight=lambda z1, z2: 1.0,
        j_image=(-1.0, 1.0),
        split_candidates=(),
        k_plus=lambda x: True,
        k_minus=lambda x: True,
        known_points=tuple((pt, _EE) for pt in _POLE_POINTS.values()),
        window=(-1.0, 1.0),
        base_abscissa=-0.5,
        params={},
    )
    return _make_product(geom, properize=False)


def _make_coupled_m(chi, h) -> SemitoricSystem:
    chi = resolve_function(chi, CHI_BUILTINS, "chi")
    h = resolve_function(h, H_BUILTINS, "h")
    validate_chi(chi)
    validate_h(h)

    def height(x, z):
        return (z + 2.0) / (x * x + h(z))

    def domain(p):
        return not (abs(p[2]) < 1e-12 and p[5] > -1e-12)

    geom = _ProductGeometry(
        name="coupled_m",
        density=_coupled_density(chi),
        z_top=lambda x: ((0.0, False) if abs(x) < 1e-12 else (1.0, True)),
        height=height,
        domain=domain,
        weight=lambda z1, z2: 1.0 if z1 <= 0.0 else float(chi(z2)),
        j_image=(-1.0, 1.0),
        split_candidates=(0.0,),
        k_plus=lambda x: abs(x) > 1e-12,
        k_minus=lambda x: True,
        known_points=tuple((pt, _EE) for pt in _POLE_POINTS.values()),
        window=(-1.0, 1.0),
        base_abscissa=-0.5,
        params={"chi": chi, "h": h},
    )
    return _make_product(geom, properize=True)


def _make_coupled_n(chi, h) -> SemitoricSystem:
    chi = resolve_function(chi, CHI_BUILTINS, "chi")
    h = resolve_function(h, H_BUILTINS, "h")
    validate_chi(chi)
    validate_h(h)

    def height(x, z):
        return (z + 2.0) / (((z - 1.0) ** 2 + h(x)) * (x * x + h(z)))

    def domain(p):
        if abs(p[2]) < 1e-12 and p[5] > -1e-12:
            return False
        if p[2] > -1e-12 and abs(p[5] - 1.0) < 1e-12:
            return False
        return True

    def z_top(x):
        if abs(x) < 1e-12:
            return 0.0, False
        if x > 0.0:
            return 1.0, False
        return 1.0, True

    known = tuple((pt, _EE) for key, pt in _POLE_POINTS.items() if key != "NN")
    geom = _ProductGeometry(
        name="coupled_n",
        density=_coupled_density(chi),
        z_top=z_top,
        height=height,
        domain=domain,
        weight=lambda z1, z2: 1.0 if z1 <= 0.0 else float(chi(z2)),
        j_image=(-1.0, 1.0),
        split_candidates=(0.0,),
        k_plus=lambda x: x < -1e-12,
        k_minus=lambda x: True,
        known_points=known,
        window=(-1.0, 1.0),
        base_abscissa=-0.5,
        params={"chi": chi, "h": h},
    )
    return _make_product(geom, properize=True)


def _make_dh_counterexample(f) -> SemitoricSystem:
    f = resolve_function(f, F_BUILTINS, "profile")
    validate_profile_f(f)

    def height(x, z):
        return 1.0 / (f(x) - z)

    def domain(p):
        return p[5] < f(p[2])

    geom = _ProductGeometry(
        name="dh_counterexample",
        density=lambda x, z: 1.0,
        z_top=lambda x: (float(f(x)), False),
        height=height,
        domain=domain,
        weight=lambda z1, z2: 1.0,
        j_image=(-1.0, 1.0),
        split_candidates=(),
        k_plus=lambda x: False,
        k_minus=lambda x: True,
        known_points=(),
        window=(-0.9, 0.9),
        base_abscissa=-0.5,
        params={"f": f},
    )
    return _make_product(geom, properize=True)


# ---------------------------------------------------------------------------
# factory
# ---------------------------------------------------------------------------


def make_system(name: str, **params) -> SemitoricSystem:
    """Build a catalog system by name.

    ``coupled_m``/``coupled_n`` accept ``chi`` and ``h`` (callables, built-in
    names, or piecewise-polynomial specs); ``dh_counterexample`` accepts
    ``f``.  Parameter functions are validated by sampling against the sign
    and monotonicity conditions they must satisfy.
    """
    if name == "spherical_pendulum":
        _reject_params(name, params)
        return _make_pendulum()
    if name == "toric_s2s2":
        _reject_params(name, params)
        return _make_toric_s2s2()
    if name == "coupled_m":
        return _make_coupled_m(params.pop("chi", "default"), params.pop("h", "default"))
    if name == "coupled_n":
        return _make_coupled_n(params.pop("chi", "default"), params.pop("h", "default"))
    if name == "dh_counterexample":
        return _make_dh_counterexample(params.pop("f", "linear"))
    raise ValidationError(f"unknown system {name!r}")


def _reject_params(name, params):
    if params:
        raise ValidationError(f"system {name!r} takes no parameters, got {sorted(params)}")


def eval_F(system: SemitoricSystem, p, properized: bool = False) -> tuple[float, float]:
    """Module-level alias of :meth:`SemitoricSystem.eval_F`."""
    return system.eval_F(p, properized)


def fiber_boundaries(system: SemitoricSystem, x: float,
                     properized: bool = False) -> FiberBounds:
    return system.fiber_boundaries(x, properized)


def reduced_volume(system: SemitoricSystem, x: float,
                   spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    return system.reduced_volume(x, spec)
