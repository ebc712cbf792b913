"""Quadrature, root finding and volume estimation.

The one-degree-of-freedom reduction of the pendulum-type systems runs
entirely through this module: the effective potential on the polar angle,
its turning points, and the libration action

    A(ell, E) = (1/pi) * integral of sqrt(2 (E - U_ell(theta)))
                between the two turning points,

normalized so that A equals the fiber volume below energy E when volumes are
measured with the pushforward density equal to one.  The integrand vanishes
like a square root at the turning points, which the adaptive quadrature
removes with the substitution ``t = a + (b - a) sin^2 s`` before subdividing.

Monte Carlo fiber volumes are the independent oracle for everything the
action integrals produce; they use fixed per-chunk seed substreams so the
result is reproducible and independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, ValidationError

_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for adaptive quadrature."""

    abs_tol: float = 1e-11
    rel_tol: float = 1e-11
    max_depth: int = 48
    endpoint_singularity: str = "none"  # "none" | "inverse-sqrt"

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValidationError("quadrature tolerances must be positive")
        if self.endpoint_singularity not in ("none", "inverse-sqrt"):
            raise ValidationError(
                f"unknown endpoint singularity mode {self.endpoint_singularity!r}")


DEFAULT_QUAD = QuadratureSpec()


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a, fa, b, fb, whole, m, fm, tol, floor, depth, max_depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol or (b - a) < 1e-15 * (1.0 + abs(a)):
        return left + right + delta / 15.0
    if depth >= max_depth:
        raise ConvergenceError(
            f"adaptive quadrature did not converge within depth {max_depth} "
            f"on [{a:g}, {b:g}] (residual {abs(delta):.3g})")
    # halving the local tolerance below the roundoff floor only chases noise
    half = max(0.5 * tol, floor)
    return (_adaptive_simpson(f, a, fa, m, fm, left, lm, flm, half, floor,
                              depth + 1, max_depth)
            + _adaptive_simpson(f, m, fm, b, fb, right, rm, frm, half, floor,
                                depth + 1, max_depth))


def adaptive_quad(integrand: Callable[[float], float], a: float, b: float,
                  spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integrate ``integrand`` over [a, b] to the tolerances in ``spec``.

    With ``endpoint_singularity="inverse-sqrt"`` the integrand may blow up
    like ``(t - a)^(-1/2)`` or ``(b - t)^(-1/2)``; the trig substitution maps
    it to a bounded integrand before subdivision.  Deterministic: the result
    depends only on the inputs.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_quad(integrand, b, a, spec)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("adaptive_quad needs finite endpoints")

    if spec.endpoint_singularity == "inverse-sqrt":
        span = b - a

        def g(s: float) -> float:
            w = math.sin(2.0 * s)
            if w == 0.0:
                return 0.0
            t = a + span * math.sin(s) ** 2
            return integrand(t) * span * w

        inner = QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_depth, "none")
        return adaptive_quad(g, 0.0, math.pi / 2.0, inner)

    fa, fb = integrand(a), integrand(b)
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise DomainError("integrand is not finite at an endpoint "
                          "(use the inverse-sqrt endpoint mode)")
    m, fm, whole = _simpson(integrand, a, fa, b, fb)
    tol = max(spec.abs_tol, spec.rel_tol * abs(whole))
    floor = 1e-16 * (1.0 + abs(whole))
    return _adaptive_simpson(integrand, a, fa, b, fb, whole, m, fm,
                             tol, floor, 0, spec.max_depth)


# ---------------------------------------------------------------------------
# pendulum reduction: effective potential, turning points, action
# ---------------------------------------------------------------------------


def effective_potential(ell: float, theta: float) -> float:
    """U_ell(theta) = ell^2 / (2 sin^2 theta) + cos theta on (0, pi)."""
    if ell == 0.0:
        return math.cos(theta)
    s2 = math.sin(theta) ** 2
    if s2 == 0.0:
        return math.inf
    return ell * ell / (2.0 * s2) + math.cos(theta)


def _bisect(f, a, b, tol=_BISECT_TOL):
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise DomainError("bisection bracket does not change sign")
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def potential_minimum(ell: float) -> tuple[float, float]:
    """Argmin and minimum of the effective potential.

    For ell = 0 the minimum sits at the south pole (theta = pi, U = -1);
    otherwise it is the unique stationary point in (pi/2, pi).
    """
    if ell == 0.0:
        return math.pi, -1.0

    def dU(theta):
        s = math.sin(theta)
        return -ell * ell * math.cos(theta) / s ** 3 - s

    theta_m = _bisect(dU, math.pi / 2.0, math.pi - 1e-9)
    return theta_m, effective_potential(ell, theta_m)


def turning_points(ell: float, energy: float) -> tuple[float, float]:
    """Roots of ``U_ell = energy`` bracketing the potential minimum.

    Degenerate orbits (energy at the minimum) return coincident points;
    energies below the minimum are a domain error.  For ell = 0 the angular
    barrier disappears and the chart boundary takes the place of the
    missing root.
    """
    theta_m, u_min = potential_minimum(ell)
    if energy < u_min - 1e-14:
        raise DomainError(
            f"energy {energy:g} below the effective potential minimum {u_min:g}")
    if energy <= u_min + 1e-14:
        return theta_m, theta_m

    def res(theta):
        return effective_potential(ell, theta) - energy

    if ell == 0.0:
        # no angular barrier: the orbit reaches the poles once energetically able
        lo = math.acos(min(1.0, energy)) if energy < 1.0 else 0.0
        return lo, math.pi

    # left root: walk toward 0 until the potential exceeds the energy
    a = theta_m
    while res(a) < 0:
        a *= 0.5
        if a < 1e-300:
            a = 0.0
            break
    lo = _bisect(res, a, theta_m) if a > 0.0 else 0.0

    # right root: approach pi, where U blows up for ell != 0
    step = math.pi - theta_m
    b = theta_m
    while res(b) < 0:
        step *= 0.5
        b = math.pi - step
        if step < 1e-300:
            b = math.pi
            break
    hi = _bisect(res, theta_m, b) if b < math.pi else math.pi
    return lo, hi


@dataclass(frozen=True)
class ReducedOrbit:
    """A level set of the reduced one-degree-of-freedom pendulum."""

    ell: float
    energy: float
    turning_lo: float
    turning_hi: float

    def __post_init__(self):
        if self.turning_lo > self.turning_hi:
            raise ValidationError("turning points out of order")


def reduced_orbit(ell: float, energy: float) -> ReducedOrbit:
    lo, hi = turning_points(ell, energy)
    return ReducedOrbit(ell, energy, lo, hi)


def pendulum_action(ell: float, energy: float,
                    spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Normalized libration action of the reduced pendulum.

    Equals the fiber volume below the given energy at angular momentum
    ``ell`` in units where the pushforward density is one.  Zero at the
    effective minimum, strictly increasing in the energy.
    """
    lo, hi = turning_points(ell, energy)
    if hi - lo < 1e-13:
        return 0.0

    def integrand(theta):
        return math.sqrt(max(0.0, 2.0 * (energy - effective_potential(ell, theta))))

    sing = QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_depth, "inverse-sqrt")
    return adaptive_quad(integrand, lo, hi, sing) / math.pi


# ---------------------------------------------------------------------------
# Monte Carlo fiber volumes
# ---------------------------------------------------------------------------

_MC_CHUNK = 8192


class McVolume(NamedTuple):
    value: float
    stderr: float
    n_samples: int

    def within(self, expected: float, n_sigma: float = 3.0) -> bool:
        return abs(self.value - expected) <= n_sigma * self.stderr


def mc_fiber_volume(system, x: float, below_y: float, n_samples: int,
                    seed: int, workers: int = 1) -> McVolume:
    """Monte Carlo estimate of the normalized fiber volume below a level.

    ``system`` must provide ``mc_values(x, below_y, rng, m)`` returning ``m``
    per-sample estimator values whose mean is the volume of the part of the
    fiber over ``x`` strictly below ``below_y``.  Samples are drawn in fixed
    chunks with seed substreams spawned from ``seed``, so the estimate is
    reproducible and does not depend on ``workers``.
    """
    if n_samples < 10_000:
        raise ValidationError("mc_fiber_volume needs at least 10^4 samples")
    sizes = [_MC_CHUNK] * (n_samples // _MC_CHUNK)
    if n_samples % _MC_CHUNK:
        sizes.append(n_samples % _MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def one_chunk(i: int):
        rng = np.random.default_rng(seeds[i])
        vals = np.asarray(system.mc_values(x, below_y, rng, sizes[i]), dtype=float)
        return vals.sum(), np.square(vals).sum(), vals.size

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_chunk, range(len(sizes))))
    else:
        parts = [one_chunk(i) for i in range(len(sizes))]

    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean = total / n
    var = max(0.0, total_sq / n - mean * mean)
    return McVolume(mean, math.sqrt(var / n), n)
