"""Geodesic triangles in SU(3)/U(2) and their geometric phase.

The closed-form phase is checked against two routes that share no code
with it: the three-vertex Bargmann invariant and a discretised
Pancharatnam loop built from sampled geodesic points.  For triangles
confined to two levels there is a third check, half the oriented solid
angle on the Bloch sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangle, InvalidOverlap, UndefinedDecomposition, UndefinedPhase
from .linalg import CONSTRUCT_TOL, StateVector, inner

COLLINEAR_TOL = 1e-9
PHASE_MODULUS_TOL = 1e-12


def wrap_phase(phi: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def phase_distance(a: float, b: float) -> float:
    """|a - b| measured on the unit circle."""
    return abs(np.angle(np.exp(1j * (a - b))))


@dataclass(frozen=True)
class TriangleParams:
    s1_0: float
    s2_0: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("s1_0", "s2_0", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise DegenerateTriangle(f"{name} is not finite")
        half_pi = math.pi / 2
        if not 0.0 < self.s1_0 < half_pi:
            raise DegenerateTriangle(f"s1_0={self.s1_0!r} outside (0, pi/2)")
        if not 0.0 < self.s2_0 < half_pi:
            raise DegenerateTriangle(f"s2_0={self.s2_0!r} outside (0, pi/2)")
        if not 0.0 <= self.alpha < 2.0 * math.pi:
            raise DegenerateTriangle(f"alpha={self.alpha!r} outside [0, 2pi)")
        if not 0.0 <= self.beta <= math.pi:
            raise DegenerateTriangle(f"beta={self.beta!r} outside [0, pi]")

    def vertex3(self) -> StateVector:
        c1, s1 = math.cos(self.s1_0), math.sin(self.s1_0)
        c2, s2 = math.cos(self.s2_0), math.sin(self.s2_0)
        ea_cb = np.exp(1j * self.alpha) * math.cos(self.beta)
        return StateVector.normalized(
            [c1 * c2 - ea_cb * s1 * s2, s1 * c2 + ea_cb * c1 * s2, math.sin(self.beta) * s2]
        )


@dataclass(frozen=True)
class Psi3Angles:
    """psi3 = (e^{i xi} cos eta, e^{i(xi+chi)} sin eta cos tau, sin eta sin tau)."""

    xi: float
    eta: float
    tau: float
    chi: float

    def recompose(self) -> StateVector:
        se = math.sin(self.eta)
        return StateVector(
            [
                np.exp(1j * self.xi) * math.cos(self.eta),
                np.exp(1j * (self.xi + self.chi)) * se * math.cos(self.tau),
                se * math.sin(self.tau),
            ]
        )


@dataclass(frozen=True)
class GeodesicTriangle:
    v1: StateVector
    v2: StateVector
    v3: StateVector
    params: TriangleParams
    angles: Psi3Angles

    @property
    def s3_0(self) -> float:
        return self.angles.eta

    @property
    def side_lengths(self) -> tuple[float, float, float]:
        return (self.params.s1_0, self.params.s2_0, self.angles.eta)

    @property
    def vertices(self) -> tuple[StateVector, StateVector, StateVector]:
        return (self.v1, self.v2, self.v3)


def extract_angles(v3: StateVector) -> Psi3Angles:
    c1, c2, c3 = v3
    if abs(c3.imag) > CONSTRUCT_TOL or c3.real < -CONSTRUCT_TOL:
        raise UndefinedDecomposition(f"third component {c3!r} is not real and nonnegative")
    m1 = abs(c1)
    if m1 <= PHASE_MODULUS_TOL:
        raise UndefinedPhase("first component of psi3 vanishes; xi is undefined")
    eta = math.acos(min(m1, 1.0))
    if eta < COLLINEAR_TOL:
        raise UndefinedDecomposition("psi3 is collinear with psi1")
    xi = float(np.angle(c1))
    m2 = abs(c2)
    tau = math.atan2(max(c3.real, 0.0), m2)
    chi = wrap_phase(float(np.angle(c2)) - xi) if m2 > PHASE_MODULUS_TOL else 0.0
    return Psi3Angles(xi=xi, eta=eta, tau=tau, chi=chi)


def triangle_vertices(p: TriangleParams) -> GeodesicTriangle:
    v1 = StateVector.basis(1)
    v2 = StateVector([math.cos(p.s1_0), math.sin(p.s1_0), 0.0])
    v3 = p.vertex3()
    for name, other in (("psi1", v1), ("psi2", v2)):
        if 1.0 - abs(inner(other, v3)) <= COLLINEAR_TOL:
            raise DegenerateTriangle(f"psi3 is collinear with {name}")
    return GeodesicTriangle(v1, v2, v3, p, extract_angles(v3))


def geodesic_point(a: StateVector, b: StateVector, s: float) -> StateVector:
    """Point at arc length ``s`` on the geodesic from ``a`` towards ``b``.

    Requires <b|a> real with value in (0, 1); the representatives must
    already be in the relative gauge that makes it so.
    """
    ov = inner(b, a)
    if abs(ov.imag) >= CONSTRUCT_TOL or not CONSTRUCT_TOL < ov.real < 1.0 - CONSTRUCT_TOL:
        raise InvalidOverlap(f"<b|a> = {ov!r}")
    c = ov.real
    s0 = math.acos(c)
    if not -CONSTRUCT_TOL <= s <= s0 + CONSTRUCT_TOL:
        raise InvalidOverlap(f"s={s!r} outside [0, {s0!r}]")
    perp = (b.c - a.c * c) / math.sqrt(1.0 - c * c)
    return StateVector(a.c * math.cos(s) + perp * math.sin(s), tol=1e-11)


def geometric_phase_closed_form(p: TriangleParams) -> float:
    z = math.cos(p.s1_0) * math.cos(p.s2_0) - np.exp(1j * p.alpha) * math.sin(p.s1_0) * math.sin(
        p.s2_0
    ) * math.cos(p.beta)
    if abs(z) < PHASE_MODULUS_TOL:
        raise UndefinedPhase("psi3 is orthogonal to psi1")
    return float(np.angle(z))


def bargmann_phase(t: GeodesicTriangle) -> float:
    """arg(<v1|v3><v3|v2><v2|v1>); independent of each vertex's gauge."""
    o31, o23, o12 = inner(t.v1, t.v3), inner(t.v3, t.v2), inner(t.v2, t.v1)
    if min(abs(o31), abs(o23), abs(o12)) <= PHASE_MODULUS_TOL:
        raise UndefinedPhase("a pairwise overlap vanishes")
    return float(np.angle(o31 * o23 * o12))


def geodesic_arc(a: StateVector, b: StateVector, n_steps: int) -> np.ndarray:
    """``n_steps + 1`` evenly spaced points from ``a`` to ``b``, one per row.

    Same curve as :func:`geodesic_point`, evaluated in one shot.
    """
    geodesic_point(a, b, 0.0)  # validates the overlap
    c = inner(b, a).real
    s = math.acos(c) * np.arange(n_steps + 1) / n_steps
    perp = (b.c - a.c * c) / math.sqrt(1.0 - c * c)
    return np.outer(np.cos(s), a.c) + np.outer(np.sin(s), perp)


def loop_points(t: GeodesicTriangle, n_steps: int) -> np.ndarray:
    """Sampled closed path v1 -> v2 -> v3 -> (v1 re-gauged), ``n_steps`` per side."""
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    o = inner(t.v1, t.v3)
    if abs(o) <= PHASE_MODULUS_TOL:
        raise UndefinedPhase("psi3 is orthogonal to psi1")
    v1_regauged = t.v1.scaled(o / abs(o))
    return np.vstack(
        [
            geodesic_arc(t.v1, t.v2, n_steps),
            geodesic_arc(t.v2, t.v3, n_steps)[1:],
            geodesic_arc(t.v3, v1_regauged, n_steps)[1:],
        ]
    )


def pancharatnam_loop_phase(points: np.ndarray, start: StateVector) -> float:
    """arg(<start|p_N> prod_j <p_{j+1}|p_j>) for sampled rows ``p_0 .. p_N``."""
    ov = np.einsum("ij,ij->i", points[1:].conj(), points[:-1])
    mod = np.abs(ov)
    if np.any(mod <= PHASE_MODULUS_TOL):
        raise InvalidOverlap("consecutive samples are orthogonal")
    closing = np.vdot(start.c, points[-1])
    return float(np.angle(closing * np.prod(ov / mod)))


def holonomy_phase_discrete(t: GeodesicTriangle, n_steps: int) -> float:
    return pancharatnam_loop_phase(loop_points(t, n_steps), t.v1)


# --- two-level (Bloch sphere) oracle -------------------------------------


def bloch_vector(v: StateVector) -> np.ndarray:
    """Bloch vector of the channel-1/2 part of ``v``; channel 3 must be empty."""
    a, b, c = v
    if abs(c) > CONSTRUCT_TOL:
        raise ValueError("state has weight on channel 3")
    ab = a.conjugate() * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def spherical_excess(n1: np.ndarray, n2: np.ndarray, n3: np.ndarray) -> float:
    """Unsigned area of the spherical triangle with unit-vector vertices (L'Huilier)."""

    def arc(u, v):
        return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))

    a, b, c = arc(n2, n3), arc(n1, n3), arc(n1, n2)
    s = 0.5 * (a + b + c)
    prod = (
        math.tan(0.5 * s)
        * math.tan(0.5 * (s - a))
        * math.tan(0.5 * (s - b))
        * math.tan(0.5 * (s - c))
    )
    return 4.0 * math.atan(math.sqrt(max(prod, 0.0)))


def oriented_solid_angle(n1: np.ndarray, n2: np.ndarray, n3: np.ndarray) -> float:
    """Spherical excess signed by the orientation n1 . (n2 x n3)."""
    sign = 1.0 if float(np.dot(n1, np.cross(n2, n3))) >= 0.0 else -1.0
    return sign * spherical_excess(n1, n2, n3)


def bloch_solid_angle_phase(t: GeodesicTriangle) -> float:
    """-Omega/2 for a triangle lying in the channel-1/2 subspace."""
    n1, n2, n3 = (bloch_vector(v) for v in t.vertices)
    return wrap_phase(-0.5 * oriented_solid_angle(n1, n2, n3))
