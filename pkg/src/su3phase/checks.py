"""Cross-route phase reports and the self-test battery used by ``su3phase selftest``."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .experiment import backward_amplitude, forward_amplitude, port_probabilities
from .geometry import (
    TriangleParams,
    bargmann_phase,
    bloch_solid_angle_phase,
    geodesic_point,
    geometric_phase_closed_form,
    holonomy_phase_discrete,
    phase_distance,
    triangle_vertices,
    wrap_phase,
)
from .linalg import Unitary3, inner, random_su3
from .optics import decompose_su3, geodesic_operator, interferometer_matrix, triangle_sequence

DEFAULT_STEPS = 2000
CONSISTENCY_LIMIT = 1e-6
# The sampled loop is a geodesic polygon, exact up to rounding at every step
# count; below this floor a step-doubling ratio measures only noise.
ROUNDING_FLOOR = 1e-13

PHASE_KEYS = ("phi_closed_form", "phi_bargmann", "phi_holonomy", "phi_interferometer")


def interferometer_phase(params: TriangleParams) -> float:
    """phi_g read from the counter-propagating pair.

    The relative phase gives 2 phi_g; the forward amplitude picks the branch.
    """
    seq = triangle_sequence(triangle_vertices(params))
    a_f, a_b = forward_amplitude(seq), backward_amplitude(seq)
    half = 0.5 * float(np.angle(a_f * np.conj(a_b)))
    other = wrap_phase(half + math.pi)
    fwd = float(np.angle(a_f))
    return half if phase_distance(half, fwd) <= phase_distance(other, fwd) else other


def phase_report(params: TriangleParams, n_steps: int = DEFAULT_STEPS) -> dict:
    t = triangle_vertices(params)
    phases = {
        "phi_closed_form": geometric_phase_closed_form(params),
        "phi_bargmann": bargmann_phase(t),
        "phi_holonomy": holonomy_phase_discrete(t, n_steps),
        "phi_interferometer": interferometer_phase(params),
    }
    worst = max(phase_distance(phases[a], phases[b]) for a, b in itertools.combinations(PHASE_KEYS, 2))
    return {
        "s1_0": params.s1_0,
        "s2_0": params.s2_0,
        "alpha": params.alpha,
        "beta": params.beta,
        **phases,
        "max_abs_discrepancy": worst,
    }


def random_params(rng: np.random.Generator, beta: float | None = None) -> TriangleParams:
    """Random valid parameters kept clear of the degenerate edges."""
    while True:
        p = TriangleParams(
            rng.uniform(0.05, math.pi / 2 - 0.05),
            rng.uniform(0.05, math.pi / 2 - 0.05),
            rng.uniform(0.0, 2 * math.pi),
            rng.uniform(0.0, math.pi) if beta is None else beta,
        )
        try:
            t = triangle_vertices(p)
            geometric_phase_closed_form(p)
        except ValueError:
            continue
        if abs(inner(t.v1, t.v3)) > 1e-3:
            return p


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self, timing: bool = False) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"; {self.seconds:.2f} s" if timing else ""
        return f"[{status}] criterion {self.number}: {self.name} ({self.detail}{extra})"


def _closed_form_vs_angles(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        worst = max(worst, phase_distance(geometric_phase_closed_form(p), triangle_vertices(p).angles.xi))
    return worst < 1e-12, f"max |phi - xi| = {worst:.2e}"


def _oracles(rng) -> tuple[bool, str]:
    w_barg = w_hol = 0.0
    ratio_ok = True
    for i in range(200):
        p = random_params(rng)
        t = triangle_vertices(p)
        phi = geometric_phase_closed_form(p)
        w_barg = max(w_barg, phase_distance(bargmann_phase(t), phi))
        w_hol = max(w_hol, phase_distance(holonomy_phase_discrete(t, DEFAULT_STEPS), phi))
        if i < 20:
            e1 = phase_distance(holonomy_phase_discrete(t, 50), phi)
            e2 = phase_distance(holonomy_phase_discrete(t, 100), phi)
            ratio_ok &= e2 <= e1 / 3 or max(e1, e2) <= ROUNDING_FLOOR
    ok = w_barg < 1e-12 and w_hol < 1e-4 and ratio_ok
    return ok, f"bargmann {w_barg:.2e}, holonomy {w_hol:.2e}, doubling ok={ratio_ok}"


def _closure(rng) -> tuple[bool, str]:
    w_phase = w_port = 0.0
    for _ in range(1000):
        p = random_params(rng)
        seq = triangle_sequence(triangle_vertices(p))
        u = interferometer_matrix(seq)
        w_phase = max(w_phase, phase_distance(float(np.angle(u[0, 0])), geometric_phase_closed_form(p)))
        _, p2, p3 = port_probabilities(seq, 1)
        w_port = max(w_port, p2, p3)
    return w_phase < 1e-10 and w_port < 1e-18, f"phase {w_phase:.2e}, ports 2/3 {w_port:.2e}"


def _geodesic_conditions(rng) -> tuple[bool, str]:
    w_imag = w_curve = w_id = w_end = 0.0
    for _ in range(50):
        t = triangle_vertices(random_params(rng))
        verts = (*t.vertices, t.v1.scaled(inner(t.v1, t.v3) / abs(inner(t.v1, t.v3))))
        for k in (1, 2, 3):
            vk, vnext = verts[k - 1], verts[k]
            s0 = t.side_lengths[k - 1]
            w_id = max(w_id, geodesic_operator(k, 0.0, t).distance(Unitary3.identity()))
            end = geodesic_operator(k, s0, t) @ vk
            w_end = max(w_end, float(np.max(np.abs(end.c - vnext.c))))
            for s in s0 * np.arange(1, 21) / 21:
                u = geodesic_operator(k, float(s), t)
                w_imag = max(w_imag, abs(np.vdot(vk.c, u.m @ vk.c).imag))
                ref = geodesic_point(vk, vnext, float(s))
                w_curve = max(w_curve, float(np.max(np.abs(u.m @ vk.c - ref.c))))
    ok = w_imag < 1e-10 and w_curve < 1e-10 and w_id < 1e-12 and w_end < 1e-12
    return ok, f"imag {w_imag:.2e}, curve {w_curve:.2e}, U(0) {w_id:.2e}, endpoint {w_end:.2e}"


def _dynamical_cancellation(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        p = random_params(rng)
        seq = triangle_sequence(triangle_vertices(p))
        target = 2 * geometric_phase_closed_form(p)
        for _ in range(100):
            dyn = rng.uniform(-math.pi, math.pi, len(seq))
            rel = float(np.angle(forward_amplitude(seq, dyn) * np.conj(backward_amplitude(seq, dyn))))
            worst = max(worst, phase_distance(rel, target))
    return worst < 1e-10, f"max |rel - 2 phi_g| = {worst:.2e}"


def _su2_reduction(rng) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        p = random_params(rng, beta=0.0)
        t = triangle_vertices(p)
        worst = max(worst, phase_distance(bloch_solid_angle_phase(t), geometric_phase_closed_form(p)))
    return worst < 1e-10, f"max |phi + Omega/2| = {worst:.2e}"


def _decomposer(rng) -> tuple[bool, str]:
    worst = 0.0
    for seed in rng.integers(0, 2**63, size=1000):
        u = random_su3(int(seed))
        worst = max(worst, u.distance(interferometer_matrix(decompose_su3(u))))
    return worst < 1e-10, f"max Frobenius error {worst:.2e}"


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "closed form equals extracted xi", _closed_form_vs_angles),
    (2, "Bargmann and discrete holonomy oracles agree", _oracles),
    (3, "nine-element interferometer closes on psi1", _closure),
    (4, "geodesic conditions of U_k(s)", _geodesic_conditions),
    (5, "dynamical phases cancel in counter-propagation", _dynamical_cancellation),
    (6, "two-level triangles give -Omega/2", _su2_reduction),
    (7, "SU(3) decomposer round-trip", _decomposer),
]


def run_selftest(seed: int = 0) -> list[CheckResult]:
    results = []
    for number, name, fn in CRITERIA:
        rng = np.random.default_rng([seed, number])
        t0 = time.perf_counter()
        ok, detail = fn(rng)
        results.append(CheckResult(number, name, bool(ok), detail, time.perf_counter() - t0))
    return results
