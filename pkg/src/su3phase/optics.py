"""Two-channel optical elements and the geodesic-triangle interferometer.

An :class:`ElementSequence` lists elements in the order forward light meets
them, so its total matrix is ``E_n @ ... @ E_2 @ E_1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import OutOfRange
from .geometry import GeodesicTriangle, wrap_phase
from .linalg import CONSTRUCT_TOL, PROPAGATED_TOL, Unitary3

RESIDUAL_PHASE_TOL = 1e-12


class Kind(str, Enum):
    BS12 = "BS12"
    BS23 = "BS23"
    PHASE = "Phase"


CHANNELS = {Kind.BS12: (1, 2), Kind.BS23: (2, 3), Kind.PHASE: (1, 2, 3)}


@dataclass(frozen=True)
class BsParams:
    """Generalised beam splitter: cos^2(theta) is the transmission.

    Construction canonicalises theta into [0, pi/2] and the phases into
    (-pi, pi]; the matrix is unchanged by this.
    """

    phi_t: float
    theta: float
    phi_r: float

    def __post_init__(self):
        phi_t, theta, phi_r = self.phi_t, self.theta, self.phi_r
        if not all(math.isfinite(x) for x in (phi_t, theta, phi_r)):
            raise ValueError("beam splitter parameters must be finite")
        theta = math.remainder(theta, 2.0 * math.pi)
        if theta < 0.0:
            theta, phi_r = -theta, phi_r + math.pi
        if theta > math.pi / 2:
            theta, phi_t = math.pi - theta, phi_t + math.pi
        object.__setattr__(self, "phi_t", wrap_phase(phi_t))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi_r", wrap_phase(phi_r))

    def block(self) -> np.ndarray:
        ct, st = math.cos(self.theta), math.sin(self.theta)
        et, er = np.exp(1j * self.phi_t), np.exp(1j * self.phi_r)
        return np.array([[et * ct, -st / er], [er * st, ct / et]])

    def inverse(self) -> BsParams:
        return BsParams(-self.phi_t, -self.theta, self.phi_r)

    @classmethod
    def from_block(cls, block: np.ndarray) -> BsParams:
        """Parameters of a 2x2 SU(2) block ``[[a, -conj(b)], [b, conj(a)]]``."""
        a, b = complex(block[0, 0]), complex(block[1, 0])
        return cls(float(np.angle(a)), math.atan2(abs(b), abs(a)), float(np.angle(b)))


def _embed(block: np.ndarray, channels: tuple[int, int]) -> np.ndarray:
    m = np.eye(3, dtype=np.complex128)
    i, j = channels[0] - 1, channels[1] - 1
    m[np.ix_([i, j], [i, j])] = block
    return m


def r12(s: float) -> Unitary3:
    """Real rotation mixing channels 1 and 2."""
    c, sn = math.cos(s), math.sin(s)
    return Unitary3([[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]], special=True)


def r23(p: BsParams) -> Unitary3:
    return Unitary3(_embed(p.block(), (2, 3)), special=True)


def bs12(p: BsParams) -> Unitary3:
    """The R23 form transplanted to channels 1 and 2; ``bs12((0, s, 0)) == r12(s)``."""
    return Unitary3(_embed(p.block(), (1, 2)), special=True)


@dataclass(frozen=True)
class Element:
    kind: Kind
    bs: BsParams | None = None
    deltas: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind is Kind.PHASE:
            if self.deltas is None or len(self.deltas) != 3:
                raise ValueError("a Phase element needs three deltas")
            if abs(math.remainder(sum(self.deltas), 2 * math.pi)) > CONSTRUCT_TOL:
                raise ValueError(f"Phase deltas must sum to 0 mod 2pi, got {self.deltas}")
        elif self.bs is None:
            raise ValueError(f"{self.kind.value} element needs BsParams")

    @classmethod
    def bs_12(cls, phi_t: float, theta: float, phi_r: float) -> Element:
        return cls(Kind.BS12, bs=BsParams(phi_t, theta, phi_r))

    @classmethod
    def bs_23(cls, phi_t: float, theta: float, phi_r: float) -> Element:
        return cls(Kind.BS23, bs=BsParams(phi_t, theta, phi_r))

    @classmethod
    def rotation(cls, s: float) -> Element:
        return cls.bs_12(0.0, s, 0.0)

    @classmethod
    def phase(cls, deltas: Sequence[float]) -> Element:
        return cls(Kind.PHASE, deltas=tuple(float(d) for d in deltas))

    @property
    def channels(self) -> tuple[int, ...]:
        return CHANNELS[self.kind]

    def matrix(self) -> Unitary3:
        if self.kind is Kind.BS12:
            return bs12(self.bs)
        if self.kind is Kind.BS23:
            return r23(self.bs)
        return Unitary3(np.diag(np.exp(1j * np.asarray(self.deltas))), special=True)

    def inverse(self) -> Element:
        if self.kind is Kind.PHASE:
            return Element.phase([-d for d in self.deltas])
        return Element(self.kind, bs=self.bs.inverse())

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "channels": list(self.channels)}
        if self.kind is Kind.PHASE:
            d["deltas"] = list(self.deltas)
        else:
            d.update(phi_t=self.bs.phi_t, theta=self.bs.theta, phi_r=self.bs.phi_r)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Element:
        kind = Kind(d["kind"])
        if "channels" in d and tuple(d["channels"]) != CHANNELS[kind]:
            raise ValueError(f"{kind.value} acts on channels {CHANNELS[kind]}, got {d['channels']}")
        if kind is Kind.PHASE:
            return cls.phase(d["deltas"])
        return cls(kind, bs=BsParams(d["phi_t"], d["theta"], d["phi_r"]))


@dataclass(frozen=True)
class ElementSequence:
    elements: tuple[Element, ...] = ()
    label: str = ""

    def __init__(self, elements: Iterable[Element] = (), label: str = ""):
        object.__setattr__(self, "elements", tuple(elements))
        object.__setattr__(self, "label", label)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __add__(self, other: ElementSequence) -> ElementSequence:
        label = "+".join(x for x in (self.label, other.label) if x)
        return ElementSequence(self.elements + other.elements, label)

    def inverse(self) -> ElementSequence:
        """Sequence undoing this one: inverted elements in reverse order."""
        return ElementSequence([e.inverse() for e in reversed(self.elements)], f"inverse({self.label})")

    def to_dict(self) -> dict:
        return {"label": self.label, "elements": [e.to_dict() for e in self.elements]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> ElementSequence:
        return cls([Element.from_dict(e) for e in d["elements"]], d.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> ElementSequence:
        return cls.from_dict(json.loads(text))


def interferometer_matrix(seq: ElementSequence) -> Unitary3:
    total = np.eye(3, dtype=np.complex128)
    for e in seq:
        total = e.matrix().m @ total
    return Unitary3(total, tol=PROPAGATED_TOL, special=True)


# --- geodesic evolution operators -----------------------------------------


def _side_length(k: int, t: GeodesicTriangle) -> float:
    if k not in (1, 2, 3):
        raise ValueError(f"side index must be 1, 2 or 3, got {k!r}")
    return t.side_lengths[k - 1]


def _check_s(k: int, s: float, t: GeodesicTriangle) -> None:
    s0 = _side_length(k, t)
    if not 0.0 <= s <= s0:
        raise OutOfRange(f"s={s!r} outside [0, s{k}_0={s0!r}]")


def omega1(t: GeodesicTriangle) -> BsParams:
    return BsParams(t.params.alpha, t.params.beta, 0.0)


def omega2(t: GeodesicTriangle) -> BsParams:
    a = t.angles
    return BsParams(a.chi, a.tau, -a.xi)


def geodesic_operator(k: int, s: float, t: GeodesicTriangle) -> Unitary3:
    """U_k(s), built as the explicit V R_s V^-1 matrix product."""
    _check_s(k, s, t)
    if k == 1:
        return r12(s)
    if k == 2:
        s1 = t.params.s1_0
        w = r23(omega1(t))
        return r12(s1) @ w @ r12(s) @ w.dagger @ r12(-s1)
    w = r23(omega2(t))
    return w @ r12(-s) @ w.dagger


def element_sequence_for(k: int, s: float, t: GeodesicTriangle) -> ElementSequence:
    """Elements realising U_k(s), in propagation order (1, 5 and 3 elements)."""
    _check_s(k, s, t)
    if k == 1:
        return ElementSequence([Element.rotation(s)], label=f"U1({s:.12g})")
    if k == 2:
        s1 = t.params.s1_0
        w = Element(Kind.BS23, bs=omega1(t))
        elems = [Element.rotation(-s1), w.inverse(), Element.rotation(s), w, Element.rotation(s1)]
        return ElementSequence(elems, label=f"U2({s:.12g})")
    w = Element(Kind.BS23, bs=omega2(t))
    return ElementSequence([w.inverse(), Element.rotation(-s), w], label=f"U3({s:.12g})")


def triangle_sequence(t: GeodesicTriangle) -> ElementSequence:
    """The nine-element interferometer carrying psi1 once around the triangle."""
    s1, s2, s3 = t.side_lengths
    seq = element_sequence_for(1, s1, t) + element_sequence_for(2, s2, t) + element_sequence_for(3, s3, t)
    p = t.params
    label = f"triangle(s1_0={p.s1_0:.12g}, s2_0={p.s2_0:.12g}, alpha={p.alpha:.12g}, beta={p.beta:.12g})"
    return ElementSequence(seq.elements, label)


def partial_sequence(t: GeodesicTriangle, k: int, s: float) -> ElementSequence:
    """Full sides 1..k-1 followed by side ``k`` up to parameter ``s``."""
    sides = t.side_lengths
    seq = ElementSequence()
    for j in range(1, k):
        seq = seq + element_sequence_for(j, sides[j - 1], t)
    return seq + element_sequence_for(k, s, t)


# --- general SU(3) factorisation -------------------------------------------


def _su2_block_params(m: np.ndarray, i: int, j: int) -> BsParams:
    return BsParams.from_block(m[np.ix_([i, j], [i, j])])


def decompose_su3(u: Unitary3) -> ElementSequence:
    """Factor ``u`` as BS23, then BS12, then BS23 (propagation order).

    Left-multiplying ``u`` by a 2-3 rotation clears entry (3,1) and a 1-2
    rotation then sends column 1 to e1; the remaining 2-3 block is what
    the first element must undo.  A diagonal Phase element absorbs any
    leftover phases larger than ``RESIDUAL_PHASE_TOL``.
    """
    m = np.array(u.m)
    x, y = m[1, 0], m[2, 0]
    r = math.hypot(abs(x), abs(y))
    g23 = np.eye(3, dtype=np.complex128)
    if r > 0.0:
        g23[1:, 1:] = np.array([[np.conj(x), np.conj(y)], [-y, x]]) / r
    m = g23 @ m
    a = m[0, 0]
    g12 = np.eye(3, dtype=np.complex128)
    g12[:2, :2] = [[np.conj(a), r], [-r, a]]
    m = g12 @ m
    first = _su2_block_params(m, 1, 2)
    second = _su2_block_params(g12.conj().T, 0, 1)
    third = _su2_block_params(g23.conj().T, 1, 2)
    elems = [Element(Kind.BS23, bs=first), Element(Kind.BS12, bs=second), Element(Kind.BS23, bs=third)]

    built = interferometer_matrix(ElementSequence(elems)).m
    residual = np.angle(np.diagonal(u.m @ built.conj().T))
    if np.max(np.abs(residual)) > RESIDUAL_PHASE_TOL:
        d1, d2 = float(residual[0]), float(residual[1])
        elems.append(Element.phase([d1, d2, -(d1 + d2)]))
    return ElementSequence(elems, label="decompose_su3")
