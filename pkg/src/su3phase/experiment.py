"""Counter-propagating readout of the geometric phase.

One beam runs through the element sequence forwards, the other backwards.
Every element adds the same dynamical (path-length) phase to both beams,
so mixing the two at a 50/50 splitter leaves a fringe that depends only
on twice the geometric phase.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .errors import IllConditionedFit, NotCyclic
from .geometry import wrap_phase
from .optics import ElementSequence, interferometer_matrix

CYCLIC_TOL = 1e-9

# "adjoint": each element runs backwards as its Hermitian adjoint (gives -phi_g).
# "transpose": reciprocity convention, E^T (gives +phi_g, so no fringe shift).
BackwardConvention = Literal["adjoint", "transpose"]


@dataclass(frozen=True)
class FringeRecord:
    delta: float
    p_plus: float
    p_minus: float


@dataclass(frozen=True)
class CountRecord:
    delta: float
    n_plus: int
    n_minus: int

    @property
    def n_total(self) -> int:
        return self.n_plus + self.n_minus


Record = Union[FringeRecord, CountRecord]


@dataclass(frozen=True)
class PhaseEstimate:
    phase: float
    std_error: float
    visibility: float


def _check_phases(seq: ElementSequence, dyn: Sequence[float] | None) -> np.ndarray:
    if dyn is None:
        return np.zeros(len(seq))
    arr = np.asarray(dyn, dtype=float)
    if arr.shape != (len(seq),):
        raise ValueError(f"need one dynamical phase per element ({len(seq)}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("dynamical phases must be finite")
    return arr


def _check_cyclic(amp: complex) -> complex:
    if abs(amp) <= 1.0 - CYCLIC_TOL:
        raise NotCyclic(f"|U_11| = {abs(amp):.12g}; the output ray is not the input ray")
    return amp


def forward_amplitude(seq: ElementSequence, dyn: Sequence[float] | None = None) -> complex:
    """Amplitude from 1_in to 1_out."""
    phases = _check_phases(seq, dyn)
    total = np.eye(3, dtype=np.complex128)
    for e, d in zip(seq, phases):
        total = np.exp(1j * d) * e.matrix().m @ total
    return _check_cyclic(complex(total[0, 0]))


def backward_amplitude(
    seq: ElementSequence,
    dyn: Sequence[float] | None = None,
    convention: BackwardConvention = "adjoint",
) -> complex:
    """Amplitude from 1_out back to 1_in, meeting the elements in reverse."""
    phases = _check_phases(seq, dyn)
    total = np.eye(3, dtype=np.complex128)
    for e, d in zip(reversed(seq.elements), phases[::-1]):
        m = e.matrix().m
        back = m.conj().T if convention == "adjoint" else m.T
        total = np.exp(1j * d) * back @ total
    return _check_cyclic(complex(total[0, 0]))


def _mix(a_fwd: complex, a_bwd: complex, delta: float) -> FringeRecord:
    # Source split 1/sqrt2 each way; the reference phase sits in the forward arm.
    plus = (a_fwd * np.exp(1j * delta) + a_bwd) / 2.0
    minus = (a_fwd * np.exp(1j * delta) - a_bwd) / 2.0
    return FringeRecord(float(delta), float(abs(plus) ** 2), float(abs(minus) ** 2))


def fringe(
    seq: ElementSequence,
    dyn: Sequence[float] | None,
    deltas: Sequence[float],
    convention: BackwardConvention = "adjoint",
) -> list[FringeRecord]:
    a_f = forward_amplitude(seq, dyn)
    a_b = backward_amplitude(seq, dyn, convention)
    return [_mix(a_f, a_b, d) for d in deltas]


def port_probabilities(seq: ElementSequence, input_port: int = 1) -> tuple[float, float, float]:
    if input_port not in (1, 2, 3):
        raise ValueError(f"input_port must be 1, 2 or 3, got {input_port!r}")
    col = interferometer_matrix(seq).m[:, input_port - 1]
    p = np.abs(col) ** 2
    return (float(p[0]), float(p[1]), float(p[2]))


def low_light_counts(
    seq: ElementSequence,
    dyn: Sequence[float] | None,
    deltas: Sequence[float],
    photons_per_setting: int,
    seed: int,
    convention: BackwardConvention = "adjoint",
) -> list[CountRecord]:
    """Single photons, one at a time: n_plus ~ Binomial(N, p_plus(delta))."""
    if photons_per_setting < 1:
        raise ValueError("photons_per_setting must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for rec in fringe(seq, dyn, deltas, convention):
        p = min(max(rec.p_plus, 0.0), 1.0)
        n_plus = int(rng.binomial(photons_per_setting, p))
        out.append(CountRecord(rec.delta, n_plus, photons_per_setting - n_plus))
    return out


def estimate_phase(records: Sequence[Record]) -> PhaseEstimate:
    """Least-squares fit of p_plus = (1 + V cos(delta + phi)) / 2.

    Linear in (V cos phi, -V sin phi).  Count data use the binomial
    variance of the fitted model for the standard error; noiseless
    fringes use the residual variance.
    """
    if not records:
        raise IllConditionedFit("no records")
    deltas = np.array([r.delta for r in records], dtype=float)
    distinct = np.unique(np.round(np.mod(deltas, 2 * math.pi), 12))
    if len(distinct) < 3:
        raise IllConditionedFit(f"need at least 3 distinct settings, got {len(distinct)}")
    if np.ptp(deltas) < math.pi:
        raise IllConditionedFit("settings span less than pi")

    counts = isinstance(records[0], CountRecord)
    if any(isinstance(r, CountRecord) != counts for r in records):
        raise ValueError("cannot mix count and probability records")
    if counts:
        n = np.array([r.n_total for r in records], dtype=float)
        p = np.array([r.n_plus for r in records], dtype=float) / n
    else:
        p = np.array([r.p_plus for r in records], dtype=float)
    x = np.column_stack([np.cos(deltas), np.sin(deltas)])
    y = 2.0 * p - 1.0
    xtx = x.T @ x
    if np.linalg.cond(xtx) > 1e8:
        raise IllConditionedFit("settings nearly collinear in (cos delta, sin delta)")
    xtx_inv = np.linalg.inv(xtx)
    a, b = xtx_inv @ x.T @ y
    vis = math.hypot(a, b)
    if vis < 1e-12:
        raise IllConditionedFit("no fringe: visibility below 1e-12, phase undefined")

    if counts:
        p_model = np.clip(0.5 * (1.0 + x @ np.array([a, b])), 0.0, 1.0)
        var_y = 4.0 * p_model * (1.0 - p_model) / n
        cov = xtx_inv @ (x.T * var_y) @ x @ xtx_inv
    else:
        resid = y - x @ np.array([a, b])
        dof = max(len(y) - 2, 1)
        cov = xtx_inv * float(resid @ resid) / dof
    grad = np.array([b, -a]) / vis**2
    std = math.sqrt(max(float(grad @ cov @ grad), 0.0))
    return PhaseEstimate(wrap_phase(math.atan2(-b, a)), std, vis)


# --- serialisation ----------------------------------------------------------

SCHEMA = "su3phase.fringe/1"


def fmt(x: float) -> str:
    return f"{x:.12g}"


def round12(obj):
    """Round every float in a JSON-able structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def _row(r: Record) -> list[str]:
    if isinstance(r, CountRecord):
        return [fmt(r.delta), str(r.n_plus), str(r.n_minus)]
    return [fmt(r.delta), fmt(r.p_plus), fmt(r.p_minus)]


def records_to_csv(records: Sequence[Record], fit: PhaseEstimate | None = None) -> str:
    """CSV with header ``delta_rad,p_plus,p_minus`` (or n_plus/n_minus).

    A fit, when given, is appended as a ``# fit`` comment line.
    """
    counts = bool(records) and isinstance(records[0], CountRecord)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta_rad", "n_plus", "n_minus"] if counts else ["delta_rad", "p_plus", "p_minus"])
    for r in records:
        w.writerow(_row(r))
    if fit is not None:
        buf.write(
            f"# fit,phase_rad={fmt(fit.phase)},std_error_rad={fmt(fit.std_error)},"
            f"visibility={fmt(fit.visibility)}\n"
        )
    return buf.getvalue()


def records_to_json(records: Sequence[Record], fit: PhaseEstimate | None = None, **meta) -> str:
    counts = bool(records) and isinstance(records[0], CountRecord)
    doc = {
        "schema": SCHEMA,
        "kind": "counts" if counts else "fringe",
        **meta,
        "records": [asdict(r) for r in records],
        "fit": None if fit is None else asdict(fit),
    }
    return json.dumps(round12(doc), indent=2)


def records_from_json(text: str) -> list[Record]:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unknown schema {doc.get('schema')!r}")
    cls = CountRecord if doc["kind"] == "counts" else FringeRecord
    return [cls(**r) for r in doc["records"]]
