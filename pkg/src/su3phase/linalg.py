"""Fixed-size complex linear algebra for three-channel optics.

Matrices follow the output-row x input-column convention: light that
passes element ``E1`` and then ``E2`` sees the total matrix ``E2 @ E1``.
Both value types are immutable; their backing arrays are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NotNormalized, NotUnitary

# Tolerances shared by every module.
CONSTRUCT_TOL = 1e-12
PROPAGATED_TOL = 1e-11

_EYE = np.eye(3, dtype=np.complex128)


def _frozen(values: ArrayLike, shape: tuple[int, ...]) -> NDArray[np.complex128]:
    arr = np.array(values, dtype=np.complex128)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite component")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex 3-vector, one representative of a ray."""

    c: NDArray[np.complex128]

    def __init__(self, components: ArrayLike, tol: float = CONSTRUCT_TOL):
        arr = _frozen(components, (3,))
        norm_sq = float(np.vdot(arr, arr).real)
        if abs(norm_sq - 1.0) > tol:
            raise NotNormalized(f"|psi|^2 = {norm_sq!r}")
        object.__setattr__(self, "c", arr)

    @classmethod
    def normalized(cls, components: ArrayLike) -> StateVector:
        arr = np.asarray(components, dtype=np.complex128)
        return cls(arr / np.linalg.norm(arr))

    @classmethod
    def basis(cls, channel: int) -> StateVector:
        """Unit vector on ``channel`` (1-based)."""
        arr = np.zeros(3, dtype=np.complex128)
        arr[channel - 1] = 1.0
        return cls(arr)

    def __getitem__(self, i: int) -> complex:
        return complex(self.c[i])

    def __iter__(self):
        return (complex(x) for x in self.c)

    def scaled(self, phase: complex) -> StateVector:
        """Same ray, representative multiplied by a unit-modulus scalar."""
        return StateVector(self.c * phase)

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.c, precision=6)})"


@dataclass(frozen=True, eq=False)
class Unitary3:
    """3x3 unitary matrix; ``special=True`` also enforces det = 1."""

    m: NDArray[np.complex128]

    def __init__(self, matrix: ArrayLike, tol: float = CONSTRUCT_TOL, special: bool = False):
        arr = _frozen(matrix, (3, 3))
        err = np.linalg.norm(arr @ arr.conj().T - _EYE)
        if err > tol:
            raise NotUnitary(f"||U U^dag - I||_F = {err:.3e}")
        if special:
            det_err = abs(np.linalg.det(arr) - 1.0)
            if det_err > tol:
                raise NotUnitary(f"|det U - 1| = {det_err:.3e}")
        object.__setattr__(self, "m", arr)

    @classmethod
    def identity(cls) -> Unitary3:
        return cls(_EYE)

    @property
    def dagger(self) -> Unitary3:
        return Unitary3(self.m.conj().T, tol=PROPAGATED_TOL)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    def __matmul__(self, other):
        if isinstance(other, Unitary3):
            return mat_mul(self, other)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def __getitem__(self, idx) -> complex:
        return complex(self.m[idx])

    def distance(self, other: Unitary3) -> float:
        """Frobenius norm of the difference."""
        return float(np.linalg.norm(self.m - other.m))

    def __repr__(self) -> str:
        return f"Unitary3(\n{np.array2string(self.m, precision=6)})"


def mat_mul(a: Unitary3, b: Unitary3) -> Unitary3:
    return Unitary3(a.m @ b.m, tol=PROPAGATED_TOL)


def apply(u: Unitary3, v: StateVector) -> StateVector:
    return StateVector(u.m @ v.c, tol=PROPAGATED_TOL)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    return complex(np.vdot(a.c, b.c))


def random_su3(seed: int) -> Unitary3:
    """Haar-distributed SU(3) matrix, deterministic in ``seed``.

    QR of a complex Ginibre matrix with the R-diagonal phases folded back
    into Q (Mezzadri's recipe), then the determinant divided out.
    """
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    q = q / np.linalg.det(q) ** (1.0 / 3.0)
    return Unitary3(q, special=True)
