"""Dense complex Hermitian linear algebra primitives.

Every operator handled by this package is a square complex matrix equal to
its conjugate transpose: density matrices, measurement elements, and
Lagrange multipliers alike. The constructors here validate that property
once and return read-only arrays, so downstream spectral routines always
work in the real-eigenvalue regime and values can be shared freely across
threads.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Asymmetry above this is a genuine error, below it is round-off.
HERMITICITY_ATOL = 1e-12
# Eigenvalues above this floor count as nonnegative; separates real
# negativity from round-off at dimensions up to a few dozen.
PSD_EIGENVALUE_FLOOR = -1e-10
# Relative spectral cutoff for the pseudoinverse.
DEFAULT_PINV_CUTOFF = 1e-12
TRACE_IMAG_ATOL = 1e-10


class HermiticityError(ValueError):
    """Input matrix is further from Hermitian than the tolerance allows."""


class NotPositiveSemidefiniteError(ValueError):
    """Operator has an eigenvalue below the PSD floor."""


class EigenDecomposition(NamedTuple):
    """Spectral decomposition A = V diag(w) V† with w real ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def frozen(a: np.ndarray) -> np.ndarray:
    """Mark an array read-only and return it."""
    a.setflags(write=False)
    return a


def hermitian(a, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Validate Hermiticity and return the symmetrized read-only matrix.

    The matrix must be square with max|A - A†| <= atol; the returned value
    is (A + A†)/2, which removes the round-off asymmetry.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("dimension must be at least 1")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > atol:
        raise HermiticityError(
            f"matrix is not Hermitian: max|A - A†| = {asym:.3e} exceeds {atol:.3e}"
        )
    return frozen((m + m.conj().T) / 2.0)


def eig_hermitian(a) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = hermitian(a)
    w, v = np.linalg.eigh(m)
    return EigenDecomposition(frozen(w), frozen(v))


def sqrt_psd(a) -> np.ndarray:
    """Unique PSD square root of a positive semidefinite matrix.

    Eigenvalues within the PSD floor of zero are clamped to zero; anything
    below the floor raises :class:`NotPositiveSemidefiniteError`.
    """
    w, v = eig_hermitian(a)
    if w[0] < PSD_EIGENVALUE_FLOOR:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {w[0]:.3e} is below the PSD floor {PSD_EIGENVALUE_FLOOR:.0e}"
        )
    s = np.sqrt(np.clip(w, 0.0, None))
    b = (v * s) @ v.conj().T
    return frozen((b + b.conj().T) / 2.0)


def pinv_psd(a, cutoff: float = DEFAULT_PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD matrix with a relative cutoff.

    Eigenvalues above cutoff * max_eigenvalue are inverted, the rest are
    zeroed. The zero matrix maps to the zero matrix.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be strictly positive")
    w, v = eig_hermitian(a)
    if w[0] < PSD_EIGENVALUE_FLOOR:
        raise NotPositiveSemidefiniteError(
            f"smallest eigenvalue {w[0]:.3e} is below the PSD floor {PSD_EIGENVALUE_FLOOR:.0e}"
        )
    w = np.clip(w, 0.0, None)
    wmax = w[-1]
    if wmax == 0.0:
        return frozen(np.zeros_like(np.asarray(a, dtype=np.complex128)))
    inv = np.where(w > cutoff * wmax, 1.0 / np.where(w > 0, w, 1.0), 0.0)
    b = (v * inv) @ v.conj().T
    return frozen((b + b.conj().T) / 2.0)


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    m = hermitian(a)
    return float(np.linalg.eigvalsh(m)[0])


def trace_product(a, b) -> float:
    """Re Tr[A B] for Hermitian A, B of equal dimension.

    The imaginary part of the trace is mathematically zero and is asserted
    to stay below round-off scale.
    """
    am = hermitian(a)
    bm = hermitian(b)
    if am.shape != bm.shape:
        raise ValueError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    t = complex(np.trace(am @ bm))
    if abs(t.imag) > TRACE_IMAG_ATOL:
        raise ValueError(f"trace of the product has imaginary part {t.imag:.3e}")
    return float(t.real)
