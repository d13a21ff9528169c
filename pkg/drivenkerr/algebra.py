"""
Dense linear-algebra substrate: truncated bosonic operators, tensor embedding and
Hermitian eigendecomposition.

Operators are plain complex ``numpy.ndarray`` matrices. Tensor products follow the
canonical slot ordering [transmon, cavity-a, cavity-b].
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import TOLERANCES
from .errors import InvalidDimensionError, NonHermitianError

logger = logging.getLogger("drivenkerr.algebra")

Operator = np.ndarray


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and the unitary matrix of column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)

    def reconstruct(self) -> Operator:
        return (self.vectors * self.values) @ self.vectors.conj().T


def ladder(dim: int) -> Tuple[Operator, Operator]:
    """
    Truncated annihilation and creation operators.

    Args:
        dim: Number of Fock levels kept

    Returns:
        Tuple of (lowering, raising) with lowering[m-1, m] = sqrt(m)
    """
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"ladder operators need dim >= 2, got {dim}")
    lowering = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    return lowering, lowering.conj().T


def number(dim: int) -> Operator:
    """Number operator diag(0, 1, ..., dim-1)."""
    if dim < 1:
        raise InvalidDimensionError(f"number operator needs dim >= 1, got {dim}")
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def embed(op: Operator, slot: int, dims: Sequence[int]) -> Operator:
    """
    Embed a single-mode operator into a tensor-product space.

    Args:
        op: Operator acting on one mode
        slot: Index of that mode in ``dims``
        dims: Dimensions of all modes in canonical order

    Returns:
        The operator tensored with identities on every other slot
    """
    dims = [int(d) for d in dims]
    if not 0 <= slot < len(dims):
        raise InvalidDimensionError(f"slot {slot} out of range for dims {dims}")
    op = np.asarray(op)
    if op.shape != (dims[slot], dims[slot]):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match dims[{slot}] = {dims[slot]}"
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op.astype(complex)
    return reduce(np.kron, factors)


def product_index(indices: Sequence[int], dims: Sequence[int]) -> int:
    """Flat index of a product basis state (row-major over canonical slots)."""
    return int(np.ravel_multi_index(tuple(indices), tuple(dims)))


def product_labels(dims: Sequence[int]) -> List[Tuple[int, ...]]:
    """All product-basis labels in flat order."""
    return [tuple(int(i) for i in idx) for idx in np.ndindex(*dims)]


def hermiticity_error(H: Operator) -> float:
    """Largest absolute entry of H - H^dagger."""
    H = np.asarray(H)
    return float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0


def is_hermitian(H: Operator, rtol: float = TOLERANCES['HERMITICITY']) -> bool:
    scale = float(np.max(np.abs(H))) if np.size(H) else 0.0
    return hermiticity_error(H) <= rtol * max(scale, 1.0)


def eigh(H: Operator, rtol: float = TOLERANCES['HERMITICITY']) -> EigenSystem:
    """
    Hermitian eigendecomposition with ascending eigenvalues.

    The matrix is symmetrized as (H + H^dagger)/2 before solving.

    Raises:
        NonHermitianError: If the asymmetry exceeds ``rtol`` relative to max(1, |H|_max)
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidDimensionError(f"eigh needs a square matrix, got shape {H.shape}")
    scale = float(np.max(np.abs(H))) if H.size else 0.0
    asymmetry = hermiticity_error(H)
    if asymmetry > rtol * max(scale, 1.0):
        raise NonHermitianError(asymmetry, scale)
    values, vectors = scipy.linalg.eigh(0.5 * (H + H.conj().T))
    return EigenSystem(values=np.asarray(values, dtype=float), vectors=vectors)


def commutator(A: Operator, B: Operator) -> Operator:
    return A @ B - B @ A
