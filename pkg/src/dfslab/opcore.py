"""Dense operator core: matrices, subspace bases, and the small set of
linear-algebra primitives everything else is built from.

Conventions used throughout the package:

* operators are square complex matrices acting on a Hilbert space of
  dimension ``dim``;
* tensor products are Kronecker products with the first factor varying
  slowest, matching the row-major reshape of composite indices;
* kernels and commutants are computed from singular value decompositions
  with a relative cutoff, never from exact rank decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DomainError, ShapeError, UsageError

# Default dimension budget for explicit dense constructions.
DIM_BUDGET = 4096

# Default tolerances; individual operations take overrides where useful.
HERMITICITY_TOL = 1e-10
KERNEL_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-10
UNITARITY_TOL = 1e-12

VECTOR_SPACE = "vector-space"
OPERATOR_SPACE = "operator-space"


def _square_complex(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise DomainError("matrix entries must be finite")
    return arr


@dataclass(frozen=True)
class Operator:
    """A square complex matrix on a ``dim``-dimensional Hilbert space."""

    mat: np.ndarray

    def __post_init__(self):
        arr = _square_complex(self.mat)
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @staticmethod
    def identity(dim: int) -> "Operator":
        return Operator(np.eye(dim))

    @staticmethod
    def zeros(dim: int) -> "Operator":
        return Operator(np.zeros((dim, dim)))

    def dag(self) -> "Operator":
        return Operator(self.mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        scale = max(1.0, float(np.abs(self.mat).max(initial=0.0)))
        return float(np.abs(self.mat - self.mat.conj().T).max(initial=0.0)) <= tol * scale

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.mat + _same_dim(self, other).mat)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.mat - _same_dim(self, other).mat)

    def __neg__(self) -> "Operator":
        return Operator(-self.mat)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.mat @ _same_dim(self, other).mat)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.mat * complex(scalar))

    __rmul__ = __mul__


def _same_dim(a: Operator, b: Operator) -> Operator:
    if not isinstance(b, Operator):
        raise UsageError(f"expected an Operator, got {type(b).__name__}")
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return b


@dataclass(frozen=True)
class SubspaceBasis:
    """An orthonormal family spanning a subspace of C^ambient_dim.

    ``kind`` records whether rows are Hilbert-space vectors or vectorized
    operators (row-major vec of a dim x dim matrix, ambient_dim = dim**2,
    orthonormal in the Hilbert-Schmidt inner product).
    """

    ambient_dim: int
    vectors: np.ndarray
    kind: str = VECTOR_SPACE

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.complex128)
        if arr.ndim != 2:
            arr = arr.reshape(-1, self.ambient_dim) if arr.size else arr.reshape(0, self.ambient_dim)
        if arr.shape[1] != self.ambient_dim:
            raise ShapeError(
                f"basis rows have length {arr.shape[1]}, ambient dimension is {self.ambient_dim}"
            )
        if self.kind not in (VECTOR_SPACE, OPERATOR_SPACE):
            raise UsageError(f"unknown basis kind {self.kind!r}")
        if self.kind == OPERATOR_SPACE:
            side = int(round(self.ambient_dim ** 0.5))
            if side * side != self.ambient_dim:
                raise ShapeError("operator-space basis needs a square ambient dimension")
        if arr.shape[0]:
            gram = arr @ arr.conj().T
            if float(np.abs(gram - np.eye(arr.shape[0])).max()) > ORTHONORMALITY_TOL:
                raise DomainError("basis rows are not orthonormal")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def projector(self) -> Operator:
        """Orthogonal projector onto the span (vector-space kind only)."""
        if self.kind != VECTOR_SPACE:
            raise UsageError("projector() is defined for vector-space bases")
        return Operator(self.vectors.conj().T @ self.vectors)

    def matrices(self) -> list[Operator]:
        """The basis as dim x dim matrices (operator-space kind only)."""
        if self.kind != OPERATOR_SPACE:
            raise UsageError("matrices() is defined for operator-space bases")
        side = int(round(self.ambient_dim ** 0.5))
        return [Operator(row.reshape(side, side)) for row in self.vectors]

    def residual(self, element) -> float:
        """Distance from ``element`` (vector or matrix) to the span."""
        v = np.asarray(element, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.ambient_dim:
            raise ShapeError("element does not live in the ambient space")
        coeffs = self.vectors.conj() @ v
        return float(np.linalg.norm(v - self.vectors.T @ coeffs))


def tensor(a: Operator, b: Operator, budget: int | None = None) -> Operator:
    """Kronecker product with the first factor varying slowest."""
    cap = DIM_BUDGET if budget is None else int(budget)
    out_dim = a.dim * b.dim
    if out_dim > cap:
        raise BudgetError(f"tensor product dimension {out_dim} exceeds budget {cap}")
    return Operator(np.kron(a.mat, b.mat))


def commutator(a: Operator, b: Operator) -> Operator:
    return Operator(a.mat @ _same_dim(a, b).mat - b.mat @ a.mat)


def operator_norm(a: Operator) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(a.mat, 2))


def eig_hermitian(a: Operator, tol: float = HERMITICITY_TOL) -> tuple[np.ndarray, SubspaceBasis]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian operator.

    Eigenvector phases are fixed by making the first component of largest
    modulus real and positive, so repeated calls agree on one build.
    """
    if not a.is_hermitian(tol):
        raise DomainError("operator is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(a.mat)
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if np.abs(pivot) > 0:
            vecs[:, k] = col * (np.abs(pivot) / pivot)
    recon = (vecs * vals) @ vecs.conj().T
    scale = max(1.0, float(np.abs(a.mat).max()))
    if float(np.abs(recon - a.mat).max()) > 1e-10 * scale:
        raise DomainError("eigendecomposition failed to reconstruct the operator")
    return vals, SubspaceBasis(a.dim, vecs.T, VECTOR_SPACE)


def nullspace(mat: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    """Orthonormal rows spanning the numerical right nullspace of ``mat``.

    Keeps right-singular directions with singular value <= tol * sigma_max,
    with an absolute floor of 1e-12 when sigma_max vanishes.
    """
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.size == 0:
        return np.eye(arr.shape[1], dtype=np.complex128)
    _, sigma, vh = np.linalg.svd(arr)
    smax = float(sigma[0]) if sigma.size else 0.0
    cutoff = tol * smax if smax > 0 else 1e-12
    ncols = arr.shape[1]
    nsing = sigma.size
    keep = [i for i in range(nsing) if sigma[i] <= cutoff]
    rows = [vh[i].conj() for i in keep]
    # columns beyond the number of singular values are exact kernel directions
    for i in range(nsing, ncols):
        rows.append(vh[i].conj())
    if not rows:
        return np.zeros((0, ncols), dtype=np.complex128)
    return np.array(rows)


def kernel_basis(a: Operator, tol: float = KERNEL_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical kernel of ``a`` (SVD cutoff)."""
    rows = nullspace(a.mat, tol)
    basis = SubspaceBasis(a.dim, rows, VECTOR_SPACE)
    if basis.size:
        smax = operator_norm(a)
        resid = float(np.linalg.norm(a.mat @ basis.vectors.T, axis=0).max())
        bound = tol * smax * np.sqrt(a.dim) if smax > 0 else 1e-10
        if resid > max(bound, 1e-12):
            raise DomainError("kernel residual exceeds the certified bound")
    return basis


def commutant_basis(ops: list[Operator], dim: int, tol: float = KERNEL_TOL) -> SubspaceBasis:
    """Hilbert-Schmidt orthonormal basis of {X : [O, X] = 0 for all O}.

    Solves the joint kernel of the vectorized maps X -> O X - X O.  An empty
    operator list returns the full operator space.  The identity direction is
    always contained in the span.
    """
    if dim * dim > DIM_BUDGET:
        raise BudgetError(f"commutant problem size {dim * dim} exceeds budget {DIM_BUDGET}")
    blocks = []
    eye = np.eye(dim)
    for op in ops:
        if op.dim != dim:
            raise ShapeError(f"operator dimension {op.dim} does not match {dim}")
        # row-major vec: vec(OX - XO) = (O kron I - I kron O^T) vec(X)
        blocks.append(np.kron(op.mat, eye) - np.kron(eye, op.mat.T))
    if not blocks:
        return SubspaceBasis(dim * dim, np.eye(dim * dim), OPERATOR_SPACE)
    rows = nullspace(np.vstack(blocks), tol)
    return SubspaceBasis(dim * dim, rows, OPERATOR_SPACE)


def unitary_exp(theta: Operator, tol: float = HERMITICITY_TOL) -> Operator:
    """exp(i * theta) for Hermitian theta, via eigendecomposition."""
    vals, basis = eig_hermitian(theta, tol)
    vecs = basis.vectors.T
    u = (vecs * np.exp(1j * vals)) @ vecs.conj().T
    op = Operator(u)
    if float(np.abs(u @ u.conj().T - np.eye(theta.dim)).max()) > UNITARITY_TOL:
        raise DomainError("exponential failed the unitarity check")
    return op
