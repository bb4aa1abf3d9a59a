"""Flux matrices, clock-shift representations, and Landau levels.

A flux matrix is an exactly antisymmetric table of commutation phases.  When
the phases are rational multiples of 2 pi arranged in 2x2 blocks, a finite
clock-shift pair represents each block exactly; irrational or entangled
fluxes have no finite-dimensional representation and are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, UnsupportedFluxError
from .fock import FockSpace, position_momentum
from .opcore import Operator, unitary_exp

TWO_PI = 2.0 * math.pi
RATIONAL_TOL = 1e-12
UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class FluxMatrix:
    """Antisymmetric phase table, optionally with an exact rational form.

    omega must be exactly antisymmetric entry by entry (build it with
    antisymmetrize_coupling or from_rational if in doubt) and have an even
    number of rows.  rational_form, when present, is (q, denominator) with q
    an integer antisymmetric matrix satisfying omega = 2 pi q / denominator.
    """

    omega: np.ndarray
    rational_form: tuple[np.ndarray, int] | None = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ShapeError("flux matrix must be square")
        if omega.shape[0] % 2 != 0:
            raise DomainError("flux matrix needs an even number of directions")
        if not np.array_equal(omega, -omega.T):
            raise DomainError("flux matrix must be exactly antisymmetric")
        object.__setattr__(self, "omega", omega)
        omega.setflags(write=False)
        if self.rational_form is not None:
            q, den = self.rational_form
            q = np.array(q)
            if not np.issubdtype(q.dtype, np.integer):
                raise DomainError("rational numerator must be an integer matrix")
            if q.shape != omega.shape or not np.array_equal(q, -q.T):
                raise DomainError("rational numerator must be antisymmetric, same shape")
            if not (isinstance(den, (int, np.integer)) and den >= 1):
                raise DomainError("rational denominator must be a positive integer")
            if np.abs(omega - TWO_PI * q / den).max(initial=0.0) > RATIONAL_TOL:
                raise DomainError("rational form disagrees with the stored phases")
            object.__setattr__(self, "rational_form", (q, int(den)))
            q.setflags(write=False)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @classmethod
    def from_rational(cls, q, denominator: int) -> "FluxMatrix":
        q = np.asarray(q)
        if int(denominator) < 1:
            raise DomainError(f"denominator must be a positive integer, got {denominator}")
        return cls(TWO_PI * q / denominator, rational_form=(q, denominator))


def antisymmetrize_coupling(background) -> FluxMatrix:
    """Fold a metric-plus-coupling background into a flux matrix.

    Upper-triangle entries take metric + coupling, the lower triangle the
    exact negation, the diagonal zero.  Equivalent to weighting by the sign
    of the index difference when the coupling is exactly antisymmetric.
    """
    combined = background.metric + background.coupling
    upper = np.triu(combined, k=1)
    return FluxMatrix(upper - upper.T)


@dataclass(frozen=True)
class MagneticRep:
    """Finite unitaries realizing the flux phases exactly."""

    unitaries: tuple[Operator, ...]

    def __post_init__(self):
        if not self.unitaries:
            raise DomainError("need at least one unitary")
        d = self.unitaries[0].dim
        eye = np.eye(d)
        for u in self.unitaries:
            if u.dim != d:
                raise ShapeError("all unitaries must share one dimension")
            if np.abs(u.mat.conj().T @ u.mat - eye).max() > UNITARITY_TOL:
                raise DomainError("representation matrices must be unitary")

    @property
    def dim(self) -> int:
        return self.unitaries[0].dim


def _block_numerators(q: np.ndarray) -> list[int]:
    """Per-block numerators of a 2x2-block-diagonal antisymmetric matrix."""
    n = q.shape[0]
    mask = np.zeros_like(q, dtype=bool)
    out = []
    for b in range(n // 2):
        i, j = 2 * b, 2 * b + 1
        mask[i, j] = mask[j, i] = True
        out.append(int(q[i, j]))
    if np.any(q[~mask] != 0):
        raise UnsupportedFluxError(
            "flux couples directions outside 2x2 diagonal blocks; "
            "no finite clock-shift pair represents it"
        )
    return out


def clock_shift_rep(flux: FluxMatrix) -> MagneticRep:
    """Clock and shift unitaries realizing a rational block flux.

    Each 2x2 block with phase 2 pi q / n is carried by an n-dimensional
    clock-shift pair; blocks act on disjoint tensor factors, so the total
    dimension is n^(N/2).
    """
    if flux.rational_form is None:
        raise UnsupportedFluxError(
            "flux has no rational form; finite representations need one"
        )
    q, den = flux.rational_form
    numerators = _block_numerators(q)
    blocks = len(numerators)
    if den ** blocks > 4096:
        raise UnsupportedFluxError(
            f"representation dimension {den}^{blocks} exceeds the workable budget"
        )

    shift = np.zeros((den, den), dtype=np.complex128)
    for k in range(den):
        shift[(k - 1) % den, k] = 1.0
    unitaries = []
    for b, q_b in enumerate(numerators):
        clock = np.diag(np.exp(2.0j * np.pi * q_b * np.arange(den) / den))
        before = np.eye(den ** b)
        after = np.eye(den ** (blocks - b - 1))
        unitaries.append(Operator(np.kron(np.kron(before, shift), after)))
        unitaries.append(Operator(np.kron(np.kron(before, clock), after)))
    return MagneticRep(tuple(unitaries))


def weyl_residual(rep: MagneticRep, flux: FluxMatrix) -> float:
    """Largest entrywise violation of U_i U_j = exp(i omega_ij) U_j U_i."""
    if len(rep.unitaries) != flux.n:
        raise ShapeError("one unitary per flux direction is required")
    worst = 0.0
    for i in range(flux.n):
        for j in range(i + 1, flux.n):
            ui = rep.unitaries[i].mat
            uj = rep.unitaries[j].mat
            lhs = ui @ uj
            rhs = np.exp(1.0j * flux.omega[i, j]) * (uj @ ui)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _landau_terms(flux: FluxMatrix, n_max: int) -> list[Operator]:
    if flux.n != 2:
        raise UnsupportedFluxError(
            f"Landau Hamiltonian is built for two directions, got {flux.n}"
        )
    space = FockSpace(2, n_max)
    quads = [position_momentum(space, m) for m in range(2)]
    terms = []
    for i in range(2):
        kin = quads[i][1].mat.copy()
        for j in range(2):
            kin -= 0.5 * flux.omega[i, j] * quads[j][0].mat
        terms.append(Operator(kin))
    return terms


def landau_hamiltonian(flux: FluxMatrix, n_max: int) -> Operator:
    """Half the sum of squared magnetic momenta p_i - (1/2) omega_ij x_j."""
    terms = _landau_terms(flux, n_max)
    total = sum(t.mat @ t.mat for t in terms)
    return Operator(0.5 * total)


def magnetic_translations(flux: FluxMatrix, n_max: int) -> list[Operator]:
    """Unitaries exp(i (p_j - (1/2) omega_jk x_k)) on the truncated space.

    Diagnostic only: truncation breaks the exact Weyl relations, so use
    clock_shift_rep when exactness matters.
    """
    return [unitary_exp(t) for t in _landau_terms(flux, n_max)]
