"""Spectral triples and the Connes distance between states.

The distance between state functionals Psi and Psi' over an operator algebra
with Dirac operator D is

    sup { |Psi[A] - Psi'[A]| : A in the algebra, ||[D, A]|| <= 1 }.

The supremum may be restricted to Hermitian A without loss: the difference of
two states is a Hermitian functional, so the real part of any feasible A
achieves at least the same value with no larger commutator norm.  With a
Hermitian algebra basis {B_k} and real coefficients c the problem becomes

    maximize  g . c     with  g_k = Re Tr(B_k (rho - rho'))
    subject to h(c) <= 1,  h(c) = || sum_k c_k [D, B_k] ||,

a linear objective over a convex set.  h is a seminorm; directions in its
kernel with nonzero objective make the distance unbounded and are reported as
such rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError, UsageError
from .opcore import (
    OPERATOR_SPACE,
    Operator,
    SubspaceBasis,
    commutator,
    nullspace,
    operator_norm,
)
from .states import StateFunctional

# A basis direction counts as commutant when its commutator norm is below
# this fraction of ||D||.
COMMUTANT_FRACTION = 1e-10
UNBOUNDED_OBJECTIVE_TOL = 1e-9
RELATIVE_STOP = 1e-10


@dataclass(frozen=True)
class SpectralTriple:
    """Finite-dimensional spectral data: a Hermitian operator algebra spanned
    by ``algebra_basis`` and a Dirac operator on the same space."""

    hilbert_dim: int
    algebra_basis: SubspaceBasis
    dirac: Operator

    def __post_init__(self):
        if self.dirac.dim != self.hilbert_dim:
            raise ShapeError("Dirac operator does not act on the stated space")
        if self.algebra_basis.kind != OPERATOR_SPACE:
            raise UsageError("algebra basis must be an operator-space basis")
        if self.algebra_basis.ambient_dim != self.hilbert_dim ** 2:
            raise ShapeError("algebra basis lives on the wrong operator space")
        for b in self.algebra_basis.matrices():
            if not b.is_hermitian():
                raise DomainError("algebra basis elements must be Hermitian")


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    restarts: int = 8
    max_iter: int = 400
    polish_iter: int = 3000
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4


@dataclass(frozen=True)
class DistanceResult:
    value: float
    maximizer: Operator
    constraint_norm: float
    unbounded: bool = False
    iterations: int = 0

    def __post_init__(self):
        if not self.unbounded and self.constraint_norm > 1.0 + 1e-8:
            raise DomainError("maximizer violates the commutator constraint")


def make_two_point_triple(lam: complex) -> SpectralTriple:
    """Two-point space: diagonal algebra with off-diagonal Dirac coupling."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("two-point Dirac coupling must be nonzero")
    dirac = Operator(np.array([[0.0, np.conj(lam)], [lam, 0.0]]))
    basis = np.zeros((2, 4), dtype=np.complex128)
    basis[0, 0] = 1.0  # |0><0| vectorized
    basis[1, 3] = 1.0  # |1><1| vectorized
    return SpectralTriple(2, SubspaceBasis(4, basis, OPERATOR_SPACE), dirac)


def make_diagonal_triple(n: int, dirac: Operator) -> SpectralTriple:
    """n-point space: real diagonal algebra with a supplied Hermitian Dirac."""
    if dirac.dim != n:
        raise ShapeError(f"Dirac dimension {dirac.dim} does not match {n} points")
    if not dirac.is_hermitian():
        raise DomainError("Dirac operator must be Hermitian here")
    rows = np.zeros((n, n * n), dtype=np.complex128)
    for i in range(n):
        rows[i, i * n + i] = 1.0
    return SpectralTriple(n, SubspaceBasis(n * n, rows, OPERATOR_SPACE), dirac)


def _seminorm_data(triple: SpectralTriple):
    basis_mats = [b.mat for b in triple.algebra_basis.matrices()]
    commutators = np.array([commutator(triple.dirac, Operator(b)).mat for b in basis_mats])
    return basis_mats, commutators


def _sigma_max_with_vectors(m: np.ndarray):
    u, s, vh = np.linalg.svd(m)
    return float(s[0]), u[:, 0], vh[0].conj()


def _h(commutators: np.ndarray, c: np.ndarray) -> float:
    return float(np.linalg.norm(np.tensordot(c, commutators, axes=1), 2))


def _h_grad(commutators: np.ndarray, c: np.ndarray):
    m = np.tensordot(c, commutators, axes=1)
    val, u, v = _sigma_max_with_vectors(m)
    grad = np.real(np.einsum("i,kij,j->k", u.conj(), commutators, v))
    return val, grad


def connes_distance(
    triple: SpectralTriple,
    psi: StateFunctional,
    psi_prime: StateFunctional,
    opts: SolverOptions = SolverOptions(),
) -> DistanceResult:
    """Distance between two states by projected supergradient ascent.

    Deterministic multi-restart: seeds are the objective direction followed by
    coordinate directions, ties between restarts resolved by lowest index.
    After the ascent phase the best point is polished by a diminishing-step
    subgradient pass on the equivalent convex program
    minimize h(c) over {g . c = 1}.
    """
    if psi.rho.dim != triple.hilbert_dim or psi_prime.rho.dim != triple.hilbert_dim:
        raise ShapeError("states do not act on the triple's Hilbert space")
    basis_mats, commutators = _seminorm_data(triple)
    k = len(basis_mats)
    delta = psi.rho.op.mat - psi_prime.rho.op.mat
    g = np.array([np.real(np.trace(b @ delta)) for b in basis_mats])

    def build(c: np.ndarray) -> Operator:
        total = np.zeros((triple.hilbert_dim,) * 2, dtype=np.complex128)
        for ck, b in zip(c, basis_mats):
            total += ck * b
        return Operator(total)

    if float(np.abs(g).max(initial=0.0)) == 0.0:
        return DistanceResult(0.0, Operator.zeros(triple.hilbert_dim), 0.0)

    # Split off the seminorm kernel: flatten the real-linear map c -> [D, A(c)].
    dnorm = operator_norm(triple.dirac)
    flat = commutators.reshape(k, -1).T
    stacked = np.vstack([flat.real, flat.imag])
    ker = nullspace(stacked, tol=1e-12).real
    genuine = []
    for row in ker:
        if _h(commutators, row) <= max(COMMUTANT_FRACTION * dnorm, 1e-14):
            genuine.append(row)
    for row in genuine:
        if abs(float(g @ row)) > UNBOUNDED_OBJECTIVE_TOL:
            direction = build(row if g @ row > 0 else -row)
            return DistanceResult(
                math.inf,
                direction,
                _h(commutators, row),
                unbounded=True,
            )
    if genuine:
        kermat = np.array(genuine)
        proj = np.eye(k) - kermat.T @ kermat

        def feasible(c):
            return proj @ c
    else:
        def feasible(c):
            return c

    g = feasible(g)
    if float(np.linalg.norm(g)) <= 1e-14:
        return DistanceResult(0.0, Operator.zeros(triple.hilbert_dim), 0.0)

    seeds = [g / np.linalg.norm(g)]
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        seeds.append(e)
    seeds = seeds[: opts.restarts]

    best_val = 0.0
    best_c = None
    total_iters = 0

    def ratio(c):
        h = _h(commutators, c)
        return (float(g @ c) / h, h) if h > 1e-14 else (-math.inf, h)

    for seed in seeds:
        c = feasible(seed.astype(float))
        if float(np.linalg.norm(c)) < 1e-12:
            continue
        if g @ c < 0:
            c = -c
        if abs(g @ c) < 1e-14:
            c = c + 1e-3 * g
        val, h = ratio(c)
        if not math.isfinite(val):
            continue
        step = 1.0
        for _ in range(opts.max_iter):
            total_iters += 1
            hval, hgrad = _h_grad(commutators, c)
            grad = feasible((g - val * hgrad) / hval)
            gn2 = float(grad @ grad)
            if gn2 <= 1e-24:
                break
            t = step
            improved = False
            while t > 1e-12:
                cand = c + t * grad
                cand_val, _ = ratio(cand)
                if cand_val >= val + opts.armijo_slope * t * gn2:
                    improved = True
                    break
                t *= opts.armijo_shrink
            if not improved:
                break
            step = min(1.0, t / opts.armijo_shrink)
            new_val, _ = ratio(cand)
            c = cand
            if new_val <= val * (1 + RELATIVE_STOP) and new_val >= val:
                val = new_val
                break
            val = new_val
        if val > best_val:
            best_val = val
            best_c = c

    if best_c is None or best_val <= 0:
        return DistanceResult(0.0, Operator.zeros(triple.hilbert_dim), 0.0)

    # Polish on the convex form: minimize h over the affine slice g.c = 1.
    c = best_c / float(g @ best_c)
    gunit = g / float(np.linalg.norm(g))
    h_best = _h(commutators, c)
    c_best = c.copy()
    radius = 0.5 * float(np.linalg.norm(c))
    for it in range(opts.polish_iter):
        hval, hgrad = _h_grad(commutators, c)
        if hval < h_best:
            h_best, c_best = hval, c.copy()
        s = feasible(hgrad)
        s = s - (s @ gunit) * gunit
        ns = float(np.linalg.norm(s))
        if ns <= 1e-14:
            break
        c = c - (radius / math.sqrt(it + 1.0)) * s / ns
        total_iters += 1
    hval = _h(commutators, c)
    if hval < h_best:
        h_best, c_best = hval, c

    value = 1.0 / h_best
    c_star = c_best / h_best
    maximizer = build(c_star)
    final_norm = float(operator_norm(commutator(triple.dirac, maximizer)))
    if final_norm > 1.0 + 1e-10:
        c_star = c_star / final_norm
        maximizer = build(c_star)
        value = float(g @ c_star)
        final_norm = float(operator_norm(commutator(triple.dirac, maximizer)))
    return DistanceResult(value, maximizer, final_norm, iterations=total_iters)
