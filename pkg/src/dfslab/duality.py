"""Integer duality group of toroidal backgrounds and Narain charge lattices.

A background is a pair (metric, coupling): a symmetric positive definite
matrix and an antisymmetric matrix on the same N directions.  The combination
E = metric + coupling transforms under integer 2N x 2N matrices g satisfying
g^T J g = J (J the antidiagonal identity pairing) by the fractional-linear
rule E -> (aE + b)(cE + d)^-1.  Momentum and winding charges transform by an
integer linear map, and the lattice energy

    H(m, w) = 1/2 (m + xi w)^T eta^-1 (m + xi w) + 1/2 w^T eta w

is invariant when background and charges are mapped together.

Besides the matrix group there is a sign swap flipping the coupling and the
winding charges; it normalizes the matrix group, so elements carry the matrix
together with a swap flag and compose semidirectly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, UsageError

SYMMETRY_TOL = 1e-12


def _check_square(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be a square matrix")
    return arr


def _int_matrix(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if np.abs(arr - rounded).max(initial=0.0) > 0:
            raise DomainError("duality matrices must have integer entries")
        arr = rounded
    return arr.astype(np.int64)


def _int_det(a: np.ndarray) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    m = [[int(x) for x in row] for row in a]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def pairing_matrix(n: int) -> np.ndarray:
    """The antidiagonal block pairing used by the g^T J g = J condition."""
    j = np.zeros((2 * n, 2 * n), dtype=np.int64)
    j[:n, n:] = np.eye(n, dtype=np.int64)
    j[n:, :n] = np.eye(n, dtype=np.int64)
    return j


def _charge_signature(n: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)])).astype(np.int64)


@dataclass(frozen=True)
class Background:
    """Constant metric and antisymmetric coupling on N compact directions."""

    metric: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        eta = _check_square(np.array(self.metric, dtype=float), "metric")
        xi = _check_square(np.array(self.coupling, dtype=float), "coupling")
        if eta.shape != xi.shape:
            raise ShapeError("metric and coupling must have matching shapes")
        if np.abs(eta - eta.T).max(initial=0.0) > SYMMETRY_TOL:
            raise DomainError("metric must be symmetric")
        if np.abs(xi + xi.T).max(initial=0.0) > SYMMETRY_TOL:
            raise DomainError("coupling must be antisymmetric")
        if np.linalg.eigvalsh(eta).min() <= 0:
            raise DomainError("metric must be positive definite")
        object.__setattr__(self, "metric", eta)
        object.__setattr__(self, "coupling", xi)
        eta.setflags(write=False)
        xi.setflags(write=False)

    @property
    def n(self) -> int:
        return self.metric.shape[0]

    @property
    def e_matrix(self) -> np.ndarray:
        return self.metric + self.coupling

    @property
    def k_plus(self) -> np.ndarray:
        return self.metric + self.coupling

    @property
    def k_minus(self) -> np.ndarray:
        return self.metric - self.coupling


@dataclass(frozen=True)
class ChargeVector:
    """Integer momentum and winding numbers on the charge lattice."""

    m: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        m = _int_matrix(self.m).reshape(-1).copy()
        w = _int_matrix(self.w).reshape(-1).copy()
        if m.size != w.size:
            raise ShapeError("momentum and winding vectors must have equal length")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "w", w)
        m.setflags(write=False)
        w.setflags(write=False)

    @property
    def n(self) -> int:
        return self.m.size


@dataclass(frozen=True)
class ONNElement:
    """An integer matrix with g^T J g = J, plus a coupling-sign swap flag."""

    matrix: np.ndarray
    swap: bool = False

    def __post_init__(self):
        g = _int_matrix(self.matrix).copy()
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2 != 0:
            raise ShapeError("duality matrix must be square of even size")
        j = pairing_matrix(g.shape[0] // 2)
        if not np.array_equal(g.T @ j @ g, j):
            raise DomainError("matrix does not preserve the integer pairing")
        object.__setattr__(self, "matrix", g)
        g.setflags(write=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def blocks(self):
        n = self.n
        g = self.matrix
        return g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:]

    def compose(self, other: "ONNElement") -> "ONNElement":
        """Group product; ``self`` acts after ``other``."""
        if self.n != other.n:
            raise ShapeError("cannot compose elements of different rank")
        sig = _charge_signature(self.n)
        mid = other.matrix if not self.swap else sig @ other.matrix @ sig
        return ONNElement(self.matrix @ mid, self.swap ^ other.swap)

    def inverse(self) -> "ONNElement":
        j = pairing_matrix(self.n)
        inv = j @ self.matrix.T @ j
        if self.swap:
            sig = _charge_signature(self.n)
            inv = sig @ inv @ sig
        return ONNElement(inv, self.swap)

    def det(self) -> int:
        return _int_det(self.matrix)


def identity_element(n: int) -> ONNElement:
    return ONNElement(np.eye(2 * n, dtype=np.int64))


def factorized_inversion(n: int, directions) -> ONNElement:
    """Inversion of the chosen directions; all of them inverts the full torus."""
    dirs = sorted(set(int(d) for d in directions))
    if not dirs:
        raise UsageError("need at least one direction to invert")
    if dirs[0] < 0 or dirs[-1] >= n:
        raise DomainError(f"directions must lie in [0, {n})")
    e = np.zeros((n, n), dtype=np.int64)
    for d in dirs:
        e[d, d] = 1
    ident = np.eye(n, dtype=np.int64)
    g = np.block([[ident - e, e], [e, ident - e]])
    return ONNElement(g)


def coupling_shift(theta) -> ONNElement:
    """Integer shift of the antisymmetric coupling."""
    th = _int_matrix(theta)
    if not np.array_equal(th, -th.T):
        raise DomainError("shift matrix must be integer antisymmetric")
    n = th.shape[0]
    ident = np.eye(n, dtype=np.int64)
    zero = np.zeros((n, n), dtype=np.int64)
    return ONNElement(np.block([[ident, th], [zero, ident]]))


def basis_change(a) -> ONNElement:
    """Torus relabeling by an integer matrix with determinant +-1."""
    a = _int_matrix(a)
    _check_square(a, "basis change")
    det = _int_det(a)
    if det not in (1, -1):
        raise DomainError(f"basis change must be unimodular, got determinant {det}")
    inv = np.rint(np.linalg.inv(a.astype(float))).astype(np.int64)
    if not np.array_equal(a @ inv, np.eye(a.shape[0], dtype=np.int64)):
        raise DomainError("basis change inverse is not integer")
    n = a.shape[0]
    zero = np.zeros((n, n), dtype=np.int64)
    return ONNElement(np.block([[a.T, zero], [zero, inv]]))


def coupling_swap(n: int) -> ONNElement:
    """Sign flip of the coupling (and of the winding charges)."""
    return ONNElement(np.eye(2 * n, dtype=np.int64), swap=True)


def onn_generators(n: int) -> list[ONNElement]:
    """A convenient generating set: per-direction inversions, elementary
    coupling shifts, neighbor transpositions, and the coupling swap."""
    gens = [factorized_inversion(n, [i]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            th = np.zeros((n, n), dtype=np.int64)
            th[i, j] = 1
            th[j, i] = -1
            gens.append(coupling_shift(th))
    for i in range(n - 1):
        perm = np.eye(n, dtype=np.int64)
        perm[[i, i + 1]] = perm[[i + 1, i]]
        gens.append(basis_change(perm))
    gens.append(coupling_swap(n))
    return gens


def onn_apply(element: ONNElement, background: Background, charges: ChargeVector | None = None):
    """Fractional-linear action on E = metric + coupling, with the matching
    integer charge map when charges are supplied.

    Returns the transformed Background, or a (Background, ChargeVector) pair.
    The charge map is chosen so the Narain energy of (background, charges)
    equals that of the transformed pair for every group element.
    """
    if element.n != background.n:
        raise ShapeError("element rank does not match the background")
    e = background.e_matrix
    if element.swap:
        e = e.T
    a, b, c, d = element.blocks()
    denom = c.astype(float) @ e + d.astype(float)
    if abs(np.linalg.det(denom)) < 1e-12:
        raise DomainError("duality action is singular on this background")
    new_e = (a.astype(float) @ e + b.astype(float)) @ np.linalg.inv(denom)
    moved = Background(0.5 * (new_e + new_e.T), 0.5 * (new_e - new_e.T))
    if charges is None:
        return moved
    return moved, transform_charges(element, charges)


def charge_matrix(element: ONNElement) -> np.ndarray:
    """Integer map acting on stacked charges (momenta above windings)."""
    sig = _charge_signature(element.n)
    rho = sig @ element.matrix @ sig
    if element.swap:
        rho = rho @ sig
    return rho


def transform_charges(element: ONNElement, charges: ChargeVector) -> ChargeVector:
    if charges.n != element.n:
        raise ShapeError("charge vectors must have one entry per direction")
    out = charge_matrix(element) @ np.concatenate([charges.m, charges.w])
    return ChargeVector(out[: element.n], out[element.n :])


def narain_energy(background: Background, momenta, windings) -> float:
    m = np.asarray(momenta, dtype=float).reshape(-1)
    w = np.asarray(windings, dtype=float).reshape(-1)
    if m.size != background.n or w.size != background.n:
        raise ShapeError("charge vectors must have one entry per direction")
    eta = background.metric
    shifted = m + background.coupling @ w
    return float(
        0.5 * shifted @ np.linalg.solve(eta, shifted) + 0.5 * w @ eta @ w
    )


def narain_spectrum(background: Background, box: int):
    """Energies of all integer charges with entries in [-box, box], sorted by
    energy with charge tuples breaking ties."""
    if box < 0:
        raise DomainError("box must be nonnegative")
    n = background.n
    rng = range(-box, box + 1)
    grids = np.meshgrid(*([list(rng)] * (2 * n)), indexing="ij")
    charges = np.stack([g.reshape(-1) for g in grids], axis=1)
    rows = []
    for row in charges:
        m, w = row[:n], row[n:]
        rows.append((narain_energy(background, m, w), tuple(m), tuple(w)))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def dual_metric(background: Background) -> np.ndarray:
    """Metric seen by the inverted background.

    Equals the symmetric part of E^-1; with zero coupling it is the plain
    matrix inverse of the metric.
    """
    eta = background.metric
    prod = background.k_plus @ np.linalg.solve(eta, background.k_minus)
    return np.linalg.inv(prod)


def normal_modes(kinetic: np.ndarray, potential: np.ndarray) -> np.ndarray:
    """Frequencies of 1/2 p^T A p + 1/2 x^T B x, ascending.

    Uses the Cholesky factor of the kinetic matrix to reduce the generalized
    problem to an ordinary symmetric one.
    """
    a = _check_square(np.asarray(kinetic, dtype=float), "kinetic")
    b = _check_square(np.asarray(potential, dtype=float), "potential")
    if a.shape != b.shape:
        raise ShapeError("kinetic and potential matrices must match")
    if np.abs(a - a.T).max(initial=0.0) > 1e-10 or np.abs(b - b.T).max(initial=0.0) > 1e-10:
        raise DomainError("mode matrices must be symmetric")
    if np.linalg.eigvalsh(b).min() <= 0:
        raise DomainError("potential matrix must be positive definite")
    try:
        ell = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise DomainError("kinetic matrix must be positive definite") from exc
    sym = ell.T @ b @ ell
    vals = np.linalg.eigvalsh(0.5 * (sym + sym.T))
    return np.sqrt(np.clip(vals, 0.0, None))
