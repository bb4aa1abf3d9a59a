"""Truncated bosonic Fock spaces and the models built on them.

Single-mode spaces keep levels 0..n_max with hard truncation: the raising
operator annihilates the top level, so canonical relations like [a, a_dag] = 1
hold only on matrix elements whose occupations stay below n_max.  Relation
tests therefore restrict to interior entries via interior_indices.

Two models live here: linear oscillators coupled to a decohering environment
through ladder exchange terms, and a register of quadrature oscillators paired
with towers of environment modes and a gamma-matrix sector, whose two Dirac
operators cut out protected subspaces as numerical kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .duality import Background
from .errors import BudgetError, DomainError, ShapeError, UsageError
from .opcore import DIM_BUDGET, Operator, SubspaceBasis, kernel_basis

SQRT2 = math.sqrt(2.0)

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


@dataclass(frozen=True)
class FockSpace:
    """Tensor product of n_modes single-mode spaces truncated at n_max."""

    n_modes: int
    n_max: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise DomainError("need at least one mode")
        if self.n_max < 1:
            raise DomainError("n_max must be at least 1")
        if self.dim > DIM_BUDGET:
            raise BudgetError(
                f"Fock space dimension {self.levels}^{self.n_modes} = {self.dim} "
                f"exceeds the {DIM_BUDGET} budget"
            )

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.levels ** self.n_modes

    def occupations(self, index: int) -> tuple[int, ...]:
        """Occupation numbers of a basis state, first mode slowest."""
        out = []
        for _ in range(self.n_modes):
            index, rem = divmod(index, self.levels)
            out.append(rem)
        return tuple(reversed(out))


def interior_indices(space: FockSpace) -> np.ndarray:
    """Basis indices with every occupation strictly below n_max.

    Matrix elements between interior states are unaffected by the hard
    truncation, so canonical-relation tests restrict to them.
    """
    idx = [
        k
        for k in range(space.dim)
        if all(n < space.n_max for n in space.occupations(k))
    ]
    return np.array(idx, dtype=np.intp)


def _single_ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n_max + 1.0)), 1).astype(np.complex128)


def _embed(space: FockSpace, mode: int, mat: np.ndarray) -> np.ndarray:
    before = space.levels ** mode
    after = space.levels ** (space.n_modes - mode - 1)
    return np.kron(np.kron(np.eye(before), mat), np.eye(after))


def ladder(space: FockSpace, mode: int) -> tuple[Operator, Operator]:
    """Annihilation and creation operators for one mode of the space."""
    if not 0 <= mode < space.n_modes:
        raise UsageError(f"mode {mode} not in space with {space.n_modes} modes")
    a = _embed(space, mode, _single_ladder(space.n_max))
    return Operator(a), Operator(a.conj().T)


def number_operator(space: FockSpace, mode: int) -> Operator:
    a, adag = ladder(space, mode)
    return adag @ a


def position_momentum(space: FockSpace, mode: int) -> tuple[Operator, Operator]:
    """Quadratures x = (a + a_dag)/sqrt2 and p = (a - a_dag)/(i sqrt2)."""
    a, adag = ladder(space, mode)
    x = Operator((a.mat + adag.mat) / SQRT2)
    p = Operator((a.mat - adag.mat) / (1.0j * SQRT2))
    return x, p


def _check_spd(eta: np.ndarray, name: str) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if eta.ndim != 2 or eta.shape[0] != eta.shape[1]:
        raise ShapeError(f"{name} must be a square matrix")
    if np.abs(eta - eta.T).max(initial=0.0) > 1e-12:
        raise DomainError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(eta).min() <= 0:
        raise DomainError(f"{name} must be positive definite")
    return eta


def hw_mode(space: FockSpace, level: int, eta, modes=None) -> list[Operator]:
    """Level-n environment operators e^i = sum_a L_ia b_a with L L^T = n eta.

    The commutators [e^i, e^{j dag}] equal n eta^{ij} on interior entries.
    Distinct levels must live on disjoint modes; pass each level its own
    slice of the space through ``modes`` (defaults to the first ones).
    """
    eta = _check_spd(eta, "eta")
    n_dirs = eta.shape[0]
    if modes is None:
        modes = tuple(range(n_dirs))
    modes = tuple(int(m) for m in modes)
    if len(modes) != n_dirs or len(set(modes)) != n_dirs:
        raise UsageError(f"need {n_dirs} distinct modes, got {modes}")
    if any(not 0 <= m < space.n_modes for m in modes):
        raise UsageError(f"modes {modes} outside the {space.n_modes}-mode space")
    if level < 1:
        raise DomainError("level must be a positive integer")
    ell = math.sqrt(level) * np.linalg.cholesky(eta)
    ladders = [ladder(space, m)[0].mat for m in modes]
    out = []
    for i in range(n_dirs):
        acc = np.zeros((space.dim, space.dim), dtype=np.complex128)
        for a in range(n_dirs):
            acc += ell[i, a] * ladders[a]
        out.append(Operator(acc))
    return out


# ---------------------------------------------------------------------------
# Oscillator decoherence model


@dataclass(frozen=True)
class DecoherenceModel:
    """Linear oscillators exchanging quanta with environment modes."""

    coupling_sys: np.ndarray
    coupling_env: np.ndarray
    coupling_int: np.ndarray
    system_space: FockSpace
    env_space: FockSpace
    space: FockSpace
    h_sys: Operator
    h_env: Operator
    h_int: Operator
    h_total: Operator


def _check_hermitian_matrix(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be a square matrix")
    if np.abs(m - m.conj().T).max(initial=0.0) > 1e-12:
        raise DomainError(f"{name} must be Hermitian")
    return m


def build_decoherence_model(k_sys, lam_env, w_int, n_max: int) -> DecoherenceModel:
    """Quadratic system and environment Hamiltonians with a linear exchange
    coupling: quanta hop between system and environment modes with amplitudes
    w, so the interaction is odd under environment parity."""
    k_sys = _check_hermitian_matrix(k_sys, "system coupling")
    lam_env = _check_hermitian_matrix(lam_env, "environment coupling")
    w_int = np.asarray(w_int, dtype=np.complex128)
    n_sys = k_sys.shape[0]
    n_env = lam_env.shape[0]
    if w_int.shape != (n_sys, n_env):
        raise ShapeError(
            f"interaction matrix must be {n_sys}x{n_env}, got {w_int.shape}"
        )
    sys_space = FockSpace(n_sys, n_max)
    env_space = FockSpace(n_env, n_max)
    if sys_space.dim * env_space.dim > DIM_BUDGET:
        raise BudgetError(
            f"model dimension {sys_space.dim}x{env_space.dim} exceeds {DIM_BUDGET}"
        )
    full_space = FockSpace(n_sys + n_env, n_max)

    a_ops = [ladder(sys_space, i)[0].mat for i in range(n_sys)]
    e_ops = [ladder(env_space, i)[0].mat for i in range(n_env)]

    h_sys = np.zeros((sys_space.dim,) * 2, dtype=np.complex128)
    for i in range(n_sys):
        for j in range(n_sys):
            h_sys += k_sys[i, j] * (a_ops[i].conj().T @ a_ops[j])
    h_env = np.zeros((env_space.dim,) * 2, dtype=np.complex128)
    for al in range(n_env):
        for be in range(n_env):
            h_env += lam_env[al, be] * (e_ops[al].conj().T @ e_ops[be])

    eye_s = np.eye(sys_space.dim)
    eye_e = np.eye(env_space.dim)
    h_int = np.zeros((sys_space.dim * env_space.dim,) * 2, dtype=np.complex128)
    for i in range(n_sys):
        for al in range(n_env):
            term = np.kron(a_ops[i], e_ops[al].conj().T)
            h_int += w_int[i, al] * term + np.conj(w_int[i, al]) * term.conj().T
    h_total = np.kron(h_sys, eye_e) + np.kron(eye_s, h_env) + h_int

    return DecoherenceModel(
        coupling_sys=k_sys,
        coupling_env=lam_env,
        coupling_int=w_int,
        system_space=sys_space,
        env_space=env_space,
        space=full_space,
        h_sys=Operator(h_sys),
        h_env=Operator(h_env),
        h_int=Operator(h_int),
        h_total=Operator(h_total),
    )


def parity_generators(model: DecoherenceModel) -> list[Operator]:
    """One pi-number operator per environment mode, on the full tensor space.

    Each exp(i Theta) flips the sign of that mode's ladder operators, so the
    generated group averages the exchange coupling to zero.
    """
    eye_s = np.eye(model.system_space.dim)
    out = []
    for al in range(model.env_space.n_modes):
        n_op = number_operator(model.env_space, al).mat
        out.append(Operator(np.kron(eye_s, math.pi * n_op)))
    return out


def env_vacuum_projector(model: DecoherenceModel) -> Operator:
    """Projector onto (everything) x (all environment modes in vacuum)."""
    vac = np.zeros((model.env_space.dim,) * 2, dtype=np.complex128)
    vac[0, 0] = 1.0
    return Operator(np.kron(np.eye(model.system_space.dim), vac))


# ---------------------------------------------------------------------------
# Clifford sector


def _jordan_wigner_gammas(n_dirs: int) -> list[np.ndarray]:
    """2 n_dirs Hermitian matrices on 2^n_dirs dims, pairwise anticommuting."""
    gammas = []
    for k in range(n_dirs):
        for pauli in (_PAULI_X, _PAULI_Y):
            mats = [_PAULI_Z] * k + [pauli] + [np.eye(2, dtype=np.complex128)] * (
                n_dirs - k - 1
            )
            gammas.append(reduce(np.kron, mats))
    return gammas


@dataclass(frozen=True)
class CliffordPair:
    """Two anticommuting families closing on +eta and -eta.

    gamma_plus are Hermitian, gamma_minus anti-Hermitian; eta is the
    lower-index metric the anticommutators reproduce.
    """

    eta: np.ndarray
    gamma_plus: tuple[Operator, ...]
    gamma_minus: tuple[Operator, ...]

    def __post_init__(self):
        n = len(self.gamma_plus)
        eye = np.eye(self.rep_dim)
        for i in range(n):
            for j in range(n):
                pp = _anticomm(self.gamma_plus[i].mat, self.gamma_plus[j].mat)
                mm = _anticomm(self.gamma_minus[i].mat, self.gamma_minus[j].mat)
                pm = _anticomm(self.gamma_plus[i].mat, self.gamma_minus[j].mat)
                if np.abs(pp - 2 * self.eta[i, j] * eye).max() > 1e-12:
                    raise DomainError("plus-family anticommutators do not close")
                if np.abs(mm + 2 * self.eta[i, j] * eye).max() > 1e-12:
                    raise DomainError("minus-family anticommutators do not close")
                if np.abs(pm).max() > 1e-12:
                    raise DomainError("the two families fail to anticommute")

    @property
    def n(self) -> int:
        return len(self.gamma_plus)

    @property
    def rep_dim(self) -> int:
        return self.gamma_plus[0].dim


def _anticomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def clifford_pair(eta) -> CliffordPair:
    """Gamma families with {G+_i, G+_j} = 2 eta_ij and {G-_i, G-_j} = -2 eta_ij,
    built from Pauli tensor products and the Cholesky factor of eta."""
    eta = _check_spd(eta, "eta")
    n = eta.shape[0]
    ell = np.linalg.cholesky(eta)
    gammas = _jordan_wigner_gammas(n)
    plus = []
    minus = []
    for i in range(n):
        gp = np.zeros((2 ** n,) * 2, dtype=np.complex128)
        gm = np.zeros((2 ** n,) * 2, dtype=np.complex128)
        for a in range(n):
            gp += ell[i, a] * gammas[a]
            gm += 1.0j * ell[i, a] * gammas[n + a]
        plus.append(Operator(gp))
        minus.append(Operator(gm))
    return CliffordPair(eta, tuple(plus), tuple(minus))


# ---------------------------------------------------------------------------
# String-oscillator model


@dataclass(frozen=True)
class StringModel:
    """Quadrature register, environment towers, gamma sector, Dirac operators.

    The full space factors as (spinor) x (system) x (plus tower) x (minus
    tower), first factor slowest.  x, p, a_plus, a_minus and h_sys live on the
    system factor; e_plus/e_minus and h_env on their tower factors; the Dirac
    operators on the full space.
    """

    background: Background
    n_max: int
    levels: int
    clifford: CliffordPair
    system_space: FockSpace
    tower_space: FockSpace
    x: tuple[Operator, ...]
    p: tuple[Operator, ...]
    a_plus: tuple[Operator, ...]
    a_minus: tuple[Operator, ...]
    e_plus: tuple[tuple[Operator, ...], ...]
    e_minus: tuple[tuple[Operator, ...], ...]
    h_sys: Operator
    h_env: Operator
    d_plus: Operator
    d_minus: Operator
    d: Operator
    d_bar: Operator

    @property
    def dim(self) -> int:
        return self.d.dim


def _kron4(a, b, c, d) -> np.ndarray:
    return np.kron(np.kron(np.kron(a, b), c), d)


def build_string_model(background: Background, n_max: int, levels: int) -> StringModel:
    """Assemble the register/tower/gamma model on its four tensor factors.

    Budget is checked up front; the intended desk scale is one or two
    directions with n_max and levels at most 3 and 2.
    """
    if levels < 1:
        raise DomainError("need at least one environment level")
    n = background.n
    eta_u = background.metric
    eta_l = np.linalg.inv(eta_u)
    kp = background.k_plus
    km = background.k_minus

    spinor_dim = 2 ** n
    system_space = FockSpace(n, n_max)
    head_dim = spinor_dim * system_space.dim
    per_tower = (n_max + 1) ** (n * levels)
    total = head_dim * per_tower * per_tower
    if total > DIM_BUDGET:
        raise BudgetError(
            f"string model dimension {spinor_dim} x {system_space.dim} x "
            f"{per_tower} x {per_tower} = {total} exceeds the {DIM_BUDGET} budget"
        )
    tower_space = FockSpace(n * levels, n_max)

    xs, ps = [], []
    for i in range(n):
        x_i, p_i = position_momentum(system_space, i)
        xs.append(x_i)
        ps.append(p_i)
    a_plus, a_minus = [], []
    for i in range(n):
        plus = ps[i].mat.copy()
        minus = ps[i].mat.copy()
        for j in range(n):
            plus += kp[i, j] * xs[j].mat
            minus -= km[i, j] * xs[j].mat
        a_plus.append(Operator(plus / SQRT2))
        a_minus.append(Operator(minus / SQRT2))

    h_sys = np.zeros((system_space.dim,) * 2, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            h_sys += 0.5 * eta_l[i, j] * (
                a_plus[i].mat @ a_plus[j].mat + a_minus[i].mat @ a_minus[j].mat
            )

    # Environment towers: level block m occupies modes m*n .. m*n + n - 1.
    def tower_ops() -> list[list[Operator]]:
        per_level = []
        for m in range(1, levels + 1):
            ell = math.sqrt(m) * np.linalg.cholesky(eta_u)
            ops = []
            for i in range(n):
                acc = np.zeros((tower_space.dim,) * 2, dtype=np.complex128)
                for a in range(n):
                    acc += ell[i, a] * ladder(tower_space, (m - 1) * n + a)[0].mat
                ops.append(Operator(acc))
            per_level.append(ops)
        return per_level

    e_plus = tower_ops()
    e_minus = tower_ops()

    h_env_half = np.zeros((tower_space.dim,) * 2, dtype=np.complex128)
    for ops in e_plus:
        for i in range(n):
            for j in range(n):
                h_env_half += eta_l[i, j] * (ops[i].mat.conj().T @ ops[j].mat)
    eye_t = np.eye(tower_space.dim)
    h_env = np.kron(h_env_half, eye_t) + np.kron(eye_t, h_env_half)

    cliff = clifford_pair(eta_l)
    eye_s = np.eye(system_space.dim)
    d_plus = np.zeros((total,) * 2, dtype=np.complex128)
    d_minus = np.zeros((total,) * 2, dtype=np.complex128)
    for i in range(n):
        env_p = sum(op.mat + op.mat.conj().T for op in (lvl[i] for lvl in e_plus))
        env_m = sum(op.mat + op.mat.conj().T for op in (lvl[i] for lvl in e_minus))
        d_plus += _kron4(cliff.gamma_plus[i].mat, a_plus[i].mat, eye_t, eye_t)
        d_plus += _kron4(cliff.gamma_plus[i].mat, eye_s, env_p, eye_t)
        d_minus += _kron4(cliff.gamma_minus[i].mat, a_minus[i].mat, eye_t, eye_t)
        d_minus += _kron4(cliff.gamma_minus[i].mat, eye_s, eye_t, env_m)

    return StringModel(
        background=background,
        n_max=n_max,
        levels=levels,
        clifford=cliff,
        system_space=system_space,
        tower_space=tower_space,
        x=tuple(xs),
        p=tuple(ps),
        a_plus=tuple(a_plus),
        a_minus=tuple(a_minus),
        e_plus=tuple(tuple(ops) for ops in e_plus),
        e_minus=tuple(tuple(ops) for ops in e_minus),
        h_sys=Operator(h_sys),
        h_env=Operator(h_env),
        d_plus=Operator(d_plus),
        d_minus=Operator(d_minus),
        d=Operator(d_plus + d_minus),
        d_bar=Operator(d_plus - d_minus),
    )


def dfs_from_dirac(d: Operator, tol: float = 1e-10) -> SubspaceBasis:
    """Numerical kernel of a Dirac operator: the protected subspace.

    Works for non-normal inputs since the kernel comes from an SVD.
    """
    return kernel_basis(d, tol=tol)


# ---------------------------------------------------------------------------
# Duality substitution at the coefficient level


@dataclass(frozen=True)
class SubstitutionReport:
    """Coefficient arrays of the substituted Dirac operator next to those of
    the opposite combination built on the dual background.

    Arrays are indexed [gamma slot, symbol]: rows run over the fixed gamma
    labels, columns over p, x, or tower symbols.  The dual side is rescaled by
    the dual metric on the p and x slots (the canonical index shuffle that
    accompanies exchanging position with momentum).  For one direction the
    match is exact; for more, the Cholesky gamma gauge on the two sides can
    differ by a rotation, so gram_residuals compares the gauge-invariant
    products instead.
    """

    substituted: dict
    dual: dict
    residuals: dict
    gram_residuals: dict
    max_residual: float
    max_gram_residual: float


def _substitution_arrays(background: Background, levels: int) -> dict:
    n = background.n
    eta_u = background.metric
    eta_l = np.linalg.inv(eta_u)
    ell = np.linalg.cholesky(eta_l)
    out = {}
    for sector, kmat, sign in (("plus", background.k_plus, 1.0), ("minus", background.k_minus, -1.0)):
        s_mat = eta_u @ np.linalg.inv(kmat)
        t_mat = kmat @ eta_l
        arrays = {
            "p": sign * ell.T @ s_mat / SQRT2,
            # The x slot is even in the sector sign: the minus sign of the
            # substitution cancels against the minus in a_minus = (p - Kx)/sqrt2.
            "x": ell.T @ s_mat @ kmat / SQRT2,
        }
        for m in range(1, levels + 1):
            hw = math.sqrt(m) * np.linalg.cholesky(eta_u)
            arrays[f"tower{m}"] = sign * ell.T @ t_mat @ hw
        out[sector] = arrays
    return out


def _dual_side_arrays(background: Background, levels: int) -> dict:
    e_inv = np.linalg.inv(background.e_matrix)
    dual = Background(0.5 * (e_inv + e_inv.T), 0.5 * (e_inv - e_inv.T))
    eta_d = dual.metric
    ell = np.linalg.cholesky(np.linalg.inv(eta_d))
    out = {}
    for sector, kmat, sign in (("plus", dual.k_plus, 1.0), ("minus", dual.k_minus, -1.0)):
        arrays = {
            "p": sign * ell.T / SQRT2 @ eta_d,
            "x": ell.T @ kmat / SQRT2 @ np.linalg.inv(eta_d),
        }
        for m in range(1, levels + 1):
            hw = math.sqrt(m) * np.linalg.cholesky(eta_d)
            arrays[f"tower{m}"] = sign * ell.T @ hw
        out[sector] = arrays
    return out


def duality_substitution(model: StringModel) -> SubstitutionReport:
    """Rewrite the Dirac coefficients under the coupling-inversion map and
    compare with the opposite Dirac combination on the inverse background.

    The substitution sends each quadrature combination through the inverse of
    its coupling matrix (with a sector sign) and each tower operator through
    the transposed inverse, which at zero coupling amounts to swapping the
    roles of position and momentum.
    """
    subbed = _substitution_arrays(model.background, model.levels)
    dual = _dual_side_arrays(model.background, model.levels)
    residuals: dict = {}
    grams: dict = {}
    worst = 0.0
    worst_gram = 0.0
    for sector in ("plus", "minus"):
        residuals[sector] = {}
        grams[sector] = {}
        for slot, arr in subbed[sector].items():
            diff = float(np.abs(arr - dual[sector][slot]).max())
            gdiff = float(
                np.abs(arr.T @ arr - dual[sector][slot].T @ dual[sector][slot]).max()
            )
            residuals[sector][slot] = diff
            grams[sector][slot] = gdiff
            worst = max(worst, diff)
            worst_gram = max(worst_gram, gdiff)
    return SubstitutionReport(
        substituted=subbed,
        dual=dual,
        residuals=residuals,
        gram_residuals=grams,
        max_residual=worst,
        max_gram_residual=worst_gram,
    )


def sector_residuals(model: StringModel, kernel: SubspaceBasis) -> list[dict]:
    """Per-vector diagnostics classifying kernel states into sectors.

    For each kernel vector and direction the table reports the norms of the
    momentum and position actions and the residuals of the two gamma-locking
    conditions (plus family equal to minus the minus family, and the coupled
    combination through K_plus and K_minus).  No thresholds are enforced.
    """
    if kernel.kind != "vector-space":
        raise UsageError("kernel must be a vector-space basis")
    if kernel.ambient_dim != model.dim:
        raise ShapeError("kernel vectors do not live on the model space")
    n = model.background.n
    kp = model.background.k_plus
    km = model.background.k_minus
    eye_s = np.eye(model.system_space.dim)
    eye_t = np.eye(model.tower_space.dim)
    eye_spin = np.eye(model.clifford.rep_dim)

    p_full = [
        _kron4(eye_spin, model.p[i].mat, eye_t, eye_t) for i in range(n)
    ]
    x_full = [
        _kron4(eye_spin, model.x[i].mat, eye_t, eye_t) for i in range(n)
    ]
    gplus_full = [
        _kron4(model.clifford.gamma_plus[i].mat, eye_s, eye_t, eye_t)
        for i in range(n)
    ]
    gminus_full = [
        _kron4(model.clifford.gamma_minus[i].mat, eye_s, eye_t, eye_t)
        for i in range(n)
    ]

    rows = []
    for idx in range(kernel.size):
        psi = kernel.vectors[idx]
        row = {
            "vector": idx,
            "momentum_norms": [],
            "position_norms": [],
            "gamma_pair_residuals": [],
            "gamma_coupled_residuals": [],
        }
        for i in range(n):
            row["momentum_norms"].append(float(np.linalg.norm(p_full[i] @ psi)))
            row["position_norms"].append(float(np.linalg.norm(x_full[i] @ psi)))
            pair = (gplus_full[i] + gminus_full[i]) @ psi
            row["gamma_pair_residuals"].append(float(np.linalg.norm(pair)))
            coupled = np.zeros_like(psi)
            for j in range(n):
                coupled = coupled + (kp[j, i] * gplus_full[j] - km[j, i] * gminus_full[j]) @ psi
            row["gamma_coupled_residuals"].append(float(np.linalg.norm(coupled)))
        rows.append(row)
    return rows
