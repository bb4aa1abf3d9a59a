import numpy as np
import pytest

from dfslab import (
    BudgetError,
    DomainError,
    Operator,
    ShapeError,
    SubspaceBasis,
    UsageError,
    commutant_basis,
    commutator,
    eig_hermitian,
    kernel_basis,
    operator_norm,
    tensor,
    unitary_exp,
)

TOL = 1e-12

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def test_operator_rejects_non_square():
    with pytest.raises(ShapeError):
        Operator(np.zeros((2, 3)))


def test_operator_rejects_non_finite():
    with pytest.raises(DomainError):
        Operator(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_operator_matrix_is_write_protected():
    op = Operator(np.eye(2))
    with pytest.raises(ValueError):
        op.mat[0, 0] = 5.0


def test_operator_dimension_mismatch():
    with pytest.raises(ShapeError):
        Operator(np.eye(2)) + Operator(np.eye(3))


def test_tensor_of_identities():
    out = tensor(Operator.identity(2), Operator.identity(3))
    assert np.array_equal(out.mat, np.eye(6))


def test_tensor_first_factor_slowest():
    out = tensor(Operator(np.diag([0.0, 1.0])), Operator.identity(2))
    assert np.array_equal(np.diag(out.mat), np.array([0, 0, 1, 1], dtype=complex))


def test_tensor_entrywise():
    a = Operator(SX)
    b = Operator(np.diag([1.0, 2.0]))
    out = tensor(a, b).mat
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 2] = 1.0
    expected[1, 3] = 2.0
    expected[2, 0] = 1.0
    expected[3, 1] = 2.0
    assert np.abs(out - expected).max() == 0.0


def test_tensor_mixed_product_rule():
    rng = np.random.Generator(np.random.Philox(11))
    a, b, c, d = (
        Operator(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        for _ in range(4)
    )
    lhs = tensor(a, b) @ tensor(c, d)
    rhs = tensor(a @ c, b @ d)
    assert np.abs(lhs.mat - rhs.mat).max() < 1e-12


def test_tensor_budget():
    big = Operator.identity(64)
    tensor(big, Operator.identity(64))  # exactly at the cap
    with pytest.raises(BudgetError):
        tensor(big, Operator.identity(65))


def test_commutator_paulis():
    out = commutator(Operator(SX), Operator(SY))
    assert np.abs(out.mat - 2j * SZ).max() < TOL


def test_operator_norm_diagonal():
    assert operator_norm(Operator(np.diag([3.0, -4.0]))) == pytest.approx(4.0, abs=TOL)


def test_operator_norm_nilpotent():
    assert operator_norm(Operator(np.array([[0.0, 1.0], [0.0, 0.0]]))) == pytest.approx(1.0, abs=TOL)


def test_operator_norm_power_iteration_oracle():
    """Independent estimate: power iteration on A^dag A."""
    rng = np.random.Generator(np.random.Philox(12))
    for _ in range(5):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        gram = a.conj().T @ a
        v = rng.normal(size=6) + 1j * rng.normal(size=6)
        for _ in range(500):
            v = gram @ v
            v /= np.linalg.norm(v)
        oracle = np.sqrt(np.real(v.conj() @ gram @ v))
        assert operator_norm(Operator(a)) == pytest.approx(oracle, rel=1e-9)


def test_eig_hermitian_diagonal():
    vals, basis = eig_hermitian(Operator(np.diag([2.0, -1.0, 0.5])))
    assert np.allclose(np.sort(vals), [-1.0, 0.5, 2.0])
    assert basis.size == 3


def test_eig_hermitian_reconstruction_and_phase():
    rng = np.random.Generator(np.random.Philox(13))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = Operator(a + a.conj().T)
    vals, basis = eig_hermitian(h)
    recon = sum(
        val * np.outer(vec, vec.conj()) for val, vec in zip(vals, basis.vectors)
    )
    assert np.abs(recon - h.mat).max() < 1e-10
    for vec in basis.vectors:
        lead = vec[int(np.argmax(np.abs(vec)))]
        assert abs(lead.imag) < 1e-10
        assert lead.real > 0


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eig_hermitian(Operator(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_kernel_basis_diagonal():
    basis = kernel_basis(Operator(np.diag([0.0, 0.0, 3.0])))
    assert basis.size == 2
    proj = basis.projector().mat
    assert np.abs(proj - np.diag([1.0, 1.0, 0.0])).max() < TOL


def test_kernel_basis_invertible_is_empty():
    assert kernel_basis(Operator(np.diag([1.0, 2.0]))).size == 0


def test_kernel_basis_rank_deficient_product():
    rng = np.random.Generator(np.random.Philox(14))
    b = rng.normal(size=(5, 2))
    c = rng.normal(size=(2, 5))
    op = Operator(b @ c)
    basis = kernel_basis(op)
    assert basis.size == 3
    sigma_max = operator_norm(op)
    for vec in basis.vectors:
        assert np.linalg.norm(op.mat @ vec) <= 1e-10 * sigma_max * np.sqrt(5)


def test_commutant_of_identity_is_everything():
    basis = commutant_basis([Operator.identity(3)], 3)
    assert basis.size == 9


def test_commutant_of_sigma_z_is_diagonal():
    basis = commutant_basis([Operator(SZ)], 2)
    assert basis.size == 2
    for mat in basis.matrices():
        off = mat.mat - np.diag(np.diag(mat.mat))
        assert np.abs(off).max() < TOL


def test_commutant_schur_scalars():
    # sigma_x and sigma_z generate an irreducible action, so only scalars commute.
    basis = commutant_basis([Operator(SX), Operator(SZ)], 2)
    assert basis.size == 1
    mat = basis.matrices()[0].mat
    assert np.abs(mat - mat[0, 0] * np.eye(2)).max() < TOL


def test_commutant_contains_identity_and_is_adjoint_closed():
    basis = commutant_basis([Operator(SZ)], 2)
    eye = np.eye(2, dtype=complex)
    assert basis.residual(eye / np.linalg.norm(eye)) < 1e-10
    for mat in basis.matrices():
        adj = mat.mat.conj().T
        assert basis.residual(adj / np.linalg.norm(adj)) < 1e-10


def test_unitary_exp_zero():
    assert np.array_equal(unitary_exp(Operator.zeros(3)).mat, np.eye(3))


def test_unitary_exp_pauli_z():
    out = unitary_exp(Operator(np.pi * SZ))
    assert np.abs(out.mat + np.eye(2)).max() < TOL


def test_unitary_exp_is_unitary():
    rng = np.random.Generator(np.random.Philox(15))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u = unitary_exp(Operator(a + a.conj().T)).mat
    assert np.abs(u.conj().T @ u - np.eye(4)).max() < TOL


def test_subspace_basis_rejects_non_orthonormal():
    rows = np.array([[1.0, 0.0], [1.0, 0.0]], dtype=complex)
    with pytest.raises(DomainError):
        SubspaceBasis(2, rows, "vector-space")


def test_subspace_basis_rejects_zero_row():
    rows = np.array([[0.0, 0.0]], dtype=complex)
    with pytest.raises(DomainError):
        SubspaceBasis(2, rows, "vector-space")


def test_subspace_basis_projector_idempotent():
    rows = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], dtype=complex)
    basis = SubspaceBasis(3, rows, "vector-space")
    p = basis.projector().mat
    assert np.abs(p @ p - p).max() < TOL


def test_subspace_basis_residual_split():
    rows = np.array([[1.0, 0.0, 0.0]], dtype=complex)
    basis = SubspaceBasis(3, rows, "vector-space")
    assert basis.residual(np.array([2.0, 0.0, 0.0])) < TOL
    assert basis.residual(np.array([0.0, 1.0, 0.0])) == pytest.approx(1.0, abs=TOL)


def test_subspace_basis_unknown_kind():
    with pytest.raises(UsageError):
        SubspaceBasis(2, np.array([[1.0, 0.0]], dtype=complex), "nonsense")
