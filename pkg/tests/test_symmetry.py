import numpy as np
import pytest

from dfslab import (
    DomainError,
    GroupRep,
    NonClosureError,
    Operator,
    ShapeError,
    UsageError,
    build_decoherence_model,
    close_group,
    invariant_projector,
    invariant_subalgebra,
    joint_kernel,
    leakage_norm,
    parity_generators,
    restrict_to_kernel,
    symmetrize_factorized,
    symmetrize_operator,
)

GROUP_TOL = 1e-12

SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def test_parity_generator_closes_to_z2():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0]))
    group = close_group([theta])
    assert group.order == 2


def test_two_commuting_parities_close_to_klein_four():
    t1 = Operator(np.pi * np.diag([0.0, 1.0, 0.0, 1.0]))
    t2 = Operator(np.pi * np.diag([0.0, 0.0, 1.0, 1.0]))
    group = close_group([t1, t2])
    assert group.order == 4


def test_quarter_rotation_closes_to_cyclic_four():
    theta = Operator((np.pi / 2.0) * np.diag([1.0, -1.0]))
    group = close_group([theta])
    assert group.order == 4


def test_irrational_rotation_does_not_close():
    theta = Operator(np.diag([1.0, -1.0]))  # angle 1 rad, never returns to identity
    with pytest.raises(NonClosureError):
        close_group([theta], max_order=60)


def test_group_elements_are_unitary():
    theta = Operator((np.pi / 2.0) * np.diag([1.0, -1.0]))
    group = close_group([theta])
    for u in group.elements:
        assert float(np.abs(u.mat @ u.mat.conj().T - np.eye(2)).max()) < GROUP_TOL


def test_invariant_projector_selects_even_levels():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0, 3.0, 4.0]))
    proj = invariant_projector(close_group([theta]))
    assert proj.rank == 3
    expected = np.diag([1.0, 0.0, 1.0, 0.0, 1.0])
    assert float(np.abs(proj.op.mat - expected).max()) < GROUP_TOL


def test_projector_absorbs_group_elements():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0]))
    group = close_group([theta])
    proj = invariant_projector(group)
    for u in group.elements:
        assert float(np.abs(u.mat @ proj.op.mat - proj.op.mat).max()) < GROUP_TOL


def test_joint_kernel_of_number_like_generator():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0]))
    kernel = joint_kernel([theta])
    assert kernel.vectors.shape == (1, 3)
    assert abs(abs(kernel.vectors[0, 0]) - 1.0) < GROUP_TOL


def test_symmetrize_two_term_average():
    theta = Operator(np.pi * np.diag([0.0, 1.0]))
    group = close_group([theta])
    h = Operator(np.array([[0.3, 0.7], [0.7, -0.1]], dtype=complex))
    u = np.diag([1.0, -1.0])
    expected = 0.5 * (h.mat + u @ h.mat @ u)
    got = symmetrize_operator(group, h)
    assert float(np.abs(got.mat - expected).max()) < GROUP_TOL


def test_symmetrize_fixed_point():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0]))
    group = close_group([theta])
    got = symmetrize_operator(group, theta)
    assert float(np.abs(got.mat - theta.mat).max()) < GROUP_TOL


def test_factorized_average_matches_group_average():
    model = build_decoherence_model(
        k_sys=np.array([[1.0]]),
        lam_env=np.array([[1.2, 0.0], [0.0, 0.8]]),
        w_int=np.array([[0.4, 0.25]]),
        n_max=1,
    )
    gens = parity_generators(model)
    group = close_group(gens)
    assert group.order == 4
    direct = symmetrize_operator(group, model.h_total)
    fast = symmetrize_factorized(model.h_total, gens)
    assert float(np.abs(direct.mat - fast.mat).max()) < 1e-12


def test_factorized_average_kills_interaction():
    model = build_decoherence_model(
        k_sys=np.array([[1.0]]),
        lam_env=np.array([[1.0]]),
        w_int=np.array([[0.3]]),
        n_max=3,
    )
    sym = symmetrize_factorized(model.h_int, parity_generators(model))
    assert float(np.abs(sym.mat).max()) < 1e-12


def test_factorized_rejects_non_involutive_generator():
    theta = Operator(np.diag([0.0, 1.0]))  # exp(i theta) squares to diag(1, e^{2i})
    h = Operator(np.eye(2, dtype=complex))
    with pytest.raises(DomainError):
        symmetrize_factorized(h, [theta])


def test_invariant_subalgebra_of_zero_generator_is_everything():
    group = close_group([Operator(np.zeros((3, 3)))])
    basis = invariant_subalgebra(group)
    assert len(basis.vectors) == 9


def test_invariant_subalgebra_of_three_level_parity():
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0]))
    basis = invariant_subalgebra(close_group([theta]))
    assert len(basis.vectors) == 3


def test_invariant_subalgebra_of_spin_generator():
    group = close_group([Operator(np.pi * SY)])
    basis = invariant_subalgebra(group)
    assert len(basis.vectors) == 2
    # the span must contain sigma_y itself
    assert basis.residual(SY.reshape(-1) / np.sqrt(2.0)) < 1e-10


def test_restrict_to_kernel_compresses_diagonal():
    h = Operator(np.diag([1.0, 2.0, 3.0]))
    kernel = joint_kernel([Operator(np.diag([0.0, 0.0, 5.0]))])
    small = restrict_to_kernel(h, kernel)
    assert small.dim == 2
    eigs = np.sort(np.linalg.eigvalsh(small.mat))
    assert np.allclose(eigs, [1.0, 2.0], atol=1e-12)


def test_leakage_norm_detects_off_block_coupling():
    h = Operator(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
    kernel = joint_kernel([Operator(np.diag([0.0, 3.0]))])
    assert leakage_norm(h, kernel) == pytest.approx(1.0, abs=1e-12)
    h_safe = Operator(np.diag([2.0, 5.0]))
    assert leakage_norm(h_safe, kernel) < 1e-14


def test_restrict_requires_matching_dims():
    h = Operator(np.diag([1.0, 2.0]))
    kernel = joint_kernel([Operator(np.diag([0.0, 0.0, 5.0]))])
    with pytest.raises(ShapeError):
        restrict_to_kernel(h, kernel)


def test_invariant_subalgebra_requires_generators():
    group = GroupRep(elements=(Operator(np.eye(2, dtype=complex)),), generators=())
    with pytest.raises(UsageError):
        invariant_subalgebra(group)
