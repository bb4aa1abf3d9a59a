"""Seeded invariants that cut across modules.

Each test draws a handful of random instances with a fixed counter-based
generator, so failures reproduce bit-for-bit on any platform.
"""

import numpy as np
import pytest

from dfslab import (
    Background,
    ChargeVector,
    DensityMatrix,
    Operator,
    StateFunctional,
    commutant_basis,
    connes_distance,
    fidelity,
    identity_element,
    make_diagonal_triple,
    narain_energy,
    onn_apply,
    onn_generators,
    pure_state,
    symmetrize_operator,
    close_group,
    tensor,
    transform_charges,
)
from dfslab.reporting import canonical_json


def gen(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return m + m.conj().T


def random_density(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    return DensityMatrix(Operator(rho / np.trace(rho)))


def random_unitary(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def diagonal_dirac(rng, n):
    d = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = rng.uniform(0.4, 1.2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            d[j, i] = np.conj(d[i, j])
    return Operator(d)


def test_distance_is_symmetric_and_scales():
    rng = gen(101)
    for _ in range(3):
        triple = make_diagonal_triple(3, diagonal_dirac(rng, 3))
        p = StateFunctional(DensityMatrix(Operator(np.diag(rng.dirichlet(np.ones(3)).astype(complex)))))
        q = StateFunctional(DensityMatrix(Operator(np.diag(rng.dirichlet(np.ones(3)).astype(complex)))))
        d_pq = connes_distance(triple, p, q).value
        d_qp = connes_distance(triple, q, p).value
        assert d_pq == pytest.approx(d_qp, rel=1e-5, abs=1e-8)
        doubled = make_diagonal_triple(3, Operator(2.0 * triple.dirac.mat))
        d2 = connes_distance(doubled, p, q).value
        assert d2 == pytest.approx(d_pq / 2.0, rel=1e-5)


def test_fidelity_is_unitary_invariant_and_bounded():
    rng = gen(102)
    for _ in range(5):
        rho = random_density(rng, 3)
        sigma = random_density(rng, 3)
        f = fidelity(rho, sigma)
        assert -1e-12 <= f <= 1.0 + 1e-12
        u = random_unitary(rng, 3)
        rho_u = DensityMatrix(Operator(u @ rho.op.mat @ u.conj().T))
        sigma_u = DensityMatrix(Operator(u @ sigma.op.mat @ u.conj().T))
        assert fidelity(rho_u, sigma_u) == pytest.approx(f, abs=1e-9)
        assert fidelity(rho, sigma) == pytest.approx(fidelity(sigma, rho), abs=1e-9)


def test_tensor_is_associative():
    rng = gen(103)
    a = Operator(random_hermitian(rng, 2))
    b = Operator(random_hermitian(rng, 3))
    c = Operator(random_hermitian(rng, 2))
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    # entries are a*b*c grouped two ways, so allow the last ulp
    assert float(np.abs(left.mat - right.mat).max()) < 1e-13


def test_commutant_is_adjoint_closed_and_unital():
    rng = gen(104)
    for _ in range(3):
        g = Operator(random_hermitian(rng, 3))
        basis = commutant_basis([g], 3)
        eye_flat = np.eye(3, dtype=complex).reshape(-1) / np.sqrt(3.0)
        assert basis.residual(eye_flat) < 1e-10
        for row in basis.vectors:
            adj = row.reshape(3, 3).conj().T.reshape(-1)
            assert basis.residual(adj / np.linalg.norm(adj)) < 1e-10


def test_symmetrized_operator_commutes_with_the_group():
    rng = gen(105)
    theta = Operator(np.pi * np.diag([0.0, 1.0, 2.0, 3.0]))
    group = close_group([theta])
    h = Operator(random_hermitian(rng, 4))
    avg = symmetrize_operator(group, h)
    for u in group.elements:
        assert float(np.abs(u.mat @ avg.mat - avg.mat @ u.mat).max()) < 1e-12
    # averaging twice changes nothing
    again = symmetrize_operator(group, avg)
    assert float(np.abs(again.mat - avg.mat).max()) < 1e-12


def test_narain_energy_invariant_under_random_words():
    rng = gen(106)
    bg = Background(
        np.array([[1.0, 0.25], [0.25, 1.75]]),
        np.array([[0.0, 0.5], [-0.5, 0.0]]),
    )
    gens = onn_generators(2)
    for _ in range(10):
        word = identity_element(2)
        for k in rng.integers(0, len(gens), size=int(rng.integers(1, 5))):
            word = word.compose(gens[k])
        moved = onn_apply(word, bg)
        for _ in range(5):
            cv = ChargeVector(rng.integers(-3, 4, size=2), rng.integers(-3, 4, size=2))
            before = narain_energy(bg, cv.m, cv.w)
            out = transform_charges(word, cv)
            after = narain_energy(moved, out.m, out.w)
            assert abs(before - after) < 1e-9


def test_canonical_json_is_stable_and_key_sorted():
    payload = {
        "zeta": [1, 2, {"b": 0.1, "a": complex(1, -2)}],
        "alpha": np.arange(4).reshape(2, 2),
        "flag": True,
        "neg": -0.0,
    }
    one = canonical_json(payload)
    two = canonical_json(payload)
    assert one == two
    assert one.index('"alpha"') < one.index('"flag"') < one.index('"neg"') < one.index('"zeta"')
    assert "-0.0" not in one
    with pytest.raises(ValueError):
        canonical_json({"bad": float("nan")})
