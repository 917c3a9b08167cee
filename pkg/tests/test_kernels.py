import numpy as np
import pytest

from detchain import (
    ShapeError,
    StateError,
    WeightSet,
    build_K,
    build_g,
    check_kernel,
    compose_w,
    dual_bases,
    factorization_residual,
    from_tables,
    kernel_via_inverse,
    make_discrete_grid,
)
from detchain.instances import random_discrete_instance

from .conftest import seeded_chain, two_point_chain


def plain_parts(tables):
    zeros = WeightSet.zeros(tables.grids)
    bases = dual_bases(tables, zeros)
    return zeros, bases, build_K(bases), build_g(tables, zeros)


def test_build_K_rank_one_trace():
    tables = two_point_chain()
    zeros, bases, K, _ = plain_parts(tables)
    block = K.block(1, 1)
    assert np.linalg.matrix_rank(block) == 1
    mu = tables.grids[0].weights
    assert abs(float(np.sum(np.diag(block) * mu)) - 1.0) < 1e-14


def test_build_K_blocks_have_rank_at_most_N():
    tables, ws = random_discrete_instance(3, m=3, N=2, sizes=(4, 5, 6))
    _, _, K, _ = plain_parts(tables)
    for i in range(1, 4):
        for j in range(1, 4):
            assert np.linalg.matrix_rank(K.block(i, j)) <= 2
    assert K.rank == 2


def test_build_K_matches_inverse_construction():
    tables, ws = random_discrete_instance(5, m=2, N=2)
    bases = dual_bases(tables, ws)
    built = build_K(bases)
    via_inv = kernel_via_inverse(tables, ws)
    scale = max(1.0, built.max_abs())
    for i in range(1, 3):
        for j in range(1, 3):
            diff = np.max(np.abs(built.block(i, j) - via_inv.block(i, j)))
            assert diff <= 1e-12 * scale


def test_build_g_single_level_is_zero():
    tables = two_point_chain()
    g = build_g(tables, WeightSet.zeros(tables.grids))
    assert g.blocks[0][0] is None
    np.testing.assert_array_equal(g.block(1, 1), np.zeros((2, 2)))


def test_build_g_two_levels():
    tables = seeded_chain(7, m=2, n=2, sizes=(3, 4))
    g = build_g(tables, WeightSet.zeros(tables.grids))
    np.testing.assert_array_equal(g.block(2, 1), tables.g_values[0])
    assert g.blocks[0][1] is None and g.blocks[0][0] is None


def test_build_g_three_levels_plain_composite():
    tables = seeded_chain(9, m=3, n=2, sizes=(3, 4, 5))
    g = build_g(tables, WeightSet.zeros(tables.grids))
    g21, g32 = tables.g_values
    mu2 = tables.grids[1].weights
    np.testing.assert_allclose(g.block(3, 1), g32 @ (mu2[:, None] * g21), rtol=1e-14)


def test_check_kernel_subtracts_lower_blocks_only():
    tables = seeded_chain(11, m=2, n=2, sizes=(4, 4))
    zeros, bases, K, g = plain_parts(tables)
    Kc = check_kernel(K, g)
    assert Kc.checked
    np.testing.assert_array_equal(Kc.block(1, 1), K.block(1, 1))
    np.testing.assert_array_equal(Kc.block(1, 2), K.block(1, 2))
    np.testing.assert_allclose(Kc.block(2, 1),
                               K.block(2, 1) - tables.g_values[0], rtol=1e-14)


def test_check_kernel_single_level_identity():
    tables = two_point_chain()
    zeros, bases, K, g = plain_parts(tables)
    Kc = check_kernel(K, g)
    np.testing.assert_array_equal(Kc.block(1, 1), K.block(1, 1))


def test_check_kernel_rejects_checked_input():
    tables = two_point_chain()
    zeros, bases, K, g = plain_parts(tables)
    Kc = check_kernel(K, g)
    with pytest.raises(StateError):
        check_kernel(Kc, g)


def test_compose_with_zero_weights_vanishes():
    tables, _ = random_discrete_instance(13, m=2, N=2)
    zeros, bases, K, g = plain_parts(tables)
    out = compose_w(K, zeros, K)
    for i in range(1, 3):
        for j in range(1, 3):
            np.testing.assert_array_equal(out.block(i, j), np.zeros_like(out.block(i, j)))


def test_projection_idempotence_under_full_weights():
    tables = seeded_chain(15, m=1, n=3, sizes=(6,))
    zeros, bases, K, g = plain_parts(tables)
    ones = WeightSet.ones(tables.grids)
    KK = compose_w(K, ones, K)
    assert np.max(np.abs(KK.block(1, 1) - K.block(1, 1))) <= 1e-11 * max(1.0, K.max_abs())


def test_compose_associativity():
    tables, ws = random_discrete_instance(17, m=3, N=2)
    bases = dual_bases(tables, ws)
    K = build_K(bases)
    g = build_g(tables, ws)
    left = compose_w(compose_w(K, ws, g), ws, K)
    right = compose_w(K, ws, compose_w(g, ws, K))
    scale = max(1.0, K.max_abs()) ** 2
    for i in range(1, 4):
        for j in range(1, 4):
            assert np.max(np.abs(left.block(i, j) - right.block(i, j))) <= 1e-11 * scale


def test_compose_rejects_mismatched_grids():
    t1 = seeded_chain(19, m=2, n=2, sizes=(4, 4))
    t2 = seeded_chain(20, m=2, n=2, sizes=(4, 5))
    _, _, K1, _ = plain_parts(t1)
    _, _, K2, _ = plain_parts(t2)
    with pytest.raises(ShapeError):
        compose_w(K1, WeightSet.zeros(t1.grids), K2)


def test_kernel_via_inverse_scalar_example():
    tables = two_point_chain()
    K = kernel_via_inverse(tables, WeightSet.zeros(tables.grids))
    np.testing.assert_allclose(K.block(1, 1), np.full((2, 2), 0.5))


def test_kernel_via_inverse_identity_pairing():
    grid = make_discrete_grid([0.0, 1.0], [1.0, 1.0])
    tables = from_tables([grid], np.eye(2), np.eye(2), [])
    K = kernel_via_inverse(tables, WeightSet.zeros([grid]))
    np.testing.assert_allclose(K.block(1, 1),
                               tables.f_values.T @ tables.h_values, atol=1e-14)


def test_factorization_residual_vacuous_single_level():
    tables = two_point_chain()
    zeros, bases, K, g = plain_parts(tables)
    assert factorization_residual(K, g, tables, zeros) == 0.0


@pytest.mark.parametrize("weighted", [False, True])
def test_factorization_residual_seeded(weighted):
    tables, ws = random_discrete_instance(23, m=3, N=2)
    if not weighted:
        ws = WeightSet.zeros(tables.grids)
    bases = dual_bases(tables, ws)
    K = build_K(bases)
    g = build_g(tables, ws)
    assert factorization_residual(K, g, tables, ws) <= 1e-11 * max(1.0, K.max_abs())


def test_projection_property_on_dual_rows():
    tables, ws = random_discrete_instance(29, m=3, N=2)
    bases = dual_bases(tables, ws)
    K = build_K(bases)
    for level in range(tables.m):
        e = tables.grids[level].weights * (1 - ws.w[level])
        block = K.block(level + 1, level + 1)
        projected = block @ (e[:, None] * bases.psi[level].T)
        assert np.max(np.abs(projected - bases.psi[level].T)) <= 1e-10 * max(1.0, K.max_abs())
        projected_t = block.T @ (e[:, None] * bases.phi[level].T)
        assert np.max(np.abs(projected_t - bases.phi[level].T)) <= 1e-10 * max(1.0, K.max_abs())
