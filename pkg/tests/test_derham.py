import numpy as np
import pytest

from quadcomplex.derham import (consistency_h1, consistency_h1_dual_norm,
                                consistency_h1_vector, consistency_h1_volume,
                                consistency_rot, consistency_rot_dual_norm,
                                consistency_rot_volume, exactness_check, gradient_matrix,
                                max_hat_jump, qbl_trace_jumps, read_coo, rot_matrix,
                                write_coo)
from quadcomplex.errors import TooLargeForDense
from quadcomplex.interpolation import FeFunction, interp_qbl, interp_qrt
from quadcomplex.mesh import (UNIT_SQUARE, four_trapezoid_square, initial_quad_domain,
                              refine_n, uniform_square_mesh)
from quadcomplex.problems import consistency_test_fields

SKEW_PARALLELOGRAM = ((0, 0), (2, 0.5), (2.5, 2), (0.5, 1.5))


@pytest.fixture(scope="module")
def trap():
    return refine_n(four_trapezoid_square(0.125), 1)


def test_gradient_of_constants_vanishes(trap):
    G = gradient_matrix(trap)
    np.testing.assert_allclose(G @ np.ones(trap.n_vertices), 0, atol=1e-14)


def test_single_square_gradient_rank():
    G = gradient_matrix(initial_quad_domain(UNIT_SQUARE)).toarray()
    assert G.shape == (4, 4)
    assert np.linalg.matrix_rank(G) == 3


def test_composition_is_zero(trap):
    RG = (rot_matrix(trap) @ gradient_matrix(trap)).toarray()
    assert np.abs(RG).max() < 1e-13 * np.abs(rot_matrix(trap)).max()


def test_rot_of_constant_field_is_zero(trap):
    c = np.array([0.4, 1.7])
    s = interp_qrt(trap, lambda p: np.broadcast_to(c, p.shape))
    np.testing.assert_allclose(rot_matrix(trap) @ s.dofs, 0, atol=1e-13)


def test_rot_matrix_surjective_on_2x2():
    R = rot_matrix(uniform_square_mesh(2)).toarray()
    assert np.linalg.matrix_rank(R) == 4


def test_single_cell_complex():
    r = exactness_check(initial_quad_domain(UNIT_SQUARE))
    assert (r.dim_qbl, r.dim_qrt, r.dim_w) == (4, 4, 1)
    assert r.rank_grad == 3 and r.kernel_rot == 3 and r.exact


@pytest.mark.parametrize("mesh_fn", [
    lambda: four_trapezoid_square(0.125),
    lambda: refine_n(four_trapezoid_square(0.3), 2),
    lambda: uniform_square_mesh(3, SKEW_PARALLELOGRAM),
])
@pytest.mark.parametrize("bc", [False, True])
def test_exactness(mesh_fn, bc):
    m = mesh_fn()
    r = exactness_check(m, with_boundary_conditions=bc)
    assert r.grad_kernel_ok and r.middle_exact and r.rot_onto and r.euler_ok
    assert r.exact
    if not bc:
        assert (r.dim_qbl, r.dim_qrt, r.dim_w) == (m.n_vertices, m.n_edges, m.n_cells)
    else:
        assert r.kernel_grad == 0


def test_euler_identity_on_8x8_trapezoid():
    m = refine_n(four_trapezoid_square(), 2)
    r = exactness_check(m)
    assert r.dim_qrt == r.dim_qbl + r.dim_w - 1 and r.exact


def test_dense_limit():
    with pytest.raises(TooLargeForDense):
        exactness_check(refine_n(four_trapezoid_square(), 5))


def test_coo_round_trip(tmp_path, trap):
    G = gradient_matrix(trap)
    write_coo(G, tmp_path / "g.coo")
    back = read_coo(tmp_path / "g.coo")
    assert back.shape == G.shape
    assert abs(back - G).max() == 0


def _zero_trace_v(mesh, seed=0):
    rng = np.random.default_rng(seed)
    d = np.where(mesh.boundary_vertices, 0.0, rng.normal(size=mesh.n_vertices))
    return FeFunction("QBL", d, mesh)


def _zero_trace_tau(mesh, seed=0):
    rng = np.random.default_rng(seed)
    d = np.where(mesh.boundary_edges, 0.0, rng.normal(size=mesh.n_edges))
    return FeFunction("QRT", d, mesh)


def test_edge_and_volume_forms_agree(trap):
    zeta, div, w, grad_w = consistency_test_fields()
    for seed in range(3):
        v = _zero_trace_v(trap, seed)
        e, vol = consistency_h1(trap, zeta, v), consistency_h1_volume(trap, zeta, div, v)
        assert abs(e - vol) <= 1e-10 * max(abs(vol), 1e-300)
        t = _zero_trace_tau(trap, seed)
        e, vol = consistency_rot(trap, w, t), consistency_rot_volume(trap, w, grad_w, t)
        assert abs(e - vol) <= 1e-10 * max(abs(vol), 1e-300)


def test_functionals_vanish_on_parallelograms():
    zeta, _, w, _ = consistency_test_fields()
    for m in (uniform_square_mesh(4), uniform_square_mesh(4, SKEW_PARALLELOGRAM)):
        v = _zero_trace_v(m)
        t = _zero_trace_tau(m)
        # fields and test functions are O(1), so absolute and relative scales coincide
        assert abs(consistency_h1(m, zeta, v)) <= 1e-12
        assert abs(consistency_rot(m, w, t)) <= 1e-12
        assert consistency_h1_dual_norm(m, zeta) <= 1e-12
        assert consistency_rot_dual_norm(m, w) <= 1e-12
        # boundary vertices included: parallelogram cells contribute nothing at all
        assert np.abs(consistency_h1_vector(m, zeta)).max() <= 1e-12


def test_functionals_nonzero_on_trapezoids(trap):
    zeta, _, w, _ = consistency_test_fields()
    assert consistency_h1_dual_norm(trap, zeta) > 1e-4
    assert consistency_rot_dual_norm(trap, w) > 1e-4


def test_nonconformity_witness():
    m = four_trapezoid_square(0.125)
    assert max_hat_jump(m) > 1e-3
    for par in (uniform_square_mesh(4), uniform_square_mesh(3, SKEW_PARALLELOGRAM)):
        assert max_hat_jump(par) <= 1e-12


def test_trace_jumps_of_smooth_interpolant(trap):
    u = interp_qbl(trap, lambda p: p[..., 0] ** 2 * p[..., 1])
    jumps = qbl_trace_jumps(u)
    assert np.all(np.isnan(jumps[trap.boundary_edges]))
    assert np.nanmax(jumps) > 0
    lin = interp_qbl(trap, lambda p: 1 + p[..., 0] - 2 * p[..., 1])
    assert np.nanmax(qbl_trace_jumps(lin)) < 1e-12
