"""End-to-end benchmark runs: Poisson, Laplace eigenvalue, H(rot), complex check.

Every run refines an initial mesh by bisection and records one
:class:`ConvergenceReport` row per level. The first row is always the 8x8
grid, matching the tabulated reference results.
"""

from pathlib import Path

import numpy as np

from . import assembly as asm
from .derham import (DENSE_LIMIT, consistency_h1_dual_norm,
                     consistency_rot_dual_norm, exactness_check, max_hat_jump)
from .errors import TooLargeForDense
from .interpolation import FeFunction, commutativity_residual
from .mesh import (DEFAULT_TRAPEZOID_OFFSET, POISSON_DOMAIN, four_trapezoid_square,
                   initial_quad_domain, refine_n, refinement_sequence,
                   split_to_triangles, uniform_square_mesh)
from .problems import (LAPLACE_EIGENVALUE, consistency_test_fields,
                       hrot_polynomial, laplace_eigen_square, poisson_polynomial)
from .report import ConvergenceReport, emit_plot, observed_orders, write_csv

MAX_LEVELS = 8
GRIDS = ("quad", "tri")


def _check_levels(levels):
    if not 1 <= int(levels) <= MAX_LEVELS:
        raise ValueError(f"levels must lie in [1, {MAX_LEVELS}], got {levels}")
    return int(levels)


def _check_grid(grid):
    if grid not in GRIDS:
        raise ValueError(f"grid must be one of {GRIDS}, got {grid!r}")


def poisson_meshes(levels):
    """The skewed benchmark domain at 8x8, 16x16, ... (``levels`` meshes)."""
    return refinement_sequence(refine_n(initial_quad_domain(POISSON_DOMAIN), 3), levels)


def trapezoid_meshes(levels, offset=DEFAULT_TRAPEZOID_OFFSET):
    """The four-trapezoid unit square at 8x8, 16x16, ..."""
    return refinement_sequence(refine_n(four_trapezoid_square(offset), 2), levels)


def save_outputs(report, out, stem):
    """Write ``<stem>.csv`` and, with two or more rows, ``<stem>.svg``."""
    if out is None:
        return []
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / f"{stem}.csv"]
    write_csv(report, written[0])
    if len(report) >= 2:
        written.append(emit_plot(report, out / f"{stem}.svg"))
    return written


def run_poisson(levels, grid="quad", out=None, quad_degree=None, tol=1e-10):
    levels = _check_levels(levels)
    _check_grid(grid)
    prob = poisson_polynomial()
    deg = quad_degree or asm.LOAD_DEGREE
    element = "QBL" if grid == "quad" else "Courant P1"
    rep = ConvergenceReport("poisson", element, "skewed quadrilateral", prob.expr,
                            ["h1_broken", "l2"])
    for mesh in poisson_meshes(levels):
        if grid == "quad":
            u_h = FeFunction("QBL", asm.cg_solve(asm.assemble_poisson(mesh, prob.source, deg), tol),
                             mesh)
            err = asm.error_norms(u_h, prob.u, prob.grad, deg)
            rep.add_row(mesh.grid_label, mesh.h, mesh.n_vertices,
                        h1_broken=err.h1_broken, l2=err.l2)
        else:
            tri = split_to_triangles(mesh)
            u_h = asm.cg_solve(asm.assemble_courant(tri, prob.source, deg), tol)
            err = asm.courant_error_norms(tri, u_h, prob.u, prob.grad, deg)
            rep.add_row(tri.grid_label, tri.h, len(tri.vertices),
                        h1_broken=err.h1_broken, l2=err.l2)
    save_outputs(rep, out, f"poisson_{grid}")
    return rep


def run_eigen(levels, grid="quad", offset=DEFAULT_TRAPEZOID_OFFSET, out=None, tol=1e-10):
    levels = _check_levels(levels)
    _check_grid(grid)
    element = "QBL" if grid == "quad" else "Courant P1"
    rep = ConvergenceReport("eigen", element, f"trapezoid square (offset {offset})",
                            laplace_eigen_square().expr, ["eig_error"])
    lams = []
    for mesh in trapezoid_meshes(levels, offset):
        if grid == "quad":
            A, M = asm.assemble_stiffness_qbl(mesh), asm.assemble_mass_qbl(mesh)
            free = np.flatnonzero(~mesh.boundary_vertices)
            h, label = mesh.h, mesh.grid_label
        else:
            tri = split_to_triangles(mesh)
            A, M = asm.assemble_courant_matrices(tri)
            free = np.flatnonzero(~tri.boundary_vertices)
            h, label = tri.h, tri.grid_label
        A = A[free][:, free].tocsr()
        M = M[free][:, free].tocsr()
        res = asm.smallest_eigenpair(A, M, tol=tol)
        lams.append(res.eigenvalue)
        rep.add_row(label, h, len(free), eig_error=abs(res.eigenvalue - LAPLACE_EIGENVALUE))
    rep.extra["eigenvalues"] = lams
    save_outputs(rep, out, f"eigen_{grid}")
    return rep


def run_hrot(levels, offset=DEFAULT_TRAPEZOID_OFFSET, out=None, quad_degree=None, tol=1e-10):
    levels = _check_levels(levels)
    prob = hrot_polynomial()
    deg = quad_degree or asm.LOAD_DEGREE
    rep = ConvergenceReport("hrot", "QRT", f"trapezoid square (offset {offset})",
                            prob.expr, ["l2", "rot_semi", "rot_full"])
    for mesh in trapezoid_meshes(levels, offset):
        s_h = FeFunction("QRT", asm.cg_solve(asm.assemble_hrot(mesh, prob.source, deg), tol),
                         mesh)
        err = asm.error_norms(s_h, prob.sigma, prob.rot, deg)
        rep.add_row(mesh.grid_label, mesh.h, mesh.n_edges,
                    l2=err.l2, rot_semi=err.rot_semi, rot_full=err.rot_full)
    save_outputs(rep, out, "hrot")
    return rep


def run_complex_check(levels, offset=DEFAULT_TRAPEZOID_OFFSET, out=None):
    """Text report on exactness, commutativity, consistency and conformity.

    Meshes are the trapezoid square from 2x2 upward plus an equally fine
    uniform grid. Dense ranks limit the finest mesh to ``DENSE_LIMIT`` edges.
    """
    levels = _check_levels(levels)
    meshes = list(refinement_sequence(four_trapezoid_square(offset), levels))
    if meshes[-1].n_edges > DENSE_LIMIT:
        raise TooLargeForDense(f"{meshes[-1].n_edges} edges exceed dense limit "
                               f"{DENSE_LIMIT}; use fewer levels")
    zeta, _, w, _ = consistency_test_fields()
    u = poisson_polynomial()
    lines = [f"discrete complex check, trapezoid offset {offset}"]
    lines.append(f"{'grid':>7} {'kind':>13} {'dims':>16} {'ranks':>10} {'exact':>6} "
                 f"{'exact_bc':>8} {'comm_grad':>10} {'E_h1':>10} {'E_rot':>10} "
                 f"{'max_jump':>9}")
    e1, e2, hs = [], [], []
    for mesh in meshes:
        para = uniform_square_mesh(mesh.base_cells_per_side * 2**mesh.level)
        for kind, m in (("trapezoid", mesh), ("parallelogram", para)):
            r = exactness_check(m)
            rb = exactness_check(m, with_boundary_conditions=True)
            c = commutativity_residual(m, u.u, u.grad)
            eh1 = consistency_h1_dual_norm(m, zeta)
            erot = consistency_rot_dual_norm(m, w)
            jump = max_hat_jump(m)
            if kind == "trapezoid":
                e1.append(eh1)
                e2.append(erot)
                hs.append(m.h)
            dims = f"({r.dim_qbl},{r.dim_qrt},{r.dim_w})"
            ranks = f"{r.rank_grad},{r.rank_rot}"
            lines.append(f"{m.grid_label:>7} {kind:>13} {dims:>16} {ranks:>10} "
                         f"{str(r.exact):>6} {str(rb.exact):>8} "
                         f"{c.grad / c.scale:10.2e} {eh1:10.3e} {erot:10.3e} {jump:9.3e}")
    if len(hs) >= 2:
        o1 = observed_orders(hs, e1)[1:]
        o2 = observed_orders(hs, e2)[1:]
        lines.append("consistency decay orders (trapezoid): E_h1 "
                     + " ".join(f"{o:.2f}" for o in o1)
                     + "; E_rot " + " ".join(f"{o:.2f}" for o in o2))
    text = "\n".join(lines) + "\n"
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "complex_check.txt").write_text(text)
    return text
