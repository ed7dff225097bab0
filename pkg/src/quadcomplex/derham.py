"""Matrix form of the discrete complex QBL -> QRT -> W and its diagnostics.

``gradient_matrix`` maps vertex values to edge DOFs, ``rot_matrix`` maps edge
DOFs to cellwise constant rot. Both use the global edge orientation of
:mod:`quadcomplex.mesh`.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .assembly import assemble_hrot_matrices, assemble_stiffness_qbl, pcg
from .elements import qbl_eval, qrt_eval
from .errors import TooLargeForDense
from .geometry import quadrature_on_quad
from .interpolation import FeFunction, local_bases
from .quadrature import gauss_segment, segment_rule

DENSE_LIMIT = 2000
RANK_RTOL = 1e-9
EDGE_DEGREE = 10


def gradient_matrix(mesh):
    """(n_edges x n_vertices): row e is (u(hi) - u(lo)) / |e|."""
    ne = mesh.n_edges
    inv = 1.0 / mesh.edge_lengths
    rows = np.repeat(np.arange(ne), 2)
    cols = mesh.edges.ravel()
    vals = np.stack([-inv, inv], axis=1).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(ne, mesh.n_vertices))


def rot_matrix(mesh):
    """(n_cells x n_edges): cell average of rot, sign * |e| / (4 r x s)."""
    f = mesh.frames
    nc = mesh.n_cells
    vals = (mesh.cell_edge_sign * mesh.edge_lengths[mesh.cell_edges]
            / (4.0 * f.cross_rs[:, None]))
    rows = np.repeat(np.arange(nc), 4)
    return sp.csr_matrix((vals.ravel(), (rows, mesh.cell_edges.ravel())),
                         shape=(nc, mesh.n_edges))


def write_coo(matrix, path):
    """Write ``row col value`` lines (0-based) for external inspection."""
    A = sp.coo_matrix(matrix)
    order = np.lexsort((A.col, A.row))
    lines = [f"# {A.shape[0]} {A.shape[1]} {A.nnz}"]
    lines += [f"{r} {c} {v!r}" for r, c, v in
              zip(A.row[order].tolist(), A.col[order].tolist(), A.data[order].tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_coo(path):
    rows, cols, vals = [], [], []
    shape = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            n, m, _ = (int(t) for t in line[1:].split())
            shape = (n, m)
            continue
        r, c, v = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(v))
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


def _rank(A):
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0


@dataclass(frozen=True)
class ComplexReport:
    dim_qbl: int
    dim_qrt: int
    dim_w: int
    rank_grad: int
    rank_rot: int
    kernel_grad: int
    kernel_rot: int
    composition_norm: float  # max |rot_h grad_h| relative to the factors' scale
    with_boundary_conditions: bool

    @property
    def grad_kernel_ok(self):
        return self.kernel_grad == (0 if self.with_boundary_conditions else 1)

    @property
    def middle_exact(self):
        return self.kernel_rot == self.rank_grad

    @property
    def rot_onto(self):
        # W_h0 has codimension one in W_h
        target = self.dim_w - 1 if self.with_boundary_conditions else self.dim_w
        return self.rank_rot == target

    @property
    def euler_ok(self):
        return self.dim_qrt == self.dim_qbl + self.dim_w - 1

    @property
    def exact(self):
        return (self.grad_kernel_ok and self.middle_exact and self.rot_onto
                and self.euler_ok and self.composition_norm < 1e-13)


def exactness_check(mesh, with_boundary_conditions=False):
    """Dense rank diagnostics of the discrete complex.

    Without boundary conditions the spaces are V_h^QBL, V_h^QRT, W_h. With
    them they are V_h0^QBL (interior vertices), V_h0^QRT (interior edges) and
    W_h0 (mean-zero constants), the latter reported with its dimension
    n_cells - 1 through ``rot_onto``.
    """
    G = gradient_matrix(mesh)
    R = rot_matrix(mesh)
    if with_boundary_conditions:
        vfree = np.flatnonzero(~mesh.boundary_vertices)
        efree = np.flatnonzero(~mesh.boundary_edges)
        G = G[efree][:, vfree]
        R = R[:, efree]
    if max(G.shape[0], G.shape[1], R.shape[0]) > DENSE_LIMIT:
        raise TooLargeForDense(f"{G.shape[0]} edge DOFs exceed dense limit {DENSE_LIMIT}")
    Gd = G.toarray()
    Rd = R.toarray()
    RG = Rd @ Gd
    scale = (np.abs(Rd).max() * np.abs(Gd).max()) if Gd.size and Rd.size else 1.0
    comp = float(np.abs(RG).max() / scale) if RG.size else 0.0
    rg, rr = _rank(Gd), _rank(Rd)
    n_qbl, n_qrt = Gd.shape[1], Gd.shape[0]
    n_w = mesh.n_cells
    return ComplexReport(
        dim_qbl=n_qbl, dim_qrt=n_qrt, dim_w=n_w,
        rank_grad=rg, rank_rot=rr,
        kernel_grad=n_qbl - rg, kernel_rot=n_qrt - rr,
        composition_norm=comp,
        with_boundary_conditions=with_boundary_conditions,
    )


# Consistency functionals

def _cell_edge_rules(mesh, degree):
    f = mesh.frames
    V = f.vertices
    pts, w = segment_rule(V, np.roll(V, -1, axis=1), degree)  # (nc, 4, m, 2)
    return pts, w


def consistency_h1_vector(mesh, zeta, degree=EDGE_DEGREE):
    """b[j] = E(zeta, phi_j) for every global QBL hat function phi_j.

    Uses the edge-jump form: on every cell edge, integrate zeta . n times the
    difference between the cell's function and the linear interpolant of its
    endpoint values.
    """
    f = mesh.frames
    B = local_bases(mesh)[0]
    pts, w = _cell_edge_rules(mesh, degree)
    nc, _, m, _ = pts.shape
    phi = qbl_eval(B, f, pts.reshape(nc, 4 * m, 2)).reshape(nc, 4, m, 4)
    t, _ = gauss_segment(degree)
    # linear interpolant along local edge i of basis a: (1-t) phi_a(A_i) + t phi_a(A_{i+1})
    eye = np.eye(4)
    q = ((1 - t)[None, :, None] * eye[:, None, :]
         + t[None, :, None] * np.roll(eye, -1, axis=0)[:, None, :])  # (4 edges, m, 4)
    zn = np.einsum("kimd,kid->kim", zeta(pts), f.unit_normals)
    local = np.einsum("kim,kim,kima->ka", w, zn, phi - q[None])
    return np.bincount(mesh.cells.ravel(), weights=local.ravel(),
                       minlength=mesh.n_vertices)


def consistency_h1(mesh, zeta, v_h, degree=EDGE_DEGREE):
    """E(zeta, v_h) by the edge-jump decomposition."""
    return float(consistency_h1_vector(mesh, zeta, degree) @ v_h.dofs)


def consistency_h1_volume(mesh, zeta, div_zeta, v_h, degree=EDGE_DEGREE):
    """(zeta, grad_h v_h) + (div zeta, v_h) by cell quadrature."""
    rule = quadrature_on_quad(mesh.frames, degree)
    p, w = rule.points, rule.weights
    integrand = np.sum(zeta(p) * v_h.grad(p), axis=-1) + div_zeta(p) * v_h(p)
    return float(np.sum(w * integrand))


def consistency_rot_vector(mesh, w_field, degree=EDGE_DEGREE):
    """b[e] = E(w, psi_e) for every global QRT basis function psi_e.

    Edge form with c_K the boundary average of w on each cell.
    """
    f = mesh.frames
    B = local_bases(mesh)[1]
    pts, wts = _cell_edge_rules(mesh, degree)
    nc, _, m, _ = pts.shape
    vals = qrt_eval(B, f, pts.reshape(nc, 4 * m, 2)).reshape(nc, 4, m, 4, 2)
    tang = np.einsum("kimad,kid->kima", vals, f.unit_tangents)
    L = f.edge_lengths
    avg = np.einsum("kim,kima->kia", wts, tang) / L[..., None]
    wv = w_field(pts)
    cK = np.einsum("kim,kim->k", wts, wv) / np.sum(L, axis=1)
    local = np.einsum("kim,kim,kima->ka", wts, wv - cK[:, None, None],
                      tang - avg[:, :, None, :])
    local = local * mesh.cell_edge_sign
    return np.bincount(mesh.cell_edges.ravel(), weights=local.ravel(),
                       minlength=mesh.n_edges)


def consistency_rot(mesh, w_field, tau_h, degree=EDGE_DEGREE):
    """E(w, tau_h) by the edge decomposition."""
    return float(consistency_rot_vector(mesh, w_field, degree) @ tau_h.dofs)


def consistency_rot_volume(mesh, w_field, grad_w, tau_h, degree=EDGE_DEGREE):
    """(w, rot_h tau_h) - (curl w, tau_h) with curl w = (dw/dy, -dw/dx)."""
    rule = quadrature_on_quad(mesh.frames, degree)
    p, wts = rule.points, rule.weights
    g = grad_w(p)
    curl = np.stack([g[..., 1], -g[..., 0]], axis=-1)
    integrand = (w_field(p) * tau_h.rot()[:, None]
                 - np.sum(curl * tau_h(p), axis=-1))
    return float(np.sum(wts * integrand))


def _dual_norm(A, b, free):
    bf = b[free]
    if not np.any(bf):
        return 0.0
    x, _ = pcg(A[free][:, free].tocsr(), bf, 1e-12)
    return float(np.sqrt(max(bf @ x, 0.0)))


def consistency_h1_dual_norm(mesh, zeta, degree=EDGE_DEGREE):
    """sup over v_h in V_h0^QBL of |E(zeta, v_h)| / |v_h|_{1,h}."""
    b = consistency_h1_vector(mesh, zeta, degree)
    A = assemble_stiffness_qbl(mesh)
    return _dual_norm(A, b, np.flatnonzero(~mesh.boundary_vertices))


def consistency_rot_dual_norm(mesh, w_field, degree=EDGE_DEGREE):
    """sup over tau_h in V_h0^QRT of |E(w, tau_h)| / ||tau_h||_{rot,h}."""
    b = consistency_rot_vector(mesh, w_field, degree)
    R, M = assemble_hrot_matrices(mesh)
    return _dual_norm(R + M, b, np.flatnonzero(~mesh.boundary_edges))


# Nonconformity

def qbl_trace_jumps(v_h, degree=EDGE_DEGREE):
    """Max |jump| of a QBL function along each interior edge (nan on boundary)."""
    mesh = v_h.mesh
    f = mesh.frames
    B = local_bases(mesh)[0]
    pts, _ = _cell_edge_rules(mesh, degree)
    nc, _, m, _ = pts.shape
    vals = qbl_eval(B, f, pts.reshape(nc, 4 * m, 2)).reshape(nc, 4, m, 4)
    trace = np.einsum("kima,ka->kim", vals, v_h.local_dofs())  # ccw on each cell
    out = np.full(mesh.n_edges, np.nan)
    inner = np.flatnonzero(~mesh.boundary_edges)
    k1, k2 = mesh.edge_cells[inner, 0], mesh.edge_cells[inner, 1]
    i1, i2 = mesh.edge_local_index[inner, 0], mesh.edge_local_index[inner, 1]
    # the neighbour traverses the shared edge in the opposite direction
    jump = trace[k1, i1] - trace[k2, i2][:, ::-1]
    out[inner] = np.max(np.abs(jump), axis=1) if m else 0.0
    return out


def max_hat_jump(mesh, degree=EDGE_DEGREE):
    """Largest interior trace jump over all QBL hat functions (each has sup 1)."""
    best = 0.0
    for j in np.flatnonzero(~mesh.boundary_vertices):
        dofs = np.zeros(mesh.n_vertices)
        dofs[j] = 1.0
        jumps = qbl_trace_jumps(FeFunction("QBL", dofs, mesh), degree)
        if np.any(np.isfinite(jumps)):
            best = max(best, float(np.nanmax(jumps)))
    return best
