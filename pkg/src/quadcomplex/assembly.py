"""Assembly of the model problems, Dirichlet elimination, solvers, norms.

Global matrices are ``scipy.sparse.csr_matrix``. Element contributions are
scattered through a COO triplet list in cell order, so summation order is
fixed and results are reproducible.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EmptyInterior, NoConvergence
from .geometry import quadrature_on_quad
from .interpolation import FeFunction, local_bases
from .elements import qbl_eval, qbl_grad, qrt_eval, qrt_rot
from .quadrature import triangle_rule

STIFFNESS_DEGREE = 2
MASS_DEGREE = 4
LOAD_DEGREE = 10
NORM_DEGREE = 10


def _scatter(dof_map, local, n):
    k = dof_map.shape[1]
    rows = np.repeat(dof_map, k, axis=1).ravel()
    cols = np.tile(dof_map, (1, k)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _scatter_vec(dof_map, local, n):
    return np.bincount(dof_map.ravel(), weights=local.ravel(), minlength=n)


@dataclass(frozen=True, eq=False)
class SparseSystem:
    """Linear system restricted to the free DOFs.

    ``matrix`` and ``rhs`` act on ``free``; constrained DOFs hold
    ``constrained_values``.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    constrained: np.ndarray
    constrained_values: np.ndarray
    n_total: int

    def expand(self, x_free):
        x = np.zeros(self.n_total)
        x[self.free] = x_free
        x[self.constrained] = self.constrained_values
        return x


def eliminate(A, b, constrained_mask, values=None):
    """Symmetric elimination of Dirichlet DOFs."""
    n = A.shape[0]
    constrained = np.flatnonzero(constrained_mask)
    free = np.flatnonzero(~constrained_mask)
    if len(free) == 0:
        raise EmptyInterior("no free degrees of freedom")
    g = np.zeros(len(constrained)) if values is None else np.asarray(values, float)
    A = A.tocsr()
    A_ff = A[free][:, free].tocsr()
    rhs = b[free] - A[free][:, constrained] @ g
    return SparseSystem(A_ff, rhs, free, constrained, g, n)


def qbl_stiffness_local(mesh):
    f = mesh.frames
    rule = quadrature_on_quad(f, STIFFNESS_DEGREE)
    G = qbl_grad(local_bases(mesh)[0], f, rule.points)
    return np.einsum("km,kmid,kmjd->kij", rule.weights, G, G)


def qbl_mass_local(mesh):
    f = mesh.frames
    rule = quadrature_on_quad(f, MASS_DEGREE)
    phi = qbl_eval(local_bases(mesh)[0], f, rule.points)
    return np.einsum("km,kmi,kmj->kij", rule.weights, phi, phi)


def qbl_load(mesh, f, degree=LOAD_DEGREE):
    fr = mesh.frames
    rule = quadrature_on_quad(fr, degree)
    phi = qbl_eval(local_bases(mesh)[0], fr, rule.points)
    local = np.einsum("km,km,kmi->ki", rule.weights, f(rule.points), phi)
    return _scatter_vec(mesh.cells, local, mesh.n_vertices)


def assemble_stiffness_qbl(mesh):
    return _scatter(mesh.cells, qbl_stiffness_local(mesh), mesh.n_vertices)


def assemble_mass_qbl(mesh):
    return _scatter(mesh.cells, qbl_mass_local(mesh), mesh.n_vertices)


def assemble_poisson(mesh, f, degree=LOAD_DEGREE):
    """QBL system for -Laplace u = f with u = 0 at boundary vertices."""
    A = assemble_stiffness_qbl(mesh)
    b = qbl_load(mesh, f, degree)
    return eliminate(A, b, mesh.boundary_vertices)


def _qrt_signed_basis(mesh, points):
    f = mesh.frames
    B = local_bases(mesh)[1]
    sign = mesh.cell_edge_sign.astype(float)
    vals = qrt_eval(B, f, points) * sign[:, None, :, None]
    rots = qrt_rot(B, f) * sign
    return vals, rots


def hrot_local(mesh):
    """Element matrices of (rot s, rot t) + (s, t) in global edge orientation."""
    f = mesh.frames
    rule = quadrature_on_quad(f, STIFFNESS_DEGREE)
    vals, rots = _qrt_signed_basis(mesh, rule.points)
    mass = np.einsum("km,kmid,kmjd->kij", rule.weights, vals, vals)
    rotrot = f.area[:, None, None] * rots[:, :, None] * rots[:, None, :]
    return rotrot, mass


def assemble_hrot_matrices(mesh):
    rotrot, mass = hrot_local(mesh)
    n = mesh.n_edges
    return _scatter(mesh.cell_edges, rotrot, n), _scatter(mesh.cell_edges, mass, n)


def qrt_load(mesh, f, degree=LOAD_DEGREE):
    rule = quadrature_on_quad(mesh.frames, degree)
    vals, _ = _qrt_signed_basis(mesh, rule.points)
    local = np.einsum("km,kmd,kmid->ki", rule.weights, f(rule.points), vals)
    return _scatter_vec(mesh.cell_edges, local, mesh.n_edges)


def assemble_hrot(mesh, f, degree=LOAD_DEGREE):
    """QRT system for curl rot s + s = f with zero tangential trace."""
    R, M = assemble_hrot_matrices(mesh)
    b = qrt_load(mesh, f, degree)
    return eliminate(R + M, b, mesh.boundary_edges)


# Courant (P1) element on triangles

def courant_local(tri):
    P = tri.vertices[tri.cells]
    area = tri.signed_areas
    # grad lambda_i = perp(P_{i+1} - P_{i-1}) / (2 area)
    e = np.roll(P, -1, axis=1) - np.roll(P, 1, axis=1)
    G = np.stack([e[..., 1], -e[..., 0]], axis=-1) / (2 * area)[:, None, None]
    K = area[:, None, None] * np.einsum("kid,kjd->kij", G, G)
    M = area[:, None, None] * (np.ones((3, 3)) + np.eye(3)) / 12.0
    return K, M, G


def courant_load(tri, f, degree=LOAD_DEGREE):
    P = tri.vertices[tri.cells]
    pts, w = triangle_rule(P[:, 0], P[:, 1], P[:, 2], degree)
    lam = _barycentric(P, pts)
    local = np.einsum("km,km,kmi->ki", w, f(pts), lam)
    return _scatter_vec(tri.cells, local, len(tri.vertices))


def _barycentric(P, pts):
    e1 = P[:, 1] - P[:, 0]
    e2 = P[:, 2] - P[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    d = pts - P[:, None, 0]
    l1 = (d[..., 0] * e2[:, None, 1] - d[..., 1] * e2[:, None, 0]) / det[:, None]
    l2 = (e1[:, None, 0] * d[..., 1] - e1[:, None, 1] * d[..., 0]) / det[:, None]
    return np.stack([1 - l1 - l2, l1, l2], axis=-1)


def assemble_courant_matrices(tri):
    K, M, _ = courant_local(tri)
    n = len(tri.vertices)
    return _scatter(tri.cells, K, n), _scatter(tri.cells, M, n)


def assemble_courant(tri, f, degree=LOAD_DEGREE):
    K, _ = assemble_courant_matrices(tri)
    return eliminate(K, courant_load(tri, f, degree), tri.boundary_vertices)


# Solvers

@dataclass(frozen=True)
class CGInfo:
    iterations: int
    residual: float


def pcg(A, b, tol=1e-10, max_iter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ||b - A x|| <= tol * ||b||. Returns ``(x, CGInfo)``.
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    max_iter = 10 * n + 10 if max_iter is None else max_iter
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ValueError("matrix diagonal must be positive for Jacobi scaling")
    inv_d = 1.0 / diag
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), CGInfo(0, 0.0)
    target = tol * bnorm
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x, CGInfo(0, rnorm / bnorm)
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        a = rz / (p @ Ap)
        x += a * p
        r -= a * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            return x, CGInfo(it, rnorm / bnorm)
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(f"CG stalled at relative residual {rnorm / bnorm:.3e} "
                        f"after {max_iter} iterations")


def cg_solve(system, tol=1e-10, max_iter=None):
    """Solve a :class:`SparseSystem`; returns the full DOF vector."""
    x, _ = pcg(system.matrix, system.rhs, tol, max_iter)
    return system.expand(x)


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    iterations: int


def smallest_eigenpair(A, M, tol=1e-10, max_iter=500, cg_tol=1e-12):
    """Inverse power iteration for the smallest eigenvalue of A x = lam M x.

    Each sweep solves A y = M x by CG; x is kept M-normalized. Stops when the
    Rayleigh quotient changes by less than ``tol`` relative.
    """
    n = A.shape[0]
    x = np.ones(n)
    x /= np.sqrt(x @ (M @ x))
    lam = x @ (A @ x)
    for it in range(1, max_iter + 1):
        y, _ = pcg(A, M @ x, cg_tol, x0=x / lam)
        x = y / np.sqrt(y @ (M @ y))
        lam_new = x @ (A @ x)
        if abs(lam_new - lam) < tol * abs(lam_new):
            res = np.linalg.norm(A @ x - lam_new * (M @ x))
            return EigenResult(float(lam_new), x, float(res), it)
        lam = lam_new
    raise NoConvergence(f"inverse iteration did not converge in {max_iter} sweeps")


# Error norms

@dataclass(frozen=True)
class ErrorNorms:
    l2: float
    h1_broken: float = float("nan")
    rot_semi: float = float("nan")
    rot_full: float = float("nan")


def error_norms(u_h, exact, derivative, degree=NORM_DEGREE):
    """Cellwise quadrature of the error of a finite element function.

    For QBL ``derivative`` is the exact gradient and the broken H1 seminorm
    is returned; for QRT it is the exact rot and the broken rot norms are
    returned; for W it is ignored.
    """
    mesh = u_h.mesh
    rule = quadrature_on_quad(mesh.frames, degree)
    pts, w = rule.points, rule.weights
    diff = exact(pts) - u_h(pts)
    sq = diff**2 if diff.ndim == 2 else np.sum(diff**2, axis=-1)
    l2 = float(np.sqrt(np.sum(w * sq)))
    if u_h.space == "QBL":
        gd = derivative(pts) - u_h.grad(pts)
        return ErrorNorms(l2, h1_broken=float(np.sqrt(np.sum(w * np.sum(gd**2, -1)))))
    if u_h.space == "QRT":
        rd = derivative(pts) - u_h.rot()[:, None]
        semi = float(np.sqrt(np.sum(w * rd**2)))
        return ErrorNorms(l2, rot_semi=semi, rot_full=float(np.hypot(l2, semi)))
    return ErrorNorms(l2)


def courant_error_norms(tri, u_h, exact, grad_exact, degree=NORM_DEGREE):
    P = tri.vertices[tri.cells]
    pts, w = triangle_rule(P[:, 0], P[:, 1], P[:, 2], degree)
    lam = _barycentric(P, pts)
    loc = u_h[tri.cells]
    vals = np.einsum("kmi,ki->km", lam, loc)
    _, _, G = courant_local(tri)
    grads = np.einsum("kid,ki->kd", G, loc)
    l2 = np.sqrt(np.sum(w * (exact(pts) - vals) ** 2))
    h1 = np.sqrt(np.sum(w * np.sum((grad_exact(pts) - grads[:, None]) ** 2, -1)))
    return ErrorNorms(float(l2), h1_broken=float(h1))


def solve_poisson_qbl(mesh, f, tol=1e-10):
    return FeFunction("QBL", cg_solve(assemble_poisson(mesh, f), tol), mesh)


def solve_hrot_qrt(mesh, f, tol=1e-10):
    return FeFunction("QRT", cg_solve(assemble_hrot(mesh, f), tol), mesh)
