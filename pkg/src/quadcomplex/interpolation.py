"""Global finite element functions and the interpolators J_h, Pi_h, P_h.

Scalar fields are callables ``u(p)`` on points of shape (..., 2) returning
shape (...); vector fields return shape (..., 2).
"""

import weakref
from dataclasses import dataclass

import numpy as np

from .elements import (qbl_basis, qbl_eval, qbl_grad, qrt_basis, qrt_eval,
                       qrt_rot)
from .geometry import quadrature_on_quad
from .quadrature import segment_rule

INTERP_DEGREE = 10

_basis_cache = weakref.WeakKeyDictionary()


def local_bases(mesh):
    """(QblBasis, QrtBasis) for every cell, cached per mesh."""
    try:
        return _basis_cache[mesh]
    except KeyError:
        bases = (qbl_basis(mesh.frames), qrt_basis(mesh.frames))
        _basis_cache[mesh] = bases
        return bases


SPACES = ("QBL", "QRT", "W")


@dataclass(frozen=True, eq=False)
class FeFunction:
    space: str
    dofs: np.ndarray
    mesh: object

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}")
        n = {"QBL": self.mesh.n_vertices, "QRT": self.mesh.n_edges,
             "W": self.mesh.n_cells}[self.space]
        dofs = np.asarray(self.dofs, dtype=float)
        if dofs.shape != (n,):
            raise ValueError(f"{self.space} needs {n} DOFs, got shape {dofs.shape}")
        object.__setattr__(self, "dofs", dofs)

    def local_dofs(self):
        """Per-cell coefficients in the local bases, shape (nc, 4) or (nc,)."""
        m = self.mesh
        if self.space == "QBL":
            return self.dofs[m.cells]
        if self.space == "QRT":
            return self.dofs[m.cell_edges] * m.cell_edge_sign
        return self.dofs

    def __call__(self, points):
        """Evaluate cellwise; ``points`` has shape (nc, m, 2)."""
        m = self.mesh
        loc = self.local_dofs()
        if self.space == "QBL":
            phi = qbl_eval(local_bases(m)[0], m.frames, points)
            return np.einsum("kmi,ki->km", phi, loc)
        if self.space == "QRT":
            phi = qrt_eval(local_bases(m)[1], m.frames, points)
            return np.einsum("kmid,ki->kmd", phi, loc)
        return np.broadcast_to(loc[:, None], points.shape[:-1])

    def grad(self, points):
        if self.space != "QBL":
            raise TypeError("grad is defined for QBL functions only")
        m = self.mesh
        g = qbl_grad(local_bases(m)[0], m.frames, points)
        return np.einsum("kmid,ki->kmd", g, self.local_dofs())

    def rot(self):
        """Cellwise constant rot of a QRT function, shape (nc,)."""
        if self.space != "QRT":
            raise TypeError("rot is defined for QRT functions only")
        m = self.mesh
        return np.sum(qrt_rot(local_bases(m)[1], m.frames) * self.local_dofs(),
                      axis=1)


def interp_qbl(mesh, u):
    """Nodal interpolant: DOF j is u at vertex j."""
    return FeFunction("QBL", np.asarray(u(mesh.vertices), dtype=float), mesh)


def edge_tangential_averages(mesh, sigma, degree=INTERP_DEGREE):
    """Average of sigma . t along each edge, t oriented from low to high id."""
    V = mesh.vertices
    P = V[mesh.edges[:, 0]]
    Q = V[mesh.edges[:, 1]]
    pts, w = segment_rule(P, Q, degree)
    vals = np.asarray(sigma(pts), dtype=float)
    L = mesh.edge_lengths
    t = (Q - P) / L[:, None]
    return np.einsum("em,emd,ed->e", w, vals, t) / L


def interp_qrt(mesh, sigma, degree=INTERP_DEGREE):
    return FeFunction("QRT", edge_tangential_averages(mesh, sigma, degree), mesh)


def cell_averages(mesh, q, degree=INTERP_DEGREE):
    rule = quadrature_on_quad(mesh.frames, degree)
    vals = np.asarray(q(rule.points), dtype=float)
    return np.sum(rule.weights * vals, axis=1) / mesh.frames.area


def interp_const(mesh, q, degree=INTERP_DEGREE):
    return FeFunction("W", cell_averages(mesh, q, degree), mesh)


@dataclass(frozen=True)
class CommutativityResidual:
    grad: float  # max |grad_h J_h u - Pi_h grad u| over quadrature points
    rot_of_grad: float  # max |rot_h Pi_h grad u - P_h rot grad u| over cells
    rot: float  # same for a general field sigma (nan when not supplied)
    scale: float  # max |grad u| over quadrature points


def commutativity_residual(mesh, u, grad_u, sigma=None, rot_sigma=None,
                           degree=INTERP_DEGREE):
    """Measure both squares of the commuting diagram on ``mesh``.

    ``grad_u`` is the exact gradient of ``u``; ``rot_sigma`` the exact rot of
    ``sigma``. Only quadrature error should remain.
    """
    rule = quadrature_on_quad(mesh.frames, degree)
    Ju = interp_qbl(mesh, u)
    Pg = interp_qrt(mesh, grad_u, degree)
    diff = Ju.grad(rule.points) - Pg(rule.points)
    rho1 = float(np.max(np.linalg.norm(diff, axis=-1)))
    scale = float(np.max(np.linalg.norm(grad_u(rule.points), axis=-1)))
    # rot grad u = 0, so the cell averages vanish identically
    rho2 = float(np.max(np.abs(Pg.rot())))
    rho3 = float("nan")
    if sigma is not None:
        Ps = interp_qrt(mesh, sigma, degree)
        rho3 = float(np.max(np.abs(Ps.rot() - cell_averages(mesh, rot_sigma, degree))))
    return CommutativityResidual(rho1, rho2, rho3, scale)
