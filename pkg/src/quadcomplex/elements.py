"""Local bases of the QBL and QRT elements.

QBL: span{1, xi, eta, xi*eta} with vertex values as degrees of freedom.
QRT: span{grad xi, grad eta, xi grad eta, eta grad xi} with edge averages of
the counterclockwise tangential component as degrees of freedom.

Coefficient tables are stored per cell with shape (..., 4, 4). Row i holds
basis function i; QBL columns multiply (xi*eta, xi, eta, 1) and QRT columns
multiply (grad xi, grad eta, xi grad eta, eta grad xi).

Fields passed to :func:`apply_dof` are callables taking points of shape
(..., 2) and returning values of shape (...) (scalar) or (..., 2) (vector).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import _vec, edge_rule, quadrature_on_quad, xi_eta_at

EDGE_DOF_DEGREE = 7
CELL_DOF_DEGREE = 10


@dataclass(frozen=True, eq=False)
class QblBasis:
    coeffs: np.ndarray  # (..., 4, 4)


@dataclass(frozen=True, eq=False)
class QrtBasis:
    coeffs: np.ndarray  # (..., 4, 4)


def _denominator(frame):
    a, b = frame.alpha, frame.beta
    return 4.0 * (a * a + b * b - 1.0)


def qbl_basis(frame):
    a, b = frame.alpha, frame.beta
    rows = [
        [a + b - 1, (b - 1) * (-a + b + 1), (a - 1) * (a - b + 1),
         -(a - 1) * (b - 1) * (a + b + 1)],
        [-a + b + 1, -(b + 1) * (a + b - 1), (a - 1) * (a + b + 1),
         (a - 1) * (b + 1) * (a - b + 1)],
        [-(a + b + 1), (b + 1) * (a - b + 1), (a + 1) * (-a + b + 1),
         (a + 1) * (b + 1) * (a + b - 1)],
        [a - b + 1, (b - 1) * (a + b + 1), -(a + 1) * (a + b - 1),
         (a + 1) * (b - 1) * (-a + b + 1)],
    ]
    C = np.stack([np.stack(np.broadcast_arrays(*row), axis=-1) for row in rows],
                 axis=-2)
    return QblBasis(C / _denominator(frame)[..., None, None])


def qrt_basis(frame):
    a, b = frame.alpha, frame.beta
    rows = [
        [(1 - a) * (1 - b * b), a * (1 - a) * b, -a * (1 - a), 1 - a - b * b],
        [a * b * (1 + b), (1 - a * a) * (1 + b), -(1 - a * a + b), -b * (1 + b)],
        [-(1 + a) * (1 - b * b), -a * (1 + a) * b, a * (1 + a), 1 + a - b * b],
        [-a * b * (1 - b), -(1 - a * a) * (1 - b), -(1 - a * a - b), b * (1 - b)],
    ]
    C = np.stack([np.stack(np.broadcast_arrays(*row), axis=-1) for row in rows],
                 axis=-2)
    scale = frame.edge_lengths / _denominator(frame)[..., None]
    return QrtBasis(C * scale[..., :, None])


def _k(frame, xi):
    return xi.ndim - frame.alpha.ndim


def qbl_eval(basis, frame, p):
    """Values of the four basis functions at points, shape (..., m, 4)."""
    xi, eta = xi_eta_at(frame, p)
    monos = np.stack([xi * eta, xi, eta, np.ones_like(xi)], axis=-1)
    C = basis.coeffs
    k = _k(frame, xi)
    C = C.reshape(C.shape[:-2] + (1,) * k + C.shape[-2:])
    return np.einsum("...ij,...j->...i", C, monos)


def qbl_grad(basis, frame, p):
    """Gradients of the four basis functions, shape (..., m, 4, 2)."""
    xi, eta = xi_eta_at(frame, p)
    k = _k(frame, xi)
    C = basis.coeffs
    C = C.reshape(C.shape[:-2] + (1,) * k + C.shape[-2:])
    gx = C[..., 0] * eta[..., None] + C[..., 1]
    ge = C[..., 0] * xi[..., None] + C[..., 2]
    Gx = _vec(frame.grad_xi, k)[..., None, :]
    Ge = _vec(frame.grad_eta, k)[..., None, :]
    return gx[..., None] * Gx + ge[..., None] * Ge


def qrt_eval(basis, frame, p):
    """Values of the four vector basis functions, shape (..., m, 4, 2)."""
    xi, eta = xi_eta_at(frame, p)
    k = _k(frame, xi)
    D = basis.coeffs
    D = D.reshape(D.shape[:-2] + (1,) * k + D.shape[-2:])
    cx = D[..., 0] + D[..., 3] * eta[..., None]
    ce = D[..., 1] + D[..., 2] * xi[..., None]
    Gx = _vec(frame.grad_xi, k)[..., None, :]
    Ge = _vec(frame.grad_eta, k)[..., None, :]
    return cx[..., None] * Gx + ce[..., None] * Ge


def qrt_rot(basis, frame):
    """Constant rot of each basis function, shape (..., 4)."""
    D = basis.coeffs
    return (D[..., 2] - D[..., 3]) / frame.cross_rs[..., None]


def interpolate_qbl_local(frame, u):
    """Local nodal values u(A_i), shape (..., 4)."""
    return np.asarray(u(frame.vertices), dtype=float)


def edge_averages(frame, field, degree=EDGE_DOF_DEGREE):
    """Edge averages of the counterclockwise tangential component, (..., 4)."""
    out = []
    for i in range(4):
        pts, w = edge_rule(frame, i + 1, degree)
        vals = np.asarray(field(pts), dtype=float)
        t = frame.unit_tangents[..., i, :]
        tang = np.sum(vals * t[..., None, :], axis=-1)
        out.append(np.sum(w * tang, axis=-1) / frame.edge_lengths[..., i])
    return np.stack(out, axis=-1)


def cell_average(frame, q, degree=CELL_DOF_DEGREE):
    rule = quadrature_on_quad(frame, degree)
    vals = np.asarray(q(rule.points), dtype=float)
    return np.sum(rule.weights * vals, axis=-1) / frame.area


@dataclass(frozen=True)
class DofFunctional:
    """One degree of freedom of a cell: ``kind`` is 'vertex', 'edge' or
    'cell'; ``site`` is the 1-based vertex or edge index (ignored for cells).
    """

    kind: str
    site: int = 0

    def __post_init__(self):
        if self.kind not in ("vertex", "edge", "cell"):
            raise ValueError(f"unknown DOF kind {self.kind!r}")
        if self.kind != "cell" and not 1 <= self.site <= 4:
            raise ValueError(f"site must be in 1..4, got {self.site}")


QBL_DOFS = tuple(DofFunctional("vertex", i) for i in range(1, 5))
QRT_DOFS = tuple(DofFunctional("edge", i) for i in range(1, 5))
W_DOFS = (DofFunctional("cell"),)


def apply_dof(functional, frame, field, degree=None):
    if functional.kind == "vertex":
        return np.asarray(field(frame.vertices[..., functional.site - 1, :]),
                          dtype=float)
    if functional.kind == "edge":
        i = functional.site - 1
        pts, w = edge_rule(frame, functional.site, degree or EDGE_DOF_DEGREE)
        vals = np.asarray(field(pts), dtype=float)
        tang = np.sum(vals * frame.unit_tangents[..., i, None, :], axis=-1)
        return np.sum(w * tang, axis=-1) / frame.edge_lengths[..., i]
    return cell_average(frame, field, degree or CELL_DOF_DEGREE)


def qbl_nodal_matrix(frame):
    """M[j, i] = phi_i(A_j); the identity for a unisolvent element."""
    basis = qbl_basis(frame)
    return qbl_eval(basis, frame, frame.vertices)


def qrt_duality_matrix(frame, degree=EDGE_DOF_DEGREE):
    """M[i, j] = D_i(phi_j) with edge averages by Gauss quadrature."""
    basis = qrt_basis(frame)
    rows = []
    for i in range(4):
        pts, w = edge_rule(frame, i + 1, degree)
        vals = qrt_eval(basis, frame, pts)  # (..., m, 4, 2)
        t = frame.unit_tangents[..., i, :]
        tang = np.einsum("...mjd,...d->...mj", vals, t)
        rows.append(np.einsum("...m,...mj->...j", w, tang)
                    / frame.edge_lengths[..., i, None])
    return np.stack(rows, axis=-2)

