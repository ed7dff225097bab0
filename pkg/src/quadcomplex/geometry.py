"""Midpoint frames of convex quadrilaterals.

A convex cell with counterclockwise vertices A1..A4 is described in the
affine frame (O; r, s) where O is the vertex centroid, ``r`` points to the
midpoint of edge A4A1 and ``s`` to the midpoint of edge A1A2. In these
coordinates

    A1 = (1+a, 1+b), A2 = (-1-a, 1-b), A3 = (-1+a, -1+b), A4 = (1-a, -1-b)

with shape parameters ``a = alpha`` and ``b = beta``; both vanish exactly on
parallelograms. The affine coordinates of a point p are (xi, eta) with
p - O = xi*r + eta*s.

Every function here broadcasts over leading axes: a frame built from an
array of shape (n, 4, 2) describes n cells at once.

Perpendicular convention: (x, y)^perp = (y, -x), so s^perp . r = r x s.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import Degenerate, DegreeTooHigh, NonConvex
from .quadrature import MAX_DEGREE, segment_rule, triangle_rule

AREA_FLOOR = 1e-14
CONVEXITY_MARGIN = 1e-10


def cross2(u, v):
    """Scalar cross product u x v of 2-vectors (broadcasting)."""
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def perp(v):
    """(x, y) -> (y, -x)."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class QuadFrame:
    vertices: np.ndarray  # (..., 4, 2)
    center: np.ndarray  # (..., 2)
    r: np.ndarray
    s: np.ndarray
    alpha: np.ndarray  # (...)
    beta: np.ndarray
    cross_rs: np.ndarray

    @property
    def shape(self):
        return self.alpha.shape

    def __len__(self):
        return len(self.alpha)

    def __getitem__(self, idx):
        return QuadFrame(self.vertices[idx], self.center[idx], self.r[idx],
                         self.s[idx], self.alpha[idx], self.beta[idx],
                         self.cross_rs[idx])

    @cached_property
    def edge_vectors(self):
        """e_i = A_{i+1} - A_i, counterclockwise; shape (..., 4, 2)."""
        return np.roll(self.vertices, -1, axis=-2) - self.vertices

    @cached_property
    def edge_lengths(self):
        return np.linalg.norm(self.edge_vectors, axis=-1)

    @cached_property
    def unit_tangents(self):
        return self.edge_vectors / self.edge_lengths[..., None]

    @cached_property
    def unit_normals(self):
        """Outward unit normals, t^perp for counterclockwise t."""
        return perp(self.unit_tangents)

    @cached_property
    def diameter(self):
        V = self.vertices
        d13 = np.linalg.norm(V[..., 2, :] - V[..., 0, :], axis=-1)
        d24 = np.linalg.norm(V[..., 3, :] - V[..., 1, :], axis=-1)
        return np.maximum(np.max(self.edge_lengths, axis=-1),
                          np.maximum(d13, d24))

    @property
    def area(self):
        return 4.0 * self.cross_rs

    @cached_property
    def grad_xi(self):
        return perp(self.s) / self.cross_rs[..., None]

    @cached_property
    def grad_eta(self):
        # the sign differs from perp(r): grad(eta) . s must equal +1
        return -perp(self.r) / self.cross_rs[..., None]

    @cached_property
    def vertex_coords(self):
        """(xi, eta) of A1..A4, shape (..., 4, 2)."""
        a = self.alpha[..., None]
        b = self.beta[..., None]
        xi = np.array([1.0, -1.0, -1.0, 1.0]) + np.array([1.0, -1.0, 1.0, -1.0]) * a
        eta = np.array([1.0, 1.0, -1.0, -1.0]) + np.array([1.0, -1.0, 1.0, -1.0]) * b
        return np.stack([xi, eta], axis=-1)


def _frame_arrays(V):
    O = V.mean(axis=-2)
    m1 = 0.5 * (V[..., 0, :] + V[..., 1, :])
    m4 = 0.5 * (V[..., 3, :] + V[..., 0, :])
    r = m4 - O
    s = m1 - O
    c = cross2(r, s)
    # 2*alpha*r + 2*beta*s = A1 + A3 - 2*O
    half = 0.5 * (V[..., 0, :] + V[..., 2, :]) - O
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = cross2(half, s) / c
        beta = cross2(r, half) / c
    return O, r, s, c, alpha, beta


def frame_from_vertices(vertices, *, validate=True):
    """Build the midpoint frame of one or many quadrilaterals.

    Parameters
    ----------
    vertices : array_like, shape (..., 4, 2)
        Counterclockwise vertices A1..A4.
    validate : bool
        Reject non-convex, clockwise or degenerate cells.

    Raises
    ------
    NonConvex
        If any consecutive edge turn is not strictly left or
        |alpha| + |beta| >= 1.
    Degenerate
        If r x s is below ``AREA_FLOOR * h**2``.
    """
    V = np.asarray(vertices, dtype=float)
    if V.shape[-2:] != (4, 2):
        raise ValueError(f"expected vertices of shape (..., 4, 2), got {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("vertex coordinates must be finite")
    O, r, s, c, alpha, beta = _frame_arrays(V)
    frame = QuadFrame(V, O, r, s, alpha, beta, c)
    if validate:
        _validate(frame)
    return frame


def _validate(frame):
    e = frame.edge_vectors
    turns = cross2(e, np.roll(e, -1, axis=-2))
    bad = np.any(turns <= 0.0, axis=-1)
    if np.any(bad):
        raise NonConvex(f"{int(np.sum(bad))} cell(s) not strictly convex "
                        "and counterclockwise")
    h = frame.diameter
    if np.any(frame.cross_rs < AREA_FLOOR * h * h):
        raise Degenerate("cell area below floor")
    if np.any(np.abs(frame.alpha) + np.abs(frame.beta) > 1.0 - CONVEXITY_MARGIN):
        raise NonConvex("|alpha| + |beta| too close to 1")


def _lift(frame, p):
    """Number of point axes in ``p`` beyond the frame's own shape."""
    return p.ndim - 1 - frame.alpha.ndim


def _vec(x, k):
    return x.reshape(x.shape[:-1] + (1,) * k + x.shape[-1:])


def _scal(x, k):
    return x.reshape(x.shape + (1,) * k)


def xi_eta_at(frame, p):
    """Affine coordinates of points.

    ``p`` has shape (<frame shape>, m..., 2); returns two arrays of shape
    (<frame shape>, m...).
    """
    p = np.asarray(p, dtype=float)
    k = _lift(frame, p)
    d = p - _vec(frame.center, k)
    c = _scal(frame.cross_rs, k)
    return cross2(d, _vec(frame.s, k)) / c, cross2(_vec(frame.r, k), d) / c


def xi_eta_hat_at(frame, p):
    """Mean-free affine coordinates: xi - beta/3 and eta - alpha/3."""
    p = np.asarray(p, dtype=float)
    k = _lift(frame, p)
    xi, eta = xi_eta_at(frame, p)
    return xi - _scal(frame.beta, k) / 3.0, eta - _scal(frame.alpha, k) / 3.0


def physical_point(frame, xi, eta):
    """Inverse of :func:`xi_eta_at`."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    k = xi.ndim - frame.alpha.ndim
    return (_vec(frame.center, k) + xi[..., None] * _vec(frame.r, k)
            + eta[..., None] * _vec(frame.s, k))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray  # (..., n, 2)
    weights: np.ndarray  # (..., n)
    degree: int


def quadrature_on_quad(frame, degree):
    """Rule exact to ``degree`` on each cell, from the split along A1A3."""
    V = frame.vertices
    p1, w1 = triangle_rule(V[..., 0, :], V[..., 1, :], V[..., 2, :], degree)
    p2, w2 = triangle_rule(V[..., 0, :], V[..., 2, :], V[..., 3, :], degree)
    return QuadratureRule(np.concatenate([p1, p2], axis=-2),
                          np.concatenate([w1, w2], axis=-1), degree)


def edge_rule(frame, edge_index, degree):
    """Gauss rule on edge e_i (1-based), oriented counterclockwise."""
    i = edge_index - 1
    if not 0 <= i < 4:
        raise ValueError(f"edge index must be in 1..4, got {edge_index}")
    V = frame.vertices
    return segment_rule(V[..., i, :], V[..., (i + 1) % 4, :], degree)


def _check_monomial(a, b):
    if a < 0 or b < 0:
        raise ValueError("exponents must be non-negative")
    if a + b > MAX_DEGREE:
        raise DegreeTooHigh(f"monomial degree {a + b} exceeds {MAX_DEGREE}")


def cell_monomial_integral(frame, a, b):
    """Integral of xi**a * eta**b over the cell."""
    _check_monomial(a, b)
    rule = quadrature_on_quad(frame, a + b)
    xi, eta = xi_eta_at(frame, rule.points)
    return np.sum(rule.weights * xi**a * eta**b, axis=-1)


def edge_monomial_integral(frame, edge_index, a, b):
    """Integral of xi**a * eta**b along edge e_i (1-based)."""
    _check_monomial(a, b)
    pts, w = edge_rule(frame, edge_index, a + b)
    xi, eta = xi_eta_at(frame, pts)
    return np.sum(w * xi**a * eta**b, axis=-1)


@dataclass(frozen=True, eq=False)
class RegularityReport:
    R_K: np.ndarray
    d_K: np.ndarray
    h_K: np.ndarray


def regularity_report(frame):
    nr = np.linalg.norm(frame.r, axis=-1)
    ns = np.linalg.norm(frame.s, axis=-1)
    R = np.maximum(nr * ns / frame.cross_rs, np.maximum(nr / ns, ns / nr))
    d = 2.0 * np.linalg.norm(frame.alpha[..., None] * frame.r
                             + frame.beta[..., None] * frame.s, axis=-1)
    return RegularityReport(R, d, frame.diameter)


def diagonal_midpoint_distance(vertices):
    """|mid(A1, A3) - mid(A2, A4)| computed directly from coordinates."""
    V = np.asarray(vertices, dtype=float)
    return np.linalg.norm(0.5 * (V[..., 0, :] + V[..., 2, :])
                          - 0.5 * (V[..., 1, :] + V[..., 3, :]), axis=-1)


# Closed forms of the boundary and cell integral tables.

def edge_table_closed_form(frame):
    """Edge integrals of (xi^2, xi*eta, eta^2), shape (..., 4 edges, 3)."""
    a, b = frame.alpha, frame.beta
    L = frame.edge_lengths
    rows = [
        [(1 + a) ** 2, (1 + a) * b, 3 + b**2],
        [3 + a**2, a * (-1 + b), (1 - b) ** 2],
        [(1 - a) ** 2, (-1 + a) * b, 3 + b**2],
        [3 + a**2, a * (1 + b), (1 + b) ** 2],
    ]
    out = np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)
    return out * L[..., :, None] / 3.0


EDGE_TABLE_MONOMIALS = ((2, 0), (1, 1), (0, 2))


def cell_table_closed_form(frame):
    """Cell integrals of (1, xi, eta, xi^2, xi*eta, eta^2), shape (..., 6)."""
    a, b, c = frame.alpha, frame.beta, frame.cross_rs
    one = np.ones_like(a)
    vals = [4 * one, 4 * b / 3, 4 * a / 3, 4 * (1 + a**2) / 3,
            4 * a * b / 3, 4 * (1 + b**2) / 3]
    return np.stack(vals, axis=-1) * c[..., None]


CELL_TABLE_MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def hat_table_closed_form(frame):
    """Cell integrals of (1, xi^, eta^, xi^2^, xi^ eta^, eta^2^), shape (..., 6)."""
    a, b, c = frame.alpha, frame.beta, frame.cross_rs
    z = np.zeros_like(a)
    vals = [4 + z, z, z, 4 * (3 + 3 * a**2 - b**2) / 9,
            8 * a * b / 9, 4 * (3 + 3 * b**2 - a**2) / 9]
    return np.stack(vals, axis=-1) * c[..., None]


def hat_monomial_integral(frame, a, b):
    """Integral of xi_hat**a * eta_hat**b over the cell."""
    _check_monomial(a, b)
    rule = quadrature_on_quad(frame, a + b)
    xh, eh = xi_eta_hat_at(frame, rule.points)
    return np.sum(rule.weights * xh**a * eh**b, axis=-1)
