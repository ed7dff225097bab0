"""Gauss rules on segments and triangles.

Triangle rules are conical (collapsed) products of a Gauss-Jacobi rule and a
Gauss-Legendre rule. They have positive weights and are exact for bivariate
polynomials up to the requested total degree.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import DegreeTooHigh

MAX_DEGREE = 21


def _check_degree(degree):
    if degree < 0:
        raise ValueError(f"quadrature degree must be non-negative, got {degree}")
    if degree > MAX_DEGREE:
        raise DegreeTooHigh(f"degree {degree} exceeds catalog maximum {MAX_DEGREE}")


def n_points_for_degree(degree):
    """Number of 1D Gauss points exact for polynomials of ``degree``."""
    return max(1, -(-(degree + 1) // 2))


@lru_cache(maxsize=None)
def gauss_segment(degree):
    """Gauss-Legendre rule on [0, 1].

    Returns
    -------
    t : ndarray, shape (n,)
        Nodes in [0, 1].
    w : ndarray, shape (n,)
        Weights summing to 1.
    """
    _check_degree(degree)
    x, w = np.polynomial.legendre.leggauss(n_points_for_degree(degree))
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


@lru_cache(maxsize=None)
def reference_triangle(degree):
    """Rule on the triangle (0,0), (1,0), (0,1).

    Returns
    -------
    pts : ndarray, shape (n, 2)
    w : ndarray, shape (n,)
        Weights summing to 1/2, all positive.
    """
    _check_degree(degree)
    n = n_points_for_degree(degree)
    # weight (1-u) on [0,1] <-> Jacobi weight (1-x)^1 on [-1,1]
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (xj + 1.0)
    wu = wj / 4.0
    v, wv = gauss_segment(degree)
    U, V = np.meshgrid(u, v, indexing="ij")
    pts = np.column_stack([U.ravel(), ((1.0 - U) * V).ravel()])
    w = np.outer(wu, wv).ravel()
    pts.flags.writeable = False
    w.flags.writeable = False
    return pts, w


def triangle_rule(P0, P1, P2, degree):
    """Map the reference rule onto triangles.

    ``P0, P1, P2`` have shape (..., 2); the result has points of shape
    (..., n, 2) and weights (..., n) carrying the triangle area.
    """
    ref, w = reference_triangle(degree)
    P0, P1, P2 = (np.asarray(P, dtype=float) for P in (P0, P1, P2))
    e1 = P1 - P0
    e2 = P2 - P0
    pts = (P0[..., None, :] + ref[:, 0:1] * e1[..., None, :]
           + ref[:, 1:2] * e2[..., None, :])
    det = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    return pts, np.abs(det)[..., None] * w


def segment_rule(P, Q, degree):
    """Gauss points on segments PQ; weights carry the segment length."""
    t, w = gauss_segment(degree)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    pts = P[..., None, :] + t[:, None] * (Q - P)[..., None, :]
    length = np.linalg.norm(Q - P, axis=-1)
    return pts, length[..., None] * w
