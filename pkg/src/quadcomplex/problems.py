"""Manufactured solutions of the benchmark problems.

Derivatives and source terms are generated symbolically once and compiled
with numpy; the resulting callables act on points of shape (..., 2).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

X, Y = sympy.symbols("x y", real=True)


def _compile(expr):
    f = sympy.lambdify((X, Y), expr, "numpy")

    def field(p):
        p = np.asarray(p, dtype=float)
        out = f(p[..., 0], p[..., 1])
        return np.broadcast_to(np.asarray(out, dtype=float), p.shape[:-1]).copy()

    return field


def _compile_vec(e0, e1):
    f0, f1 = _compile(e0), _compile(e1)

    def field(p):
        return np.stack([f0(p), f1(p)], axis=-1)

    return field


@dataclass(frozen=True)
class ScalarProblem:
    name: str
    u: object
    grad: object
    source: object  # -Laplace u
    expr: str


@dataclass(frozen=True)
class VectorProblem:
    name: str
    sigma: object
    rot: object
    source: object  # curl rot sigma + sigma
    expr: str


def scalar_problem(name, expr):
    grad = (sympy.diff(expr, X), sympy.diff(expr, Y))
    lap = sympy.diff(expr, X, 2) + sympy.diff(expr, Y, 2)
    return ScalarProblem(name, _compile(expr), _compile_vec(*grad),
                         _compile(sympy.expand(-lap)), str(expr))


def vector_problem(name, s0, s1):
    rot = sympy.diff(s1, X) - sympy.diff(s0, Y)
    # curl w = (dw/dy, -dw/dx)
    f0 = sympy.diff(rot, Y) + s0
    f1 = -sympy.diff(rot, X) + s1
    return VectorProblem(name, _compile_vec(s0, s1), _compile(rot),
                         _compile_vec(f0, f1), f"({s0}, {s1})")


@lru_cache(maxsize=None)
def poisson_polynomial():
    """u = y(x+y)(x-3y+4)(2x-y-2), zero on the skewed benchmark domain."""
    return scalar_problem("poisson-poly",
                          Y * (X + Y) * (X - 3 * Y + 4) * (2 * X - Y - 2))


@lru_cache(maxsize=None)
def laplace_eigen_square():
    """First Dirichlet eigenfunction of the unit square, lambda = 2 pi^2."""
    return scalar_problem("sin-sin", sympy.sin(sympy.pi * X) * sympy.sin(sympy.pi * Y))


LAPLACE_EIGENVALUE = 2.0 * np.pi**2


@lru_cache(maxsize=None)
def hrot_polynomial():
    """sigma = (xy^2 - xy, x^2 y - xy), zero tangential trace on the unit square."""
    return vector_problem("hrot-poly", X * Y**2 - X * Y, X**2 * Y - X * Y)


@lru_cache(maxsize=None)
def consistency_test_fields():
    """Smooth fields with nonvanishing boundary traces for the E-functionals.

    Returns ``(zeta, div_zeta, w, grad_w)``.
    """
    z0 = sympy.sin(X + 2 * Y) + X * Y
    z1 = sympy.cos(2 * X - Y) + X**2
    w = sympy.exp(X) * sympy.cos(Y) + X * Y**2
    div = sympy.diff(z0, X) + sympy.diff(z1, Y)
    return (_compile_vec(z0, z1), _compile(div), _compile(w),
            _compile_vec(sympy.diff(w, X), sympy.diff(w, Y)))
