"""Command-line entry point ``quadcomplex``.

Exit codes: 0 success, 2 invalid arguments, 3 solver non-convergence,
4 mesh or geometry error.
"""

import argparse
import sys

import numpy as np

from . import experiments
from .errors import GeometryError, QuadComplexError
from .geometry import (CELL_TABLE_MONOMIALS, EDGE_TABLE_MONOMIALS,
                       cell_monomial_integral, cell_table_closed_form,
                       edge_monomial_integral, edge_table_closed_form,
                       frame_from_vertices)
from .mesh import DEFAULT_TRAPEZOID_OFFSET

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_GEOMETRY = 0, 2, 3, 4


def _quad_arg(text):
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")
    if len(vals) != 8:
        raise argparse.ArgumentTypeError("expected 8 numbers x1,y1,...,x4,y4")
    return np.array(vals).reshape(4, 2)


def _mono(a, b):
    names = {(0, 0): "1"}
    if (a, b) in names:
        return names[(a, b)]
    parts = [f"xi^{a}" if a > 1 else "xi" if a else "",
             f"eta^{b}" if b > 1 else "eta" if b else ""]
    return "*".join(p for p in parts if p)


def tables_text(vertices):
    f = frame_from_vertices(vertices)
    lines = [f"alpha = {f.alpha:.15g}, beta = {f.beta:.15g}, r x s = {f.cross_rs:.15g}",
             "edge integrals (closed form | quadrature)"]
    edge = edge_table_closed_form(f)
    for i in range(4):
        for j, (a, b) in enumerate(EDGE_TABLE_MONOMIALS):
            q = float(edge_monomial_integral(f, i + 1, a, b))
            lines.append(f"  e{i + 1} {_mono(a, b):>8}: {edge[i, j]: .15e} | {q: .15e}")
    lines.append("cell integrals (closed form | quadrature)")
    cell = cell_table_closed_form(f)
    for j, (a, b) in enumerate(CELL_TABLE_MONOMIALS):
        q = float(cell_monomial_integral(f, a, b))
        lines.append(f"  {_mono(a, b):>11}: {cell[j]: .15e} | {q: .15e}")
    return "\n".join(lines)


def build_parser():
    p = argparse.ArgumentParser(prog="quadcomplex",
                                description="Convergence benchmarks for the quadrilateral "
                                            "QBL/QRT finite element complex.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=False, offset=False, degree=False, tol=True):
        sp.add_argument("--levels", type=int, default=4,
                        help="number of refinement levels starting at 8x8 (1..8)")
        sp.add_argument("--out", default=None, help="directory for CSV/SVG output")
        if grid:
            sp.add_argument("--grid", choices=experiments.GRIDS, default="quad")
        if offset:
            sp.add_argument("--offset", type=float, default=DEFAULT_TRAPEZOID_OFFSET,
                            help="shift of the interior vertex of the trapezoid square")
        if degree:
            sp.add_argument("--quad-degree", type=int, default=None,
                            help="quadrature degree for loads and error norms")
        if tol:
            sp.add_argument("--tol", type=float, default=1e-10,
                            help="relative solver tolerance")

    common(sub.add_parser("poisson", help="Poisson problem on the skewed domain"),
           grid=True, degree=True)
    common(sub.add_parser("eigen", help="first Dirichlet eigenvalue of the unit square"),
           grid=True, offset=True)
    common(sub.add_parser("hrot", help="H(rot) problem on the unit square"),
           offset=True, degree=True)
    cc = sub.add_parser("complex-check", help="exactness and consistency diagnostics")
    cc.add_argument("--levels", type=int, default=3,
                    help="number of meshes starting at 2x2 (1..8, dense limit applies)")
    cc.add_argument("--offset", type=float, default=DEFAULT_TRAPEZOID_OFFSET)
    cc.add_argument("--out", default=None)
    tb = sub.add_parser("tables", help="closed-form edge/cell integrals vs quadrature")
    tb.add_argument("--quad", type=_quad_arg, required=True,
                    help="counterclockwise vertices x1,y1,x2,y2,x3,y3,x4,y4")
    return p


def _validate(args):
    if getattr(args, "tol", 1.0) <= 0:
        raise ValueError("--tol must be positive")
    qd = getattr(args, "quad_degree", None)
    if qd is not None and qd < 1:
        raise ValueError("--quad-degree must be positive")


def run(args):
    _validate(args)
    cmd = args.command
    if cmd == "poisson":
        rep = experiments.run_poisson(args.levels, args.grid, args.out,
                                      args.quad_degree, args.tol)
    elif cmd == "eigen":
        rep = experiments.run_eigen(args.levels, args.grid, args.offset, args.out, args.tol)
    elif cmd == "hrot":
        rep = experiments.run_hrot(args.levels, args.offset, args.out,
                                   args.quad_degree, args.tol)
    elif cmd == "complex-check":
        return experiments.run_complex_check(args.levels, args.offset, args.out).rstrip()
    else:
        return tables_text(args.quad)
    return rep.format_table()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on malformed flags
    try:
        print(run(args))
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except QuadComplexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
