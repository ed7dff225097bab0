"""Quadrilateral and triangle meshes, bisection refinement, test domains.

Edges carry a global orientation from the lower vertex id to the higher one.
For each cell, ``cell_edge_sign[k, i]`` is +1 when the counterclockwise local
edge i (from local vertex i to i+1) runs along that orientation, else -1.
"""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import NonConvex
from .geometry import frame_from_vertices, regularity_report

POISSON_DOMAIN = ((0.0, 0.0), (1.0, 0.0), (2.0, 2.0), (-1.0, 1.0))
UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
DEFAULT_TRAPEZOID_OFFSET = 0.125


def _build_edges(cells, nverts_per_cell):
    nc = len(cells)
    a = cells
    b = np.roll(cells, -1, axis=1)
    lo = np.minimum(a, b).ravel()
    hi = np.maximum(a, b).ravel()
    keys = np.stack([lo, hi], axis=1)
    edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True,
                                       return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        raise ValueError("non-manifold mesh: an edge is shared by more than two cells")
    cell_edges = inverse.reshape(nc, nverts_per_cell)
    cell_edge_sign = np.where(a < b, 1, -1).astype(np.int8)
    ne = len(edges)
    edge_cells = -np.ones((ne, 2), dtype=np.int64)
    edge_local = -np.ones((ne, 2), dtype=np.int64)
    slot = np.zeros(ne, dtype=np.int64)
    for k in range(nc):
        for i in range(nverts_per_cell):
            e = cell_edges[k, i]
            edge_cells[e, slot[e]] = k
            edge_local[e, slot[e]] = i
            slot[e] += 1
    return edges, cell_edges, cell_edge_sign, edge_cells, edge_local, counts == 1


@dataclass(frozen=True, eq=False)
class QuadMesh:
    vertices: np.ndarray  # (nv, 2)
    cells: np.ndarray  # (nc, 4) counterclockwise
    level: int = 0
    base_cells_per_side: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "cells", np.asarray(self.cells, dtype=np.int64))
        if self.cells.ndim != 2 or self.cells.shape[1] != 4:
            raise ValueError("cells must have shape (nc, 4)")
        self.frames  # validates convexity and orientation

    @cached_property
    def _topology(self):
        return _build_edges(self.cells, 4)

    @property
    def edges(self):
        return self._topology[0]

    @property
    def cell_edges(self):
        return self._topology[1]

    @property
    def cell_edge_sign(self):
        return self._topology[2]

    @property
    def edge_cells(self):
        return self._topology[3]

    @property
    def edge_local_index(self):
        return self._topology[4]

    @property
    def boundary_edges(self):
        """Boolean mask over edges."""
        return self._topology[5]

    @cached_property
    def boundary_vertices(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edges].ravel()] = True
        return mask

    @cached_property
    def frames(self):
        return frame_from_vertices(self.vertices[self.cells])

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_cells(self):
        return len(self.cells)

    @cached_property
    def edge_lengths(self):
        V = self.vertices
        return np.linalg.norm(V[self.edges[:, 1]] - V[self.edges[:, 0]], axis=1)

    @property
    def h(self):
        return float(np.max(self.frames.diameter))

    @property
    def area(self):
        return float(np.sum(self.frames.area))

    @property
    def grid_label(self):
        n = self.base_cells_per_side * 2**self.level
        return f"{n}x{n}"

    def euler_characteristic(self):
        return self.n_cells - self.n_edges + self.n_vertices


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    cells: np.ndarray  # (nt, 3)
    level: int = 0
    base_cells_per_side: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "cells", np.asarray(self.cells, dtype=np.int64))
        if np.any(self.signed_areas <= 0.0):
            raise NonConvex("triangle with non-positive orientation")

    @cached_property
    def _topology(self):
        return _build_edges(self.cells, 3)

    @property
    def edges(self):
        return self._topology[0]

    @property
    def boundary_edges(self):
        return self._topology[5]

    @cached_property
    def boundary_vertices(self):
        mask = np.zeros(len(self.vertices), dtype=bool)
        mask[self.edges[self.boundary_edges].ravel()] = True
        return mask

    @cached_property
    def signed_areas(self):
        P = self.vertices[self.cells]
        e1 = P[:, 1] - P[:, 0]
        e2 = P[:, 2] - P[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def h(self):
        P = self.vertices[self.cells]
        d = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2)
        return float(d.max())

    @property
    def area(self):
        return float(self.signed_areas.sum())

    @property
    def grid_label(self):
        n = self.base_cells_per_side * 2**self.level
        return f"{n}x{n}"


def initial_quad_domain(corners):
    """Single-cell mesh on a convex counterclockwise quadrilateral."""
    return QuadMesh(np.asarray(corners, dtype=float), np.array([[0, 1, 2, 3]]))


def four_trapezoid_square(offset=DEFAULT_TRAPEZOID_OFFSET):
    """Unit square cut into four cells through (0.5 + offset, 0.5).

    The interior point is joined to the four boundary-edge midpoints. Any
    ``offset`` in (0, 0.5) makes the cells non-parallelogram trapezoids.
    """
    if not 0.0 <= offset < 0.5:
        raise NonConvex(f"offset must lie in [0, 0.5), got {offset}")
    V = np.array([
        [0.0, 0.0], [0.5, 0.0], [1.0, 0.0],
        [0.0, 0.5], [0.5 + offset, 0.5], [1.0, 0.5],
        [0.0, 1.0], [0.5, 1.0], [1.0, 1.0],
    ])
    C = np.array([[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]])
    return QuadMesh(V, C, base_cells_per_side=2)


def uniform_square_mesh(n, corners=UNIT_SQUARE):
    """n x n parallelogram grid on the parallelogram spanned by ``corners``."""
    P = np.asarray(corners, dtype=float)
    t = np.linspace(0.0, 1.0, n + 1)
    S, T = np.meshgrid(t, t, indexing="xy")
    S = S.ravel()[:, None]
    T = T.ravel()[:, None]
    V = ((1 - S) * (1 - T) * P[0] + S * (1 - T) * P[1] + S * T * P[2]
         + (1 - S) * T * P[3])
    ids = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    C = np.stack([ids[:-1, :-1], ids[:-1, 1:], ids[1:, 1:], ids[1:, :-1]],
                 axis=-1).reshape(-1, 4)
    return QuadMesh(V, C, base_cells_per_side=n)


def bisection_refine(mesh):
    """Split every cell into four through its edge midpoints and centroid.

    Child k keeps parent vertex k as its first vertex, so the labeling of
    every child is counterclockwise and deterministic.
    """
    V = mesh.vertices
    nv, ne = mesh.n_vertices, mesh.n_edges
    mids = 0.5 * (V[mesh.edges[:, 0]] + V[mesh.edges[:, 1]])
    centers = mesh.frames.center
    newV = np.concatenate([V, mids, centers])
    C = mesh.cells
    M = nv + mesh.cell_edges  # M[:, i] = midpoint of local edge i (A_i A_{i+1})
    O = nv + ne + np.arange(mesh.n_cells)
    children = np.stack([
        np.stack([C[:, 0], M[:, 0], O, M[:, 3]], axis=1),
        np.stack([C[:, 1], M[:, 1], O, M[:, 0]], axis=1),
        np.stack([C[:, 2], M[:, 2], O, M[:, 1]], axis=1),
        np.stack([C[:, 3], M[:, 3], O, M[:, 2]], axis=1),
    ], axis=1).reshape(-1, 4)
    return QuadMesh(newV, children, level=mesh.level + 1,
                    base_cells_per_side=mesh.base_cells_per_side)


def refine_n(mesh, times):
    for _ in range(times):
        mesh = bisection_refine(mesh)
    return mesh


def refinement_sequence(mesh, levels):
    """Yield ``mesh`` and its successive refinements, ``levels`` meshes total."""
    for k in range(levels):
        yield mesh
        if k + 1 < levels:
            mesh = bisection_refine(mesh)


def split_to_triangles(mesh):
    C = mesh.cells
    tris = np.stack([C[:, [0, 1, 2]], C[:, [0, 2, 3]]], axis=1).reshape(-1, 3)
    return TriMesh(mesh.vertices.copy(), tris, level=mesh.level,
                   base_cells_per_side=mesh.base_cells_per_side)


@dataclass(frozen=True)
class MeshStats:
    h: float
    max_abs_alpha: float
    max_abs_beta: float
    max_R: float
    max_d_over_h2: float
    n_cells: int = field(default=0)


def mesh_stats(mesh):
    f = mesh.frames
    rep = regularity_report(f)
    return MeshStats(
        h=mesh.h,
        max_abs_alpha=float(np.max(np.abs(f.alpha))),
        max_abs_beta=float(np.max(np.abs(f.beta))),
        max_R=float(np.max(rep.R_K)),
        max_d_over_h2=float(np.max(rep.d_K / rep.h_K**2)),
        n_cells=mesh.n_cells,
    )


def write_qmesh(mesh, path):
    path = Path(path)
    lines = [f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_cells}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [" ".join(str(v) for v in c) for c in mesh.cells.tolist()]
    path.write_text("\n".join(lines) + "\n")


def read_qmesh(path):
    tokens = Path(path).read_text().split("\n")
    tokens = [t for t in tokens if t.strip()]
    nv, ne, nc = (int(t) for t in tokens[0].split())
    V = np.array([[float(x) for x in t.split()] for t in tokens[1:1 + nv]])
    C = np.array([[int(x) for x in t.split()] for t in tokens[1 + nv:1 + nv + nc]],
                 dtype=np.int64)
    if V.shape != (nv, 2) or C.shape != (nc, 4):
        raise ValueError("malformed .qmesh file")
    mesh = QuadMesh(V, C)
    if mesh.n_edges != ne:
        raise ValueError(f"edge count mismatch: header {ne}, rebuilt {mesh.n_edges}")
    return mesh
