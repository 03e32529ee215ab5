"""Structured triangular background meshes.

The mesh covers an axis-aligned rectangle with an n-by-n grid of
squares, each split along the diagonal running from its lower-left to
its upper-right corner.  Numbering is deterministic: vertices run row
by row with x fastest, edges follow the lexicographic order of their
sorted vertex pairs, and square k contributes cells 2k (below the
diagonal) and 2k+1 (above).

n-faces are addressed as (dim, index) pairs with dim 0 for vertices,
1 for edges and 2 for cells.
"""

from __future__ import annotations

import numpy as np

__all__ = ["BackgroundMesh"]


class BackgroundMesh:
    """Uniform triangulation of a rectangle.

    Parameters
    ----------
    lower, upper : (float, float)
        Opposite corners of the rectangle, componentwise lower < upper.
    n : int
        Number of squares per side (same in both directions), n >= 1.
    """

    def __init__(self, lower, upper, n):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if not np.all(upper > lower):
            raise ValueError("upper corner must exceed lower corner componentwise")
        if n < 1:
            raise ValueError("need at least one square per side")
        self.lower = lower
        self.upper = upper
        self.n = int(n)
        self.dx = (upper - lower) / n

        nv = n + 1
        xs = lower[0] + self.dx[0] * np.arange(nv)
        ys = lower[1] + self.dx[1] * np.arange(nv)
        gx, gy = np.meshgrid(xs, ys, indexing="xy")
        self.vertices = np.column_stack([gx.ravel(), gy.ravel()])

        ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
        ix, iy = ix.ravel(), iy.ravel()
        v00 = iy * nv + ix
        v10 = v00 + 1
        v01 = v00 + nv
        v11 = v01 + 1
        lowertri = np.column_stack([v00, v10, v11])
        uppertri = np.column_stack([v00, v11, v01])
        cells = np.empty((2 * n * n, 3), dtype=np.int64)
        cells[0::2] = lowertri
        cells[1::2] = uppertri
        self.cells = cells

        # Local edges (v0,v1), (v1,v2), (v2,v0); global ids from the
        # lexicographic order of sorted vertex pairs.
        locpairs = np.concatenate(
            [cells[:, [0, 1]], cells[:, [1, 2]], cells[:, [2, 0]]], axis=0
        )
        locpairs = np.sort(locpairs, axis=1)
        self.edges, inverse = np.unique(locpairs, axis=0, return_inverse=True)
        nc = len(cells)
        self.cell_edges = np.column_stack(
            [inverse[:nc], inverse[nc : 2 * nc], inverse[2 * nc :]]
        )

        # Stable sort keeps incident cells of each edge in ascending order.
        self.edge_cells = np.full((len(self.edges), 2), -1, dtype=np.int64)
        order = np.argsort(self.cell_edges.ravel(), kind="stable")
        owning_cell = np.repeat(np.arange(nc), 3)[order]
        counts = np.zeros(len(self.edges), dtype=np.int64)
        for e, c in zip(self.cell_edges.ravel()[order], owning_cell):
            self.edge_cells[e, counts[e]] = c
            counts[e] += 1

        self._vertex_cells = [[] for _ in range(len(self.vertices))]
        for c, tri in enumerate(cells):
            for v in tri:
                self._vertex_cells[v].append(c)

    # ------------------------------------------------------------------
    # sizes and measures

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def cell_coords(self, cell):
        return self.vertices[self.cells[cell]]

    def cell_volume(self, cell):
        a, b, c = self.cell_coords(cell)
        return 0.5 * abs(
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        )

    def cell_diameter(self, cell):
        a, b, c = self.cell_coords(cell)
        return max(
            float(np.linalg.norm(b - a)),
            float(np.linalg.norm(c - b)),
            float(np.linalg.norm(a - c)),
        )

    def cell_diameters(self):
        coords = self.vertices[self.cells]
        e = np.stack(
            [
                coords[:, 1] - coords[:, 0],
                coords[:, 2] - coords[:, 1],
                coords[:, 0] - coords[:, 2],
            ],
            axis=1,
        )
        return np.linalg.norm(e, axis=2).max(axis=1)

    def edge_length(self, edge):
        a, b = self.vertices[self.edges[edge]]
        return float(np.linalg.norm(b - a))

    # ------------------------------------------------------------------
    # incidence

    def cell_closure(self, cell):
        """All n-faces in the closure of a cell, sorted by (dim, index)."""
        verts = sorted(int(v) for v in self.cells[cell])
        edges = sorted(int(e) for e in self.cell_edges[cell])
        return [(0, v) for v in verts] + [(1, e) for e in edges] + [(2, int(cell))]

    def nface_cells(self, nface):
        """Cells whose closure contains the n-face, ascending."""
        dim, idx = nface
        if dim == 0:
            return tuple(self._vertex_cells[idx])
        if dim == 1:
            pair = self.edge_cells[idx]
            return tuple(int(c) for c in pair if c >= 0)
        if dim == 2:
            return (int(idx),)
        raise ValueError(f"bad n-face dimension {dim}")

    def facet_cells(self, edge):
        return self.nface_cells((1, edge))

    def interior_facets(self):
        return np.flatnonzero(self.edge_cells[:, 1] >= 0)

    def boundary_facets(self):
        return np.flatnonzero(self.edge_cells[:, 1] < 0)

    def facet_normal(self, edge, cell):
        """Unit normal of a facet pointing out of the given cell."""
        a, b = self.vertices[self.edges[edge]]
        t = b - a
        n = np.array([t[1], -t[0]]) / np.linalg.norm(t)
        centroid = self.cell_coords(cell).mean(axis=0)
        if np.dot(n, centroid - a) > 0.0:
            n = -n
        return n
