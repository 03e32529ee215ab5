"""Cell aggregation and ghost facet sets.

Every interior (well-posed) cell seeds its own aggregate; cut cells are
attached by synchronous breadth-first rounds over facet neighbours, so
each aggregate contains exactly one interior root cell.  Ties between
candidate aggregates are broken towards the lowest root cell index,
which makes the aggregation deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from unfitted_bench.geometry import CUT, IN, OUT

__all__ = [
    "Aggregate",
    "AggregateMap",
    "build_aggregates",
    "ghost_facets",
    "nface_to_aggregate",
    "AggregationError",
]


class AggregationError(RuntimeError):
    """A cut cell cannot be reached from any interior cell."""


@dataclass(frozen=True)
class Aggregate:
    root: int
    cells: tuple      # member cell ids including the root, ascending
    size: float       # bounding-box diagonal of the member vertices


class AggregateMap:
    """Partition of the active cells into rooted aggregates."""

    def __init__(self, mesh, root_of_cell, round_of_cell, aggregates):
        self.mesh = mesh
        self.root_of_cell = root_of_cell      # -1 on inactive cells
        self.round_of_cell = round_of_cell    # 0 on interior, >= 1 on cut, -1 inactive
        self.aggregates = aggregates          # root id -> Aggregate, insert-ordered

    def aggregate_of(self, cell):
        root = self.root_of_cell[cell]
        if root < 0:
            raise KeyError(f"cell {cell} is not active")
        return self.aggregates[root]

    @property
    def roots(self):
        return list(self.aggregates)

    def multi_cell(self):
        """Aggregates with at least one cut member."""
        return [a for a in self.aggregates.values() if len(a.cells) > 1]


def _bounding_diagonal(mesh, cells):
    pts = mesh.vertices[np.unique(mesh.cells[list(cells)])]
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def build_aggregates(mesh, classification):
    """Attach every cut cell to an interior root by BFS rounds.

    Round r assigns each unassigned cut cell that is facet-adjacent to
    a cell assigned in round r-1, choosing the lowest candidate root.
    Raises :class:`AggregationError` if cut cells remain unreachable.
    """
    labels = classification.labels
    root = np.full(mesh.num_cells, -1, dtype=np.int64)
    rnd = np.full(mesh.num_cells, -1, dtype=np.int64)

    interior = np.flatnonzero(labels == IN)
    root[interior] = interior
    rnd[interior] = 0

    neighbours = _facet_neighbours(mesh)
    unassigned = set(int(c) for c in np.flatnonzero(labels == CUT))
    current_round = 0
    while unassigned:
        current_round += 1
        assignments = {}
        for c in sorted(unassigned):
            candidates = [
                root[nb]
                for nb in neighbours[c]
                if root[nb] >= 0 and rnd[nb] == current_round - 1
            ]
            if candidates:
                assignments[c] = min(candidates)
        if not assignments:
            raise AggregationError(
                f"{len(unassigned)} cut cells unreachable from interior cells"
            )
        for c, r in assignments.items():
            root[c] = r
            rnd[c] = current_round
            unassigned.discard(c)

    aggregates = {}
    members = {int(r): [] for r in interior}
    for c in np.flatnonzero(root >= 0):
        members[int(root[c])].append(int(c))
    for r in sorted(members):
        cells = tuple(sorted(members[r]))
        aggregates[r] = Aggregate(r, cells, _bounding_diagonal(mesh, cells))
    return AggregateMap(mesh, root, rnd, aggregates)


def _facet_neighbours(mesh):
    neighbours = [[] for _ in range(mesh.num_cells)]
    for a, b in mesh.edge_cells:
        if b >= 0:
            neighbours[a].append(int(b))
            neighbours[b].append(int(a))
    return neighbours


def ghost_facets(mesh, classification, aggmap=None):
    """Facet sets for the cut-region and intra-aggregate penalties.

    The first set holds facets between two active cells with at least
    one cut side; the second removes facets whose two cells belong to
    different aggregates (requires ``aggmap``).
    """
    labels = classification.labels
    cut_set = []
    for e in mesh.interior_facets():
        a, b = mesh.edge_cells[e]
        if labels[a] == OUT or labels[b] == OUT:
            continue
        if labels[a] == CUT or labels[b] == CUT:
            cut_set.append(int(e))
    cut_set = np.array(cut_set, dtype=np.int64)
    if aggmap is None:
        return cut_set, None
    keep = [
        e for e in cut_set
        if aggmap.root_of_cell[mesh.edge_cells[e, 0]]
        == aggmap.root_of_cell[mesh.edge_cells[e, 1]]
    ]
    return cut_set, np.array(keep, dtype=np.int64)


def nface_to_aggregate(mesh, classification, aggmap):
    """Assign each ill-posed n-face to an aggregate.

    Ill-posed n-faces are those in the closure of some cut cell but of
    no interior cell.  Each maps to the lowest root among aggregates of
    cut cells whose closure contains it.
    """
    interior_faces = set()
    for c in classification.interior_cells:
        interior_faces.update(mesh.cell_closure(c))
    owner = {}
    for c in classification.cut_cells:
        r = int(aggmap.root_of_cell[c])
        for nf in mesh.cell_closure(c):
            if nf in interior_faces:
                continue
            if nf not in owner or r < owner[nf]:
                owner[nf] = r
    return owner
