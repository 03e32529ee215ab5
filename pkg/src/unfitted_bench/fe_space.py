"""Continuous Lagrange spaces on the active cells, with DOF
classification and the discrete extension from interior cells.

Scalar nodes sit on vertices (order 1) and on vertices plus edge
midpoints (order 2); each node is owned by the lowest-dimensional
n-face containing it.  Vector-valued spaces interleave components per
node.  A node is ill-posed when its owner n-face belongs only to cut
cells; its value is then constrained to the extrapolated root-cell
polynomial of its aggregate, with weights given by the root's shape
functions evaluated at the node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from unfitted_bench.aggregation import nface_to_aggregate

__all__ = [
    "FESpace",
    "DofClassification",
    "classify_dofs",
    "NodalExtension",
    "build_extension",
    "RootInterpolation",
    "build_dg_interpolation",
    "shape_values",
    "shape_gradients",
    "eval_fe",
]


def shape_values(order, pts):
    """Lagrange shape functions on the reference triangle, (npts, nloc)."""
    x, y = pts[:, 0], pts[:, 1]
    l0 = 1.0 - x - y
    if order == 1:
        return np.stack([l0, x, y], axis=1)
    if order == 2:
        return np.stack(
            [
                l0 * (2.0 * l0 - 1.0),
                x * (2.0 * x - 1.0),
                y * (2.0 * y - 1.0),
                4.0 * l0 * x,
                4.0 * x * y,
                4.0 * y * l0,
            ],
            axis=1,
        )
    raise ValueError(f"unsupported order {order}")


def shape_gradients(order, pts):
    """Reference gradients, (npts, nloc, 2)."""
    x, y = pts[:, 0], pts[:, 1]
    l0 = 1.0 - x - y
    one = np.ones_like(x)
    zero = np.zeros_like(x)
    dl0 = np.stack([-one, -one], axis=1)
    dl1 = np.stack([one, zero], axis=1)
    dl2 = np.stack([zero, one], axis=1)
    if order == 1:
        return np.stack([dl0, dl1, dl2], axis=1)
    if order == 2:
        g = [
            (4.0 * l0 - 1.0)[:, None] * dl0,
            (4.0 * x - 1.0)[:, None] * dl1,
            (4.0 * y - 1.0)[:, None] * dl2,
            4.0 * (x[:, None] * dl0 + l0[:, None] * dl1),
            4.0 * (y[:, None] * dl1 + x[:, None] * dl2),
            4.0 * (l0[:, None] * dl2 + y[:, None] * dl0),
        ]
        return np.stack(g, axis=1)
    raise ValueError(f"unsupported order {order}")


class FESpace:
    """Nodal space of order 1 or 2 on the active cells of a mesh.

    Parameters
    ----------
    mesh : BackgroundMesh
    active_cells : array of cell ids (ascending)
    order : int, 1 or 2
    ncomp : int
        Components per node (1 scalar, 2 plane elasticity).
    """

    def __init__(self, mesh, active_cells, order, ncomp=1):
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        self.mesh = mesh
        self.order = int(order)
        self.ncomp = int(ncomp)
        self.active_cells = np.asarray(active_cells, dtype=np.int64)

        verts = np.unique(mesh.cells[self.active_cells])
        owners = [(0, int(v)) for v in verts]
        coords = [mesh.vertices[verts]]
        self._vertex_node = {int(v): i for i, v in enumerate(verts)}
        self._edge_node = {}
        if order == 2:
            edges = np.unique(mesh.cell_edges[self.active_cells])
            base = len(verts)
            self._edge_node = {int(e): base + i for i, e in enumerate(edges)}
            owners += [(1, int(e)) for e in edges]
            coords.append(mesh.vertices[mesh.edges[edges]].mean(axis=1))
        self.node_coords = np.concatenate(coords)
        self.node_owner = owners
        self.num_nodes = len(owners)

        nloc = 3 if order == 1 else 6
        self.nloc = nloc
        self.cell_nodes = np.empty((len(self.active_cells), nloc), dtype=np.int64)
        for pos, c in enumerate(self.active_cells):
            tri = mesh.cells[c]
            nodes = [self._vertex_node[int(v)] for v in tri]
            if order == 2:
                nodes += [self._edge_node[int(e)] for e in mesh.cell_edges[c]]
            self.cell_nodes[pos] = nodes
        self._pos_of_cell = {int(c): i for i, c in enumerate(self.active_cells)}

        coords3 = mesh.vertices[mesh.cells[self.active_cells]]
        self.cell_origin = coords3[:, 0]
        self.cell_jac = np.stack(
            [coords3[:, 1] - coords3[:, 0], coords3[:, 2] - coords3[:, 0]], axis=2
        )
        self.cell_jac_inv = np.linalg.inv(self.cell_jac)

    @property
    def ndof(self):
        return self.num_nodes * self.ncomp

    def position(self, cell):
        return self._pos_of_cell[int(cell)]

    def node_dofs(self, node):
        return [node * self.ncomp + c for c in range(self.ncomp)]

    def cell_dofs(self, cell):
        """Interleaved global dofs for the closure of an active cell."""
        nodes = self.cell_nodes[self.position(cell)]
        dofs = np.empty(self.nloc * self.ncomp, dtype=np.int64)
        for i, nd in enumerate(nodes):
            for c in range(self.ncomp):
                dofs[i * self.ncomp + c] = nd * self.ncomp + c
        return dofs

    def to_reference(self, cell, pts):
        pos = self.position(cell)
        return (pts - self.cell_origin[pos]) @ self.cell_jac_inv[pos].T

    def basis_at(self, cell, pts):
        """Values and physical gradients of the cell basis at physical points."""
        pos = self.position(cell)
        ref = (pts - self.cell_origin[pos]) @ self.cell_jac_inv[pos].T
        vals = shape_values(self.order, ref)
        grads = shape_gradients(self.order, ref) @ self.cell_jac_inv[pos]
        return vals, grads

    def interpolate(self, func):
        """Nodal interpolation; ``func`` maps (k, 2) points to (k, ncomp)."""
        vals = np.asarray(func(self.node_coords), dtype=float)
        vals = vals.reshape(self.num_nodes, self.ncomp)
        return vals.ravel()


def eval_fe(space, vec, cell, point, tol=1e-12):
    """Evaluate a coefficient vector at a physical point of a cell.

    Returns (value, gradient) with shapes (ncomp,) and (ncomp, 2).
    Raises if the point lies outside the cell beyond ``tol`` in
    barycentric coordinates.
    """
    point = np.asarray(point, dtype=float)
    ref = space.to_reference(cell, point[None, :])[0]
    bary = np.array([1.0 - ref[0] - ref[1], ref[0], ref[1]])
    if bary.min() < -tol or bary.max() > 1.0 + tol:
        raise ValueError(f"point {point} lies outside cell {cell}")
    vals, grads = space.basis_at(cell, point[None, :])
    coeff = vec[space.cell_dofs(cell)].reshape(space.nloc, space.ncomp)
    value = coeff.T @ vals[0]
    gradient = np.einsum("lc,ld->cd", coeff, grads[0])
    return value, gradient


# ----------------------------------------------------------------------
# DOF classification

@dataclass
class DofClassification:
    ill_mask: np.ndarray     # per scalar node
    ill_nodes: np.ndarray
    well_nodes: np.ndarray


def classify_dofs(space, classification, fixed_nodes=()):
    """Split scalar nodes into well-posed and ill-posed.

    A node is ill-posed when its owner n-face is in no interior cell's
    closure.  Nodes listed in ``fixed_nodes`` (strong Dirichlet) are
    forced well-posed: they are eliminated, not solved.
    """
    mesh = space.mesh
    interior_faces = set()
    for c in classification.interior_cells:
        interior_faces.update(mesh.cell_closure(c))
    fixed = set(int(n) for n in fixed_nodes)
    ill = np.zeros(space.num_nodes, dtype=bool)
    for node, owner in enumerate(space.node_owner):
        if node in fixed:
            continue
        ill[node] = owner not in interior_faces
    return DofClassification(ill, np.flatnonzero(ill), np.flatnonzero(~ill))


# ----------------------------------------------------------------------
# discrete extension

class NodalExtension:
    """Constraint data for ill-posed nodes.

    For ill-posed node a with aggregate root R, the constrained value is
    sum_b w[a, b] * v[b] over the root's closure nodes b, where w are
    the root's shape functions evaluated at the node of a.  Weights are
    component-agnostic; vector dofs share them per node.
    """

    def __init__(self, space, ill_nodes, root_cells, root_nodes, weights):
        self.space = space
        self.ill_nodes = ill_nodes          # (ni,)
        self.root_cells = root_cells        # (ni,)
        self.root_nodes = root_nodes        # (ni, nloc) scalar node ids
        self.weights = weights              # (ni, nloc)

    def row_sums(self):
        return self.weights.sum(axis=1)

    def max_row_norm(self):
        if len(self.ill_nodes) == 0:
            return 1.0
        return float(np.abs(self.weights).sum(axis=1).max())

    def project(self, vec):
        """Replace ill-posed dof values by their constrained values."""
        space = self.space
        out = np.array(vec, dtype=float, copy=True)
        for c in range(space.ncomp):
            vals = out[self.root_nodes * space.ncomp + c]
            out[self.ill_nodes * space.ncomp + c] = np.einsum(
                "ib,ib->i", self.weights, vals
            )
        return out

    def constraint_matrix(self, well_nodes):
        """Sparse map from well-posed dof values to all dof values.

        Columns follow the ascending well-posed nodes (components
        interleaved); rows are all dofs of the space.
        """
        space = self.space
        ncomp = space.ncomp
        col_of_node = {int(n): i for i, n in enumerate(well_nodes)}
        rows, cols, vals = [], [], []
        for i, n in enumerate(well_nodes):
            for c in range(ncomp):
                rows.append(n * ncomp + c)
                cols.append(i * ncomp + c)
                vals.append(1.0)
        for k, a in enumerate(self.ill_nodes):
            for b, w in zip(self.root_nodes[k], self.weights[k]):
                j = col_of_node[int(b)]
                for c in range(ncomp):
                    rows.append(int(a) * ncomp + c)
                    cols.append(j * ncomp + c)
                    vals.append(float(w))
        shape = (space.ndof, len(well_nodes) * ncomp)
        return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


def build_extension(space, classification, aggmap, dof_classification):
    """Extension weights for every ill-posed node of the space."""
    mesh = space.mesh
    face_owner = nface_to_aggregate(mesh, classification, aggmap)
    ill_nodes = dof_classification.ill_nodes
    ni = len(ill_nodes)
    root_cells = np.empty(ni, dtype=np.int64)
    root_nodes = np.empty((ni, space.nloc), dtype=np.int64)
    weights = np.empty((ni, space.nloc))
    for k, node in enumerate(ill_nodes):
        owner = space.node_owner[node]
        try:
            root = face_owner[owner]
        except KeyError:
            raise KeyError(f"node {node}: owner n-face {owner} has no aggregate")
        pos = space.position(root)
        ref = space.to_reference(root, space.node_coords[node][None, :])
        root_cells[k] = root
        root_nodes[k] = space.cell_nodes[pos]
        weights[k] = shape_values(space.order, ref)[0]
    return NodalExtension(space, ill_nodes, root_cells, root_nodes, weights)


# ----------------------------------------------------------------------
# cell-wise (discontinuous) root interpolation

class RootInterpolation:
    """Per-cut-cell interpolation of the aggregate root polynomial.

    On cut cell T with root R, the interpolated coefficients are
    W_T @ v[R-nodes] where W_T[p, b] = N_b^R(x_p) for the nodes x_p of
    T.  Interior cells keep their own values.
    """

    def __init__(self, space, cut_cells, root_cells, weights):
        self.space = space
        self.cut_cells = cut_cells
        self.root_cells = root_cells
        self.weights = weights              # (ncut, nloc, nloc)

    def local_coefficients(self, vec):
        """Dict cut cell -> interpolated nodal values, (nloc, ncomp)."""
        space = self.space
        out = {}
        for k, c in enumerate(self.cut_cells):
            rpos = space.position(self.root_cells[k])
            rv = vec.reshape(space.num_nodes, space.ncomp)[space.cell_nodes[rpos]]
            out[int(c)] = self.weights[k] @ rv
        return out


def build_dg_interpolation(space, classification, aggmap):
    cut = [int(c) for c in classification.cut_cells]
    roots = [int(aggmap.root_of_cell[c]) for c in cut]
    weights = np.empty((len(cut), space.nloc, space.nloc))
    for k, (c, r) in enumerate(zip(cut, roots)):
        nodes = space.cell_nodes[space.position(c)]
        ref = space.to_reference(r, space.node_coords[nodes])
        weights[k] = shape_values(space.order, ref)
    return RootInterpolation(space, np.array(cut), np.array(roots), weights)
