"""Global assembly, linear solve, conditioning and error measures.

A :class:`Discretization` bundles mesh, geometry classification,
aggregation, space, dof classification and extension for one case.
Assembly walks cells, facets and aggregates in ascending order and
accumulates triplets, so repeated runs produce bitwise-identical
matrices.  The strong aggregation method eliminates ill-posed dofs
through the extension constraints (reduced system over well-posed
dofs); mixed boundary conditions eliminate the body-fitted Dirichlet
dofs strongly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from unfitted_bench import forms
from unfitted_bench.aggregation import build_aggregates, ghost_facets
from unfitted_bench.fe_space import (
    FESpace,
    build_dg_interpolation,
    build_extension,
    classify_dofs,
    shape_gradients,
    shape_values,
)
from unfitted_bench.forms import MethodConfig
from unfitted_bench.geometry import (
    OUT_ETA,
    bulk_rule,
    classify_cells,
    exterior_bulk_rule,
    surface_rule,
)
from unfitted_bench.quadrature import segment_rule, triangle_rule

__all__ = [
    "Discretization",
    "AssembledSystem",
    "SolveResult",
    "SolverFailure",
    "assemble_system",
    "assemble_stabilisation",
    "assemble_bulk_stiffness",
    "solve",
    "cond1",
    "ErrorNorms",
    "error_norms",
    "fe_norms",
    "stability_probe",
    "mass_diagonal",
]


class SolverFailure(RuntimeError):
    """Sparse factorisation failed (singular system)."""


class Discretization:
    """Everything geometric and combinatorial for one benchmark case.

    Parameters
    ----------
    mesh : BackgroundMesh
    level_set : LevelSet
    problem : "poisson" | "elasticity"
    bc : "nitsche" | "mixed"
        Weak Dirichlet data on the whole embedded boundary, or strong
        Dirichlet on the body-fitted lower mesh lines with Neumann data
        on the embedded boundary.
    order : int
    eta0 : float
        Well-posedness threshold on the volume fraction.
    """

    def __init__(self, mesh, level_set, problem, bc, order, eta0=1.0,
                 mu=1.0, lam=1.5):
        if problem not in ("poisson", "elasticity"):
            raise ValueError(f"unknown problem {problem!r}")
        if bc not in ("nitsche", "mixed"):
            raise ValueError(f"unknown boundary condition mode {bc!r}")
        self.mesh = mesh
        self.level_set = level_set
        self.problem = problem
        self.bc = bc
        self.order = int(order)
        self.eta0 = float(eta0)
        self.mu = float(mu)
        self.lam = float(lam)
        self.ncomp = 1 if problem == "poisson" else 2

        self.classification = classify_cells(mesh, level_set, eta0)
        if len(self.classification.interior_cells) == 0:
            raise ValueError("no interior cells; geometry unresolved by the mesh")
        self.aggregates = build_aggregates(mesh, self.classification)
        self.facets_cut, self.facets_ag = ghost_facets(
            mesh, self.classification, self.aggregates
        )
        self.space = FESpace(
            mesh, self.classification.active_cells, self.order, self.ncomp
        )

        self.fixed_nodes = np.array(
            self._dirichlet_nodes() if bc == "mixed" else [], dtype=np.int64
        )
        self.dofs = classify_dofs(self.space, self.classification, self.fixed_nodes)
        self.extension = build_extension(
            self.space, self.classification, self.aggregates, self.dofs
        )
        self.dg_interpolation = build_dg_interpolation(
            self.space, self.classification, self.aggregates
        )

    def _dirichlet_nodes(self):
        snap = 1e-12 * self.mesh.diameter
        coords = self.space.node_coords
        on_axes = (np.abs(coords[:, 0] - self.mesh.lower[0]) <= snap) | (
            np.abs(coords[:, 1] - self.mesh.lower[1]) <= snap
        )
        return np.flatnonzero(on_axes)

    def geometric_cut_cells(self):
        """Active cells whose bulk quadrature must clip."""
        eta = self.classification.eta
        return np.flatnonzero((eta > OUT_ETA) & (eta < 1.0))

    def full_cells(self):
        """Active cells integrated with the plain reference rule."""
        return np.flatnonzero(self.classification.eta == 1.0)


# ----------------------------------------------------------------------
# triplet accumulation

class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, dofs_r, dofs_c, K):
        lr, lc = len(dofs_r), len(dofs_c)
        self.rows.append(np.repeat(dofs_r, lc))
        self.cols.append(np.tile(dofs_c, lr))
        self.vals.append(np.asarray(K, dtype=float).ravel())

    def add_many(self, dofs, K):
        """Same local matrix K scattered at each row of dofs (p, L)."""
        p, L = dofs.shape
        self.rows.append(np.repeat(dofs, L, axis=1).ravel())
        self.cols.append(np.tile(dofs, (1, L)).ravel())
        self.vals.append(np.tile(K.ravel(), p))

    def matrix(self, ndof):
        if not self.rows:
            return sp.csr_matrix((ndof, ndof))
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals)
        return sp.coo_matrix((vals, (rows, cols)), shape=(ndof, ndof)).tocsr()


def _interleave(nodes, ncomp):
    nodes = np.asarray(nodes, dtype=np.int64)
    return (nodes[:, None] * ncomp + np.arange(ncomp)).ravel()


def _cell_dof_table(space, positions):
    return (
        space.cell_nodes[positions][:, :, None] * space.ncomp
        + np.arange(space.ncomp)
    ).reshape(len(positions), space.nloc * space.ncomp)


# ----------------------------------------------------------------------
# bulk and boundary assembly

def _bulk_pde(disc, data, triplets, rhs, stiffness_only=False, clipped=True):
    """Accumulate the bulk operator (and load when data is given)."""
    space = disc.space
    mesh = disc.mesh
    order, ncomp = disc.order, disc.ncomp
    deg = 2 * order
    pts_ref, wts_ref = triangle_rule(deg)
    vals_ref = shape_values(order, pts_ref)
    grads_ref = shape_gradients(order, pts_ref)

    full = disc.full_cells() if clipped else disc.classification.active_cells
    # The structured mesh has two congruent cell shapes; reuse their
    # local matrices across all uniformly integrated cells.
    for parity in (0, 1):
        cells = full[full % 2 == parity]
        if len(cells) == 0:
            continue
        positions = np.array([space.position(c) for c in cells])
        jac_inv = space.cell_jac_inv[positions[0]]
        area = mesh.cell_volume(cells[0])
        w = wts_ref * area
        grads = grads_ref @ jac_inv
        if ncomp == 1:
            K = forms.bulk_stiffness(grads, w)
        else:
            K = forms.bulk_stiffness_elasticity(grads, w, disc.mu, disc.lam)
        dofs = _cell_dof_table(space, positions)
        triplets.add_many(dofs, K)
        if data is not None and not stiffness_only:
            jac = space.cell_jac[positions[0]]
            phys = space.cell_origin[positions][:, None, :] + pts_ref @ jac.T
            fv = data.f(phys.reshape(-1, 2)).reshape(len(cells), len(w), ncomp)
            floc = np.einsum("qi,pqc,q->pic", vals_ref, fv, w).reshape(len(cells), -1)
            np.add.at(rhs, dofs.ravel(), floc.ravel())

    if not clipped:
        return
    for c in disc.geometric_cut_cells():
        pts, w = bulk_rule(disc.classification, c, deg)
        if len(w) == 0:
            continue
        vals, grads = space.basis_at(c, pts)
        if ncomp == 1:
            K = forms.bulk_stiffness(grads, w)
        else:
            K = forms.bulk_stiffness_elasticity(grads, w, disc.mu, disc.lam)
        dofs = space.cell_dofs(c)
        triplets.add(dofs, dofs, K)
        if data is not None and not stiffness_only:
            fv = data.f(pts)
            rhs[dofs] += forms.load_vector(vals, w, fv)


def _boundary_pde(disc, data, triplets, rhs, beta):
    """Embedded boundary terms: Nitsche (weak Dirichlet) or Neumann."""
    space = disc.space
    order, ncomp = disc.order, disc.ncomp
    sdeg = 2 * order + 1
    for c in disc.geometric_cut_cells():
        pts, w, normals = surface_rule(disc.classification, c, sdeg)
        vals, grads = space.basis_at(c, pts)
        dofs = space.cell_dofs(c)
        if disc.bc == "nitsche":
            tau = forms.nitsche_tau(disc.mesh.cell_diameter(c), order, beta)
            if ncomp == 1:
                K = forms.nitsche_poisson(vals, grads, normals, w, tau)
                triplets.add(dofs, dofs, K)
                if data is not None:
                    g = data.u(pts)
                    rhs[dofs] += forms.nitsche_poisson_rhs(
                        vals, grads, normals, w, tau, g
                    )
            else:
                K = forms.nitsche_elasticity(
                    vals, grads, normals, w, tau, disc.mu, disc.lam
                )
                triplets.add(dofs, dofs, K)
                if data is not None:
                    g = data.u(pts)
                    rhs[dofs] += forms.nitsche_elasticity_rhs(
                        vals, grads, normals, w, tau, disc.mu, disc.lam, g
                    )
        else:
            if data is not None:
                q = data.flux(pts, normals)
                rhs[dofs] += forms.neumann_rhs(vals, w, q)


# ----------------------------------------------------------------------
# stabilisation assembly

def _facet_penalty(disc, facets, gamma, triplets):
    """Normal-derivative jump penalty over the given facets."""
    space = disc.space
    mesh = disc.mesh
    npts = max(1, space.order)
    t, w_ref = segment_rule(npts)
    for e in facets:
        k1, k2 = (int(c) for c in mesh.edge_cells[e])
        a, b = mesh.vertices[mesh.edges[e]]
        length = float(np.linalg.norm(b - a))
        pts = a[None, :] + t[:, None] * (b - a)[None, :]
        w = w_ref * length
        normal = mesh.facet_normal(e, k1)
        h_f = 0.5 * (mesh.cell_diameter(k1) + mesh.cell_diameter(k2))

        n1 = space.cell_nodes[space.position(k1)]
        n2 = space.cell_nodes[space.position(k2)]
        patch = list(n1) + [n for n in n2 if n not in set(n1)]
        index = {int(n): i for i, n in enumerate(patch)}
        table = np.zeros((npts, len(patch)))
        _, g1 = space.basis_at(k1, pts)
        _, g2 = space.basis_at(k2, pts)
        for i, n in enumerate(n1):
            table[:, index[int(n)]] += g1[:, i, :] @ normal
        for i, n in enumerate(n2):
            table[:, index[int(n)]] -= g2[:, i, :] @ normal
        K = forms.expand_components(
            forms.penalty_matrix(table, w, gamma * h_f), space.ncomp
        )
        dofs = _interleave(patch, space.ncomp)
        triplets.add(dofs, dofs, K)


def _root_residual_penalty(disc, gamma, triplets):
    """Bulk residual against the root-cell polynomial (cell-wise)."""
    space = disc.space
    deg = 2 * space.order
    pts_ref, wts_ref = triangle_rule(deg)
    for agg in disc.aggregates.aggregates.values():
        if len(agg.cells) == 1:
            continue
        root = agg.root
        scale = gamma / agg.size**2
        rnodes = space.cell_nodes[space.position(root)]
        for c in agg.cells:
            if c == root or disc.classification.labels[c] != 1:   # CUT only
                continue
            coords = disc.mesh.cell_coords(c)
            jac = np.stack([coords[1] - coords[0], coords[2] - coords[0]], axis=1)
            pts = coords[0] + pts_ref @ jac.T
            w = wts_ref * disc.mesh.cell_volume(c)
            vals_c, _ = space.basis_at(c, pts)
            vals_r, _ = space.basis_at(root, pts)

            cnodes = space.cell_nodes[space.position(c)]
            patch = list(cnodes) + [n for n in rnodes if n not in set(cnodes)]
            index = {int(n): i for i, n in enumerate(patch)}
            table = np.zeros((len(w), len(patch)))
            for i, n in enumerate(cnodes):
                table[:, index[int(n)]] += vals_c[:, i]
            for i, n in enumerate(rnodes):
                table[:, index[int(n)]] -= vals_r[:, i]
            K = forms.expand_components(
                forms.penalty_matrix(table, w, scale), space.ncomp
            )
            dofs = _interleave(patch, space.ncomp)
            triplets.add(dofs, dofs, K)


def _extension_residual_penalty(disc, gamma, use_grad, ustar, triplets):
    """Penalty on v minus its interior extension over each aggregate."""
    space = disc.space
    ext = disc.extension
    ill_row = {int(n): k for k, n in enumerate(ext.ill_nodes)}
    deg = 2 * space.order
    pts_ref, wts_ref = triangle_rule(deg)
    for agg in disc.aggregates.aggregates.values():
        if len(agg.cells) == 1:
            continue
        scale = gamma if use_grad else gamma / agg.size**2
        for c in agg.cells:
            if disc.classification.labels[c] != 1:   # residual vanishes on IN cells
                continue
            cnodes = space.cell_nodes[space.position(c)]
            ill_here = [int(n) for n in cnodes if n in ill_row]
            if not ill_here:
                continue
            if ustar == "exterior":
                pts, w = exterior_bulk_rule(disc.classification, c, deg)
                if len(w) == 0:
                    continue
            else:
                coords = disc.mesh.cell_coords(c)
                jac = np.stack([coords[1] - coords[0], coords[2] - coords[0]], axis=1)
                pts = coords[0] + pts_ref @ jac.T
                w = wts_ref * disc.mesh.cell_volume(c)
            vals, grads = space.basis_at(c, pts)

            patch = list(cnodes)
            for n in ill_here:
                for b in ext.root_nodes[ill_row[n]]:
                    if int(b) not in patch:
                        patch.append(int(b))
            index = {int(n): i for i, n in enumerate(patch)}
            shape = (len(w), len(patch), 2) if use_grad else (len(w), len(patch))
            table = np.zeros(shape)
            for i, n in enumerate(cnodes):
                if int(n) not in ill_row:
                    continue
                k = ill_row[int(n)]
                basis = grads[:, i, :] if use_grad else vals[:, i]
                table[:, index[int(n)]] += basis
                for b, wt in zip(ext.root_nodes[k], ext.weights[k]):
                    table[:, index[int(b)]] -= wt * basis
            if use_grad:
                K = forms.penalty_matrix_grad(table, w, scale)
            else:
                K = forms.penalty_matrix(table, w, scale)
            K = forms.expand_components(K, space.ncomp)
            dofs = _interleave(patch, space.ncomp)
            triplets.add(dofs, dofs, K)


def assemble_stabilisation(disc, method: MethodConfig):
    """The stabilisation matrix alone, over all dofs of the space."""
    method.validate()
    triplets = _Triplets()
    if method.name in ("F-GP", "A-GP"):
        facets = disc.facets_cut if method.name == "F-GP" else disc.facets_ag
        _facet_penalty(disc, facets, method.gamma, triplets)
    elif method.name == "B-GP-i":
        _root_residual_penalty(disc, method.gamma, triplets)
    elif method.name == "W-Ag-L2":
        _extension_residual_penalty(disc, method.gamma, False, method.ustar, triplets)
    elif method.name == "W-Ag-GRAD":
        _extension_residual_penalty(disc, method.gamma, True, method.ustar, triplets)
    return triplets.matrix(disc.space.ndof)


def assemble_bulk_stiffness(disc, clipped=True):
    """Stiffness (grad-grad / elastic) without boundary or penalty terms."""
    triplets = _Triplets()
    rhs = np.zeros(disc.space.ndof)
    _bulk_pde(disc, None, triplets, rhs, stiffness_only=True, clipped=clipped)
    return triplets.matrix(disc.space.ndof)


# ----------------------------------------------------------------------
# full system

@dataclass
class AssembledSystem:
    """Reduced linear system plus the maps back to the full dof vector."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    stage_dofs: np.ndarray          # dof ids represented by the reduced stage
    solve_pos: np.ndarray           # positions within stage_dofs that are solved
    fixed_pos: np.ndarray
    fixed_values: np.ndarray
    constraint: sp.csr_matrix | None
    ndof: int
    method: MethodConfig
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def expand(self, x):
        """Reduced solution -> full dof vector of the space."""
        stage = np.zeros(len(self.stage_dofs))
        stage[self.solve_pos] = x
        if len(self.fixed_pos):
            stage[self.fixed_pos] = self.fixed_values
        if self.constraint is not None:
            return self.constraint @ stage
        full = np.zeros(self.ndof)
        full[self.stage_dofs] = stage
        return full


def assemble_system(disc, data, method: MethodConfig):
    """Assemble the stabilised system for one method.

    Returns an :class:`AssembledSystem` whose matrix is the system as
    solved: extension constraints folded in for S-Ag, strong Dirichlet
    dofs eliminated in mixed mode.
    """
    method.validate()
    space = disc.space
    triplets = _Triplets()
    rhs = np.zeros(space.ndof)
    _bulk_pde(disc, data, triplets, rhs)
    _boundary_pde(disc, data, triplets, rhs, method.beta)
    A = triplets.matrix(space.ndof)
    if method.uses_gamma:
        A = A + assemble_stabilisation(disc, method)

    ncomp = space.ncomp
    if method.name == "S-Ag":
        C = disc.extension.constraint_matrix(disc.dofs.well_nodes)
        A = (C.T @ A @ C).tocsr()
        rhs = C.T @ rhs
        stage_dofs = _interleave(disc.dofs.well_nodes, ncomp)
        constraint = C
    else:
        stage_dofs = np.arange(space.ndof)
        constraint = None

    fixed_dofs = set(_interleave(disc.fixed_nodes, ncomp)) if len(disc.fixed_nodes) else set()
    fixed_mask = np.array([d in fixed_dofs for d in stage_dofs], dtype=bool)
    solve_pos = np.flatnonzero(~fixed_mask)
    fixed_pos = np.flatnonzero(fixed_mask)
    if len(fixed_pos):
        gvals = data.u(space.node_coords[disc.fixed_nodes]).reshape(
            len(disc.fixed_nodes), ncomp
        )
        by_dof = dict(zip(_interleave(disc.fixed_nodes, ncomp), gvals.ravel()))
        fixed_values = np.array([by_dof[d] for d in stage_dofs[fixed_pos]])
        reduced = A[solve_pos][:, solve_pos].tocsr()
        rhs_red = rhs[solve_pos] - A[solve_pos][:, fixed_pos] @ fixed_values
    else:
        fixed_values = np.empty(0)
        reduced = A[solve_pos][:, solve_pos].tocsr() if len(fixed_pos) else A.tocsr()
        rhs_red = rhs[solve_pos] if len(fixed_pos) else rhs

    return AssembledSystem(
        reduced,
        rhs_red,
        stage_dofs,
        solve_pos,
        fixed_pos,
        fixed_values,
        constraint,
        space.ndof,
        method,
    )


# ----------------------------------------------------------------------
# solve and conditioning

@dataclass
class SolveResult:
    vector: np.ndarray        # full dof vector of the space
    reduced: np.ndarray
    residual: float


def solve(system: AssembledSystem):
    """Direct sparse solve; returns the expanded dof vector."""
    try:
        lu = spla.splu(system.matrix.tocsc())
        x = lu.solve(system.rhs)
    except RuntimeError as exc:
        raise SolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SolverFailure("factorisation produced non-finite solution")
    denom = float(np.linalg.norm(system.rhs))
    residual = float(np.linalg.norm(system.matrix @ x - system.rhs))
    if denom > 0.0:
        residual /= denom
    return SolveResult(system.expand(x), x, residual)


def cond1(system, dense_limit=2500, force_estimate=False):
    """1-norm condition number of the system as solved.

    Exact (dense inverse) up to ``dense_limit`` unknowns, otherwise a
    Hager-Higham style estimate through the sparse factorisation.
    Returns (value, is_estimate).
    """
    A = system.matrix if hasattr(system, "matrix") else system
    n = A.shape[0]
    if n <= dense_limit and not force_estimate:
        dense = A.toarray()
        try:
            inv = np.linalg.inv(dense)
        except np.linalg.LinAlgError:
            return float("inf"), False
        norm = np.abs(dense).sum(axis=0).max()
        return float(norm * np.abs(inv).sum(axis=0).max()), False
    anorm = float(np.abs(A).sum(axis=0).max())
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError:
        return float("inf"), True
    op = spla.LinearOperator(
        A.shape,
        matvec=lu.solve,
        rmatvec=lambda v: lu.solve(v, trans="T"),
    )
    return float(anorm * spla.onenormest(op)), True


# ----------------------------------------------------------------------
# errors and probes

@dataclass
class ErrorNorms:
    l2: float            # relative L2 error
    h1: float            # relative full H1 error
    l2_abs: float
    h1_abs: float
    u_l2: float
    u_h1: float


def _integrate_squared(disc, vec, data):
    """Accumulate squared L2/H1 quantities of (u_h - u) and of u over Omega."""
    space = disc.space
    order, ncomp = disc.order, disc.ncomp
    deg = 2 * (order + 1)
    pts_ref, wts_ref = triangle_rule(deg)
    vals_ref = shape_values(order, pts_ref)
    grads_ref = shape_gradients(order, pts_ref)
    coeffs = vec.reshape(space.num_nodes, ncomp)

    e_l2 = e_h1 = u_l2 = u_h1 = 0.0

    full = disc.full_cells()
    for parity in (0, 1):
        cells = full[full % 2 == parity]
        if len(cells) == 0:
            continue
        positions = np.array([space.position(c) for c in cells])
        jac = space.cell_jac[positions[0]]
        jac_inv = space.cell_jac_inv[positions[0]]
        w = wts_ref * disc.mesh.cell_volume(cells[0])
        grads = grads_ref @ jac_inv
        phys = space.cell_origin[positions][:, None, :] + pts_ref @ jac.T
        local = coeffs[space.cell_nodes[positions]]          # (p, l, ncomp)
        uh = np.einsum("ql,plc->pqc", vals_ref, local)
        guh = np.einsum("qld,plc->pqcd", grads, local)
        if data is not None:
            flat = phys.reshape(-1, 2)
            ue = data.u(flat).reshape(uh.shape)
            gue = data.grad(flat).reshape(guh.shape)
            du, dgu = uh - ue, guh - gue
            u_l2 += float(np.einsum("pqc,pqc,q->", ue, ue, w))
            u_h1 += float(np.einsum("pqcd,pqcd,q->", gue, gue, w))
        else:
            du, dgu = uh, guh
        e_l2 += float(np.einsum("pqc,pqc,q->", du, du, w))
        e_h1 += float(np.einsum("pqcd,pqcd,q->", dgu, dgu, w))

    for c in disc.geometric_cut_cells():
        pts, w = bulk_rule(disc.classification, c, deg)
        if len(w) == 0:
            continue
        vals, grads = space.basis_at(c, pts)
        local = coeffs[space.cell_nodes[space.position(c)]]
        uh = np.einsum("ql,lc->qc", vals, local)
        guh = np.einsum("qld,lc->qcd", grads, local)
        if data is not None:
            ue = data.u(pts)
            gue = data.grad(pts)
            du, dgu = uh - ue, guh - gue
            u_l2 += float(np.einsum("qc,qc,q->", ue, ue, w))
            u_h1 += float(np.einsum("qcd,qcd,q->", gue, gue, w))
        else:
            du, dgu = uh, guh
        e_l2 += float(np.einsum("qc,qc,q->", du, du, w))
        e_h1 += float(np.einsum("qcd,qcd,q->", dgu, dgu, w))

    return e_l2, e_h1, u_l2, u_h1


def error_norms(disc, data, vec):
    """Relative and absolute L2/H1 errors against manufactured data."""
    e_l2, e_semi, u_l2, u_semi = _integrate_squared(disc, vec, data)
    e_h1 = np.sqrt(e_l2 + e_semi)
    u_h1 = np.sqrt(u_l2 + u_semi)
    e_l2 = np.sqrt(e_l2)
    u_l2 = np.sqrt(u_l2)
    return ErrorNorms(
        l2=float(e_l2 / u_l2 if u_l2 > 0 else e_l2),
        h1=float(e_h1 / u_h1 if u_h1 > 0 else e_h1),
        l2_abs=float(e_l2),
        h1_abs=float(e_h1),
        u_l2=float(u_l2),
        u_h1=float(u_h1),
    )


def fe_norms(disc, vec):
    """(L2, full H1) norms of a dof vector over the cut domain."""
    l2, semi, _, _ = _integrate_squared(disc, vec, None)
    return float(np.sqrt(l2)), float(np.sqrt(l2 + semi))


def stability_probe(disc, method: MethodConfig):
    """Smallest generalized eigenvalue of the stabilised cut stiffness.

    Compares grad-grad energy over the cut domain plus stabilisation
    against the same energy over the full active cells, on the
    complement of the per-component constants.  Values near one mean
    the penalty restores control over the exterior part of the cells;
    values near zero expose the small-cut pathology.
    """
    if method.name == "S-Ag":
        raise ValueError("probe is defined for the unreduced methods only")
    g_full = assemble_bulk_stiffness(disc, clipped=False).toarray()
    g_cut = assemble_bulk_stiffness(disc, clipped=True).toarray()
    s = assemble_stabilisation(disc, method).toarray()

    ndof, ncomp = disc.space.ndof, disc.ncomp
    ones = np.zeros((ncomp, ndof))
    for c in range(ncomp):
        ones[c, c::ncomp] = 1.0
    Z = scipy.linalg.null_space(ones)
    lhs = Z.T @ (g_cut + s) @ Z
    rhs = Z.T @ g_full @ Z
    eigs = scipy.linalg.eigh(lhs, rhs, eigvals_only=True)
    return float(eigs[0])


def mass_diagonal(disc):
    """Diagonal of the cut-domain mass matrix, per dof."""
    space = disc.space
    deg = 2 * disc.order
    pts_ref, wts_ref = triangle_rule(deg)
    vals_ref = shape_values(disc.order, pts_ref)
    diag = np.zeros(space.ndof)

    full = disc.full_cells()
    if len(full):
        positions = np.array([space.position(c) for c in full])
        w = wts_ref * disc.mesh.cell_volume(full[0])
        contrib = np.einsum("qi,qi,q->i", vals_ref, vals_ref, w)
        dofs = _cell_dof_table(space, positions)
        np.add.at(diag, dofs.ravel(), np.tile(np.repeat(contrib, space.ncomp), len(full)))
    for c in disc.geometric_cut_cells():
        pts, w = bulk_rule(disc.classification, c, deg)
        if len(w) == 0:
            continue
        vals, _ = space.basis_at(c, pts)
        contrib = np.einsum("qi,qi,q->i", vals, vals, w)
        diag[space.cell_dofs(c)] += np.repeat(contrib, space.ncomp)
    return diag
