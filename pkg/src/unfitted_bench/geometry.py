"""Implicit geometry on background meshes.

The domain is the sublevel set {phi < 0} of a scalar level set.  Cells
are classified by the volume fraction eta = |T cap Omega| / |T|, where
the cut region is the polygon obtained by linear interpolation of the
vertex values of phi (one interface segment per cut triangle).  The
same polygon feeds the bulk quadrature, so classification and
integration are always consistent.

Vertex values within 1e-14 of zero (relative to the mesh bounding-box
diameter) are snapped to zero, which resolves geometry boundaries lying
exactly on mesh lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from unfitted_bench.quadrature import (
    fan_triangulate,
    map_to_triangle,
    segment_rule,
    triangle_rule,
)

__all__ = [
    "LevelSet",
    "box",
    "circle",
    "half_plane",
    "intersection",
    "CellLabel",
    "CellClassification",
    "classify_cells",
    "bulk_rule",
    "surface_rule",
    "exterior_bulk_rule",
    "place_sliver",
    "box_family",
    "circle_family",
    "DegenerateGeometryError",
    "SliverSearchError",
]

SNAP_REL = 1e-14
OUT_ETA = 1e-14


class DegenerateGeometryError(RuntimeError):
    """Level set vanishes identically on a cell, or a cut segment is degenerate."""


class SliverSearchError(RuntimeError):
    """Bisection for a target minimum volume fraction failed to bracket."""


class LevelSet:
    """Scalar implicit description of a domain {phi < 0}.

    Parameters
    ----------
    value : callable
        Maps points of shape (..., 2) to values of shape (...).
    gradient : callable
        Maps points of shape (..., 2) to gradients of shape (..., 2).
    name : str
        Short tag used in diagnostics.
    """

    def __init__(self, value, gradient, name="levelset"):
        self._value = value
        self._gradient = gradient
        self.name = name

    def __call__(self, points):
        return self._value(np.asarray(points, dtype=float))

    def gradient(self, points):
        return self._gradient(np.asarray(points, dtype=float))


def circle(center, radius):
    center = np.asarray(center, dtype=float)

    def value(p):
        return np.linalg.norm(p - center, axis=-1) - radius

    def grad(p):
        d = p - center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        return d / np.where(r == 0.0, 1.0, r)

    return LevelSet(value, grad, name="circle")


def box(center, half_widths):
    """Axis-aligned box via the max of per-axis distances."""
    center = np.asarray(center, dtype=float)
    hw = np.broadcast_to(np.asarray(half_widths, dtype=float), (2,))

    def value(p):
        return (np.abs(p - center) - hw).max(axis=-1)

    def grad(p):
        d = np.abs(p - center) - hw
        axis = np.argmax(d, axis=-1)
        g = np.zeros_like(p)
        sign = np.sign(p - center)
        idx = np.indices(axis.shape)
        g[(*idx, axis)] = np.where(sign[(*idx, axis)] == 0.0, 1.0, sign[(*idx, axis)])
        return g

    return LevelSet(value, grad, name="box")


def half_plane(normal, offset):
    """The region {n . x < offset} for a unit-normalised n."""
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)

    def value(p):
        return p @ normal - offset

    def grad(p):
        return np.broadcast_to(normal, p.shape).copy()

    return LevelSet(value, grad, name="half_plane")


def intersection(*level_sets):
    """CSG intersection: pointwise max, gradient from the active branch."""

    def value(p):
        return np.max(np.stack([ls(p) for ls in level_sets]), axis=0)

    def grad(p):
        vals = np.stack([ls(p) for ls in level_sets])
        active = np.argmax(vals, axis=0)
        grads = np.stack([ls.gradient(p) for ls in level_sets])
        idx = np.indices(active.shape)
        return grads[(active, *idx)]

    return LevelSet(value, grad, name="intersection")


# ----------------------------------------------------------------------
# classification

OUT, CUT, IN = 0, 1, 2


class CellLabel:
    OUT = OUT
    CUT = CUT
    IN = IN


@dataclass
class CellClassification:
    """Cell labels and volume fractions for one (mesh, level set) pair."""

    mesh: object
    level_set: LevelSet
    eta0: float
    labels: np.ndarray        # per cell: OUT / CUT / IN
    eta: np.ndarray           # per cell volume fraction in [0, 1]
    vertex_phi: np.ndarray    # snapped level set values at mesh vertices

    @property
    def active_cells(self):
        return np.flatnonzero(self.labels != OUT)

    @property
    def interior_cells(self):
        return np.flatnonzero(self.labels == IN)

    @property
    def cut_cells(self):
        return np.flatnonzero(self.labels == CUT)

    def cell_phi(self, cell):
        return self.vertex_phi[self.mesh.cells[cell]]

    def is_geometrically_cut(self, cell):
        """True when the cell's bulk rule must clip (eta strictly inside (0,1))."""
        return OUT_ETA < self.eta[cell] < 1.0


def _clip_polygon(coords, phi):
    """Vertices of the polygon {linear phi <= 0} inside one triangle."""
    poly = []
    for k in range(3):
        a, b = k, (k + 1) % 3
        fa, fb = phi[a], phi[b]
        if fa <= 0.0:
            poly.append(coords[a])
        if fa * fb < 0.0:
            t = fa / (fa - fb)
            poly.append(coords[a] + t * (coords[b] - coords[a]))
    return np.array(poly) if poly else np.empty((0, 2))


def _polygon_area(poly):
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def classify_cells(mesh, level_set, eta0=1.0):
    """Label every cell OUT / CUT / IN by its volume fraction.

    A cell is OUT when eta vanishes (up to 1e-14), well-posed interior
    (IN) when eta >= eta0, and CUT otherwise.  eta is computed from the
    clipped polygon of the linearly interpolated level set; a cell whose
    snapped vertex values are identically zero is resolved by the sign
    of phi at the centroid.
    """
    if not 0.0 < eta0 <= 1.0:
        raise ValueError("eta0 must lie in (0, 1]")
    phi = level_set(mesh.vertices)
    snap = SNAP_REL * mesh.diameter
    phi = np.where(np.abs(phi) <= snap, 0.0, phi)

    labels = np.empty(mesh.num_cells, dtype=np.int8)
    eta = np.zeros(mesh.num_cells)
    cellphi = phi[mesh.cells]

    allpos = (cellphi > 0.0).all(axis=1)
    allneg = (cellphi < 0.0).all(axis=1)
    labels[allpos] = OUT
    labels[allneg] = IN
    eta[allneg] = 1.0

    rest = np.flatnonzero(~(allpos | allneg))
    for c in rest:
        p = cellphi[c]
        if (p == 0.0).all():
            centroid = mesh.cell_coords(c).mean(axis=0)
            inside = level_set(centroid[None, :])[0] < 0.0
            labels[c] = IN if inside else OUT
            eta[c] = 1.0 if inside else 0.0
            continue
        coords = mesh.cell_coords(c)
        poly = _clip_polygon(coords, p)
        frac = _polygon_area(poly) / mesh.cell_volume(c)
        frac = min(max(frac, 0.0), 1.0)
        eta[c] = frac
        if frac <= OUT_ETA:
            labels[c] = OUT
            eta[c] = 0.0
        elif frac >= eta0:
            labels[c] = IN
        else:
            labels[c] = CUT

    return CellClassification(mesh, level_set, eta0, labels, eta, phi)


# ----------------------------------------------------------------------
# cut-cell quadrature

def bulk_rule(classification, cell, degree):
    """Quadrature for T cap Omega, exact to ``degree`` on each sub-triangle.

    Interior cells get the mapped reference rule on the whole triangle;
    geometrically cut cells get the rule mapped to a fan triangulation
    of the clipped polygon.  Weights sum to eta * |T|.
    """
    mesh = classification.mesh
    coords = mesh.cell_coords(cell)
    phi = classification.cell_phi(cell)
    if (phi == 0.0).all():
        raise DegenerateGeometryError(f"level set vanishes on cell {cell}")
    if not classification.is_geometrically_cut(cell):
        if classification.eta[cell] <= OUT_ETA:
            return np.empty((0, 2)), np.empty(0)
        return map_to_triangle(coords, degree)
    poly = _clip_polygon(coords, phi)
    pts, wts = [], []
    for tri in fan_triangulate(poly):
        p, w = map_to_triangle(tri, degree)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def exterior_bulk_rule(classification, cell, degree):
    """Quadrature for T minus Omega (complement of :func:`bulk_rule`)."""
    mesh = classification.mesh
    coords = mesh.cell_coords(cell)
    phi = classification.cell_phi(cell)
    if (phi == 0.0).all():
        raise DegenerateGeometryError(f"level set vanishes on cell {cell}")
    if not classification.is_geometrically_cut(cell):
        if classification.eta[cell] <= OUT_ETA:
            return map_to_triangle(coords, degree)
        return np.empty((0, 2)), np.empty(0)
    poly = _clip_polygon(coords, -phi)
    pts, wts = [], []
    for tri in fan_triangulate(poly):
        p, w = map_to_triangle(tri, degree)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def surface_rule(classification, cell, degree):
    """Quadrature on the interface segment of a geometrically cut cell.

    Returns (points, weights, normals); weights sum to the segment
    length, the normal is constant along the segment and oriented so
    that n . grad(phi) > 0 (outward).
    """
    mesh = classification.mesh
    if not classification.is_geometrically_cut(cell):
        raise DegenerateGeometryError(f"cell {cell} carries no interface")
    coords = mesh.cell_coords(cell)
    phi = classification.cell_phi(cell)

    ends = [coords[k] for k in range(3) if phi[k] == 0.0]
    for k in range(3):
        a, b = k, (k + 1) % 3
        if phi[a] * phi[b] < 0.0:
            t = phi[a] / (phi[a] - phi[b])
            ends.append(coords[a] + t * (coords[b] - coords[a]))
    if len(ends) != 2:
        raise DegenerateGeometryError(
            f"cell {cell}: expected one interface segment, got {len(ends)} endpoints"
        )
    p0, p1 = ends
    tangent = p1 - p0
    length = np.linalg.norm(tangent)
    if length == 0.0:
        raise DegenerateGeometryError(f"cell {cell}: zero-length interface segment")

    normal = np.array([tangent[1], -tangent[0]]) / length
    midpoint = 0.5 * (p0 + p1)
    orient = float(normal @ classification.level_set.gradient(midpoint[None, :])[0])
    if orient < 0.0:
        normal = -normal
    elif orient == 0.0:
        raise DegenerateGeometryError(f"cell {cell}: cannot orient interface normal")

    npts = int(np.ceil((degree + 1) / 2))
    t, w = segment_rule(npts)
    pts = p0[None, :] + t[:, None] * tangent[None, :]
    normals = np.broadcast_to(normal, pts.shape).copy()
    return pts, w * length, normals


# ----------------------------------------------------------------------
# sliver placement

@dataclass(frozen=True)
class PlacedGeometry:
    level_set: LevelSet
    size: float
    min_eta: float
    target_eta: float


def box_family(center=(0.0, 0.0)):
    return lambda s: box(center, s)


def circle_family(center=(0.0, 0.0)):
    return lambda s: circle(center, s)


def _min_cut_eta(mesh, family, size, eta0):
    cls = classify_cells(mesh, family(size), eta0)
    cut = cls.cut_cells
    if len(cut) == 0:
        return 0.0
    return float(cls.eta[cut].min())


def place_sliver(family, mesh, target_eta, center=(0.0, 0.0), eta0=1.0,
                 line_fraction=0.76, max_iter=80):
    """Grow a geometry just past a mesh line until min eta hits a target.

    ``family`` maps a size parameter (half-width or radius, measured
    from ``center``) to a level set.  The anchor line is the largest
    mesh line distance <= line_fraction * extent, which is the same
    physical line for nested refinements, and the size is bisected in
    the half-cell window above it until the minimum volume fraction
    over cut cells is within half an order of magnitude of the target.
    """
    center = np.asarray(center, dtype=float)
    step = float(mesh.dx[0])
    extent = float(np.min(mesh.upper - center))
    lines = mesh.lower[0] + step * np.arange(1, mesh.n)
    dists = np.unique(np.abs(lines - center[0]))
    dists = dists[(dists > 0.2 * extent) & (dists + step <= extent * (1 + 1e-12))]
    if len(dists) == 0:
        raise SliverSearchError("no admissible mesh line for sliver placement")
    below = dists[dists <= line_fraction * extent]
    anchor = float(below.max() if len(below) else dists.max())

    # Corner cells scale like (offset/step)^2, so reaching benign targets
    # needs nearly the whole inter-line window.
    lo, hi = 1e-5 * step, 0.96 * step
    f_lo = _min_cut_eta(mesh, family, anchor + lo, eta0)
    f_hi = _min_cut_eta(mesh, family, anchor + hi, eta0)
    if not (f_lo < target_eta < f_hi):
        raise SliverSearchError(
            f"cannot bracket target eta {target_eta:.3e}: "
            f"min eta in [{f_lo:.3e}, {f_hi:.3e}] for sizes "
            f"[{anchor + lo:.6g}, {anchor + hi:.6g}]"
        )
    size, achieved = anchor + hi, f_hi
    for _ in range(max_iter):
        mid = np.sqrt(lo * hi)
        f_mid = _min_cut_eta(mesh, family, anchor + mid, eta0)
        if f_mid == 0.0 or f_mid < target_eta:
            lo = mid
        else:
            hi, size, achieved = mid, anchor + mid, f_mid
        if achieved > 0.0 and abs(np.log10(achieved / target_eta)) <= 0.4:
            break
    if achieved <= 0.0 or abs(np.log10(achieved / target_eta)) > 1.0:
        raise SliverSearchError(
            f"bisection stalled at min eta {achieved:.3e} for target {target_eta:.3e}"
        )
    return PlacedGeometry(family(size), float(size), achieved, target_eta)
