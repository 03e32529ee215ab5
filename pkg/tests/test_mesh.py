"""Background mesh numbering, incidence and measures."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfitted_bench.mesh import BackgroundMesh


def unit_mesh(n):
    return BackgroundMesh((0.0, 0.0), (1.0, 1.0), n)


def test_frozen_counts_and_numbering_n2():
    mesh = unit_mesh(2)
    assert mesh.num_vertices == 9
    assert mesh.num_edges == 16
    assert mesh.num_cells == 8
    # Square 0 spans vertices 0,1,3,4; its diagonal runs 0 -> 4.
    assert mesh.cells[0].tolist() == [0, 1, 4]
    assert mesh.cells[1].tolist() == [0, 4, 3]
    assert np.allclose(mesh.vertices[4], [0.5, 0.5])


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 10))
def test_counting_invariants(n):
    mesh = unit_mesh(n)
    v, e, c = mesh.num_vertices, mesh.num_edges, mesh.num_cells
    assert v == (n + 1) ** 2
    assert c == 2 * n * n
    assert v - e + c == 1
    assert len(mesh.boundary_facets()) == 4 * n
    assert len(mesh.interior_facets()) == e - 4 * n == 3 * n * n - 2 * n


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 8))
def test_cells_counter_clockwise_with_equal_volumes(n):
    mesh = unit_mesh(n)
    coords = mesh.vertices[mesh.cells]
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    assert (signed > 0.0).all()
    assert np.allclose(signed, 0.5 / n**2, rtol=1e-12)


def test_edges_sorted_lexicographically():
    mesh = unit_mesh(3)
    order = np.lexsort((mesh.edges[:, 1], mesh.edges[:, 0]))
    assert (order == np.arange(mesh.num_edges)).all()
    assert (mesh.edges[:, 0] < mesh.edges[:, 1]).all()


def test_edge_cell_incidence_consistent():
    mesh = unit_mesh(3)
    for e in range(mesh.num_edges):
        va, vb = mesh.edges[e]
        cells = mesh.facet_cells(e)
        assert 1 <= len(cells) <= 2
        assert list(cells) == sorted(cells)
        for c in cells:
            assert {va, vb} <= set(mesh.cells[c])
    for e in mesh.interior_facets():
        assert len(mesh.facet_cells(e)) == 2
    for e in mesh.boundary_facets():
        assert len(mesh.facet_cells(e)) == 1


def test_vertex_incidence_matches_cell_table():
    mesh = unit_mesh(3)
    for v in range(mesh.num_vertices):
        expected = sorted(c for c in range(mesh.num_cells) if v in mesh.cells[c])
        assert list(mesh.nface_cells((0, v))) == expected
    assert mesh.nface_cells((2, 5)) == (5,)
    with pytest.raises(ValueError):
        mesh.nface_cells((3, 0))


def test_cell_closure_sorted_and_complete():
    mesh = unit_mesh(2)
    closure = mesh.cell_closure(0)
    assert closure == sorted(closure)
    assert [dim for dim, _ in closure] == [0, 0, 0, 1, 1, 1, 2]
    verts = {idx for dim, idx in closure if dim == 0}
    assert verts == set(mesh.cells[0])
    for dim, idx in closure:
        if dim == 1:
            assert set(mesh.edges[idx]) <= verts


def test_facet_normals_outward_unit_and_opposite():
    mesh = unit_mesh(3)
    for e in mesh.interior_facets():
        a, b = mesh.facet_cells(e)
        na = mesh.facet_normal(e, a)
        nb = mesh.facet_normal(e, b)
        assert np.linalg.norm(na) == pytest.approx(1.0, rel=1e-14)
        assert np.allclose(na, -nb)
        mid = mesh.vertices[mesh.edges[e]].mean(axis=0)
        assert np.dot(na, mid - mesh.cell_coords(a).mean(axis=0)) > 0.0


def test_measures():
    mesh = BackgroundMesh((-1.21, -1.21), (1.21, 1.21), 40)
    d = mesh.cell_diameters()
    assert np.allclose(d, 0.0605 * np.sqrt(2.0), rtol=1e-13)
    assert d[7] == pytest.approx(mesh.cell_diameter(7), rel=1e-14)
    assert mesh.cell_volume(0) == pytest.approx(0.5 * 0.0605**2, rel=1e-12)
    assert mesh.diameter == pytest.approx(2.42 * np.sqrt(2.0), rel=1e-14)
    assert mesh.edge_length(0) == pytest.approx(0.0605, rel=1e-12)


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        BackgroundMesh((0.0, 0.0), (1.0, 1.0), 0)
    with pytest.raises(ValueError):
        BackgroundMesh((0.0, 0.0), (0.0, 1.0), 2)


def test_construction_deterministic():
    a, b = unit_mesh(5), unit_mesh(5)
    assert (a.vertices == b.vertices).all()
    assert (a.cells == b.cells).all()
    assert (a.edges == b.edges).all()
    assert (a.edge_cells == b.edge_cells).all()
