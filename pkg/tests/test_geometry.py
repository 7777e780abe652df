"""Meshing, boundary tagging, field containers, and export formats."""

import numpy as np
import pytest

from poroflow import (
    BadDimensions,
    BoundarySpec,
    OutOfDomain,
    PermeabilityField,
    ScalarField,
    UnknownLabel,
    VectorField,
    boundary_measure,
    interpolate,
    make_rectangle_mesh,
    make_reservoir_mesh,
)
from poroflow.geometry import eval_bc, write_scalar_csv, write_vector_csv, write_vtk


class TestRectangleMesh:
    def test_counts_diagonal(self):
        mesh = make_rectangle_mesh(2.0, 1.0, 4, 3)
        assert mesh.n_nodes == 5 * 4
        assert mesh.n_triangles == 2 * 4 * 3

    def test_counts_crossed(self):
        mesh = make_rectangle_mesh(2.0, 1.0, 4, 3, pattern="crossed")
        assert mesh.n_nodes == 5 * 4 + 4 * 3
        assert mesh.n_triangles == 4 * 4 * 3

    @pytest.mark.parametrize("pattern", ["diagonal", "crossed"])
    @pytest.mark.parametrize("nx,ny", [(1, 1), (3, 5), (8, 2)])
    def test_positive_areas_and_total_area(self, pattern, nx, ny):
        L, H = 3.0, 1.7
        mesh = make_rectangle_mesh(L, H, nx, ny, pattern=pattern)
        areas = mesh.signed_areas()
        assert np.all(areas > 0.0)
        assert abs(areas.sum() - L * H) <= 1e-12 * L * H

    def test_boundary_partition_and_perimeter(self):
        L, H = 3.0, 1.7
        mesh = make_rectangle_mesh(L, H, 5, 4)
        total = sum(boundary_measure(mesh, lab) for lab in mesh.labels)
        assert total == pytest.approx(2 * (L + H), rel=1e-12)

    def test_outward_normals(self):
        mesh = make_rectangle_mesh(2.0, 1.0, 2, 2)
        normals = mesh.edge_normals()
        for (a, b), n in zip(mesh.boundary_edges, normals):
            mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b])
            center = np.array([1.0, 0.5])
            assert np.dot(n, mid - center) > 0.0

    def test_bad_inputs(self):
        with pytest.raises(BadDimensions):
            make_rectangle_mesh(0.0, 1.0, 2, 2)
        with pytest.raises(BadDimensions):
            make_rectangle_mesh(1.0, 1.0, 0, 2)


class TestReservoirMesh:
    def test_smallest_case(self):
        mesh = make_reservoir_mesh(1.0, 1.0, 0.5, 1, 2)
        assert set(mesh.labels) == {"inlet", "well", "wall"}
        assert mesh.metadata["well_edges"] == 1
        assert mesh.metadata["well_width_effective"] == pytest.approx(0.5)

    def test_snapping_reported(self):
        # hy = 0.5, so a 0.2 m well snaps outward to one 0.5 m edge
        mesh = make_reservoir_mesh(100.0, 30.0, 0.2, 200, 60)
        assert mesh.metadata["well_edges"] == 1
        assert mesh.metadata["well_width_effective"] == pytest.approx(0.5)
        assert boundary_measure(mesh, "well") == pytest.approx(0.5, rel=1e-12)

    def test_well_centered(self):
        mesh = make_reservoir_mesh(100.0, 30.0, 6.0, 10, 10)
        y0, y1 = mesh.metadata["well_y0"], mesh.metadata["well_y1"]
        assert y1 - y0 == pytest.approx(6.0)
        assert 0.5 * (y0 + y1) == pytest.approx(15.0)

    def test_well_offset(self):
        mesh = make_reservoir_mesh(100.0, 30.0, 3.0, 10, 10)
        shifted = make_reservoir_mesh(100.0, 30.0, 3.0, 10, 10, well_offset=6.0)
        assert shifted.metadata["well_y0"] == mesh.metadata["well_y0"] + 6.0

    def test_perimeter_conserved(self):
        mesh = make_reservoir_mesh(100.0, 30.0, 0.2, 20, 12)
        total = sum(boundary_measure(mesh, lab) for lab in mesh.labels)
        assert total == pytest.approx(2 * (100.0 + 30.0), rel=1e-12)
        assert boundary_measure(mesh, "inlet") == pytest.approx(30.0, rel=1e-12)

    def test_unresolvable_well(self):
        with pytest.raises(BadDimensions):
            make_reservoir_mesh(1.0, 1.0, 1.5, 2, 2)  # W > H
        with pytest.raises(BadDimensions):
            make_reservoir_mesh(1.0, 1.0, 0.0, 2, 2)

    def test_unknown_label(self):
        mesh = make_reservoir_mesh(1.0, 1.0, 0.5, 2, 2)
        with pytest.raises(UnknownLabel):
            boundary_measure(mesh, "outlet")


class TestFields:
    def test_scalar_field_validation(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        with pytest.raises(ValueError):
            ScalarField(mesh, np.zeros(3))
        with pytest.raises(ValueError):
            ScalarField(mesh, np.full(mesh.n_nodes, np.inf))

    def test_vector_field_validation(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        with pytest.raises(ValueError):
            VectorField(mesh, np.zeros((mesh.n_triangles, 3)))

    def test_eval_bc_constant_and_callable(self):
        x = np.array([0.0, 1.0])
        y = np.array([2.0, 3.0])
        assert np.array_equal(eval_bc(5.0, x, y), [5.0, 5.0])
        assert np.array_equal(eval_bc(lambda x, y: x + y, x, y), [2.0, 4.0])


class TestPermeability:
    def test_isotropic_bounds(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        K = PermeabilityField.isotropic(mesh, 1e-12)
        assert K.k1 == K.k2 == 1e-12

    def test_per_cell_bounds_checked(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        vals = np.linspace(1e-13, 5e-12, mesh.n_triangles)
        K = PermeabilityField.isotropic_per_cell(mesh, vals)
        assert K.k1 == pytest.approx(1e-13)
        assert K.k2 == pytest.approx(5e-12)

    def test_asymmetric_rejected(self):
        t = np.array([[[1.0, 0.5], [0.1, 1.0]]])
        with pytest.raises(ValueError):
            PermeabilityField(t, k1=0.5, k2=2.0)

    def test_eigenvalues_outside_bounds_rejected(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 1, 1)
        with pytest.raises(ValueError):
            PermeabilityField(np.broadcast_to(np.eye(2), (2, 2, 2)).copy(), k1=2.0, k2=3.0)

    def test_anisotropic_tensor(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 1, 1)
        K = PermeabilityField.uniform_tensor(mesh, 2.0, 0.5, 1.0)
        lo = 1.5 - np.sqrt(0.5)
        hi = 1.5 + np.sqrt(0.5)
        assert K.k1 == pytest.approx(lo)
        assert K.k2 == pytest.approx(hi)


class TestBoundarySpec:
    def test_partition_enforced(self):
        mesh = make_reservoir_mesh(1.0, 1.0, 0.5, 2, 2)
        good = BoundarySpec(pressure={"inlet": 1.0, "well": 0.0}, velocity={"wall": 0.0})
        good.validate_partition(mesh)
        with pytest.raises(ValueError):
            BoundarySpec(pressure={"inlet": 1.0}, velocity={"wall": 0.0}).validate_partition(mesh)
        with pytest.raises(ValueError):
            BoundarySpec(pressure={"inlet": 1.0, "well": 0.0}, velocity={"inlet": 0.0})


class TestInterpolate:
    def test_constant_field(self):
        mesh = make_rectangle_mesh(2.0, 1.0, 3, 3)
        f = ScalarField.constant(mesh, 4.25)
        assert interpolate(f, (0.37, 0.61)) == pytest.approx(4.25, rel=1e-14)

    def test_linear_exactness_at_centroids(self):
        mesh = make_rectangle_mesh(2.0, 1.0, 3, 3)
        f = ScalarField.from_function(mesh, lambda x, y: x)
        for c in mesh.centroids()[:5]:
            assert interpolate(f, c) == pytest.approx(c[0], rel=1e-13)

    def test_hat_function_at_own_node(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        vals = np.zeros(mesh.n_nodes)
        vals[4] = 1.0
        f = ScalarField(mesh, vals)
        assert interpolate(f, mesh.nodes[4]) == pytest.approx(1.0, abs=1e-13)

    def test_out_of_domain(self):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        f = ScalarField.constant(mesh, 0.0)
        with pytest.raises(OutOfDomain):
            interpolate(f, (2.0, 0.5))


class TestExport:
    def test_vtk_layout(self, tmp_path):
        mesh = make_rectangle_mesh(1.0, 1.0, 2, 2)
        p = ScalarField.from_function(mesh, lambda x, y: x + y)
        v = VectorField(mesh, np.ones((mesh.n_triangles, 2)))
        path = tmp_path / "out.vtk"
        write_vtk(path, mesh, scalars={"pressure": p}, vectors={"velocity": v})
        text = path.read_text().splitlines()
        assert text[0] == "# vtk DataFile Version 2.0"
        assert "DATASET UNSTRUCTURED_GRID" in text
        assert f"POINTS {mesh.n_nodes} double" in text
        assert f"CELLS {mesh.n_triangles} {4 * mesh.n_triangles}" in text
        assert f"POINT_DATA {mesh.n_nodes}" in text
        assert "SCALARS pressure double 1" in text
        assert f"CELL_DATA {mesh.n_triangles}" in text
        assert "VECTORS velocity double" in text
        # triangle cell type everywhere
        i = text.index(f"CELL_TYPES {mesh.n_triangles}")
        assert all(t == "5" for t in text[i + 1 : i + 1 + mesh.n_triangles])

    def test_scalar_csv(self, tmp_path):
        mesh = make_rectangle_mesh(1.0, 1.0, 1, 1)
        f = ScalarField.from_function(mesh, lambda x, y: x)
        path = tmp_path / "field.csv"
        write_scalar_csv(path, f, header_comments=["cfg = 1"])
        lines = path.read_text().splitlines()
        assert lines[0] == "# cfg = 1"
        assert lines[1] == "x,y,value"
        assert len(lines) == 2 + mesh.n_nodes
        x, y, val = lines[2].split(",")
        assert float(val) == float(x)

    def test_vector_csv(self, tmp_path):
        mesh = make_rectangle_mesh(1.0, 1.0, 1, 1)
        v = VectorField(mesh, np.tile([1.5, -2.0], (mesh.n_triangles, 1)))
        path = tmp_path / "vel.csv"
        write_vector_csv(path, v)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,vx,vy"
        assert len(lines) == 1 + mesh.n_triangles
