"""Structured triangular meshes on rectangles, boundary tagging, field
containers, and VTK/CSV export.

Meshes are immutable after construction. Boundary edges are oriented
counter-clockwise around the domain so the outward normal of edge (a, b)
is (t_y, -t_x) for the unit tangent t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Union

import numpy as np

from .errors import BadDimensions, OutOfDomain, UnknownLabel

BCData = Union[float, Callable]


@dataclass(frozen=True)
class Mesh:
    """Triangulation of a rectangle with labeled boundary edges.

    nodes : (n_nodes, 2) coordinates [m]
    triangles : (n_tri, 3) node indices, counter-clockwise
    boundary_edges : (n_edges, 2) node index pairs, CCW around the domain
    edge_labels : segment label per boundary edge
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_labels: tuple
    nx: int
    ny: int
    extent: tuple  # (L, H)
    metadata: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def labels(self) -> tuple:
        seen = []
        for lab in self.edge_labels:
            if lab not in seen:
                seen.append(lab)
        return tuple(seen)

    def edges_with_label(self, label: str) -> np.ndarray:
        idx = [i for i, lab in enumerate(self.edge_labels) if lab == label]
        if not idx:
            raise UnknownLabel(f"no boundary segment labeled {label!r}")
        return self.boundary_edges[idx]

    def nodes_with_label(self, label: str) -> np.ndarray:
        return np.unique(self.edges_with_label(label))

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def edge_lengths(self) -> np.ndarray:
        d = self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def edge_normals(self) -> np.ndarray:
        """Outward unit normals of the boundary edges."""
        d = self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]]
        length = np.hypot(d[:, 0], d[:, 1])
        return np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]

    def validate(self):
        n, t = self.n_nodes, self.triangles
        if t.min() < 0 or t.max() >= n:
            raise ValueError("triangle indices out of range")
        if self.boundary_edges.min() < 0 or self.boundary_edges.max() >= n:
            raise ValueError("boundary edge indices out of range")
        areas = self.signed_areas()
        if np.any(areas <= 0.0):
            raise ValueError("all triangles must have positive signed area")
        # boundary edges must cover the topological boundary exactly once
        if len(self.edge_labels) != self.boundary_edges.shape[0]:
            raise ValueError("one label per boundary edge required")
        counts: Dict[frozenset, int] = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = frozenset((int(a), int(b)))
                counts[key] = counts.get(key, 0) + 1
        topo = {k for k, c in counts.items() if c == 1}
        tagged = {frozenset((int(a), int(b))) for a, b in self.boundary_edges}
        if topo != tagged:
            raise ValueError("tagged edges do not match the topological boundary")
        return self


def _grid(L, H, nx, ny):
    x = np.linspace(0.0, L, nx + 1)
    y = np.linspace(0.0, H, ny + 1)
    X, Y = np.meshgrid(x, y)  # row j = constant y
    return np.column_stack([X.ravel(), Y.ravel()])


def _rectangle_edges(nx, ny):
    """CCW boundary edge list with side names, grid node ids j*(nx+1)+i."""

    def nid(i, j):
        return j * (nx + 1) + i

    edges, sides = [], []
    for i in range(nx):  # bottom, left -> right
        edges.append((nid(i, 0), nid(i + 1, 0)))
        sides.append("bottom")
    for j in range(ny):  # right, bottom -> top
        edges.append((nid(nx, j), nid(nx, j + 1)))
        sides.append("right")
    for i in range(nx, 0, -1):  # top, right -> left
        edges.append((nid(i, ny), nid(i - 1, ny)))
        sides.append("top")
    for j in range(ny, 0, -1):  # left, top -> bottom
        edges.append((nid(0, j), nid(0, j - 1)))
        sides.append("left")
    return np.array(edges, dtype=int), sides


def make_rectangle_mesh(L, H, nx, ny, pattern="diagonal") -> Mesh:
    """Structured triangulation of [0,L] x [0,H]; sides labeled
    left/right/bottom/top.

    pattern="diagonal" splits each cell into 2 right triangles along the
    lower-left to upper-right diagonal (non-obtuse: the P1 stiffness matrix
    is an M-matrix for isotropic coefficients); "crossed" adds a center
    node per cell and 4 triangles.
    """
    if L <= 0 or H <= 0:
        raise BadDimensions(f"rectangle sides must be positive, got L={L}, H={H}")
    if nx < 1 or ny < 1:
        raise BadDimensions(f"need nx, ny >= 1, got nx={nx}, ny={ny}")
    if pattern not in ("diagonal", "crossed"):
        raise ValueError(f"unknown pattern {pattern!r}")

    nodes = _grid(L, H, nx, ny)

    def nid(i, j):
        return j * (nx + 1) + i

    tris = []
    if pattern == "diagonal":
        for j in range(ny):
            for i in range(nx):
                a, b = nid(i, j), nid(i + 1, j)
                c, d = nid(i + 1, j + 1), nid(i, j + 1)
                tris.append((a, b, c))
                tris.append((a, c, d))
    else:
        center_ids = {}
        extra = []
        base = nodes.shape[0]
        for j in range(ny):
            for i in range(nx):
                extra.append([(i + 0.5) * L / nx, (j + 0.5) * H / ny])
                center_ids[(i, j)] = base + len(extra) - 1
        nodes = np.vstack([nodes, np.array(extra)])
        for j in range(ny):
            for i in range(nx):
                a, b = nid(i, j), nid(i + 1, j)
                c, d = nid(i + 1, j + 1), nid(i, j + 1)
                m = center_ids[(i, j)]
                tris += [(a, b, m), (b, c, m), (c, d, m), (d, a, m)]

    edges, sides = _rectangle_edges(nx, ny)
    mesh = Mesh(
        nodes=nodes,
        triangles=np.array(tris, dtype=int),
        boundary_edges=edges,
        edge_labels=tuple(sides),
        nx=nx,
        ny=ny,
        extent=(float(L), float(H)),
        metadata={"pattern": pattern},
    )
    return mesh.validate()


def make_reservoir_mesh(L, H, W, nx, ny, well_offset=0.0, pattern="diagonal") -> Mesh:
    """Reservoir rectangle: left side "inlet", a production segment of
    width >= W on the right side "well" (snapped outward to whole edges,
    centered at H/2 + well_offset), everything else "wall".

    The effective (snapped) well extent is reported in mesh.metadata.
    """
    if not (0.0 < W < H):
        raise BadDimensions(f"well width must satisfy 0 < W < H, got W={W}, H={H}")
    base = make_rectangle_mesh(L, H, nx, ny, pattern=pattern)

    hy = H / ny
    m_edges = int(math.ceil(W / hy - 1e-9))
    if m_edges < 1 or m_edges > ny:
        raise BadDimensions(
            f"well of width {W} cannot be resolved by ny={ny} edges of length {hy}"
        )
    yc = H / 2.0 + well_offset
    j0 = int(round(yc / hy - m_edges / 2.0))
    j0 = min(max(j0, 0), ny - m_edges)

    # right-side edge k (bottom->top) spans y in [k*hy, (k+1)*hy]
    labels = []
    right_seen = -1
    for lab in base.edge_labels:
        if lab == "right":
            right_seen += 1
            labels.append("well" if j0 <= right_seen < j0 + m_edges else "wall")
        elif lab == "left":
            labels.append("inlet")
        else:
            labels.append("wall")

    meta = dict(base.metadata)
    meta.update(
        {
            "well_width_requested": float(W),
            "well_width_effective": m_edges * hy,
            "well_y0": j0 * hy,
            "well_y1": (j0 + m_edges) * hy,
            "well_edges": m_edges,
        }
    )
    mesh = Mesh(
        nodes=base.nodes,
        triangles=base.triangles,
        boundary_edges=base.boundary_edges,
        edge_labels=tuple(labels),
        nx=nx,
        ny=ny,
        extent=base.extent,
        metadata=meta,
    )
    return mesh.validate()


def boundary_measure(mesh: Mesh, label: str) -> float:
    """Total length of the boundary edges carrying ``label``."""
    edges = mesh.edges_with_label(label)
    d = mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]]
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class ScalarField:
    """Nodal (P1) scalar field on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.mesh.n_nodes,):
            raise ValueError(
                f"expected {self.mesh.n_nodes} nodal values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field contains non-finite values")

    @staticmethod
    def from_function(mesh: Mesh, f: Callable) -> "ScalarField":
        return ScalarField(mesh, np.asarray(f(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float))

    @staticmethod
    def constant(mesh: Mesh, value: float) -> "ScalarField":
        return ScalarField(mesh, np.full(mesh.n_nodes, float(value)))


@dataclass(frozen=True)
class VectorField:
    """Piecewise-constant (per-triangle) 2-vector field on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.mesh.n_triangles, 2):
            raise ValueError(
                f"expected ({self.mesh.n_triangles}, 2) cell values, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("vector field contains non-finite values")


def _eig_bounds_2x2(tensors: np.ndarray):
    a = tensors[:, 0, 0]
    b = 0.5 * (tensors[:, 0, 1] + tensors[:, 1, 0])
    c = tensors[:, 1, 1]
    mean = 0.5 * (a + c)
    rad = np.sqrt((0.5 * (a - c)) ** 2 + b**2)
    return mean - rad, mean + rad


@dataclass(frozen=True)
class PermeabilityField:
    """Symmetric positive-definite 2x2 permeability tensor per triangle,
    with global eigenvalue bounds 0 < k1 <= eig <= k2 checked at
    construction."""

    tensors: np.ndarray
    k1: float
    k2: float

    def __post_init__(self):
        t = np.asarray(self.tensors, dtype=float)
        object.__setattr__(self, "tensors", t)
        if t.ndim != 3 or t.shape[1:] != (2, 2):
            raise ValueError(f"expected (n, 2, 2) tensors, got shape {t.shape}")
        if not (0.0 < self.k1 <= self.k2):
            raise ValueError(f"need 0 < k1 <= k2, got k1={self.k1}, k2={self.k2}")
        asym = np.abs(t[:, 0, 1] - t[:, 1, 0])
        scale = np.abs(t).max(axis=(1, 2))
        if np.any(asym > 1e-12 * np.maximum(scale, 1e-300)):
            raise ValueError("permeability tensors must be symmetric")
        lo, hi = _eig_bounds_2x2(t)
        slack = 1e-12 * self.k2
        if np.any(lo < self.k1 - slack) or np.any(hi > self.k2 + slack):
            raise ValueError("permeability eigenvalues outside [k1, k2]")

    @staticmethod
    def isotropic(mesh: Mesh, k: float) -> "PermeabilityField":
        t = np.broadcast_to(k * np.eye(2), (mesh.n_triangles, 2, 2)).copy()
        return PermeabilityField(t, k1=float(k), k2=float(k))

    @staticmethod
    def isotropic_per_cell(mesh: Mesh, values) -> "PermeabilityField":
        v = np.asarray(values, dtype=float)
        if v.shape != (mesh.n_triangles,):
            raise ValueError("one scalar permeability per triangle required")
        t = v[:, None, None] * np.eye(2)
        return PermeabilityField(t, k1=float(v.min()), k2=float(v.max()))

    @staticmethod
    def uniform_tensor(mesh: Mesh, kxx, kxy, kyy) -> "PermeabilityField":
        one = np.array([[kxx, kxy], [kxy, kyy]], dtype=float)
        lo, hi = _eig_bounds_2x2(one[None])
        t = np.broadcast_to(one, (mesh.n_triangles, 2, 2)).copy()
        return PermeabilityField(t, k1=float(lo[0]), k2=float(hi[0]))


@dataclass(frozen=True)
class BoundarySpec:
    """Complementary partition of the boundary labels into pressure-
    and normal-velocity-prescribed segments.

    Values may be constants or callables of (x, y).
    """

    pressure: Mapping[str, BCData]
    velocity: Mapping[str, BCData]

    def __post_init__(self):
        object.__setattr__(self, "pressure", dict(self.pressure))
        object.__setattr__(self, "velocity", dict(self.velocity))
        overlap = set(self.pressure) & set(self.velocity)
        if overlap:
            raise ValueError(f"labels in both pressure and velocity lists: {overlap}")

    def validate_partition(self, mesh: Mesh) -> "BoundarySpec":
        mesh_labels = set(mesh.labels)
        spec_labels = set(self.pressure) | set(self.velocity)
        if mesh_labels != spec_labels:
            raise ValueError(
                f"boundary labels {sorted(mesh_labels)} must be exactly "
                f"partitioned; spec covers {sorted(spec_labels)}"
            )
        return self

    def same_partition(self, other: "BoundarySpec") -> bool:
        return set(self.pressure) == set(other.pressure) and set(self.velocity) == set(
            other.velocity
        )


def eval_bc(data: BCData, x, y):
    """Evaluate prescribed boundary data (constant or callable) at points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if callable(data):
        out = np.asarray(data(x, y), dtype=float)
        return np.broadcast_to(out, np.broadcast(x, y).shape).astype(float)
    return np.full(np.broadcast(x, y).shape, float(data))


# ---------------------------------------------------------------------------
# interpolation


def interpolate(field: ScalarField, point) -> float:
    """P1 (barycentric) interpolation at a point inside the domain."""
    mesh = field.mesh
    pt = np.asarray(point, dtype=float)
    p = mesh.nodes[mesh.triangles]  # (T, 3, 2)
    d = pt[None, None, :] - p[:, 0:1, :]
    e1 = p[:, 1, :] - p[:, 0, :]
    e2 = p[:, 2, :] - p[:, 0, :]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    l1 = (d[:, 0, 0] * e2[:, 1] - d[:, 0, 1] * e2[:, 0]) / det
    l2 = (e1[:, 0] * d[:, 0, 1] - e1[:, 1] * d[:, 0, 0]) / det
    l0 = 1.0 - l1 - l2
    scale = max(mesh.extent)
    tol = 1e-12 * scale
    inside = (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        raise OutOfDomain(f"point {pt.tolist()} lies outside the mesh")
    t = hits[0]
    lam = np.clip(np.array([l0[t], l1[t], l2[t]]), 0.0, 1.0)
    lam = lam / lam.sum()
    return float(lam @ field.values[mesh.triangles[t]])


# ---------------------------------------------------------------------------
# export


def write_vtk(path, mesh: Mesh, scalars=None, vectors=None, title="poroflow"):
    """Legacy-VTK ASCII export: UNSTRUCTURED_GRID with POINT_DATA scalars
    and CELL_DATA vectors. Title is truncated to the legacy 255-char limit."""
    scalars = scalars or {}
    vectors = vectors or {}
    lines = ["# vtk DataFile Version 2.0", str(title).replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID"]
    n, t = mesh.n_nodes, mesh.n_triangles
    lines.append(f"POINTS {n} double")
    for x, y in mesh.nodes:
        lines.append(f"{x:.17g} {y:.17g} 0")
    lines.append(f"CELLS {t} {4 * t}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {t}")
    lines.extend(["5"] * t)
    if scalars:
        lines.append(f"POINT_DATA {n}")
        for name, fld in scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.17g}" for v in fld.values)
    if vectors:
        lines.append(f"CELL_DATA {t}")
        for name, fld in vectors.items():
            lines.append(f"VECTORS {name} double")
            lines.extend(f"{vx:.17g} {vy:.17g} 0" for vx, vy in fld.values)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scalar_csv(path, field: ScalarField, header_comments=()):
    """Nodal values as ``x,y,value`` rows, one-line header, optional leading
    ``#`` comment lines."""
    with open(path, "w") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write("x,y,value\n")
        for (x, y), v in zip(field.mesh.nodes, field.values):
            fh.write(f"{x:.17g},{y:.17g},{v:.17g}\n")


def write_vector_csv(path, field: VectorField, header_comments=()):
    """Per-cell vectors at triangle centroids as ``x,y,vx,vy`` rows."""
    cents = field.mesh.centroids()
    with open(path, "w") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write("x,y,vx,vy\n")
        for (x, y), (vx, vy) in zip(cents, field.values):
            fh.write(f"{x:.17g},{y:.17g},{vx:.17g},{vy:.17g}\n")
