"""Pressure-primal P1 Galerkin kernel for the linear Darcy-type problem
-div[M grad u] = 0 with mixed pressure/velocity boundary data, plus the
three-step transformed solution path for the pressure-dependent-viscosity
model.

M is the per-triangle mobility tensor (permeability over viscosity).
Dirichlet rows are removed by symmetric elimination, the reduced SPD system
is solved with (optionally Jacobi-preconditioned) conjugate gradients, and
boundary fluxes are extracted from the unconstrained residual (reaction
form), which is discretely conservative.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import transform
from .errors import (
    Degenerate,
    IncompatibleNeumann,
    NoConvergence,
    NonExistence,
    SingularMobility,
    UnknownLabel,
)
from .geometry import BoundarySpec, Mesh, PermeabilityField, ScalarField, VectorField, eval_bc
from .transform import BodyForcePotential, FluidModel

# 2-point Gauss rule on [0, 1]; exact for cubics, matches the boundary
# quadrature used by the verification integrals.
_GAUSS2_T = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_GAUSS2_W = np.array([0.5, 0.5])


@dataclass
class LinearSolveConfig:
    cg_tol: float = 1e-12
    cg_max_iter: Optional[int] = None  # default 20 * n_unknowns
    preconditioner: str = "diagonal"  # "none" | "diagonal"

    def __post_init__(self):
        if not (0.0 < self.cg_tol < 1.0):
            raise ValueError(f"cg_tol must lie in (0, 1), got {self.cg_tol}")
        if self.cg_max_iter is not None and self.cg_max_iter < 1:
            raise ValueError("cg_max_iter must be >= 1")
        if self.preconditioner not in ("none", "diagonal"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SparseSystem:
    """Assembled discrete problem.

    matrix/rhs hold the symmetric-eliminated system; raw_matrix/raw_rhs the
    unconstrained stiffness and Neumann load (needed for reaction fluxes).
    """

    mesh: Mesh
    matrix: sp.csr_matrix
    rhs: np.ndarray
    raw_matrix: sp.csr_matrix
    raw_rhs: np.ndarray
    dirichlet_map: dict
    bcs: BoundarySpec


@dataclass
class LinearSolveResult:
    field: ScalarField
    iterations: int
    residual: float  # final relative residual of the reduced system


@dataclass
class SolveReport:
    """Outcome of the transformed (or constant-viscosity) solution path."""

    p: ScalarField
    v: VectorField
    P: Optional[ScalarField]
    iterations: int
    residual: float
    wall_time: float
    reactions: np.ndarray
    transform_violation: bool = False
    extras: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            "poroflow solve report",
            f"nodes = {self.p.mesh.n_nodes}",
            f"triangles = {self.p.mesh.n_triangles}",
            f"cg_iterations = {self.iterations}",
            f"cg_residual = {self.residual:.6e}",
            f"wall_time_s = {self.wall_time:.6f}",
            f"p_min = {self.p.values.min():.10e}",
            f"p_max = {self.p.values.max():.10e}",
            f"speed_max = {np.hypot(self.v.values[:, 0], self.v.values[:, 1]).max():.10e}",
            f"transform_violation = {self.transform_violation}",
        ]
        if self.P is not None:
            lines.append(f"P_min = {self.P.values.min():.10e}")
            lines.append(f"P_max = {self.P.values.max():.10e}")
        for k, v in self.extras.items():
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def p1_gradients(mesh: Mesh):
    """Constant P1 shape-function gradients and triangle areas.

    Returns (grads, areas) with grads[t, i] = grad(phi_i) on triangle t.
    """
    p = mesh.nodes[mesh.triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (
        y[:, 1] - y[:, 0]
    )
    grads = np.stack([b, c], axis=2) / area2[:, None, None]
    return grads, 0.5 * area2


def _check_spd(mobility: np.ndarray):
    a, d = mobility[:, 0, 0], mobility[:, 1, 1]
    b = 0.5 * (mobility[:, 0, 1] + mobility[:, 1, 0])
    asym = np.abs(mobility[:, 0, 1] - mobility[:, 1, 0])
    scale = np.maximum(np.abs(mobility).max(axis=(1, 2)), 1e-300)
    det = a * d - b * b
    bad = (a <= 0) | (det <= 0) | (asym > 1e-10 * scale)
    if np.any(bad):
        raise SingularMobility(
            f"{int(bad.sum())} mobility tensor(s) fail symmetric positive-definiteness"
        )


def _neumann_load(mesh: Mesh, bcs: BoundarySpec) -> np.ndarray:
    """rhs_i = -integral over velocity segments of phi_i * v_n (2-pt Gauss)."""
    rhs = np.zeros(mesh.n_nodes)
    for label, data in bcs.velocity.items():
        edges = mesh.edges_with_label(label)
        a = mesh.nodes[edges[:, 0]]
        b = mesh.nodes[edges[:, 1]]
        length = np.hypot(*(b - a).T)
        for t, w in zip(_GAUSS2_T, _GAUSS2_W):
            q = a + t * (b - a)
            vn = eval_bc(data, q[:, 0], q[:, 1])
            np.add.at(rhs, edges[:, 0], -w * length * vn * (1.0 - t))
            np.add.at(rhs, edges[:, 1], -w * length * vn * t)
    return rhs


def _dirichlet_values(mesh: Mesh, bcs: BoundarySpec) -> dict:
    out = {}
    for label, data in bcs.pressure.items():
        nodes = mesh.nodes_with_label(label)
        vals = eval_bc(data, mesh.nodes[nodes, 0], mesh.nodes[nodes, 1])
        for n, v in zip(nodes, np.atleast_1d(vals)):
            out[int(n)] = float(v)
    return out


def assemble(mesh: Mesh, mobility: np.ndarray, bcs: BoundarySpec) -> SparseSystem:
    """P1 stiffness for -div[M grad u] = 0 with the given boundary data.

    mobility : (n_tri, 2, 2) symmetric positive-definite tensors.
    """
    mobility = np.asarray(mobility, dtype=float)
    if mobility.shape != (mesh.n_triangles, 2, 2):
        raise ValueError("one 2x2 mobility tensor per triangle required")
    _check_spd(mobility)
    bcs.validate_partition(mesh)

    grads, areas = p1_gradients(mesh)
    ke = np.einsum("tia,tab,tjb->tij", grads, mobility, grads) * areas[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_nodes
    raw = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    raw_rhs = _neumann_load(mesh, bcs)

    dirichlet = _dirichlet_values(mesh, bcs)
    if dirichlet:
        d_idx = np.array(sorted(dirichlet), dtype=int)
        g = np.array([dirichlet[i] for i in d_idx])
        g_full = np.zeros(n)
        g_full[d_idx] = g
        free = np.ones(n, dtype=bool)
        free[d_idx] = False
        rhs = raw_rhs - raw @ g_full
        rhs[d_idx] = g
        pf = sp.diags(free.astype(float))
        matrix = (pf @ raw @ pf + sp.diags((~free).astype(float))).tocsr()
    else:
        matrix = raw.copy()
        rhs = raw_rhs.copy()

    return SparseSystem(
        mesh=mesh,
        matrix=matrix,
        rhs=rhs,
        raw_matrix=raw,
        raw_rhs=raw_rhs,
        dirichlet_map=dirichlet,
        bcs=bcs,
    )


def _cg(A, b, tol, maxiter, precondition):
    if b.size == 0:
        return np.zeros(0), 0, 0.0
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    M = None
    if precondition == "diagonal":
        d = A.diagonal()
        d = np.where(d > 0, d, 1.0)
        M = sp.diags(1.0 / d)
    it = [0]

    def count(_):
        it[0] += 1

    x, info = spla.cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=count)
    res = float(np.linalg.norm(b - A @ x) / bnorm)
    return x, (it[0] if info == 0 else -1), res


def solve(system: SparseSystem, config: Optional[LinearSolveConfig] = None) -> LinearSolveResult:
    """Conjugate-gradient solve of the assembled system.

    Pure-velocity problems are checked against the zero-net-flux
    compatibility condition first (IncompatibleNeumann if violated) and are
    then grounded by pinning node 0, so the result is one member of the
    constant-shifted family.
    """
    config = config or LinearSolveConfig()
    mesh = system.mesh
    n = mesh.n_nodes

    dirichlet = dict(system.dirichlet_map)
    if not dirichlet:
        net = float(system.raw_rhs.sum())
        scale = float(np.abs(system.raw_rhs).sum())
        if abs(net) > 1e-12 * max(scale, 1e-300):
            raise IncompatibleNeumann(
                f"pure-velocity data with net boundary flux {-net:.6e}; "
                "compatibility condition violated"
            )
        dirichlet = {0: 0.0}

    d_idx = np.array(sorted(dirichlet), dtype=int)
    g = np.array([dirichlet[i] for i in d_idx])
    free = np.ones(n, dtype=bool)
    free[d_idx] = False
    free_idx = np.flatnonzero(free)

    g_full = np.zeros(n)
    g_full[d_idx] = g
    b_red = (system.raw_rhs - system.raw_matrix @ g_full)[free_idx]
    A_red = system.raw_matrix[free_idx][:, free_idx]

    maxiter = config.cg_max_iter or max(20 * free_idx.size, 50)
    x_red, iters, res = _cg(A_red, b_red, config.cg_tol, maxiter, config.preconditioner)
    if iters < 0:
        if not system.dirichlet_map:
            raise IncompatibleNeumann(
                "pure-velocity solve stagnated; boundary data likely incompatible"
            )
        raise NoConvergence(
            f"CG did not reach rtol={config.cg_tol} in {maxiter} iterations "
            f"(residual {res:.3e})"
        )

    values = g_full.copy()
    values[free_idx] = x_red
    return LinearSolveResult(field=ScalarField(mesh, values), iterations=iters, residual=res)


def recover_velocity(P: ScalarField, mobility: np.ndarray) -> VectorField:
    """Per-triangle velocity v = -M grad(P) from the exact P1 gradient."""
    mesh = P.mesh
    grads, _ = p1_gradients(mesh)
    gp = np.einsum("tid,ti->td", grads, P.values[mesh.triangles])
    v = -np.einsum("tab,tb->ta", np.asarray(mobility, dtype=float), gp)
    return VectorField(mesh, v)


def nodal_reactions(system: SparseSystem, P: ScalarField) -> np.ndarray:
    """Residual of the unconstrained equations: r_i approximates the
    outward boundary flux integral of phi_i * v.n (zero at interior nodes
    of a converged solve)."""
    return system.raw_rhs - system.raw_matrix @ P.values


def boundary_flux(P: ScalarField, system: SparseSystem, label: str) -> float:
    """Outward volumetric flux through one boundary segment (positive =
    outflow).

    Pressure segments use the consistent reaction form; velocity segments
    integrate the prescribed normal velocity (what the discrete solution
    carries there by construction).
    """
    if label in system.bcs.pressure:
        nodes = system.mesh.nodes_with_label(label)
        return float(nodal_reactions(system, P)[nodes].sum())
    if label in system.bcs.velocity:
        mesh = system.mesh
        edges = mesh.edges_with_label(label)
        a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
        length = np.hypot(*(b - a).T)
        total = 0.0
        for t, w in zip(_GAUSS2_T, _GAUSS2_W):
            q = a + t * (b - a)
            vn = eval_bc(system.bcs.velocity[label], q[:, 0], q[:, 1])
            total += float((w * length * vn).sum())
        return total
    raise UnknownLabel(f"label {label!r} not present in the boundary spec")


def boundary_flux_direct(v: VectorField, mesh: Mesh, label: str) -> float:
    """Direct edge integration of v.n (cross-check for boundary_flux)."""
    edges = mesh.edges_with_label(label)
    normals = mesh.edge_normals()
    lengths = mesh.edge_lengths()
    edge_index = {
        frozenset((int(a), int(b))): i for i, (a, b) in enumerate(mesh.boundary_edges)
    }
    tri_of_edge = {}
    for t, tri in enumerate(mesh.triangles):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = frozenset((int(a), int(b)))
            if key in edge_index:
                tri_of_edge[key] = t
    total = 0.0
    for a, b in edges:
        key = frozenset((int(a), int(b)))
        i = edge_index[key]
        t = tri_of_edge[key]
        total += float(v.values[t] @ normals[i]) * float(lengths[i])
    return total


def mobility_tensors(
    mesh: Mesh, fluid: FluidModel, xi: BodyForcePotential, K: PermeabilityField
) -> np.ndarray:
    """Per-triangle (1/mu0_tilde) K with the reference viscosity evaluated
    at triangle centroids."""
    cents = mesh.centroids()
    mu0t = transform.reference_viscosity_field(xi.at_points(cents), fluid)
    return K.tensors / np.asarray(mu0t)[:, None, None]


def transform_bcs(bcs: BoundarySpec, fluid: FluidModel, xi: BodyForcePotential) -> BoundarySpec:
    """Map physical pressure boundary data to the transformed variable;
    velocity data is unchanged."""

    def mapped(data):
        def f(x, y):
            p = eval_bc(data, x, y)
            return transform.hopf_cole_inverse(p, xi(x, y), fluid)

        return f

    return BoundarySpec(
        pressure={lab: mapped(d) for lab, d in bcs.pressure.items()},
        velocity=dict(bcs.velocity),
    )


def solve_transformed_bvp(
    mesh: Mesh,
    fluid: FluidModel,
    xi: BodyForcePotential,
    K: PermeabilityField,
    bcs: BoundarySpec,
    config: Optional[LinearSolveConfig] = None,
) -> SolveReport:
    """Three-step solution of the nonlinear problem via one linear solve:
    map pressure data to the transformed variable, solve the linear
    problem, map the nodal solution back.

    Raises NonExistence (with the violating node set) when any nodal value
    of the transformed solution is non-negative: no real pressure exists.
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: use the plain constant-viscosity solve")
    t0 = time.perf_counter()

    tbcs = transform_bcs(bcs, fluid, xi)
    mobility = mobility_tensors(mesh, fluid, xi, K)
    system = assemble(mesh, mobility, tbcs)
    result = solve(system, config)
    Pvals = result.field.values

    if np.any(Pvals >= 0.0):
        nodes = np.flatnonzero(Pvals >= 0.0)
        raise NonExistence(
            f"transformed solution non-negative at {nodes.size} node(s); "
            "no real pressure solution exists for this boundary data",
            nodes=nodes,
        )

    ptilde = transform.hopf_cole_forward(Pvals, fluid)
    xi_nodes = xi.at_points(mesh.nodes)
    p = ScalarField(mesh, ptilde - xi_nodes)
    v = recover_velocity(result.field, mobility)
    reactions = nodal_reactions(system, result.field)

    return SolveReport(
        p=p,
        v=v,
        P=result.field,
        iterations=result.iterations,
        residual=result.residual,
        wall_time=time.perf_counter() - t0,
        reactions=reactions,
        transform_violation=False,
    )


def solve_darcy_bvp(
    mesh: Mesh,
    fluid: FluidModel,
    xi: BodyForcePotential,
    K: PermeabilityField,
    bcs: BoundarySpec,
    config: Optional[LinearSolveConfig] = None,
) -> SolveReport:
    """Constant-viscosity (beta = 0) solve of the same boundary value
    problem; the fallback path when the transform is degenerate."""
    t0 = time.perf_counter()
    mobility = mobility_tensors(mesh, fluid, xi, K)
    xi_nodes = xi.at_points(mesh.nodes)

    def shifted(data):
        def f(x, y):
            return eval_bc(data, x, y) + xi(x, y)

        return f

    mbcs = BoundarySpec(
        pressure={lab: shifted(d) for lab, d in bcs.pressure.items()},
        velocity=dict(bcs.velocity),
    )
    system = assemble(mesh, mobility, mbcs)
    result = solve(system, config)
    v = recover_velocity(result.field, mobility)
    return SolveReport(
        p=ScalarField(mesh, result.field.values - xi_nodes),
        v=v,
        P=None,
        iterations=result.iterations,
        residual=result.residual,
        wall_time=time.perf_counter() - t0,
        reactions=nodal_reactions(system, result.field),
    )
