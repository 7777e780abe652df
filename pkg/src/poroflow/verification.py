"""Executable checks on computed fields: boundary-data compatibility,
minimum/maximum and comparison principles, reciprocity residuals for the
linear (transformed) and nonlinear (pressure-dependent viscosity) forms,
and the bounded production-flux law with its one-solve calibration.

Principle checks operate on nodal values: a P1 field attains its extrema
at nodes, so the scan is exact for the discrete field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import darcy_linear, transform
from .darcy_linear import LinearSolveConfig
from .errors import Degenerate, NotApplicable, PartitionMismatch
from .geometry import BoundarySpec, Mesh, PermeabilityField, ScalarField, eval_bc
from .transform import BodyForcePotential, FluidModel


def _gauss01(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    net_flux: float  # net prescribed outflow over the velocity segments


def compatibility_check(mesh: Mesh, bcs: BoundarySpec, quad_order: int = 2) -> CompatibilityReport:
    """Zero-net-flux requirement for pure-velocity boundary data.

    With any pressure segment present the problem is anchored and the check
    always passes; the net flux is reported either way.
    """
    ts, ws = _gauss01(quad_order)
    net = 0.0
    scale = 0.0
    for label, data in bcs.velocity.items():
        edges = mesh.edges_with_label(label)
        a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
        length = np.hypot(*(b - a).T)
        for t, w in zip(ts, ws):
            q = a + t * (b - a)
            vn = eval_bc(data, q[:, 0], q[:, 1])
            net += float((w * length * vn).sum())
            scale += float((w * length * np.abs(vn)).sum())
    if bcs.pressure:
        return CompatibilityReport(compatible=True, net_flux=net)
    ok = abs(net) <= 1e-12 * max(scale, 1e-300) if scale > 0.0 else net == 0.0
    return CompatibilityReport(compatible=ok, net_flux=net)


# ---------------------------------------------------------------------------
# extremum principles


@dataclass(frozen=True)
class PrincipleReport:
    satisfied: bool
    bound: float  # extremal prescribed boundary value
    worst_interior: float  # extremal nodal value of the field
    violation_nodes: np.ndarray
    tolerance_used: float


def _velocity_sign(mesh: Mesh, bcs: BoundarySpec, quad_order: int = 2):
    """Min and max of the prescribed normal velocity over Gamma_v samples."""
    ts, _ = _gauss01(quad_order)
    lo, hi = np.inf, -np.inf
    for label, data in bcs.velocity.items():
        edges = mesh.edges_with_label(label)
        a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
        samples = [a, b] + [a + t * (b - a) for t in ts]
        for q in samples:
            vn = eval_bc(data, q[:, 0], q[:, 1])
            lo = min(lo, float(np.min(vn)))
            hi = max(hi, float(np.max(vn)))
    if not bcs.velocity:
        return 0.0, 0.0
    return lo, hi


def _prescribed_values(mesh: Mesh, bcs: BoundarySpec) -> np.ndarray:
    vals = []
    for label, data in bcs.pressure.items():
        nodes = mesh.nodes_with_label(label)
        vals.append(np.atleast_1d(eval_bc(data, mesh.nodes[nodes, 0], mesh.nodes[nodes, 1])))
    return np.concatenate(vals) if vals else np.array([])


def _default_tol(values: np.ndarray) -> float:
    rng = float(values.max() - values.min())
    return 1e-10 * (rng if rng > 0.0 else max(abs(float(values.max())), 1.0))


def check_min_principle(
    field: ScalarField, bcs: BoundarySpec, tol: Optional[float] = None
) -> PrincipleReport:
    """Lower bound: no nodal value below the smallest prescribed pressure
    datum (minus tol). Applicable only when the prescribed normal velocity
    is <= 0 everywhere (inflow or sealed); otherwise NotApplicable."""
    mesh = field.mesh
    _, vmax = _velocity_sign(mesh, bcs)
    if vmax > 0.0:
        raise NotApplicable(
            f"minimum principle needs v_n <= 0 on the velocity segments (max {vmax:.3g})"
        )
    prescribed = _prescribed_values(mesh, bcs)
    if prescribed.size == 0:
        raise NotApplicable("no pressure segment: no boundary bound to compare against")
    tol = _default_tol(field.values) if tol is None else float(tol)
    bound = float(prescribed.min())
    worst = float(field.values.min())
    bad = np.flatnonzero(field.values < bound - tol)
    return PrincipleReport(
        satisfied=bad.size == 0,
        bound=bound,
        worst_interior=worst,
        violation_nodes=bad,
        tolerance_used=tol,
    )


def check_max_principle(
    field: ScalarField, bcs: BoundarySpec, tol: Optional[float] = None
) -> PrincipleReport:
    """Mirror of check_min_principle: v_n >= 0 required, no nodal value
    above the largest prescribed datum (plus tol)."""
    mesh = field.mesh
    vmin, _ = _velocity_sign(mesh, bcs)
    if vmin < 0.0:
        raise NotApplicable(
            f"maximum principle needs v_n >= 0 on the velocity segments (min {vmin:.3g})"
        )
    prescribed = _prescribed_values(mesh, bcs)
    if prescribed.size == 0:
        raise NotApplicable("no pressure segment: no boundary bound to compare against")
    tol = _default_tol(field.values) if tol is None else float(tol)
    bound = float(prescribed.max())
    worst = float(field.values.max())
    bad = np.flatnonzero(field.values > bound + tol)
    return PrincipleReport(
        satisfied=bad.size == 0,
        bound=bound,
        worst_interior=worst,
        violation_nodes=bad,
        tolerance_used=tol,
    )


@dataclass(frozen=True)
class ComparisonReport:
    ordered: bool
    violation_nodes: np.ndarray
    tolerance_used: float


def check_comparison(
    sol1: ScalarField,
    sol2: ScalarField,
    bcs1: BoundarySpec,
    bcs2: BoundarySpec,
    tol: Optional[float] = None,
    quad_order: int = 2,
) -> ComparisonReport:
    """Ordering of solutions from ordered boundary data: if v_n(1) >= v_n(2)
    on the velocity segments and the prescribed pressure of (2) dominates
    that of (1), then sol2 >= sol1 nodewise (within tol).

    Raises NotApplicable when the hypotheses do not hold.
    """
    mesh = sol1.mesh
    if sol2.mesh is not mesh:
        raise PartitionMismatch("both solutions must live on the same mesh")
    if not bcs1.same_partition(bcs2):
        raise PartitionMismatch("boundary partitions differ between the two problems")

    ts, _ = _gauss01(quad_order)
    slack = 0.0
    for label in bcs1.velocity:
        edges = mesh.edges_with_label(label)
        a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
        for q in [a, b] + [a + t * (b - a) for t in ts]:
            v1 = eval_bc(bcs1.velocity[label], q[:, 0], q[:, 1])
            v2 = eval_bc(bcs2.velocity[label], q[:, 0], q[:, 1])
            if np.any(v1 < v2 - slack):
                raise NotApplicable(
                    f"hypothesis v_n(1) >= v_n(2) fails on segment {label!r}"
                )
    for label in bcs1.pressure:
        nodes = mesh.nodes_with_label(label)
        x, y = mesh.nodes[nodes, 0], mesh.nodes[nodes, 1]
        p1 = eval_bc(bcs1.pressure[label], x, y)
        p2 = eval_bc(bcs2.pressure[label], x, y)
        if np.any(p2 < p1 - slack):
            raise NotApplicable(
                f"hypothesis p(2) >= p(1) fails on pressure segment {label!r}"
            )

    both = np.concatenate([sol1.values, sol2.values])
    tol = _default_tol(both) if tol is None else float(tol)
    bad = np.flatnonzero(sol2.values < sol1.values - tol)
    return ComparisonReport(ordered=bad.size == 0, violation_nodes=bad, tolerance_used=tol)


# ---------------------------------------------------------------------------
# reciprocity


@dataclass(frozen=True)
class FluxSolution:
    """Solution data entering the reciprocity integrals: the boundary field
    (transformed variable for the linear identity, modified pressure for
    the nonlinear one) and the consistent nodal flux vector."""

    field: ScalarField
    reactions: np.ndarray


def _gamma_v_integral(mesh, bcs_other, field_values, weight, quad_order):
    """integral over Gamma_v of v_n(other) * weight(field) with the P1
    trace interpolated to the quadrature points."""
    ts, ws = _gauss01(quad_order)
    total = 0.0
    for label, data in bcs_other.velocity.items():
        edges = mesh.edges_with_label(label)
        a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
        fa, fb = field_values[edges[:, 0]], field_values[edges[:, 1]]
        length = np.hypot(*(b - a).T)
        for t, w in zip(ts, ws):
            q = a + t * (b - a)
            vn = eval_bc(data, q[:, 0], q[:, 1])
            total += float((w * length * vn * weight(fa + t * (fb - fa))).sum())
    return total


def _gamma_p_sum(mesh, bcs_other, reactions, weight):
    """Sum over Gamma_p nodes of weight(prescribed datum of the *other*
    problem) times the consistent nodal flux."""
    total = 0.0
    for label, data in bcs_other.pressure.items():
        nodes = mesh.nodes_with_label(label)
        vals = eval_bc(data, mesh.nodes[nodes, 0], mesh.nodes[nodes, 1])
        total += float((weight(np.atleast_1d(vals)) * reactions[nodes]).sum())
    return total


def _reciprocity(sol1, sol2, bcs1, bcs2, mesh, weight, quad_order):
    if sol1.field.mesh is not mesh or sol2.field.mesh is not mesh:
        raise PartitionMismatch("solutions must be defined on the given mesh")
    if not bcs1.same_partition(bcs2):
        raise PartitionMismatch("the two problems must share one boundary partition")

    lhs_v = _gamma_v_integral(mesh, bcs2, sol1.field.values, weight, quad_order)
    lhs_p = _gamma_p_sum(mesh, bcs2, sol1.reactions, weight)
    rhs_v = _gamma_v_integral(mesh, bcs1, sol2.field.values, weight, quad_order)
    rhs_p = _gamma_p_sum(mesh, bcs1, sol2.reactions, weight)
    lhs = lhs_v - lhs_p
    rhs = rhs_v - rhs_p
    scale = max(abs(lhs), abs(rhs), abs(lhs_v), abs(lhs_p), abs(rhs_v), abs(rhs_p), 1e-300)
    return abs(lhs - rhs) / scale


def reciprocity_residual_darcy(
    sol1: FluxSolution,
    sol2: FluxSolution,
    bcs1: BoundarySpec,
    bcs2: BoundarySpec,
    mesh: Mesh,
    quad_order: int = 2,
) -> float:
    """Relative defect of the linear reciprocal identity

    int_{Gv} v_n(2) P(1) - int_{Gp} P_p(2) v(1).n  =  (1 <-> 2)

    with boundary fluxes taken in consistent (reaction) form. The boundary
    specs must prescribe data for the same variable the fields carry.
    """
    return _reciprocity(sol1, sol2, bcs1, bcs2, mesh, lambda f: f, quad_order)


def reciprocity_residual_barus(
    sol1: FluxSolution,
    sol2: FluxSolution,
    bcs1: BoundarySpec,
    bcs2: BoundarySpec,
    mesh: Mesh,
    fluid: FluidModel,
    quad_order: int = 2,
) -> float:
    """Relative defect of the nonlinear reciprocal identity, whose
    integrands weight the fluxes by exp[-beta*(ptilde/p0 - 1)] of the
    solved / prescribed modified pressures."""
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: use reciprocity_residual_darcy")

    def weight(ptilde):
        return np.exp(-fluid.beta * (np.asarray(ptilde, dtype=float) / fluid.p0 - 1.0))

    return _reciprocity(sol1, sol2, bcs1, bcs2, mesh, weight, quad_order)


# ---------------------------------------------------------------------------
# bounded production flux


@dataclass(frozen=True)
class CeilingFluxModel:
    """One-parameter flux law Q(p_inj) calibrated from a single solve.

    C : flux per unit transformed-pressure difference [m^3/(s.Pa) per width]
    p_atm : production/reference pressure (fluid.p0 in the canonical setup)
    """

    C: float
    fluid: FluidModel
    p_atm: float

    def ceiling(self) -> float:
        """Asymptotic flux as the injection pressure grows without bound."""
        return self.C * self.p_atm / self.fluid.beta

    def flux_derivative(self, p_inj: float) -> float:
        """dQ/dp_inj = C * exp[-beta*(p_inj/p_atm - 1)]."""
        return self.C * float(
            np.exp(-self.fluid.beta * (p_inj / self.p_atm - 1.0))
        )


def calibrate_ceiling_flux(
    mesh: Mesh,
    fluid: FluidModel,
    K: PermeabilityField,
    p_inj_calibration: float,
    p_prod: Optional[float] = None,
    config: Optional[LinearSolveConfig] = None,
    inlet_label: str = "inlet",
    well_label: str = "well",
    wall_label: str = "wall",
) -> CeilingFluxModel:
    """One transformed solve at the calibration injection pressure fixes
    C = Q_well / (P_inj - P_prod); every other injection pressure then
    follows from the closed-form law without further solves.

    Requires zero body force (the linear-decomposition argument needs
    constant transformed boundary data) and a calibration pressure
    different from the production pressure.
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: the flux grows linearly, no ceiling exists")
    p_prod = fluid.p0 if p_prod is None else float(p_prod)
    if p_inj_calibration == p_prod:
        raise ValueError("calibration pressure must differ from the production pressure")

    dP = transform.hopf_cole_inverse(p_inj_calibration, 0.0, fluid) - transform.hopf_cole_inverse(
        p_prod, 0.0, fluid
    )
    # Calibration solve in the shifted gauge (transformed variable minus its
    # production value): same flux by linearity, but free of the huge common
    # baseline that would otherwise swamp Q with cancellation error.
    xi = BodyForcePotential.zero()
    bcs = BoundarySpec(
        pressure={inlet_label: float(dP), well_label: 0.0},
        velocity={wall_label: 0.0},
    )
    mobility = darcy_linear.mobility_tensors(mesh, fluid, xi, K)
    system = darcy_linear.assemble(mesh, mobility, bcs)
    result = darcy_linear.solve(system, config)
    Q = float(darcy_linear.boundary_flux(result.field, system, well_label))
    return CeilingFluxModel(C=Q / dP, fluid=fluid, p_atm=p_prod)


def predict_flux(model: CeilingFluxModel, p_inj: float) -> float:
    """Closed-form production flux

    Q = (C * p_atm / beta) * (1 - exp[-beta*(p_inj/p_atm - 1)])

    Zero at p_inj = p_atm, strictly increasing, bounded by C*p_atm/beta.
    """
    if p_inj < model.p_atm:
        raise ValueError("p_inj must be >= the production pressure")
    f = model.fluid
    return (model.C * model.p_atm / f.beta) * (
        1.0 - float(np.exp(-f.beta * (p_inj / model.p_atm - 1.0)))
    )
