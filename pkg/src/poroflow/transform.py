"""Pointwise maps between physical pressure, modified pressure, and the
transformed variables that linearize the pressure-dependent-viscosity flow
problem.

All functions accept scalars or numpy arrays and are pure; the exponential
viscosity law mu = mu0 * exp[beta * (p/p0 - 1)] is the single constitutive
input. Arguments that would push exp() outside the float64 range raise
TransformOverflow so downstream assembly never sees non-finite coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import Degenerate, DomainViolation, TransformOverflow

# exp saturates the positive-normal float64 range beyond this magnitude.
# Implementation choice (documented), not physics.
EXP_ARG_LIMIT = 709.0


@dataclass(frozen=True)
class FluidModel:
    """Exponential (Barus) viscosity law parameters.

    mu0 : reference viscosity at pressure p0 [Pa.s]
    beta : dimensionless pressure-sensitivity exponent
    p0 : reference pressure [Pa]
    """

    mu0: float
    beta: float
    p0: float

    def __post_init__(self):
        if not (self.mu0 > 0.0):
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if not (self.p0 > 0.0):
            raise ValueError(f"p0 must be positive, got {self.p0}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @property
    def is_degenerate(self) -> bool:
        """True when beta = 0 (constant viscosity; transforms undefined)."""
        return self.beta == 0.0


@dataclass(frozen=True)
class BodyForcePotential:
    """Scalar potential xi(x, y) [Pa] with rho*b = -grad(xi).

    ``is_zero`` short-circuits the common no-body-force case.
    """

    xi: Optional[Callable] = None
    is_zero: bool = False

    @staticmethod
    def zero() -> "BodyForcePotential":
        return BodyForcePotential(xi=None, is_zero=True)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_zero or self.xi is None:
            out = np.zeros(np.broadcast(x, y).shape)
            return float(out) if out.ndim == 0 else out
        out = np.asarray(self.xi(x, y), dtype=float)
        out = np.broadcast_to(out, np.broadcast(x, y).shape).copy()
        if not np.all(np.isfinite(out)):
            raise ValueError("body-force potential evaluated to a non-finite value")
        return float(out) if out.ndim == 0 else out

    def at_points(self, points: np.ndarray):
        """Evaluate at an (n, 2) coordinate array."""
        points = np.asarray(points, dtype=float)
        return np.atleast_1d(self(points[..., 0], points[..., 1]))


@dataclass(frozen=True)
class TransformConstants:
    """Integration-constant pair (A, B) selecting a member of the transform
    family; A=1, B=0 is the main pipeline choice, A=1, B=-p0/beta recovers
    the Kirchhoff variable."""

    A: float = 1.0
    B: float = 0.0

    def __post_init__(self):
        if self.A == 0.0:
            raise ValueError("A must be non-zero")


def _checked_exp(arg):
    arg = np.asarray(arg, dtype=float)
    if np.any(np.abs(arg) > EXP_ARG_LIMIT):
        worst = float(np.max(np.abs(arg)))
        raise TransformOverflow(
            f"exp argument magnitude {worst:.3g} exceeds {EXP_ARG_LIMIT}; "
            "result not representable in float64"
        )
    return np.exp(arg)


def _scalar_like(template, value):
    value = np.asarray(value)
    if np.ndim(template) == 0:
        return float(value)
    return value


def viscosity(p, fluid: FluidModel):
    """Viscosity mu0 * exp[beta * (p/p0 - 1)] at pressure p [Pa]."""
    arg = fluid.beta * (np.asarray(p, dtype=float) / fluid.p0 - 1.0)
    return _scalar_like(p, fluid.mu0 * _checked_exp(arg))


def modified_pressure(p, xi_value):
    """Pressure shifted by the body-force potential: p + xi."""
    out = np.asarray(p, dtype=float) + np.asarray(xi_value, dtype=float)
    return _scalar_like(p, out)


def reference_viscosity_field(xi_value, fluid: FluidModel):
    """Position-dependent reference viscosity mu0 * exp[-beta*xi/p0]."""
    arg = -fluid.beta * np.asarray(xi_value, dtype=float) / fluid.p0
    return _scalar_like(xi_value, fluid.mu0 * _checked_exp(arg))


def pressure_multiplier(ptilde, fluid: FluidModel):
    """Dimensionless factor g(ptilde) = exp[beta * (ptilde/p0 - 1)].

    Together with reference_viscosity_field this reproduces the viscosity:
    mu0_tilde(xi) * g(p + xi) == viscosity(p).
    """
    arg = fluid.beta * (np.asarray(ptilde, dtype=float) / fluid.p0 - 1.0)
    return _scalar_like(ptilde, _checked_exp(arg))


def hopf_cole_forward(P, fluid: FluidModel):
    """Map the transformed variable P < 0 back to the modified pressure.

    ptilde = p0 * (1 - ln[-beta*P/p0] / beta). Monotonically increasing on
    (-inf, 0); a non-negative P has no real pre-image and raises
    DomainViolation (that is exactly how non-existence of a pressure
    solution manifests).
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    Pa = np.asarray(P, dtype=float)
    if np.any(Pa >= 0.0):
        bad = np.flatnonzero(np.atleast_1d(Pa >= 0.0))
        raise DomainViolation(
            f"transformed variable must be negative; {bad.size} value(s) >= 0"
        )
    out = fluid.p0 * (1.0 - np.log(-fluid.beta * Pa / fluid.p0) / fluid.beta)
    return _scalar_like(P, out)


def hopf_cole_inverse(p, xi_value, fluid: FluidModel):
    """Map physical pressure (plus potential xi) to the transformed variable.

    P = -(p0/beta) * exp[-beta*((p + xi)/p0 - 1)]; always strictly negative.
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    ptilde = np.asarray(p, dtype=float) + np.asarray(xi_value, dtype=float)
    arg = -fluid.beta * (ptilde / fluid.p0 - 1.0)
    out = -(fluid.p0 / fluid.beta) * _checked_exp(arg)
    return _scalar_like(p, out)


def kirchhoff_forward(ptilde, fluid: FluidModel):
    """Kirchhoff variable: integral of 1/g from p0 to ptilde.

    P_K = (p0/beta) * (1 - exp[-beta*(ptilde/p0 - 1)]).
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    arg = -fluid.beta * (np.asarray(ptilde, dtype=float) / fluid.p0 - 1.0)
    out = (fluid.p0 / fluid.beta) * (1.0 - _checked_exp(arg))
    return _scalar_like(ptilde, out)


def kirchhoff_inverse(P_K, fluid: FluidModel):
    """Modified pressure from the Kirchhoff variable.

    ptilde = p0 * (1 - ln[1 - (beta/p0)*P_K] / beta); requires the log
    argument to stay positive.
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    PKa = np.asarray(P_K, dtype=float)
    arg = 1.0 - (fluid.beta / fluid.p0) * PKa
    if np.any(arg <= 0.0):
        bad = np.flatnonzero(np.atleast_1d(arg <= 0.0))
        raise DomainViolation(
            f"Kirchhoff inverse undefined: log argument <= 0 at {bad.size} value(s)"
        )
    out = fluid.p0 * (1.0 - np.log(arg) / fluid.beta)
    return _scalar_like(P_K, out)


def family_from_pressure(ptilde, constants: TransformConstants, fluid: FluidModel):
    """General two-constant transform: ptilde -> P with
    A*P + B = -(p0/beta) * exp[-beta*(ptilde/p0 - 1)].

    (A=1, B=0) gives the main transformed variable; (A=1, B=-p0/beta) the
    Kirchhoff one.
    """
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    arg = -fluid.beta * (np.asarray(ptilde, dtype=float) / fluid.p0 - 1.0)
    rhs = -(fluid.p0 / fluid.beta) * _checked_exp(arg)
    return _scalar_like(ptilde, (rhs - constants.B) / constants.A)


def family_to_pressure(P, constants: TransformConstants, fluid: FluidModel):
    """General two-constant transform: P -> ptilde (inverse of
    family_from_pressure). Requires A*P + B < 0."""
    if fluid.is_degenerate:
        raise Degenerate("beta = 0: transform undefined, use the Darcy path")
    z = constants.A * np.asarray(P, dtype=float) + constants.B
    if np.any(z >= 0.0):
        raise DomainViolation("A*P + B must be negative for a real pressure")
    out = fluid.p0 * (1.0 - np.log(-fluid.beta * z / fluid.p0) / fluid.beta)
    return _scalar_like(P, out)
