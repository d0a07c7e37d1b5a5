"""Mean-field Ising model: equation of state, spinodal geometry, Glauber flow.

Equilibria satisfy p = tanh(beta*(q + b*p)); solving for q gives the explicit
branch parameterization

    q(p) = atanh(p)/beta - b*p,
    z(p) = phi(q(p) + b*p) - (b/2)*p^2,

used throughout.  The spinodal point is the fold of q(p), i.e. q'(p*) = 0,
which exists iff b*beta > 1; there the metastable and unstable equilibrium
branches of the Glauber flow merge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, RegimeError

# reject magnetizations this close to +-1 rather than overflow in atanh
ATANH_MARGIN = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature beta and coupling strength b, both dimensionless."""

    beta: float
    b: float

    def __post_init__(self):
        if not (self.beta > 0.0 and self.b > 0.0):
            raise ValueError(f"beta and b must be positive, got beta={self.beta}, b={self.b}")

    @property
    def bbeta(self) -> float:
        return self.b * self.beta


@dataclass(frozen=True)
class SpinodalPoint:
    """Location and curvature data of the (plus-branch) spinodal point."""

    p_star: float
    q_star: float
    z_star: float
    theta: float  # q''(p*) > 0, curvature of the fold
    eta: float    # b*beta*p* > 0, quadratic degeneracy rate of the Glauber flow


@dataclass(frozen=True)
class ThermoState:
    """Point of the thermodynamic phase space (z, q, p)."""

    z: float
    q: float
    p: float

    def __post_init__(self):
        if not abs(self.p) < 1.0:
            raise DomainError(f"magnetization must satisfy |p| < 1, got {self.p}")


@dataclass(frozen=True)
class ShiftedState:
    """Coordinates centered at the spinodal point, in which the contact form is dZ - P dQ."""

    Z: float
    Q: float
    P: float


def _atanh(p: float) -> float:
    if abs(p) >= 1.0 - ATANH_MARGIN:
        raise DomainError(f"|p| must be < {1.0 - ATANH_MARGIN}, got {p}")
    return math.atanh(p)


def phi(u: float, params: ModelParams) -> float:
    """phi(u) = ln(2*cosh(beta*u))/beta, evaluated without overflow for large |u|."""
    x = params.beta * abs(u)
    return abs(u) + math.log1p(math.exp(-2.0 * x)) / params.beta


def equilibrium_q(p: float, params: ModelParams) -> float:
    """Magnetic field on the equilibrium curve at magnetization p."""
    return _atanh(p) / params.beta - params.b * p


def q_prime(p: float, params: ModelParams) -> float:
    """dq/dp along the equilibrium curve."""
    if not abs(p) < 1.0:
        raise DomainError(f"|p| must be < 1, got {p}")
    return 1.0 / (params.beta * (1.0 - p * p)) - params.b


def q_second(p: float, params: ModelParams) -> float:
    """d2q/dp2 along the equilibrium curve."""
    if not abs(p) < 1.0:
        raise DomainError(f"|p| must be < 1, got {p}")
    return 2.0 * p / (params.beta * (1.0 - p * p) ** 2)


def equilibrium_z(p: float, params: ModelParams) -> float:
    """Minus free energy on the equilibrium curve at magnetization p.

    With q + b*p = atanh(p), cosh(atanh(p)) = 1/sqrt(1-p^2), so
    z(p) = ln(2)/beta - ln(1-p^2)/(2*beta) - (b/2)*p^2.
    """
    if abs(p) >= 1.0 - ATANH_MARGIN:
        raise DomainError(f"|p| must be < {1.0 - ATANH_MARGIN}, got {p}")
    return (math.log(2.0) - 0.5 * math.log1p(-p * p)) / params.beta - 0.5 * params.b * p * p


def spinodal(params: ModelParams) -> SpinodalPoint:
    """Spinodal point on the p > 0 branch; requires b*beta > 1."""
    if params.bbeta <= 1.0:
        raise RegimeError(
            f"no spinodal point: b*beta = {params.bbeta:g} but b*beta > 1 is required"
        )
    p_star = math.sqrt(1.0 - 1.0 / params.bbeta)
    return SpinodalPoint(
        p_star=p_star,
        q_star=equilibrium_q(p_star, params),
        z_star=equilibrium_z(p_star, params),
        theta=q_second(p_star, params),
        eta=params.bbeta * p_star,
    )


def glauber_rhs(p: float, q: float, params: ModelParams) -> float:
    """Right-hand side u(p) = -p + tanh(beta*(q + b*p)) of the Glauber ODE."""
    return -p + math.tanh(params.beta * (q + params.b * p))


def glauber_linearization(p: float, params: ModelParams) -> float:
    """u'(p) = -1 + b*beta*(1 - p^2) at an equilibrium point p.

    Valid only where p = tanh(beta*(q + b*p)); negative means stable.
    """
    return -1.0 + params.bbeta * (1.0 - p * p)


class Equilibrium(NamedTuple):
    p: float
    stability: str  # "stable" | "unstable" | "degenerate"


def glauber_equilibria(
    q: float,
    params: ModelParams,
    grid_points: int = 2048,
    degenerate_tol: float = 1e-9,
) -> list[Equilibrium]:
    """All roots of the Glauber field in (-1, 1), classified by u'(p).

    Roots are bracketed by a sign-change scan on a uniform grid, polished by
    bisection and one Newton step.  For q strictly between the two spinodal
    fields there are three roots; tangencies closer than the grid spacing
    (|q - q_star| well below ~1e-5 at default parameters) may merge.
    """
    if params.bbeta <= 1.0:
        raise RegimeError("equilibrium classification assumes the spinodal regime b*beta > 1")
    lo, hi = -1.0 + 1e-9, 1.0 - 1e-9

    def u(p):
        return glauber_rhs(p, q, params)

    def u_p(p):
        # true derivative, valid off the equilibrium set (needed for Newton)
        th = math.tanh(params.beta * (q + params.b * p))
        return -1.0 + params.bbeta * (1.0 - th * th)

    grid = [lo + (hi - lo) * i / (grid_points - 1) for i in range(grid_points)]
    values = [u(p) for p in grid]
    roots = []
    for i in range(grid_points - 1):
        a, b_ = grid[i], grid[i + 1]
        fa, fb = values[i], values[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            for _ in range(200):
                m = 0.5 * (a + b_)
                fm = u(m)
                if fm == 0.0 or (b_ - a) < 1e-14:
                    a = b_ = m
                    break
                if fa * fm < 0.0:
                    b_ = m
                else:
                    a, fa = m, fm
            root = 0.5 * (a + b_)
            dp = u_p(root)
            if dp != 0.0:
                polished = root - u(root) / dp
                if lo < polished < hi and abs(u(polished)) <= abs(u(root)):
                    root = polished
            roots.append(root)
    if values[-1] == 0.0:
        roots.append(grid[-1])

    out = []
    for p in sorted(roots):
        slope = glauber_linearization(p, params)
        if abs(slope) < degenerate_tol:
            stability = "degenerate"
        elif slope < 0.0:
            stability = "stable"
        else:
            stability = "unstable"
        out.append(Equilibrium(p, stability))
    return out


def to_shifted(state: ThermoState, sp: SpinodalPoint) -> ShiftedState:
    """Affine change to spinodal-centered coordinates (Z, Q, P)."""
    return ShiftedState(
        Z=state.z - sp.p_star * state.q - (sp.z_star - sp.p_star * sp.q_star),
        Q=state.q - sp.q_star,
        P=state.p - sp.p_star,
    )


def from_shifted(shifted: ShiftedState, sp: SpinodalPoint) -> ThermoState:
    """Inverse of :func:`to_shifted`."""
    q = shifted.Q + sp.q_star
    return ThermoState(
        z=shifted.Z + sp.p_star * q + (sp.z_star - sp.p_star * sp.q_star),
        q=q,
        p=shifted.P + sp.p_star,
    )
