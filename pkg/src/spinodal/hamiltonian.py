"""Cusp normal form of the equilibrium front and the contact Hamiltonian on it.

The pipeline has three stages:

1. ``front_expansion`` Taylor-expands the equilibrium branch around the
   spinodal point: Q(P) = (theta/2)P^2 + ... and, via the Legendrian
   relation Z' = P*Q', Z(P) = (theta/3)P^3 + ....
2. ``morse_split`` introduces the Morse coordinate s with Q(s) = s^2
   (s(P) = sqrt(Q(P)), P(s) by series reversion) and splits
   Z(s) = phi0(s^2) + s*s^2*phi1(s^2) into even and odd parts.
3. ``build_hamiltonian`` assembles

       H(Z, Q) = (1 - a*Q) * ( -(Z - phi0(Q))^2 + Q^3 * phi1(Q)^2 ),

   whose zero level is exactly the (truncated) front, and whose
   Z-derivative is strictly negative on the metastable branch and strictly
   positive on the unstable one.

All evaluations of H and its partials are closed-form series arithmetic;
nothing here differentiates numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateCuspError,
    DomainError,
    NondegeneracyError,
    RegimeError,
)
from .ising import ModelParams, SpinodalPoint
from .series import TruncatedSeries


@dataclass(frozen=True)
class FrontExpansion:
    """Truncated Taylor data of the front at the spinodal point.

    Z_of_P and Q_of_P are series in the branch parameter P = p - p_star;
    p_valid bounds |P| for root finding (half the distance to the
    singularity of atanh at p = 1, where the expansion stops converging).
    """

    Z_of_P: TruncatedSeries
    Q_of_P: TruncatedSeries
    theta: float
    p_valid: float

    @property
    def order(self) -> int:
        return self.Q_of_P.order


def front_expansion(params: ModelParams, sp: SpinodalPoint, order: int = 12) -> FrontExpansion:
    """Series of Q(P) and Z(P) around the spinodal point, exact coefficients.

    atanh(p* + P) - atanh(p*) integrates the geometric expansion of
    1/(1 - (p* + P)^2) term by term, so the coefficients are closed-form;
    Z is then the term-by-term integral of P*Q'(P) (Legendrian relation).
    """
    if params.bbeta <= 1.0:
        raise RegimeError("front expansion requires the spinodal regime b*beta > 1")
    if order < 6:
        raise ValueError(f"order must be >= 6 to resolve the cusp, got {order}")
    a_minus = 1.0 - sp.p_star
    a_plus = 1.0 + sp.p_star
    qc = np.zeros(order + 1)
    for n in range(1, order + 1):
        # c_{n-1} of the integrand 1/(1 - (p*+u)^2) = sum c_k u^k
        ck = 0.5 * (a_minus ** (-n) + (-1.0) ** (n - 1) * a_plus ** (-n))
        qc[n] = ck / (n * params.beta)
    qc[1] -= params.b  # q'(p*) = 0 analytically; what remains is roundoff
    zc = np.zeros(order + 1)
    for k in range(1, order):
        zc[k + 1] = k * qc[k] / (k + 1)
    return FrontExpansion(
        Z_of_P=TruncatedSeries(zc),
        Q_of_P=TruncatedSeries(qc),
        theta=sp.theta,
        p_valid=0.5 * a_minus,
    )


def morse_split(fe: FrontExpansion, order: int | None = None) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Even/odd split of Z in the Morse coordinate s, Q(s) = s^2.

    Returns (phi0, phi1) with Z = phi0(Q) + s*Q*phi1(Q) on the front.
    Factoring Q(P) = Q2*P^2*v(P) with v(0) = 1 exactly makes sqrt_unit
    applicable without renormalization; the split is exact through order
    fe.order - 1 in s (one order is spent building s).
    """
    n = fe.order
    m = n - 1 if order is None else min(order, n - 1)
    if m < 5:
        raise ValueError("morse_split needs at least order 5 in s")
    q2 = fe.Q_of_P.c[2]
    if q2 <= 0.0:
        raise DegenerateCuspError(f"front curvature must be positive, got Q2 = {q2:g}")
    v = TruncatedSeries(fe.Q_of_P.c[2 : 2 + m] / q2)
    w = v.sqrt_unit()
    sc = np.zeros(m + 1)
    sc[1:] = math.sqrt(q2) * w.c
    p_of_s = TruncatedSeries(sc).revert()
    z_of_s = TruncatedSeries(fe.Z_of_P.c[: m + 1]).compose(p_of_s)
    even, odd = z_of_s.split_even_odd()
    phi0c = even.c.copy()
    phi0c[0] = 0.0  # alpha_0 = alpha_2 = 0 since Z starts at s^3; drop roundoff dust
    phi0c[1] = 0.0
    phi1c = odd.c[1:].copy()  # odd part = s*(alpha_1 + Q*phi1(Q)) with alpha_1 = 0
    return TruncatedSeries(phi0c), TruncatedSeries(phi1c)


@dataclass(frozen=True)
class ContactHamiltonian:
    """H(Z, Q) = (1 - a*Q) * (-(Z - phi0(Q))^2 + Q^3*phi1(Q)^2) on |Z|,|Q| <= domain_radius."""

    phi0: TruncatedSeries
    phi1: TruncatedSeries
    a: float
    domain_radius: float
    _phi0_d: TruncatedSeries = field(init=False, repr=False, compare=False)
    _phi1_d: TruncatedSeries = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_phi0_d", self.phi0.differentiate())
        object.__setattr__(self, "_phi1_d", self.phi1.differentiate())

    def in_domain(self, Z, Q) -> bool:
        r = self.domain_radius * (1.0 + 1e-12)
        return bool(np.all(np.abs(Z) <= r) and np.all(np.abs(Q) <= r))

    def evaluate(self, Z, Q, check_domain: bool = True):
        """(H, dH/dZ, dH/dQ) at (Z, Q); accepts scalars or broadcastable arrays.

        With check_domain=False the polynomial formulas are evaluated as-is;
        the integrator uses this for Runge-Kutta stage points that may sit
        marginally outside the validity square.
        """
        if check_domain and not self.in_domain(Z, Q):
            raise DomainError(
                f"(Z, Q) outside validity square of half-width {self.domain_radius:g}"
            )
        f0 = self.phi0.evaluate(Q)
        f1 = self.phi1.evaluate(Q)
        f0d = self._phi0_d.evaluate(Q)
        f1d = self._phi1_d.evaluate(Q)
        w = Z - f0
        pref = 1.0 - self.a * Q
        g = -w * w + Q**3 * f1 * f1
        h = pref * g
        h_z = -2.0 * pref * w
        h_q = -self.a * g + pref * (2.0 * f0d * w + 3.0 * Q**2 * f1 * f1 + 2.0 * Q**3 * f1 * f1d)
        return h, h_z, h_q


def build_hamiltonian(
    phi0: TruncatedSeries,
    phi1: TruncatedSeries,
    a: float,
    domain_radius: float,
) -> ContactHamiltonian:
    """Assemble the Hamiltonian; rejects a degenerate cusp (phi1(0) ~ 0)."""
    if domain_radius <= 0.0:
        raise ValueError("domain_radius must be positive")
    if abs(phi1.c[0]) < 1e-12:
        raise DegenerateCuspError(
            f"cusp coefficient phi1(0) = {phi1.c[0]:.3e} is numerically zero"
        )
    return ContactHamiltonian(phi0=phi0, phi1=phi1, a=a, domain_radius=domain_radius)


def default_hamiltonian(
    params: ModelParams,
    sp: SpinodalPoint,
    a: float = 0.1,
    order: int = 12,
    domain_radius: float | None = None,
) -> tuple[ContactHamiltonian, FrontExpansion]:
    """Front expansion + Morse split + assembly with the default validity radius."""
    fe = front_expansion(params, sp, order)
    phi0, phi1 = morse_split(fe)
    if domain_radius is None:
        domain_radius = 0.1 * min(1.0, sp.theta)
    return build_hamiltonian(phi0, phi1, a, domain_radius), fe


def front_point(
    fe: FrontExpansion,
    Q_inf: float,
    branch: str = "metastable",
) -> tuple[float, float]:
    """Solve Q(P) = Q_inf on the requested branch; returns (Z_inf, P_inf).

    The metastable branch is P > 0 (stable for the Glauber flow, destroyed
    at the cusp); the unstable branch is P < 0.
    """
    if branch not in ("metastable", "unstable"):
        raise ValueError(f"unknown branch {branch!r}")
    if Q_inf <= 0.0:
        raise DomainError(f"Q_inf must be positive, got {Q_inf:g}")
    sign = 1.0 if branch == "metastable" else -1.0
    q2 = fe.Q_of_P.c[2]
    p = sign * math.sqrt(Q_inf / q2)
    if abs(p) > fe.p_valid:
        raise ConvergenceError(
            f"Q_inf = {Q_inf:g} maps to |P| ~ {abs(p):.3g}, beyond the expansion's "
            f"validity |P| <= {fe.p_valid:.3g}"
        )
    q_series = fe.Q_of_P
    q_deriv = q_series.differentiate()
    for _ in range(60):
        f = q_series.evaluate(p) - Q_inf
        df = q_deriv.evaluate(p)
        if df == 0.0:
            raise ConvergenceError("Newton stalled at a critical point of Q(P)")
        step = f / df
        p -= step
        if abs(step) <= 1e-15 + 1e-13 * abs(p):
            break
    else:
        raise ConvergenceError(f"front_point did not converge for Q_inf = {Q_inf:g}")
    if sign * p <= 0.0 or abs(p) > fe.p_valid:
        raise ConvergenceError(f"front_point left the {branch} branch for Q_inf = {Q_inf:g}")
    if abs(q_series.evaluate(p) - Q_inf) > 1e-12 * max(1.0, abs(Q_inf)):
        raise ConvergenceError(f"front_point residual too large for Q_inf = {Q_inf:g}")
    return fe.Z_of_P.evaluate(p), p


def gamma(h: ContactHamiltonian, fe: FrontExpansion, Q_inf: float) -> float:
    """Exponential decay rate gamma = -dH/dZ > 0 at the metastable front point."""
    z_inf, _ = front_point(fe, Q_inf, "metastable")
    _, h_z, _ = h.evaluate(z_inf, Q_inf)
    g = -h_z
    if g <= 0.0:
        raise NondegeneracyError(
            f"dH/dZ = {h_z:.3e} at Q_inf = {Q_inf:g}; expected strictly negative"
        )
    return g


def R_and_delta(
    h: ContactHamiltonian,
    fe: FrontExpansion,
    Q_inf: float,
    tol: float = 1e-12,
):
    """The equilibrium function R(Z) = P_inf*dH/dZ + dH/dQ at frozen Q_inf, and delta = R'(Z_inf).

    R vanishes at the front point (the flow's P-equation equilibrium), and
    delta = -2(1-a*Q)(P_inf - phi0'(Q)) + 2a(Z_inf - phi0(Q)) = -2*P_inf + O(P_inf^2)
    must be nonzero for the relaxation theorem to apply.
    """
    z_inf, p_inf = front_point(fe, Q_inf, "metastable")

    def big_r(Z):
        _, h_z, h_q = h.evaluate(Z, Q_inf)
        return p_inf * h_z + h_q

    f0 = h.phi0.evaluate(Q_inf)
    f0d = h._phi0_d.evaluate(Q_inf)
    pref = 1.0 - h.a * Q_inf
    delta = -2.0 * pref * (p_inf - f0d) + 2.0 * h.a * (z_inf - f0)
    if abs(delta) < tol:
        raise NondegeneracyError(
            f"dR/dZ = {delta:.3e} at Q_inf = {Q_inf:g} is numerically zero"
        )
    return big_r, delta


def save_hamiltonian(h: ContactHamiltonian, path) -> None:
    """Plain-text key = value dump, 17 significant digits (round-trip safe)."""
    lines = [
        "# contact Hamiltonian: H = (1 - a*Q)*(-(Z - phi0(Q))^2 + Q^3*phi1(Q)^2)",
        f"a = {h.a:.17g}",
        f"domain_radius = {h.domain_radius:.17g}",
        "phi0 = " + ",".join(f"{c:.17g}" for c in h.phi0.c),
        "phi1 = " + ",".join(f"{c:.17g}" for c in h.phi1.c),
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_hamiltonian(path) -> ContactHamiltonian:
    data = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
    phi0 = TruncatedSeries([float(v) for v in data["phi0"].split(",")])
    phi1 = TruncatedSeries([float(v) for v in data["phi1"].split(",")])
    return build_hamiltonian(phi0, phi1, float(data["a"]), float(data["domain_radius"]))
