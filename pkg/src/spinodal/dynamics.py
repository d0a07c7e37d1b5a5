"""Time integration of the Glauber ODE and the contact triangular system.

Two steppers: a classic fixed-step RK4 (kept for order measurements) and an
adaptive Fehlberg 4(5) embedded pair, which is the default.  The contact
system

    dZ/dt = H(Z, Q),    dP/dt = P*dH/dZ(Z, Q) + dH/dQ(Z, Q),    Q frozen,

is triangular: the Z-equation is autonomous, and the RK stages for Z never
read P, so integrating Z alone or jointly yields the same Z path for the
same step sequence.  Leaving the Hamiltonian's validity square terminates
the run with a partial trajectory and an ``escaped`` flag rather than an
exception; the flow is only locally meaningful.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DomainError, IntegrationError
from .hamiltonian import ContactHamiltonian
from .ising import ModelParams, glauber_rhs

_VALID_METHODS = ("rk45", "rk4")

# Fehlberg 4(5) tableau: 6 stages, 5th-order propagation, 4th-order error reference
_FB_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_FB_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_FB_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_FB_ERR = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)


@dataclass
class IntegratorConfig:
    """Step control and sampling knobs shared by both dynamics."""

    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    dt_init: float = 1e-3
    t_max: float = 100.0
    max_steps: int = 2_000_000
    sample_stride: int = 1

    def __post_init__(self):
        if self.method not in _VALID_METHODS:
            raise ValueError(f"method must be one of {_VALID_METHODS}, got {self.method!r}")
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("rtol and atol must be positive")
        if not (self.t_max > 0.0 and self.dt_init > 0.0):
            raise ValueError("t_max and dt_init must be positive")
        if self.max_steps < 1 or self.sample_stride < 1:
            raise ValueError("max_steps and sample_stride must be >= 1")

    def digest(self) -> str:
        blob = repr(sorted(asdict(self).items())).encode()
        return hashlib.md5(blob).hexdigest()[:12]


@dataclass
class Trajectory:
    """Sampled solution; states has shape (n,) for Glauber and (n, 2) = (Z, P) for contact."""

    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)
    escaped: bool = False

    def component(self, name: str) -> np.ndarray:
        if self.states.ndim == 1:
            if name in ("p", "state"):
                return self.states
        else:
            if name == "Z":
                return self.states[:, 0]
            if name == "P":
                return self.states[:, 1]
        raise KeyError(f"trajectory has no component {name!r}")


def _rk45_adaptive(f, y0, cfg: IntegratorConfig, output_times, escape):
    t, y = 0.0, np.asarray(y0, dtype=float)
    h = cfg.dt_init
    h_floor = 1e-14 * cfg.t_max
    out = list(output_times) if output_times is not None else None
    oi = 0
    ts, ys = [], []
    if out is None:
        ts.append(t)
        ys.append(y.copy())
    elif out and out[0] == 0.0:
        ts.append(0.0)
        ys.append(y.copy())
        oi = 1
    escaped = False
    k = [None] * 6
    accepted = 0
    for _ in range(cfg.max_steps):
        if t >= cfg.t_max or (out is not None and oi >= len(out)):
            break
        target = cfg.t_max if out is None else min(cfg.t_max, out[oi])
        h_try = min(h, target - t)
        exact_hit = h_try >= target - t - 1e-15 * max(1.0, abs(target))
        k[0] = f(t, y)
        for i in range(1, 6):
            yi = y + h_try * sum(a * k[j] for j, a in enumerate(_FB_A[i]))
            k[i] = f(t + _FB_C[i] * h_try, yi)
        y_new = y + h_try * sum(b * k[i] for i, b in enumerate(_FB_B5))
        err = h_try * sum(e * k[i] for i, e in enumerate(_FB_ERR))
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = float(np.max(np.abs(err) / scale))
        if ratio <= 1.0:
            t = target if exact_hit else t + h_try
            y = y_new
            accepted += 1
            if out is None:
                if accepted % cfg.sample_stride == 0 or t >= cfg.t_max:
                    ts.append(t)
                    ys.append(y.copy())
            elif exact_hit and t == out[oi]:
                ts.append(t)
                ys.append(y.copy())
                oi += 1
            if escape is not None and escape(y):
                escaped = True
                if out is not None or ts[-1] != t:
                    ts.append(t)
                    ys.append(y.copy())
                break
        factor = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
        h = max(h_try * factor, h_floor)
        if h <= h_floor and ratio > 1.0:
            raise IntegrationError(f"step size underflow at t = {t:g}")
    else:
        raise IntegrationError(f"max_steps = {cfg.max_steps} exhausted at t = {t:g}")
    return np.array(ts), np.array(ys), escaped


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_fixed(f, y0, cfg: IntegratorConfig, output_times, escape):
    t, y = 0.0, np.asarray(y0, dtype=float)
    out = list(output_times) if output_times is not None else None
    oi = 0
    ts, ys = [], []
    if out is None:
        ts.append(t)
        ys.append(y.copy())
    elif out and out[0] == 0.0:
        ts.append(0.0)
        ys.append(y.copy())
        oi = 1
    escaped = False
    steps = 0
    while t < cfg.t_max - 1e-15 * cfg.t_max:
        if out is not None and oi >= len(out):
            break
        target = cfg.t_max if out is None else min(cfg.t_max, out[oi])
        h = min(cfg.dt_init, target - t)
        y = _rk4_step(f, t, y, h)
        hit = h >= target - t - 1e-15 * max(1.0, abs(target))
        t = target if hit else t + h
        steps += 1
        if steps > cfg.max_steps:
            raise IntegrationError(f"max_steps = {cfg.max_steps} exhausted at t = {t:g}")
        if out is None:
            if steps % cfg.sample_stride == 0 or t >= cfg.t_max:
                ts.append(t)
                ys.append(y.copy())
        elif hit and t == out[oi]:
            ts.append(t)
            ys.append(y.copy())
            oi += 1
        if escape is not None and escape(y):
            escaped = True
            if ts[-1] != t:
                ts.append(t)
                ys.append(y.copy())
            break
    return np.array(ts), np.array(ys), escaped


def _integrate(f, y0, cfg, output_times=None, escape=None):
    stepper = _rk45_adaptive if cfg.method == "rk45" else _rk4_fixed
    return stepper(f, y0, cfg, output_times, escape)


def integrate_glauber(
    p0: float,
    q: float,
    params: ModelParams,
    cfg: IntegratorConfig,
    output_times=None,
) -> Trajectory:
    """Solve dp/dt = -p + tanh(beta*(q + b*p)) from p0 on [0, t_max].

    The true flow preserves |p| < 1; a numerical excursion outside signals
    tolerance failure and raises.
    """
    if not abs(p0) < 1.0:
        raise DomainError(f"initial magnetization must satisfy |p| < 1, got {p0}")

    def f(t, y):
        return np.array([glauber_rhs(float(y[0]), q, params)])

    ts, ys, escaped = _integrate(f, [p0], cfg, output_times, escape=lambda y: abs(y[0]) >= 1.0)
    if escaped:
        raise IntegrationError("trajectory left |p| < 1; tighten tolerances")
    meta = {
        "kind": "glauber",
        "q": q,
        "beta": params.beta,
        "b": params.b,
        "config_hash": cfg.digest(),
    }
    return Trajectory(times=ts, states=ys[:, 0], meta=meta)


def integrate_contact(
    Z0: float,
    P0: float,
    Q: float,
    ham: ContactHamiltonian,
    cfg: IntegratorConfig,
    output_times=None,
) -> Trajectory:
    """Integrate the frozen-Q triangular system from (Z0, P0).

    Leaving |Z| <= domain_radius stops the run and sets ``escaped`` (the
    trajectory is returned as computed so far); stage evaluations just
    outside the square use the polynomial extension of H.
    """
    if not ham.in_domain(Z0, Q):
        raise DomainError(
            f"initial point (Z0, Q) = ({Z0:g}, {Q:g}) outside validity square "
            f"of half-width {ham.domain_radius:g}"
        )
    radius = ham.domain_radius

    def f(t, y):
        h, h_z, h_q = ham.evaluate(float(y[0]), Q, check_domain=False)
        return np.array([h, float(y[1]) * h_z + h_q])

    ts, ys, escaped = _integrate(
        f, [Z0, P0], cfg, output_times, escape=lambda y: abs(y[0]) > radius
    )
    meta = {
        "kind": "contact",
        "Q": Q,
        "a": ham.a,
        "domain_radius": radius,
        "config_hash": cfg.digest(),
    }
    return Trajectory(times=ts, states=ys, meta=meta, escaped=escaped)


def closed_form_cusp(Z0: float, P0: float, a: float, t):
    """Exact solution of the contact system at Q = 0.

    Z(t) = (t + 1/Z0)^-1 and P(t) = C*(t + 1/Z0)^-2 + a*(t + 1/Z0)^-1 with
    C = (P0 - a*Z0)/Z0^2; requires Z0 > 0.
    """
    if Z0 <= 0.0:
        raise DomainError(f"closed form requires Z0 > 0, got {Z0}")
    t = np.asarray(t, dtype=float)
    shifted = t + 1.0 / Z0
    c = (P0 - a * Z0) / (Z0 * Z0)
    z = 1.0 / shifted
    p = c / (shifted * shifted) + a / shifted
    if t.ndim == 0:
        return float(z), float(p)
    return z, p


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export: t,p (Glauber) or t,Z,Q,P (contact), 17 significant digits, LF endings."""
    kind = traj.meta.get("kind", "glauber" if traj.states.ndim == 1 else "contact")
    with open(path, "w", newline="\n") as fh:
        if kind == "glauber":
            fh.write("t,p\n")
            for t, p in zip(traj.times, traj.states):
                fh.write(f"{t:.17g},{p:.17g}\n")
        else:
            q = traj.meta.get("Q", 0.0)
            fh.write("t,Z,Q,P\n")
            for t, (z, p) in zip(traj.times, traj.states):
                fh.write(f"{t:.17g},{z:.17g},{q:.17g},{p:.17g}\n")


def rk4_solve(f, y0, t_max: float, dt: float):
    """Fixed-step RK4 endpoint solution (order-measurement helper)."""
    cfg = IntegratorConfig(method="rk4", dt_init=dt, t_max=t_max)
    ts, ys, _ = _rk4_fixed(f, y0, cfg, None, None)
    return ys[-1]
