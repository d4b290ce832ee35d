"""Exact cell-local solve of U - theta*dt*S(U) = U_tilde.

Depth is untouched by the sources.  The momentum equations reduce to a
quadratic in |m|, and once the velocity is known the stress equations reduce
to a scalar equation for the trace T = P11 + P22 that is solved in closed
form.  Everything is vectorized over the trailing axes of the state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    E11,
    E12,
    E22,
    H,
    M1,
    M2,
    ModelParams,
    NonPhysicalStateError,
    alpha_coeff,
    check_prim,
    prim_to_cons,
)

SMALL_C = 1e-12


@dataclass
class ImplicitUpdateInput:
    u_tilde: np.ndarray
    dbdx: object
    dbdy: object
    theta_dt: float
    params: ModelParams


def solve_momentum(a1, a2, c):
    """Solve m_i (1 + c|m|) = a_i for the momentum (m1, m2), with c >= 0."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("friction factor c must be non-negative")
    amag = np.hypot(a1, a2)
    # 2|a| / (1 + sqrt(1 + 4c|a|)) is the positive root of c m^2 + m - |a| = 0
    # without the 0/0 of the textbook form at c = 0
    m = 2.0 * amag / (1.0 + np.sqrt(1.0 + 4.0 * c * amag))
    factor = 1.0 + c * m
    return a1 / factor, a2 / factor


def solve_trace(s_sum, h, speed3, theta_dt, params):
    """Unique positive root T of h T/2 + alpha(h, T) |v|^3 theta dt T = s_sum."""
    s_sum = np.asarray(s_sum, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(~(s_sum > 0)):
        bad = np.argwhere(np.atleast_1d(~(s_sum > 0)))[0]
        raise NonPhysicalStateError(
            f"energy state admits no positive stress trace: S11+S22="
            f"{np.atleast_1d(s_sum)[tuple(bad)]!r} <= 0 at index {tuple(int(i) for i in bad)}",
            index=tuple(int(i) for i in bad),
            component="trace",
        )
    t_hat = 2.0 * s_sum / h
    phi_h2 = params.phi * h * h
    k = params.cr * np.asarray(speed3, dtype=float) * theta_dt
    # T > phi h^2: (h/2) T^2 + (k - s_sum) T - k phi h^2 = 0
    b = k - s_sum
    disc = np.sqrt(b * b + 2.0 * h * k * phi_h2)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(b < 0, (disc - b) / h, 2.0 * k * phi_h2 / (disc + b))
    t = np.where((t_hat <= phi_h2) | (k <= 0), t_hat, root)
    return t if t.ndim else float(t)


def trace_residual(t, s_sum, h, speed3, theta_dt, params):
    """f(T) whose root solve_trace returns; increasing in T."""
    alpha = alpha_coeff(h, t, params)
    return 0.5 * h * t + alpha * speed3 * theta_dt * t - s_sum


def implicit_source_update(inp, check=True):
    """Return U with U - theta_dt * S(U) = U_tilde."""
    ut = np.asarray(inp.u_tilde, dtype=float)
    par = inp.params
    tdt = inp.theta_dt
    if tdt == 0:
        return ut.copy()
    g = par.g
    h = ut[H]
    ghx = g * h * np.asarray(inp.dbdx, dtype=float)
    ghy = g * h * np.asarray(inp.dbdy, dtype=float)
    a1 = ut[M1] - tdt * ghx
    a2 = ut[M2] - tdt * ghy
    c = tdt * par.cf / (h * h)
    m1, m2 = solve_momentum(a1, a2, c)
    v1 = m1 / h
    v2 = m2 / h
    speed = np.sqrt(v1 * v1 + v2 * v2)
    fric = par.cf * speed
    s11 = ut[E11] - 0.5 * h * v1 * v1 - tdt * (ghx * v1 + fric * v1 * v1)
    s22 = ut[E22] - 0.5 * h * v2 * v2 - tdt * (ghy * v2 + fric * v2 * v2)
    s12 = ut[E12] - 0.5 * h * v1 * v2 - tdt * (0.5 * ghx * v2 + 0.5 * ghy * v1 + fric * v1 * v2)
    speed3 = speed**3
    if par.cr > 0:
        t = solve_trace(s11 + s22, h, speed3, tdt, par)
        coef = 0.5 * h + alpha_coeff(h, t, par) * speed3 * tdt
    else:
        coef = 0.5 * h
    q = np.stack([h, v1, v2, h * s11 / coef, h * s12 / coef, h * s22 / coef])
    if check:
        check_prim(q, context="state after source update")
    out = prim_to_cons(q, check=False)
    # keep the momentum exactly as solved rather than h * (m / h)
    out[M1] = m1
    out[M2] = m2
    return out
