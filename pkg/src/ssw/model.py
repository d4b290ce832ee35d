"""Algebra of the shear shallow water system in energy-tensor form.

All functions act on component-first arrays: a conserved state is an array of
shape ``(6, ...)`` holding ``(h, h*v1, h*v2, E11, E12, E22)`` and a primitive
state is ``(h, v1, v2, R11, R12, R22)`` with ``R = h*P``.  Trailing axes are
arbitrary, so the same call handles a single state, a row of faces or a 2-D
block of cells.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

H, M1, M2, E11, E12, E22 = range(6)
NVAR = 6

PRIM_NAMES = ("h", "v1", "v2", "R11", "R12", "R22")


class NonPhysicalStateError(ValueError):
    """A state with h <= 0 or a stress tensor that is not positive definite."""

    def __init__(self, message, index=None, component=None, state=None):
        super().__init__(message)
        self.index = index
        self.component = component
        self.state = state


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model.

    ``cf`` is the Chezy friction coefficient, ``cr`` and ``phi`` calibrate the
    turbulent dissipation of the stress tensor.
    """

    g: float = 9.81
    cf: float = 0.0
    cr: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gravity must be positive, got {self.g}")
        for name in ("cf", "cr", "phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


def _first_bad(mask):
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if idx.size else None


def check_prim(q, context="state"):
    """Raise NonPhysicalStateError unless every state in ``q`` is admissible."""
    q = np.asarray(q)
    h, r11, r12, r22 = q[H], q[3], q[4], q[5]
    checks = (
        ("h", ~(h > 0)),
        ("R11", ~(r11 > 0)),
        ("R22", ~(r22 > 0)),
        ("det R", ~(r11 * r22 - r12 * r12 > 0)),
    )
    for name, bad in checks:
        if np.any(bad):
            where = _first_bad(np.atleast_1d(bad)) if np.ndim(bad) else ()
            sample = q[(slice(None),) + where] if where else q
            raise NonPhysicalStateError(
                f"non-physical {context}: {name} not positive at index {where}, "
                f"prim=(h, v1, v2, R11, R12, R22)={np.asarray(sample).tolist()}",
                index=where,
                component=name,
                state=np.asarray(sample).copy(),
            )


def cons_to_prim(u, check=True):
    u = np.asarray(u, dtype=float)
    h = u[H]
    v1 = u[M1] / h
    v2 = u[M2] / h
    q = np.empty_like(u)
    q[0] = h
    q[1] = v1
    q[2] = v2
    q[3] = 2.0 * u[E11] - u[M1] * v1
    q[4] = 2.0 * u[E12] - u[M1] * v2
    q[5] = 2.0 * u[E22] - u[M2] * v2
    if check:
        check_prim(q)
    return q


def prim_to_cons(q, check=True):
    q = np.asarray(q, dtype=float)
    if check:
        check_prim(q)
    h, v1, v2 = q[0], q[1], q[2]
    u = np.empty_like(q)
    u[H] = h
    u[M1] = h * v1
    u[M2] = h * v2
    u[E11] = 0.5 * q[3] + 0.5 * h * v1 * v1
    u[E12] = 0.5 * q[4] + 0.5 * h * v1 * v2
    u[E22] = 0.5 * q[5] + 0.5 * h * v2 * v2
    return u


def prim_slope_to_cons(q, dq):
    """Apply the Jacobian dU/dQ evaluated at ``q`` to the primitive increment ``dq``."""
    h, v1, v2 = q[0], q[1], q[2]
    dh, dv1, dv2 = dq[0], dq[1], dq[2]
    du = np.empty_like(dq)
    du[H] = dh
    du[M1] = v1 * dh + h * dv1
    du[M2] = v2 * dh + h * dv2
    du[E11] = 0.5 * dq[3] + 0.5 * v1 * v1 * dh + h * v1 * dv1
    du[E12] = 0.5 * dq[4] + 0.5 * v1 * v2 * dh + 0.5 * h * (v2 * dv1 + v1 * dv2)
    du[E22] = 0.5 * dq[5] + 0.5 * v2 * v2 * dh + h * v2 * dv2
    return du


def rotate_state(u):
    """Swap the roles of the x and y axes; an involution."""
    u = np.asarray(u)
    return u[[H, M2, M1, E22, E12, E11]]


def physical_flux(u, g, axis=0, q=None):
    """Flux F1 (``axis=0``) or F2 (``axis=1``) of the conserved state ``u``."""
    u = np.asarray(u, dtype=float)
    if q is None:
        q = cons_to_prim(u, check=False)
    h, v1, v2, r11, r12, r22 = q
    f = np.empty_like(u)
    if axis == 0:
        f[0] = u[M1]
        f[1] = r11 + u[M1] * v1 + 0.5 * g * h * h
        f[2] = r12 + u[M1] * v2
        f[3] = (u[E11] + r11) * v1
        f[4] = u[E12] * v1 + 0.5 * (r11 * v2 + r12 * v1)
        f[5] = u[E22] * v1 + r12 * v2
    elif axis == 1:
        f[0] = u[M2]
        f[1] = r12 + u[M1] * v2
        f[2] = r22 + u[M2] * v2 + 0.5 * g * h * h
        f[3] = u[E11] * v2 + r12 * v1
        f[4] = u[E12] * v2 + 0.5 * (r12 * v2 + r22 * v1)
        f[5] = (u[E22] + r22) * v2
    else:
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    return f


def noncons_vector(m1, m2, g, axis=0):
    """Vector multiplying the depth gradient; linear in the momentum."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    b = np.zeros((NVAR,) + np.broadcast(m1, m2).shape)
    if axis == 0:
        b[3] = g * m1
        b[4] = 0.5 * g * m2
    elif axis == 1:
        b[4] = 0.5 * g * m1
        b[5] = g * m2
    else:
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    return b


def eigenvalues(u, g, axis=0):
    """The six characteristic speeds in the direction ``axis``, sorted ascending.

    Zero normal stress is allowed: the four middle speeds then merge.
    """
    q = cons_to_prim(u, check=False)
    if np.any(q[0] <= 0):
        raise NonPhysicalStateError("h not positive in eigenvalues")
    if axis == 0:
        vn, p = q[1], q[3] / q[0]
    elif axis == 1:
        vn, p = q[2], q[5] / q[0]
    else:
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    rad = g * q[0] + 3.0 * p
    if np.any(rad < 0) or np.any(p < 0):
        raise NonPhysicalStateError("non-hyperbolic state: negative radicand in eigenvalues")
    c = np.sqrt(rad)
    s = np.sqrt(p)
    return np.stack([vn - c, vn - s, vn, vn, vn + s, vn + c])


def max_speed(q, g, axis=0):
    """Largest |eigenvalue| from primitive variables; used for the time step."""
    if axis == 0:
        return np.abs(q[1]) + np.sqrt(g * q[0] + 3.0 * q[3] / q[0])
    return np.abs(q[2]) + np.sqrt(g * q[0] + 3.0 * q[5] / q[0])


def alpha_coeff(h, trace, params):
    """Dissipation coefficient max(0, Cr (T - phi h^2) / T^2), zero for T = 0."""
    h = np.asarray(h, dtype=float)
    trace = np.asarray(trace, dtype=float)
    excess = trace - params.phi * h * h
    safe = np.where(trace > 0, trace, 1.0)
    alpha = np.where((trace > 0) & (excess > 0), params.cr * excess / (safe * safe), 0.0)
    return alpha if alpha.ndim else float(alpha)


def source_terms(u, dbdx, dbdy, params, q=None):
    """Bottom slope, friction and turbulent dissipation sources S(U)."""
    u = np.asarray(u, dtype=float)
    if q is None:
        q = cons_to_prim(u, check=False)
    g = params.g
    h, v1, v2, r11, r12, r22 = q
    speed = np.sqrt(v1 * v1 + v2 * v2)
    p11, p12, p22 = r11 / h, r12 / h, r22 / h
    dissip = alpha_coeff(h, p11 + p22, params) * speed**3
    fric = params.cf * speed
    ghx = g * h * dbdx
    ghy = g * h * dbdy
    s = np.empty_like(u)
    s[0] = 0.0
    s[1] = -ghx - fric * v1
    s[2] = -ghy - fric * v2
    s[3] = -ghx * v1 - dissip * p11 - fric * v1 * v1
    s[4] = -0.5 * ghx * v2 - 0.5 * ghy * v1 - dissip * p12 - fric * v1 * v2
    s[5] = -ghy * v2 - dissip * p22 - fric * v2 * v2
    return s


def entropy(u):
    """Convex entropy -h log(det R / h^4)."""
    q = cons_to_prim(u)
    h = q[0]
    det = q[3] * q[5] - q[4] * q[4]
    return -h * np.log(det / h**4)


def total_energy_density(u, g):
    """h*e with e = |v|^2/2 + tr(P)/2 + g h^2/2, evaluated as written.

    The g h^2/2 term is kept verbatim although it does not share units with the
    other two; the value is a diagnostic only and never enters the scheme.
    Zero stress is accepted here (the energy stays finite), unlike elsewhere.
    """
    q = cons_to_prim(u, check=False)
    if np.any(q[0] <= 0):
        raise NonPhysicalStateError("h not positive in total_energy_density")
    h = q[0]
    e = 0.5 * (q[1] ** 2 + q[2] ** 2) + 0.5 * (q[3] + q[5]) / h + 0.5 * g * h * h
    return h * e
