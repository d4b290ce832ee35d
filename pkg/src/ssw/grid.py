"""Structured cell-centred grids, ghost-cell boundary conditions and test cases."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .model import ModelParams, check_prim, prim_to_cons

log = logging.getLogger(__name__)

BC_KINDS = ("periodic", "transmissive", "dirichlet_exact")
SIDES = ("left", "right", "bottom", "top")


@dataclass
class Grid:
    """Cell-centred grid with ``ghost`` layers on every side.

    The state ``u`` has shape ``(6, nx + 2*ghost)`` in 1-D and
    ``(6, nx + 2*ghost, ny + 2*ghost)`` in 2-D (x is the first spatial axis).
    Bottom slopes are stored per cell with the same spatial shape.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0
    ghost: int = 2
    ndim: int = 1
    u: np.ndarray = None
    b: np.ndarray = None
    dbdx: np.ndarray = None
    dbdy: np.ndarray = None
    time: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per direction")
        if self.ghost < 2:
            raise ValueError("ghost width must be at least 2")
        if self.ndim == 1 and self.ny != 1:
            raise ValueError("1-D grid must have ny = 1")
        shape = self.shape
        if self.u is None:
            self.u = np.zeros((6,) + shape)
        for name in ("b", "dbdx", "dbdy"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(shape))

    @property
    def shape(self):
        g = self.ghost
        if self.ndim == 1:
            return (self.nx + 2 * g,)
        return (self.nx + 2 * g, self.ny + 2 * g)

    @property
    def interior(self):
        g = self.ghost
        return tuple(slice(g, -g) for _ in range(self.ndim))

    @property
    def x(self):
        g = self.ghost
        return self.x0 + (np.arange(self.nx + 2 * g) - g + 0.5) * self.dx

    @property
    def y(self):
        g = self.ghost
        if self.ndim == 1:
            return np.zeros(1)
        return self.y0 + (np.arange(self.ny + 2 * g) - g + 0.5) * self.dy

    def mesh(self):
        """Cell-centre coordinates broadcast to the spatial shape (ghosts included)."""
        if self.ndim == 1:
            return self.x, np.zeros(self.shape)
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def cell_area(self):
        return self.dx * (self.dy if self.ndim == 2 else 1.0)

    def interior_state(self):
        return self.u[(slice(None),) + self.interior]

    def copy(self):
        return replace(
            self,
            u=self.u.copy(),
            b=self.b.copy(),
            dbdx=self.dbdx.copy(),
            dbdy=self.dbdy.copy(),
        )


@dataclass(frozen=True)
class BoundarySpec:
    left: str = "transmissive"
    right: str = "transmissive"
    bottom: str = "transmissive"
    top: str = "transmissive"

    def __post_init__(self):
        for side in SIDES:
            kind = getattr(self, side)
            if kind not in BC_KINDS:
                raise ValueError(f"unknown boundary kind {kind!r} on {side}; choose from {BC_KINDS}")
        for a, b in (("left", "right"), ("bottom", "top")):
            if (getattr(self, a) == "periodic") != (getattr(self, b) == "periodic"):
                raise ValueError(f"periodic boundaries must be paired: {a}/{b}")

    @classmethod
    def uniform(cls, kind):
        return cls(kind, kind, kind, kind)


def _fill_axis(u, axis, g, lo, hi):
    """Fill the ghost layers of spatial ``axis`` (0 or 1) for the whole array."""
    ax = axis + 1
    n = u.shape[ax]

    def sl(a, b):
        idx = [slice(None)] * u.ndim
        idx[ax] = slice(a, b)
        return tuple(idx)

    if lo == "periodic":
        u[sl(0, g)] = u[sl(n - 2 * g, n - g)]
        u[sl(n - g, n)] = u[sl(g, 2 * g)]
        return
    if lo == "transmissive":
        u[sl(0, g)] = u[sl(g, g + 1)]
    if hi == "transmissive":
        u[sl(n - g, n)] = u[sl(n - g - 1, n - g)]


def apply_bc(grid, spec, exact=None, t=None):
    """Fill ghost cells in place; returns the grid.

    ``exact(x, y, t)`` must return primitive variables and is required when a
    side is ``dirichlet_exact``; ghost cells on such sides (corners included)
    are set to the exact state at their centres at time ``t`` (default: grid
    time).
    """
    t = grid.time if t is None else t
    g = grid.ghost
    u = grid.u
    sides = [("left", "right")] if grid.ndim == 1 else [("left", "right"), ("bottom", "top")]
    for axis, (lo_side, hi_side) in enumerate(sides):
        _fill_axis(u, axis, g, getattr(spec, lo_side), getattr(spec, hi_side))
    dirichlet = [s for s in SIDES[: 2 * grid.ndim] if getattr(spec, s) == "dirichlet_exact"]
    if dirichlet:
        if exact is None:
            raise ValueError("dirichlet_exact boundary requires an exact solution")
        X, Y = grid.mesh()
        mask = np.zeros(grid.shape, dtype=bool)
        if "left" in dirichlet:
            mask[:g] = True
        if "right" in dirichlet:
            mask[-g:] = True
        if grid.ndim == 2:
            if "bottom" in dirichlet:
                mask[:, :g] = True
            if "top" in dirichlet:
                mask[:, -g:] = True
        q = exact(X[mask], Y[mask], t)
        u[:, mask] = prim_to_cons(np.asarray(q, dtype=float), check=False)
    return grid


# ---------------------------------------------------------------------------
# test cases


@dataclass(frozen=True)
class AnalyticParams:
    h0: float = 1.0
    lam: float = 0.1
    gamma: float = 0.01
    beta: float = 1e-3


def exact_solution_2d(x, y, t, p=AnalyticParams()):
    """Primitive variables of the space-linear, time-nonlinear exact solution."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    bt = p.beta * t
    d = 1.0 + bt * bt
    h = p.h0 / d * np.ones_like(x)
    v1 = p.beta / d * (bt * x + y)
    v2 = p.beta / d * (-x + bt * y)
    p11 = (p.lam + p.gamma * bt * bt) / d**2
    p12 = (p.lam - p.gamma) * bt / d**2
    p22 = (p.gamma + p.lam * bt * bt) / d**2
    return np.stack([h, v1, v2, h * p11, h * p12, h * p22])


@dataclass(frozen=True)
class Case:
    name: str
    ndim: int
    description: str
    length: tuple
    default_n: tuple
    bc: BoundarySpec
    t_end: float
    params: ModelParams
    constants: dict = field(default_factory=dict)


def _riemann_init(left, right, x_split=0.5):
    def init(x, y, c):
        ql = np.asarray(left(c), dtype=float)
        qr = np.asarray(right(c), dtype=float)
        mask = x < x_split
        return np.where(mask, ql[:, None] if x.ndim == 1 else ql[:, None, None],
                        qr[:, None] if x.ndim == 1 else qr[:, None, None])
    return init


def _prim(h, v1, v2, p11, p12, p22):
    return np.array([h, v1, v2, h * p11, h * p12, h * p22])


def _shear_left(c):
    return _prim(c["h"], 0.0, c["v2"], c["P"], 0.0, c["P"])


def _shear_right(c):
    return _prim(c["h"], 0.0, -c["v2"], c["P"], 0.0, c["P"])


def _dam_left(c):
    return _prim(c["hl"], 0.0, 0.0, c["P"], 0.0, c["P"])


def _dam_right(c):
    return _prim(c["hr"], 0.0, 0.0, c["P"], 0.0, c["P"])


def _mod_left(c):
    return _prim(c["hl"], c["v1"], c["v2"], c["P"], c["P12"], c["P"])


def _mod_right(c):
    return _prim(c["hr"], c["v1"], -c["v2"], c["P"], c["P12"], c["P"])


def roll_base_velocity(c, params):
    return math.sqrt(params.g * c["h0"] * math.tan(c["incline"]) / params.cf)


def _roll_init(x, y, c, params):
    lx = c["Lx"]
    h = c["h0"] * (1.0 + c["a"] * np.sin(2 * np.pi * x / lx))
    if "Ly" in c:
        h = h + c["h0"] * c["a"] * np.sin(2 * np.pi * y / c["Ly"])
    v1 = roll_base_velocity(c, params) * np.ones_like(h)
    p = 0.5 * params.phi * h * h
    return np.stack([h, v1, np.zeros_like(h), h * p, np.zeros_like(h), h * p])


_ROLL1 = dict(incline=0.05011, h0=7.98e-3, a=0.05, Lx=1.3)
_ROLL2 = dict(incline=0.119528, h0=5.33e-3, a=0.05, Lx=1.8)

CASES = {
    "shear1d": Case(
        "shear1d", 1, "two shear waves from a jump in transverse velocity",
        (1.0,), (500,), BoundarySpec(), 10.0, ModelParams(g=9.81),
        dict(h=0.01, P=1e-4, v2=0.2),
    ),
    "dambreak1d": Case(
        "dambreak1d", 1, "dam break: rarefaction, contact and shock",
        (1.0,), (500,), BoundarySpec(), 0.5, ModelParams(g=9.81),
        dict(hl=0.02, hr=0.01, P=1e-4),
    ),
    "moddambreak1d": Case(
        "moddambreak1d", 1, "dam break with transverse velocity jump (all five waves)",
        (1.0,), (500,), BoundarySpec(), 0.5, ModelParams(g=9.81),
        dict(hl=0.01, hr=0.02, v1=0.1, v2=0.2, P=4e-2, P12=1e-8),
    ),
    "rollwave1d_case1": Case(
        "rollwave1d_case1", 1, "1-D roll waves on an incline, parameter set 1",
        (1.3,), (500,), BoundarySpec.uniform("periodic"), 26.99,
        ModelParams(g=9.81, cf=0.0036, cr=0.00035, phi=22.76), dict(_ROLL1),
    ),
    "rollwave1d_case2": Case(
        "rollwave1d_case2", 1, "1-D roll waves on an incline, parameter set 2",
        (1.8,), (500,), BoundarySpec.uniform("periodic"), 26.35185,
        ModelParams(g=9.81, cf=0.0038, cr=0.002, phi=153.501), dict(_ROLL2),
    ),
    "analytic2d": Case(
        "analytic2d", 2, "exact solution linear in space, nonlinear in time",
        (10.0, 10.0), (40, 40), BoundarySpec.uniform("dirichlet_exact"), 50.0,
        ModelParams(g=9.81), dict(h0=1.0, lam=0.1, gamma=0.01, beta=1e-3),
    ),
    "rollwave2d": Case(
        "rollwave2d", 2, "2-D roll waves with a transverse perturbation",
        (1.3, 0.5), (260, 100), BoundarySpec.uniform("periodic"), 36.0,
        ModelParams(g=9.81, cf=0.0036, cr=0.00035, phi=22.76), dict(_ROLL1, Ly=0.5),
    ),
}

_PARAM_ALIASES = {"g": "g", "cf": "cf", "cr": "cr", "phi": "phi"}


def list_cases():
    return sorted(CASES)


def split_overrides(case, overrides):
    """Separate overrides into model-parameter and case-constant updates."""
    model, consts = {}, {}
    for key, value in (overrides or {}).items():
        k = key.lower()
        if k in _PARAM_ALIASES:
            model[_PARAM_ALIASES[k]] = float(value)
            continue
        matches = [c for c in case.constants if c.lower() == k]
        if not matches:
            raise KeyError(
                f"unknown parameter {key!r} for case {case.name}; "
                f"known: {sorted(_PARAM_ALIASES) + sorted(case.constants)}"
            )
        consts[matches[0]] = float(value)
    return model, consts


@dataclass
class CaseSetup:
    grid: Grid
    bc: BoundarySpec
    params: ModelParams
    t_end: float
    case: Case
    constants: dict
    exact: Optional[Callable] = None


def init_case(name, nx=None, ny=None, overrides=None):
    """Build the initial grid, boundary spec, parameters and final time of a case."""
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; available: {list_cases()}")
    case = CASES[name]
    mp, cp = split_overrides(case, overrides)
    params = replace(case.params, **mp)
    c = dict(case.constants, **cp)
    nx = int(nx or case.default_n[0])
    if case.ndim == 2:
        ny = int(ny or case.default_n[1])
    else:
        ny = 1
    lx = c.get("Lx", case.length[0])
    grid = Grid(nx=nx, ny=ny, dx=lx / nx, dy=1.0, ndim=case.ndim)
    if case.ndim == 2:
        ly = c.get("Ly", case.length[1])
        grid.dy = ly / ny
    X, Y = grid.mesh()
    exact = None
    if name == "shear1d":
        q = _riemann_init(_shear_left, _shear_right)(X, Y, c)
    elif name == "dambreak1d":
        q = _riemann_init(_dam_left, _dam_right)(X, Y, c)
    elif name == "moddambreak1d":
        q = _riemann_init(_mod_left, _mod_right)(X, Y, c)
    elif name.startswith("rollwave"):
        q = _roll_init(X, Y, c, params)
        slope = math.tan(c["incline"])
        grid.b = -X * slope
        grid.dbdx = np.full(grid.shape, -slope)
    elif name == "analytic2d":
        ap = AnalyticParams(c["h0"], c["lam"], c["gamma"], c["beta"])

        def exact(x, y, t, _ap=ap):
            return exact_solution_2d(x, y, t, _ap)

        q = exact(X, Y, 0.0)
    else:  # pragma: no cover - registry and dispatch are kept in sync
        raise KeyError(name)
    check_prim(q[(slice(None),) + grid.interior], context=f"initial state of {name}")
    grid.u = prim_to_cons(q, check=False)
    setup = CaseSetup(grid, case.bc, params, case.t_end, case, c, exact)
    if case.ndim == 1 and case.bc.left == "transmissive":
        _check_wave_extent(setup)
    return setup


def _check_wave_extent(setup, x_split=0.5):
    """Warn if the outermost non-trivial wave of the initial jump leaves the domain."""
    from .riemann import hllc5

    u = setup.grid.u
    x = setup.grid.x
    i = int(np.searchsorted(x, x_split))
    uL, uR = u[:, i - 1], u[:, i]
    _, fan = hllc5(uL, uR, setup.params.g, fan=True)
    speeds = [float(s) for s, a, b in zip(fan.speeds, fan.states[:-1], fan.states[1:])
              if np.max(np.abs(b - a)) > 1e-12 * np.max(np.abs(uL))]
    if not speeds:
        return
    lo = x_split + min(speeds) * setup.t_end
    hi = x_split + max(speeds) * setup.t_end
    length = setup.grid.nx * setup.grid.dx
    if lo < setup.grid.x0 or hi > setup.grid.x0 + length:
        log.warning(
            "case %s: waves reach [%.3g, %.3g] by t=%g, outside the domain",
            setup.case.name, lo, hi, setup.t_end,
        )
