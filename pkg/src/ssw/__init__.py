"""Finite-volume solver for the shear shallow water model.

Path-conservative HLL, HLLC3 and HLLC5 solvers, first-order and
MUSCL-Hancock stepping with a semi-implicit source update, the standard
test cases and the analysis tools used to check them.
"""
from .grid import BoundarySpec, Grid, apply_bc, init_case, list_cases
from .integrator import PositivityError, StepControls, advance, step
from .model import ModelParams, NonPhysicalStateError, cons_to_prim, prim_to_cons
from .riemann import fluctuations, hll, hllc3, hllc5

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "Grid",
    "ModelParams",
    "NonPhysicalStateError",
    "PositivityError",
    "StepControls",
    "advance",
    "apply_bc",
    "cons_to_prim",
    "fluctuations",
    "hll",
    "hllc3",
    "hllc5",
    "init_case",
    "list_cases",
    "prim_to_cons",
    "step",
]
