"""Dense small-scale optimization engines: simplex LP with lazy cuts, ADMM SDP."""

from .lp import (
    LinearProgram,
    LPSolution,
    OPTIMAL,
    INFEASIBLE,
    UNBOUNDED,
    ITER_LIMIT,
    solve_lp,
    solve_lp_lazy,
)
from .oracle import RectangleOracle
from .sdp import ConeProgram, SdpSolution, solve_sdp

__all__ = [
    "LinearProgram",
    "LPSolution",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITER_LIMIT",
    "solve_lp",
    "solve_lp_lazy",
    "RectangleOracle",
    "ConeProgram",
    "SdpSolution",
    "solve_sdp",
]
