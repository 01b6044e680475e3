"""Minimum-time planar double-integrator trajectories under |a| <= bound."""
from .canonical import CanonicalArc, CanonicalParams, ConstantChain, Segment, Vec2, ZeroTrajectory, eval_canonical_state, eval_fg
from .classify import classify, solve_case1, solve_case2_1d, solve_case3
from .errors import (
    BracketFailure,
    ClassificationMismatch,
    DegenerateEqualVelocities,
    InvalidMu,
    MinTimeError,
    NoSolutionFound,
    NonFinite,
    OracleInconclusive,
    OutOfDomain,
)
from .normalize import BoundaryConditions, NormalizationRecord, NormalizedProblem, denormalize_solution, normalize
from .search import SearchConfig, Solution, displacement_map, residual, solve, solve_continuous
from .tausolve import MuPair, lambda_max, solve_tau, tau_bracket, time_upper_bound

__version__ = "0.1.0"
