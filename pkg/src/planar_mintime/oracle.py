"""Independent checks on solver output.

``verify_solution`` re-evaluates a solution against its boundary data and fits
the sampled acceleration directions to the bilinear tangent form
(A t + B) / |A t + B|. ``brute_force_min_time`` estimates the minimum time by
direct transcription, sharing no code with the solver's search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonical import Vec2
from .errors import OracleInconclusive, OutOfDomain
from .normalize import BoundaryConditions

DEFAULT_SAMPLES = 1000
# second singular value below this fraction of the largest marks a degenerate fit
_DEGENERATE_SV = 1e-8


@dataclass(frozen=True)
class StationarityFit:
    A: Vec2
    B: Vec2
    max_angle_error: float


@dataclass(frozen=True)
class VerificationReport:
    endpoint_pos_residual: float
    endpoint_vel_residual: float
    max_accel_violation: float
    stationarity: StationarityFit
    passed: bool

    def as_dict(self) -> dict:
        st = self.stationarity
        return {
            "endpoint_pos_residual": self.endpoint_pos_residual,
            "endpoint_vel_residual": self.endpoint_vel_residual,
            "max_accel_violation": self.max_accel_violation,
            "stationarity": {"A": list(st.A), "B": list(st.B), "max_angle_error": st.max_angle_error},
            "passed": self.passed,
        }


def _angle_errors(d, t, A, B):
    w = np.outer(t, A) + B
    wn = np.hypot(w[:, 0], w[:, 1])
    keep = wn > 1e-9 * max(wn.max(), 1e-300)
    d, w = d[keep], w[keep]
    # atan2 keeps full precision for tiny angles, unlike arccos near 1
    cross = d[:, 0] * w[:, 1] - d[:, 1] * w[:, 0]
    return np.abs(np.arctan2(cross, np.einsum("ij,ij->i", d, w)))


def fit_stationarity(times, accels) -> StationarityFit:
    """Least-squares fit of acceleration directions to (A t + B)/|A t + B|."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(accels, dtype=float)
    an = np.hypot(a[:, 0], a[:, 1])
    d = a / an[:, None]
    span = max(t.max() - t.min(), 1e-300)
    t0 = t.min()
    s = (t - t0) / span
    # cross(d, A s + B) = 0 is linear in (Ax, Ay, Bx, By)
    M = np.column_stack([-d[:, 1] * s, d[:, 0] * s, -d[:, 1], d[:, 0]])
    _, sv, Vt = np.linalg.svd(M, full_matrices=False)
    if sv[-2] <= _DEGENERATE_SV * sv[0]:
        coef = _best_in_nullspace(d, s, Vt[-1], Vt[-2])
    else:
        coef = Vt[-1]
        if np.sum(np.einsum("ij,ij->i", d, np.outer(s, coef[:2]) + coef[2:])) < 0:
            coef = -coef
    # back to physical time: A s + B = (A/span) t + (B - A t0/span)
    A = coef[:2] / span
    B = coef[2:] - coef[:2] * t0 / span
    err = _angle_errors(d, t, A, B)
    return StationarityFit(Vec2(*map(float, A)), Vec2(*map(float, B)), float(err.max()) if err.size else 0.0)


def _best_in_nullspace(d, s, n1, n2):
    """Pick the direction in a 2-D null space that best matches the orientation."""

    def score(psi):
        c = math.cos(psi) * n1 + math.sin(psi) * n2
        w = np.outer(s, c[:2]) + c[2:]
        wn = np.hypot(w[:, 0], w[:, 1])
        wn = np.where(wn > 0, wn, np.inf)
        return float(np.mean(np.einsum("ij,ij->i", d, w) / wn))

    grid = np.linspace(0.0, 2 * math.pi, 721)[:-1]
    vals = [score(p) for p in grid]
    k = int(np.argmax(vals))
    lo, hi = grid[k] - grid[1], grid[k] + grid[1]
    invphi = (math.sqrt(5) - 1) / 2
    for _ in range(60):
        m1 = hi - invphi * (hi - lo)
        m2 = lo + invphi * (hi - lo)
        if score(m1) < score(m2):
            lo = m1
        else:
            hi = m2
    psi = 0.5 * (lo + hi)
    return math.cos(psi) * n1 + math.sin(psi) * n2


def verify_solution(bc: BoundaryConditions, sol, tol: float = 1e-8, samples: int = DEFAULT_SAMPLES) -> VerificationReport:
    """Check endpoints, acceleration magnitude and stationarity form of ``sol``.

    Endpoint residuals are relative to the problem scale; ``passed`` requires
    both of them and the acceleration violation to be within ``tol``.
    """
    traj = sol.trajectory
    T = float(sol.total_time)
    k = bc.accel_bound
    try:
        ends_p, ends_v, _ = traj.states(np.array([0.0, T]))
    except OutOfDomain:
        # claimed duration runs past the trajectory's own time span
        nan_fit = StationarityFit(Vec2(0.0, 0.0), Vec2(0.0, 0.0), math.inf)
        return VerificationReport(math.inf, math.inf, math.inf, nan_fit, False)
    vel_scale = abs(bc.u1) + abs(bc.v1) + abs(bc.u2) + abs(bc.v2) + k * T
    pos_scale = math.hypot(bc.dx, bc.dy) + vel_scale * T
    pos_err = math.hypot(ends_p[1, 0] - ends_p[0, 0] - bc.dx, ends_p[1, 1] - ends_p[0, 1] - bc.dy)
    vel_err = max(
        math.hypot(ends_v[0, 0] - bc.u1, ends_v[0, 1] - bc.v1),
        math.hypot(ends_v[1, 0] - bc.u2, ends_v[1, 1] - bc.v2),
    )
    pos_res = pos_err / pos_scale if pos_scale > 0 else pos_err
    vel_res = vel_err / vel_scale if vel_scale > 0 else vel_err
    if T > 0:
        ts = T * (np.arange(1, samples + 1) / (samples + 1))
        _, _, acc = traj.states(ts)
        mag = np.hypot(acc[:, 0], acc[:, 1])
        accel_violation = float(np.max(np.abs(mag - k)))
        fit = fit_stationarity(ts, acc)
    else:
        accel_violation = 0.0
        fit = StationarityFit(Vec2(0.0, 0.0), Vec2(0.0, 0.0), 0.0)
    passed = pos_res <= tol and vel_res <= tol and accel_violation <= tol * max(1.0, k)
    return VerificationReport(pos_res, vel_res, accel_violation, fit, bool(passed))


# --- direct transcription --------------------------------------------------


_CLARABEL_OPTS = {"tol_gap_abs": 1e-12, "tol_gap_rel": 1e-12, "tol_feas": 1e-12}
# peak acceleration accepted as <= 1; covers interior-point noise so that
# instances feasible exactly at the boundary (e.g. constant thrust) are kept
_FEAS_SLACK = 1e-9


class _Transcription:
    """Piecewise-constant control with ``n`` equal segments over total time T.

    For fixed T the smallest achievable max_k |a_k| meeting the endpoint
    conditions is a second-order cone program; T is feasible when it is <= 1.
    """

    def __init__(self, n: int):
        import cvxpy as cp

        self.n = n
        self.A = cp.Variable((n, 2))
        self.peak = cp.Variable()
        self.rhs_v = cp.Parameter(2)
        self.rhs_p = cp.Parameter(2)
        weights = n - np.arange(n) - 0.5
        cons = [
            cp.norm(self.A, 2, axis=1) <= self.peak,
            cp.sum(self.A, axis=0) == self.rhs_v,
            weights @ self.A == self.rhs_p,
        ]
        self.problem = cp.Problem(cp.Minimize(self.peak), cons)

    def peak_accel(self, T: float, dv: np.ndarray, v1: np.ndarray, delta: np.ndarray) -> float:
        h = T / self.n
        self.rhs_v.value = dv / h
        self.rhs_p.value = (delta - v1 * T) / (h * h)
        self.problem.solve(solver="CLARABEL", **_CLARABEL_OPTS)
        if self.problem.status not in ("optimal", "optimal_inaccurate"):
            return math.inf
        return float(self.peak.value)


def brute_force_min_time(
    bc: BoundaryConditions, segments: int = 64, refine_rounds: int = 0, rel_tol: float = 1e-7
) -> float:
    """Direct-transcription estimate of the minimum time for ``bc``.

    Any piecewise-constant control with |a| <= bound is admissible, so the
    result is an upper bound on the true minimum up to solver tolerance.
    Each refinement round doubles the segment count.
    """
    if segments < 4:
        raise ValueError("segments must be at least 4")
    r = bc.rescaled()
    v1 = np.array([r.u1, r.v1])
    v2 = np.array([r.u2, r.v2])
    dv = v2 - v1
    delta = np.array([r.dx, r.dy])
    lower = float(np.hypot(*dv))
    if lower == 0.0 and not np.any(delta):
        return 0.0
    # zigzag through two rest states: feasible for the continuous problem
    m1, m2 = float(np.hypot(*v1)), float(np.hypot(*v2))
    gap = 2 * delta - m1 * v1 - m2 * v2
    upper = m1 + m2 + math.sqrt(2.0) * float(gap @ gap) ** 0.25
    upper = max(upper, lower) * 1.01 + 1e-9

    best = None
    n = segments
    for _ in range(refine_rounds + 1):
        tr = _Transcription(n)
        feasible = lambda T: tr.peak_accel(T, dv, v1, delta) <= 1.0 + _FEAS_SLACK
        hi = upper if best is None else best
        tries = 0
        while not feasible(hi):
            hi *= 2.0
            tries += 1
            if tries > 6:
                raise OracleInconclusive(f"no feasible transcription with {n} segments up to T={hi:.6g}")
        lo = lower
        if lo > 0 and feasible(lo):
            hi = lo
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                hi = mid
            else:
                lo = mid
        best = hi
        n *= 2
    return best
