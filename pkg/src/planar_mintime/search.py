"""Two-parameter (rotation, dilation) search and top-level solver dispatch.

For a normalized problem every continuous-acceleration candidate is a
canonical arc fixed by (theta, alpha, eta). The velocity constraints pin down
(tau1, tau2, u0, v0) for each triple, leaving a 2-D root-finding problem in
(theta, alpha) on the displacement. Roots are located by scanning a grid
under the alpha ceiling and refining seeds with damped Newton; the root with
the smallest duration is the minimizer.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import CanonicalArc, CanonicalParams, ConstantChain, Vec2, ZeroTrajectory, eval_fg
from .classify import (
    DEFAULT_TOL,
    Case1EqualVelocities,
    Case2OneDimensional,
    Case3BangBang,
    Continuous,
    ZeroTime,
    classify,
    solve_case1,
    solve_case2_1d,
    solve_case3,
)
from .errors import ClassificationMismatch, DegenerateEqualVelocities, NoSolutionFound, NonFinite, OutOfDomain
from .normalize import BoundaryConditions, NormalizationRecord, NormalizedProblem, denormalize_solution, normalize
from .tausolve import lambda_max, solve_tau_arrays, time_upper_bound

log = logging.getLogger(__name__)

THETA_INSET = 1e-3
_FD_STEP = 1e-7
_LINE_SEARCH = 2.0 ** -np.arange(0, 10)
ENDPOINT_TOL = 1e-8
TIE_TOL = 1e-9
MU_U_MAX = 300.0
_MAX_MU_GROWTH = 4.0
_STALL_WINDOW = 6
_STALL_RATIO = 0.5


@dataclass(frozen=True)
class SearchConfig:
    theta_grid: int = 64
    alpha_grid: int = 64
    newton_max_iter: int = 40
    residual_tol: float = 1e-10  # relative to the problem length scale
    tau_tol: float = 1e-12
    tmax_safety: float = 1.05
    dedupe_radius: float = 1e-6
    class_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.theta_grid < 2 or self.alpha_grid < 2 or self.newton_max_iter < 2:
            raise ValueError("grid counts and iteration limit must be at least 2")
        for name in ("residual_tol", "tau_tol", "dedupe_radius", "class_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.tmax_safety >= 1:
            raise ValueError("tmax_safety must be >= 1")


@dataclass(frozen=True)
class Root:
    theta: float
    alpha: float
    eta: int
    T: float
    residual_norm: float


@dataclass
class SearchDiagnostics:
    roots_found: list = field(default_factory=list)
    grid_cells_scanned: int = 0
    newton_iterations_total: int = 0
    bang_bang_candidate_T: float | None = None
    refined: bool = False


@dataclass(frozen=True)
class Solution:
    trajectory: object
    total_time: float
    kind: str
    case: object
    record: NormalizationRecord
    diagnostics: SearchDiagnostics


# --- displacement map ----------------------------------------------------


def _displacement_arrays(np_: NormalizedProblem, theta, alpha, eta, tau_tol):
    theta, alpha, eta = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(alpha, dtype=float), np.asarray(eta, dtype=float)
    )
    c, s = np.cos(theta), np.sin(theta)
    mu_u, mu_v = alpha * c, -eta * alpha * s
    # outside this range exp(mu_u) overflows; such points are never minimizers
    valid = (mu_u > 0) & (mu_u <= MU_U_MAX) & np.isfinite(mu_v)
    if not valid.all():
        mu_u = np.where(valid, mu_u, 1.0)
        mu_v = np.where(valid, mu_v, 0.0)
    tau1, tau2 = solve_tau_arrays(mu_u, mu_v, tau_tol)
    if not valid.all():
        tau1 = np.where(valid, tau1, np.nan)
        tau2 = np.where(valid, tau2, np.nan)
    f1, g1, fp1, gp1, _, _ = eval_fg(tau1)
    f2, g2, _, _, _, _ = eval_fg(tau2)
    # alpha * R_theta^{-1} (u, v)
    ru = alpha * (c * np_.u + s * np_.v)
    rv = alpha * (-s * np_.u + c * np_.v)
    u0 = ru - fp1
    v0 = rv - eta * gp1
    span = tau2 - tau1
    mu_x = f2 - f1 + u0 * span
    mu_y = eta * (g2 - g1) + v0 * span
    return mu_x, mu_y, tau1, tau2, u0, v0, span / alpha


def displacement_map(np_: NormalizedProblem, theta: float, alpha: float, eta: int, tau_tol: float = 1e-12):
    """(mu_x, mu_y, tau1, tau2, u0, v0, T) for one (theta, alpha, eta)."""
    _check_angle(theta, alpha, eta)
    return tuple(float(x) for x in _displacement_arrays(np_, theta, alpha, eta, tau_tol))


def _check_angle(theta, alpha, eta):
    if not alpha > 0:
        raise OutOfDomain(f"alpha must be positive, got {alpha}")
    if not abs(theta) < math.pi / 2:
        raise OutOfDomain(f"theta must lie in (-pi/2, pi/2), got {theta}")
    if eta not in (1, -1):
        raise OutOfDomain("eta must be +1 or -1")


def residual(np_: NormalizedProblem, theta: float, alpha: float, eta: int, tau_tol: float = 1e-12) -> Vec2:
    """(mu_x, mu_y) - alpha^2 R_theta^{-1} (dx, dy); zero exactly at solutions."""
    _check_angle(theta, alpha, eta)
    mu_x, mu_y = _displacement_arrays(np_, theta, alpha, eta, tau_tol)[:2]
    c, s = math.cos(theta), math.sin(theta)
    tx = alpha**2 * (c * np_.dx + s * np_.dy)
    ty = alpha**2 * (-s * np_.dx + c * np_.dy)
    return Vec2(float(mu_x) - tx, float(mu_y) - ty)


def _position_residual(np_, theta, alpha, eta, tau_tol):
    """Residual mapped back to displacement units: R_theta (mu / alpha^2) - delta."""
    mu_x, mu_y = _displacement_arrays(np_, theta, alpha, eta, tau_tol)[:2]
    c, s = np.cos(theta), np.sin(theta)
    px = (c * mu_x - s * mu_y) / alpha**2
    py = (s * mu_x + c * mu_y) / alpha**2
    return np.stack([px - np_.dx, py - np_.dy], axis=-1)


# --- continuous search ---------------------------------------------------


def _theta_nodes(n: int) -> np.ndarray:
    """Theta nodes uniform in z with theta = arctan(sinh z).

    The alpha ceiling grows like 1/cos(theta) toward the edges, and
    cos(theta) = 1/cosh(z), so adjacent rows differ in ceiling by a bounded
    factor instead of blowing up in the last cells.
    """
    z = math.asinh(math.tan(math.pi / 2 - THETA_INSET))
    return np.arctan(np.sinh(np.linspace(-z, z, n)))


def _grid(np_: NormalizedProblem, cfg: SearchConfig, n_theta: int, n_alpha: int):
    tmax = time_upper_bound(np_.u, np_.v, np_.u + 1.0, np_.v, np_.dx, np_.dy)
    thetas = _theta_nodes(n_theta)
    ceiling = np.array([lambda_max(cfg.tmax_safety * tmax, th) for th in thetas])
    frac = (np.arange(n_alpha) + 0.5) / n_alpha
    alphas = ceiling[:, None] * frac[None, :]
    return thetas, alphas


def _seeds(R: np.ndarray):
    """Grid indices worth refining: sign-change cells and local minima of |R|."""
    norm = np.hypot(R[..., 0], R[..., 1])
    n_t, n_a = norm.shape
    seeds = set()
    rx, ry = R[..., 0], R[..., 1]
    for i in range(n_t - 1):
        for j in range(n_a - 1):
            cx = rx[i : i + 2, j : j + 2]
            cy = ry[i : i + 2, j : j + 2]
            if cx.min() <= 0 <= cx.max() and cy.min() <= 0 <= cy.max():
                block = norm[i : i + 2, j : j + 2]
                k = np.unravel_index(np.argmin(block), block.shape)
                seeds.add((i + k[0], j + k[1]))
    padded = np.pad(norm, 1, constant_values=np.inf)
    neigh = np.stack(
        [padded[1 + di : 1 + di + n_t, 1 + dj : 1 + dj + n_a] for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj]
    )
    local_min = norm <= neigh.min(axis=0)
    for i, j in zip(*np.nonzero(local_min)):
        seeds.add((int(i), int(j)))
    return sorted(seeds, key=lambda ij: (norm[ij], ij))


def _to_mu(theta, alpha, eta):
    return alpha * np.cos(theta), -eta * alpha * np.sin(theta)


def _from_mu(mu_u, mu_v, eta):
    return np.arctan2(-eta * mu_v, mu_u), np.hypot(mu_u, mu_v)


def _length_scale(np_: NormalizedProblem) -> float:
    """Displacement magnitude the residual is measured against (at least 1)."""
    tmax = time_upper_bound(np_.u, np_.v, np_.u + 1.0, np_.v, np_.dx, np_.dy)
    speed = math.hypot(np_.u, np_.v) + 1.0
    return max(1.0, math.hypot(np_.dx, np_.dy), speed * tmax)


def _newton(np_, theta, alpha, eta, cfg: SearchConfig):
    """Damped Newton on the displacement residual, vectorized over seeds.

    The residual is divided by ``_length_scale`` so ``residual_tol`` is relative.

    Iterates in (mu_u, mu_v) = (alpha cos theta, -eta alpha sin theta), where
    the residual is far closer to linear than in (theta, alpha): near
    |theta| = pi/2 the roots sit in narrow curved valleys of the polar grid.
    """
    eta = eta.astype(float)
    x, y = _to_mu(theta.astype(float), alpha.astype(float), eta)
    tol = cfg.tau_tol

    def F(mu_u, mu_v, et):
        th, al = _from_mu(mu_u, mu_v, et)
        out = _position_residual(np_, th, al, et, tol)
        return np.where((mu_u > 0)[:, None], out, np.nan)

    scale = _length_scale(np_)
    r = F(x, y, eta) / scale
    nrm = np.hypot(r[:, 0], r[:, 1])
    nrm = np.where(np.isfinite(nrm), nrm, np.inf)
    live = np.isfinite(nrm)
    iters = 0
    polish = np.zeros(x.shape, dtype=int)
    history = [nrm.copy()]
    for it in range(cfg.newton_max_iter):
        # seeds parked at a non-root local minimum of |R| stop improving
        if it >= _STALL_WINDOW:
            live &= (nrm <= cfg.residual_tol) | (nrm < _STALL_RATIO * history[-_STALL_WINDOW])
        # converged seeds get two extra polishing steps to push T to full precision
        polish = np.where(nrm <= cfg.residual_tol, polish + 1, polish)
        live &= polish < 3
        if not np.any(live):
            break
        idx = np.nonzero(live)[0]
        xu, xv, et, rr = x[idx], y[idx], eta[idx], r[idx]
        n = idx.size
        iters += n
        h = _FD_STEP * np.maximum(np.hypot(xu, xv), 1.0)
        hu = np.minimum(h, 0.5 * xu)
        fd = F(
            np.concatenate([xu + hu, xu - hu, xu, xu]),
            np.concatenate([xv, xv, xv + h, xv - h]),
            np.tile(et, 4),
        ).reshape(4, n, 2) / scale
        J = np.empty((n, 2, 2))
        J[:, :, 0] = (fd[0] - fd[1]) / (2 * hu)[:, None]
        J[:, :, 1] = (fd[2] - fd[3]) / (2 * h)[:, None]
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            ok = np.isfinite(det) & (np.abs(det) > 1e-300)
            safe_det = np.where(ok, det, 1.0)
            d_u = np.where(ok, -(J[:, 1, 1] * rr[:, 0] - J[:, 0, 1] * rr[:, 1]) / safe_det, 0.0)
            d_v = np.where(ok, -(-J[:, 1, 0] * rr[:, 0] + J[:, 0, 0] * rr[:, 1]) / safe_det, 0.0)
            # trust region: mu_u stays positive and |mu| grows at most 4x per step
            cap = np.ones(n)
            shrink = d_u < 0
            cap[shrink] = np.minimum(1.0, 0.9 * xu[shrink] / -d_u[shrink])
            size = np.hypot(xu, xv)
            step = np.hypot(d_u, d_v)
            far = step > (_MAX_MU_GROWTH - 1.0) * size
            cap[far] = np.minimum(cap[far], (_MAX_MU_GROWTH - 1.0) * size[far] / step[far])
        lam = _LINE_SEARCH[None, :] * cap[:, None]
        cand_u = xu[:, None] + lam * d_u[:, None]
        cand_v = xv[:, None] + lam * d_v[:, None]
        cand_r = F(cand_u.ravel(), cand_v.ravel(), np.repeat(et, lam.shape[1])).reshape(n, lam.shape[1], 2) / scale
        cand_n = np.hypot(cand_r[..., 0], cand_r[..., 1])
        cand_n = np.where(np.isfinite(cand_n), cand_n, np.inf)
        better = cand_n < nrm[idx][:, None]
        first = np.where(better.any(axis=1), better.argmax(axis=1), -1)
        moved = (first >= 0) & ok
        k = np.where(moved, first, 0)
        rows = np.arange(n)
        x[idx] = np.where(moved, cand_u[rows, k], xu)
        y[idx] = np.where(moved, cand_v[rows, k], xv)
        r[idx] = np.where(moved[:, None], cand_r[rows, k], rr)
        nrm[idx] = np.where(moved, cand_n[rows, k], nrm[idx])
        live[idx[~moved]] = False
        history.append(nrm.copy())
    theta, alpha = _from_mu(x, y, eta)
    return theta, alpha, nrm, iters


def solve_continuous(np_: NormalizedProblem, cfg: SearchConfig = SearchConfig()):
    """Minimum-duration canonical arc for a normalized problem.

    Returns ``(CanonicalParams, T, SearchDiagnostics)``; raises NoSolutionFound
    when neither the base grid nor one refinement yields a converged root.
    """
    diag = SearchDiagnostics()
    for refine in (False, True):
        n_t = cfg.theta_grid * (2 if refine else 1)
        n_a = cfg.alpha_grid * (2 if refine else 1)
        diag.refined = refine
        roots = _scan(np_, cfg, n_t, n_a, diag)
        if roots:
            break
    else:
        raise NoSolutionFound(
            "no converged (theta, alpha, eta) root; the instance may be a bang-bang case "
            "missed by the classification tolerance, or the grid is too coarse",
            diag,
        )
    best = roots[0]
    mu_x, mu_y, tau1, tau2, u0, v0, T = displacement_map(np_, best.theta, best.alpha, best.eta, cfg.tau_tol)
    params = CanonicalParams(best.alpha, best.theta, best.eta, tau1, tau2, u0, v0)
    return params, T, diag


def _scan(np_, cfg, n_t, n_a, diag: SearchDiagnostics):
    thetas, alphas = _grid(np_, cfg, n_t, n_a)
    TH = np.broadcast_to(thetas[:, None], alphas.shape)
    seeds_t, seeds_a, seeds_e = [], [], []
    for eta in (1, -1):
        R = _position_residual(np_, TH, alphas, float(eta), cfg.tau_tol)
        diag.grid_cells_scanned += R.shape[0] * R.shape[1]
        for i, j in _seeds(R):
            seeds_t.append(thetas[i])
            seeds_a.append(alphas[i, j])
            seeds_e.append(eta)
    th, al, nrm, iters = _newton(np_, np.array(seeds_t), np.array(seeds_a), np.array(seeds_e), cfg)
    diag.newton_iterations_total += iters
    found: list[Root] = []
    for t, a, e, n in zip(th, al, seeds_e, nrm):
        if not (n <= cfg.residual_tol and a > 0 and abs(t) < math.pi / 2):
            continue
        if any(r.eta == e and math.hypot(r.theta - t, r.alpha - a) <= cfg.dedupe_radius for r in found):
            continue
        T = displacement_map(np_, float(t), float(a), int(e), cfg.tau_tol)[6]
        found.append(Root(float(t), float(a), int(e), float(T), float(n)))
    found.sort(key=lambda r: (r.T, r.theta, r.alpha, r.eta))
    diag.roots_found = found
    return found


# --- top level -----------------------------------------------------------


def _kind(traj) -> str:
    if isinstance(traj, ZeroTrajectory):
        return "zero"
    if isinstance(traj, CanonicalArc):
        return "canonical"
    return "constant" if len(traj.segments) == 1 else "bang-bang"


def endpoint_residuals(bc: BoundaryConditions, traj) -> tuple[float, float]:
    """Relative (position, velocity) endpoint mismatch of ``traj`` against ``bc``."""
    T = traj.duration
    p, v, _ = traj.states(np.array([0.0, T]))
    k = bc.accel_bound
    vel_scale = abs(bc.u1) + abs(bc.v1) + abs(bc.u2) + abs(bc.v2) + k * T
    pos_scale = math.hypot(bc.dx, bc.dy) + vel_scale * T
    pos_err = math.hypot(p[1, 0] - p[0, 0] - bc.dx, p[1, 1] - p[0, 1] - bc.dy)
    vel_err = max(math.hypot(v[0, 0] - bc.u1, v[0, 1] - bc.v1), math.hypot(v[1, 0] - bc.u2, v[1, 1] - bc.v2))
    return (pos_err / pos_scale if pos_scale > 0 else pos_err), (vel_err / vel_scale if vel_scale > 0 else vel_err)


def _accept(bc, traj) -> bool:
    pos, vel = endpoint_residuals(bc, traj)
    return pos <= ENDPOINT_TOL and vel <= ENDPOINT_TOL


def solve(bc: BoundaryConditions, cfg: SearchConfig = SearchConfig()) -> Solution:
    """Minimum-time trajectory for ``bc`` in the original frame."""
    diag = SearchDiagnostics()
    try:
        np_, rec = normalize(bc, cfg.class_tol)
    except DegenerateEqualVelocities:
        return _solve_equal_velocities(bc, cfg, diag)

    case = classify(np_, cfg.class_tol)
    candidates = []
    if isinstance(case, Case2OneDimensional):
        candidates.append(solve_case2_1d(np_.u, np_.u + 1.0, np_.dx, cfg.class_tol))
    elif isinstance(case, Case3BangBang):
        candidates.append(solve_case3(np_.u, np_.u + 1.0, np_.v, np_.dx, np_.dy, cfg.class_tol))
    else:
        bang = None
        if case.near_case3 is not None:
            try:
                bang = solve_case3(np_.u, np_.u + 1.0, np_.v, np_.dx, np_.dy, cfg.class_tol)
            except ClassificationMismatch:
                bang = None
            if bang is not None and not _accept(np_.as_boundary_conditions(), bang):
                bang = None
        try:
            params, T, diag = solve_continuous(np_, cfg)
            arc = CanonicalArc(params)
        except NoSolutionFound as exc:
            if bang is None:
                raise NoSolutionFound(str(exc), exc.diagnostics) from None
            diag, arc = exc.diagnostics or diag, None
        if bang is not None:
            diag.bang_bang_candidate_T = bang.duration
            if arc is None or bang.duration <= arc.duration + TIE_TOL:
                arc = None
                candidates.append(bang)
        if arc is not None:
            candidates.append(arc)

    traj = min(candidates, key=lambda t: t.duration)
    out, _ = denormalize_solution(traj, (0.0, traj.duration), rec)
    if not _accept(bc, out):
        pos, vel = endpoint_residuals(bc, out)
        raise NoSolutionFound(f"endpoint residuals too large (position {pos:.3g}, velocity {vel:.3g})", diag)
    return Solution(out, out.duration, _kind(out), case, rec, diag)


def _solve_equal_velocities(bc: BoundaryConditions, cfg: SearchConfig, diag: SearchDiagnostics) -> Solution:
    r = bc.rescaled()
    rec = NormalizationRecord(1.0, 0.0, 1, bc.accel_bound)
    case = classify(BoundaryConditions(r.u1, r.v1, r.u1, r.v1, r.dx, r.dy), cfg.class_tol)
    if isinstance(case, ZeroTime):
        traj, _ = denormalize_solution(ZeroTrajectory(Vec2(0.0, 0.0), Vec2(r.u1, r.v1)), (0.0, 0.0), rec)
        return Solution(traj, 0.0, "zero", case, rec, diag)
    if not isinstance(case, Case1EqualVelocities):
        raise ClassificationMismatch(f"equal velocities classified as {case.name}")
    chain = solve_case1((r.u1, r.v1), (r.dx, r.dy))
    out, _ = denormalize_solution(chain, (0.0, chain.duration), rec)
    if not _accept(bc, out):
        pos, vel = endpoint_residuals(bc, out)
        raise NoSolutionFound(f"endpoint residuals too large (position {pos:.3g}, velocity {vel:.3g})", diag)
    return Solution(out, out.duration, _kind(out), case, rec, diag)
