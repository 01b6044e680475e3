"""Detect and construct bang-bang and constant-acceleration minimizers.

Works in a frame where both endpoint velocities share the vertical component
``v`` (the normalized frame, or any frame when the velocities are equal).
Acceleration there is purely horizontal whenever a bang-bang or constant
solution exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonical import ConstantChain, Segment, Vec2, chain_from_accels
from .errors import ClassificationMismatch, NonFinite
from .normalize import BoundaryConditions, NormalizedProblem

DEFAULT_TOL = 1e-9
NEAR_FACTOR = 1e3


@dataclass(frozen=True)
class ZeroTime:
    name = "zero-time"


@dataclass(frozen=True)
class Case1EqualVelocities:
    name = "equal-velocities"


@dataclass(frozen=True)
class Case2OneDimensional:
    name = "one-dimensional"


@dataclass(frozen=True)
class Case3BangBang:
    order: int
    T1: float
    T2: float
    name = "bang-bang"


@dataclass(frozen=True)
class Continuous:
    # set when the data lies within NEAR_FACTOR * tol of the bang-bang manifold
    near_case3: Case3BangBang | None = None
    name = "continuous"


def _check_finite(*vals):
    if not all(math.isfinite(float(v)) for v in vals):
        raise NonFinite("classification inputs must be finite")


def _case3_candidate(u1, u2, v, dx, dy, tol, scale):
    """Best-matching horizontal bang-bang for the data, with its dx mismatch."""
    S = dy / v
    D = u2 - u1
    if not S > 0 or S < abs(D) - tol * scale:
        return None, math.inf
    base = S * (u1 + u2) / 2.0
    spread = (S * S - D * D) / 4.0
    err_plus = abs(dx - (base + spread))
    err_minus = abs(dx - (base - spread))
    order = 1 if err_plus <= err_minus else -1
    lead = max(0.0, (S + order * D) / 2.0)
    trail = max(0.0, (S - order * D) / 2.0)
    return Case3BangBang(order, lead, trail), min(err_plus, err_minus)


def classify_frame(u1, u2, v, dx, dy, tol: float = DEFAULT_TOL):
    """Classify a problem whose endpoint velocities are (u1, v) and (u2, v)."""
    _check_finite(u1, u2, v, dx, dy, tol)
    if not tol > 0:
        raise ValueError("tol must be positive")
    vel_scale = max(abs(u1), abs(u2), abs(v))
    if abs(u2 - u1) <= tol * vel_scale:
        if dx == 0.0 and dy == 0.0:
            return ZeroTime()
        return Case1EqualVelocities()
    scale = max(abs(u2 - u1), abs(u1), abs(u2), abs(v), abs(dx), abs(dy))
    if abs(v) <= tol * scale and abs(dy) <= tol * scale:
        return Case2OneDimensional()
    if abs(v) <= tol * scale:
        return Continuous()
    cand, err = _case3_candidate(u1, u2, v, dx, dy, tol, scale)
    if cand is None:
        return Continuous()
    if err <= tol * scale:
        return cand
    if err <= NEAR_FACTOR * tol * scale:
        return Continuous(near_case3=cand)
    return Continuous()


def classify(problem, tol: float = DEFAULT_TOL):
    """Classify a NormalizedProblem, or BoundaryConditions with equal velocities."""
    if isinstance(problem, NormalizedProblem):
        return classify_frame(problem.u, problem.u + 1.0, problem.v, problem.dx, problem.dy, tol)
    if isinstance(problem, BoundaryConditions):
        if problem.v1 != problem.v2 and abs(problem.v2 - problem.v1) > tol * max(abs(problem.v1), abs(problem.v2)):
            raise ValueError("raw-frame classification needs equal vertical velocities; normalize first")
        return classify_frame(problem.u1, problem.u2, problem.v1, problem.dx, problem.dy, tol)
    raise TypeError(f"cannot classify {type(problem).__name__}")


# --- constructions -------------------------------------------------------


def _case1_time(v: np.ndarray, d: np.ndarray) -> float:
    """Smallest T > 0 with |d - v T| = T^2 / 4."""
    vv = float(v @ v)
    vd = float(v @ d)
    dd = float(d @ d)
    roots = np.roots([1.0 / 16.0, 0.0, -vv, 2.0 * vd, -dd])
    real = roots.real[(np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))) & (roots.real > 0)]
    if real.size == 0:
        raise ClassificationMismatch("no positive switching time for equal-velocity problem")
    T = float(real.min())
    # Newton polish on T^2/4 - |d - vT| (the form with the milder derivative)
    for _ in range(4):
        r = d - v * T
        rn = math.hypot(*r)
        F = T * T / 4.0 - rn
        dF = T / 2.0 + (float(v @ r) / rn if rn > 0 else 0.0)
        if dF == 0.0:
            break
        step = F / dF
        if not math.isfinite(step) or abs(step) > 0.5 * T:
            break
        T -= step
    return T


def solve_case1(v, delta) -> ConstantChain:
    """Bang-bang reversal at the halfway point for equal endpoint velocities ``v``."""
    v = np.asarray(v, dtype=float)
    d = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(v)) or not np.all(np.isfinite(d)):
        raise NonFinite("case 1 inputs must be finite")
    if not np.any(d != 0.0):
        raise ClassificationMismatch("zero displacement with equal velocities is the zero-time case")
    T = _case1_time(v, d)
    r = d - v * T
    w = r / math.hypot(*r)
    return chain_from_accels([w, -w], [T / 2.0, T / 2.0], v)


def _one_d_plus_minus(u1, u2, dx):
    """(T1, T2) pairs for accel +1 then -1 reaching (u2, dx) from u1."""
    disc = 0.5 * (u1 * u1 + u2 * u2) + dx
    if disc < 0:
        return []
    r = math.sqrt(disc)
    out = []
    for T2 in (-u2 + r, -u2 - r):
        out.append((T2 + (u2 - u1), T2))
    return out


def solve_case2_1d(u1: float, u2: float, dx: float, tol: float = DEFAULT_TOL) -> ConstantChain:
    """Minimum-time 1-D double integrator with |a| = 1, embedded along the x axis."""
    _check_finite(u1, u2, dx)
    scale = max(1.0, abs(u1), abs(u2), math.sqrt(abs(dx)))
    best = None
    for sign in (1, -1):
        for T1, T2 in _one_d_plus_minus(sign * u1, sign * u2, sign * dx):
            if T1 < -tol * scale or T2 < -tol * scale:
                continue
            T1, T2 = max(T1, 0.0), max(T2, 0.0)
            if best is None or T1 + T2 < best[0] + best[1]:
                best = (T1, T2, sign)
    if best is None:
        raise ClassificationMismatch("1-D problem has no bang-bang solution")
    T1, T2, sign = best
    return _horizontal_chain(sign, T1, T2, Vec2(u1, 0.0), tol * scale)


def _horizontal_chain(order: int, T1: float, T2: float, v0: Vec2, zero_tol: float) -> ConstantChain:
    if T1 <= zero_tol and T2 <= zero_tol:
        raise ClassificationMismatch("bang-bang durations are both zero")
    if T1 > zero_tol and T2 > zero_tol:
        segs = [Segment(Vec2(float(order), 0.0), T1), Segment(Vec2(float(-order), 0.0), T2)]
    else:
        # constant subcase: the surviving direction carries the whole velocity change
        lead = T1 > zero_tol
        segs = [Segment(Vec2(float(order if lead else -order), 0.0), abs(T1 - T2))]
    return ConstantChain(tuple(segs), v0)


def solve_case3(u1, u2, v, dx, dy, tol: float = DEFAULT_TOL) -> ConstantChain:
    """Horizontal bang-bang (or constant) solution when classification reports case 3."""
    _check_finite(u1, u2, v, dx, dy)
    if v == 0:
        raise ClassificationMismatch("case 3 needs nonzero vertical velocity")
    scale = max(abs(u2 - u1), abs(u1), abs(u2), abs(v), abs(dx), abs(dy))
    cand, err = _case3_candidate(u1, u2, v, dx, dy, tol, scale)
    if cand is None or err > NEAR_FACTOR * tol * scale:
        raise ClassificationMismatch("data does not admit a horizontal bang-bang solution")
    S = dy / v
    D = u2 - u1
    lead = (S + cand.order * D) / 2.0
    trail = (S - cand.order * D) / 2.0
    if lead < -tol * scale or trail < -tol * scale:
        raise ClassificationMismatch("negative bang-bang duration")
    return _horizontal_chain(cand.order, max(lead, 0.0), max(trail, 0.0), Vec2(u1, v), tol * scale)
