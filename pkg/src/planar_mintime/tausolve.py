"""Dilated-time endpoints (tau1, tau2) from the velocity-difference constraints.

Given mu = (mu_u, mu_v) with mu_u > 0 we need

    arcsinh(tau2) - arcsinh(tau1) = mu_u
    sqrt(1 + tau2**2) - sqrt(1 + tau1**2) = mu_v

The first equation fixes tau2 = sinh(arcsinh(tau1) + mu_u). Substituting into
the second leaves a strictly increasing residual in tau1, which is bisected
inside an a-priori bracket and then polished with Newton steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, InvalidMu, OutOfDomain

_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class MuPair:
    mu_u: float
    mu_v: float

    def __post_init__(self):
        if not self.mu_u > 0:
            raise InvalidMu(f"mu_u must be positive, got {self.mu_u}")

    @classmethod
    def from_angle(cls, alpha: float, theta: float, eta: int = 1) -> "MuPair":
        return cls(alpha * math.cos(theta), -eta * alpha * math.sin(theta))


@dataclass(frozen=True)
class TauBracket:
    t_lo: float
    t_hi: float


def _bracket_arrays(mu_u, mu_v):
    lo = -np.exp(mu_u) * np.maximum(0.5, (1.0 - mu_v) / mu_u)
    hi = np.maximum(0.0, (1.0 + mu_v) / mu_u)
    return lo, hi


def tau_bracket(mu: MuPair) -> TauBracket:
    lo, hi = _bracket_arrays(mu.mu_u, mu.mu_v)
    return TauBracket(float(lo), float(hi))


def _exp_asinh(tau):
    """exp(arcsinh(tau)) = tau + sqrt(1 + tau^2), without cancellation for tau < 0."""
    root = np.hypot(1.0, tau)
    with np.errstate(divide="ignore"):
        return np.where(tau >= 0, tau + root, 1.0 / (root - tau))


class _Shift:
    """Per-mu_u constants for evaluating arcsinh(tau) + mu_u quickly."""

    def __init__(self, mu_u):
        self.big = mu_u > 1.0
        m = np.minimum(mu_u, 1.0)
        with np.errstate(over="ignore"):
            self.cosh = np.cosh(mu_u)
            self.sinh = np.sinh(mu_u)
            self.exp = np.exp(mu_u)
        self.cm1_small = 0.5 * (np.expm1(m) + np.expm1(-m))
        self.sinh_small = np.sinh(m)
        self.any_big = bool(np.any(self.big))
        self.all_big = bool(np.all(self.big))

    def shifted(self, tau):
        """(tau2, sqrt(1 + tau2^2)) for tau2 = sinh(arcsinh(tau) + mu_u)."""
        root = np.hypot(1.0, tau)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            add_s = tau * self.cosh + root * self.sinh
            add_c = root * self.cosh + tau * self.sinh
            if not self.any_big:
                return add_s, add_c
            W = _exp_asinh(tau) * self.exp
            exp_s = 0.5 * (W - 1.0 / W)
            exp_c = 0.5 * (W + 1.0 / W)
        return np.where(self.big, exp_s, add_s), np.where(self.big, exp_c, add_c)

    def residual(self, tau, mu_v):
        """Monotone residual; callers silence floating-point warnings."""
        root = np.hypot(1.0, tau)
        if not self.any_big:
            # sqrt(1 + tau^2) (cosh mu_u - 1) + tau sinh mu_u: exact for small shifts
            return root * self.cm1_small + tau * self.sinh_small - mu_v
        W = np.where(tau >= 0, tau + root, 1.0 / (root - tau)) * self.exp
        big = 0.5 * (W + 1.0 / W) - root
        if self.all_big:
            return big - mu_v
        small = root * self.cm1_small + tau * self.sinh_small
        return np.where(self.big, big, small) - mu_v


def shifted_tau(tau, mu_u):
    """(sinh, cosh) of arcsinh(tau) + mu_u, i.e. (tau2, sqrt(1 + tau2^2)).

    Small shifts use the hyperbolic addition formulas; large shifts go through
    exp(arcsinh(tau)), since cosh(mu_u) - 1 and sinh(mu_u) cancel badly there.
    """
    tau, mu_u = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(mu_u, dtype=float))
    return _Shift(mu_u).shifted(tau)


def tau_residual(tau, mu_u, mu_v):
    """G(sinh(arcsinh(tau) + mu_u)) - G(tau) - mu_v with G(t) = sqrt(1 + t^2)."""
    tau, mu_u, mu_v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (tau, mu_u, mu_v)))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _Shift(mu_u).residual(tau, mu_v)


def _residual_slope(tau, tau2):
    return (tau2 - tau) / np.hypot(1.0, tau)


def solve_tau_arrays(mu_u, mu_v, tol: float = 1e-12, newton_steps: int = 2):
    """Vectorized solve; returns ``(tau1, tau2)`` arrays broadcast from the inputs."""
    mu_u, mu_v = np.broadcast_arrays(np.asarray(mu_u, dtype=float), np.asarray(mu_v, dtype=float))
    if np.any(~(mu_u > 0)):
        raise InvalidMu("mu_u must be positive")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _solve_tau_core(mu_u, mu_v, tol, newton_steps)


def _solve_tau_core(mu_u, mu_v, tol, newton_steps):
    sh = _Shift(mu_u)
    lo, hi = _bracket_arrays(mu_u, mu_v)
    r_lo = sh.residual(lo, mu_v)
    r_hi = sh.residual(hi, mu_v)
    if np.any(~(r_lo < 0)) or np.any(~(r_hi > 0)):
        raise BracketFailure("residual does not change sign across the bracket")
    lo, hi = lo.copy(), hi.copy()
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        # floating-point floor: stop once the midpoint collapses onto an endpoint
        active = ((hi - lo) > tol) & (mid > lo) & (mid < hi)
        if not active.any():
            break
        r = sh.residual(mid, mu_v)
        lo = np.where(active & (r < 0), mid, lo)
        hi = np.where(active & (r >= 0), mid, hi)
    tau = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        tau2, _ = sh.shifted(tau)
        cand = tau - sh.residual(tau, mu_v) / _residual_slope(tau, tau2)
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        tau = np.where(ok, cand, tau)
    tau2, _ = sh.shifted(tau)
    return tau, tau2


def solve_tau(mu: MuPair, tol: float = 1e-12):
    """Return ``(tau1, tau2)`` solving the velocity-difference constraints for ``mu``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    t1, t2 = solve_tau_arrays(mu.mu_u, mu.mu_v, tol)
    return float(t1), float(t2)


def _in_lambda_set(alpha, T, c):
    with np.errstate(over="ignore"):
        return alpha * T > np.expm1(alpha * c / 2)


def lambda_max(T: float, theta: float, tol: float = 1e-12) -> float:
    """Largest dilation alpha with alpha * T > exp(alpha * cos(theta) / 2) - 1.

    The admissible set is an interval (0, Lambda) because the right-hand side
    is convex and starts below the line alpha * T when T > 1.
    """
    if not T > 1:
        raise OutOfDomain(f"lambda_max requires T > 1, got {T}")
    if not abs(theta) < math.pi / 2:
        raise OutOfDomain("theta must lie in (-pi/2, pi/2)")
    c = math.cos(theta)
    lo = tol
    hi = 1.0
    while _in_lambda_set(hi, T, c):
        lo = hi
        hi *= 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _in_lambda_set(mid, T, c):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda_max_arrays(T: float, theta, tol: float = 1e-12):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return np.array([lambda_max(T, th, tol) for th in theta])


def time_upper_bound(u1, v1, u2, v2, dx, dy) -> float:
    """Duration of the stop / rest-to-rest / start zigzag, an upper bound on minimum time."""
    m1 = math.hypot(u1, v1)
    m2 = math.hypot(u2, v2)
    ex = 2.0 * dx - m1 * u1 - m2 * u2
    ey = 2.0 * dy - m1 * v1 - m2 * v2
    return m1 + m2 + math.sqrt(2.0) * (ex * ex + ey * ey) ** 0.25
