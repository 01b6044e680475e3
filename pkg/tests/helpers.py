"""Forward generators for test problems, one per solution family."""
from __future__ import annotations

import math

import numpy as np

from planar_mintime import BoundaryConditions


def unit(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


def perp(e: np.ndarray) -> np.ndarray:
    return np.array([-e[1], e[0]])


def simulate_chain(v1, accels, durations):
    """End velocity and displacement of piecewise-constant acceleration."""
    v = np.asarray(v1, dtype=float).copy()
    p = np.zeros(2)
    for a, d in zip(accels, durations):
        a = np.asarray(a, dtype=float)
        p = p + v * d + 0.5 * a * d * d
        v = v + a * d
    return v, p


def equal_velocity_problem(rng):
    """Case 1 data plus the generating T; w . v >= 0 makes T the smallest root."""
    k = 10 ** rng.uniform(-0.5, 0.5)
    v = rng.normal(size=2) * rng.uniform(0.1, 2.0)
    w = unit(rng.uniform(0, 2 * math.pi))
    if w @ v < 0:
        w = -w
    T = rng.uniform(0.2, 3.0)
    _, d = simulate_chain(v, [k * w, -k * w], [T / 2, T / 2])
    return BoundaryConditions(v[0], v[1], v[0], v[1], d[0], d[1], k), T


def one_dimensional_problem(rng):
    """Velocities and displacement all along one random direction."""
    e = unit(rng.uniform(0, 2 * math.pi))
    k = 10 ** rng.uniform(-0.5, 0.5)
    a, b = rng.uniform(-2, 2, 2)
    while abs(b - a) < 0.05:
        b = rng.uniform(-2, 2)
    c = rng.uniform(-3, 3)
    v1, v2, d = a * e, b * e, c * e
    return BoundaryConditions(v1[0], v1[1], v2[0], v2[1], d[0], d[1], k)


def _fastest_1d(a, b, d):
    """Fastest two-phase unit-bound profile from speed a to b over distance d.

    The switch speed w solves w^2 = (a^2 + b^2) / 2 +- d for the two orders.
    """
    m = 0.5 * (a * a + b * b)
    best = math.inf
    if d + m >= 0 and math.sqrt(d + m) >= max(a, b):
        best = min(best, 2 * math.sqrt(d + m) - a - b)
    if m - d >= 0 and -math.sqrt(m - d) <= min(a, b):
        best = min(best, a + b + 2 * math.sqrt(m - d))
    return best


def one_dimensional_bang_bang(rng):
    """Collinear two-segment profile as (bc, durations); a single segment when T2 = 0.

    Instances are redrawn until the generated profile is the faster of the
    two switching orders, so it is the optimum.
    """
    while True:
        e = unit(rng.uniform(0, 2 * math.pi))
        k = 10 ** rng.uniform(-0.5, 0.5)
        T1, T2 = rng.uniform(0.0, 2.0, 2)
        if rng.random() < 0.1:
            T2 = 0.0
        while abs(T1 - T2) < 0.05:
            T1 = rng.uniform(0.0, 2.0)
        order = 1 if rng.random() < 0.5 else -1
        s1 = rng.uniform(-2, 2)
        durations = [T1, T2] if T2 > 0 else [T1]
        s2 = s1 + order * k * (T1 - T2)
        dist = s1 * (T1 + T2) + order * k * (T1 * T1 / 2 + T1 * T2 - T2 * T2 / 2)
        if T1 + T2 <= _fastest_1d(s1 / k, s2 / k, dist / k) + 1e-9:
            break
    v1 = s1 * e
    accels = [order * k * e, -order * k * e][: len(durations)]
    v2, d = simulate_chain(v1, accels, durations)
    return BoundaryConditions(v1[0], v1[1], v2[0], v2[1], d[0], d[1], k), durations


def bang_bang_problem(rng, allow_constant: bool = True):
    """Two-segment bang-bang with a transverse velocity, as (bc, order, T1, T2).

    Durations are in original time units; order is the sign of the first
    acceleration along the switching axis.
    """
    e = unit(rng.uniform(0, 2 * math.pi))
    n = perp(e)
    k = 10 ** rng.uniform(-0.5, 0.5)
    T1, T2 = rng.uniform(0.0, 2.0, 2)
    if allow_constant and rng.random() < 0.1:
        T2 = 0.0
    while abs(T1 - T2) < 0.05:
        T1 = rng.uniform(0.0, 2.0)
    order = 1 if rng.random() < 0.5 else -1
    vt = rng.uniform(0.2, 2.0) * (1 if rng.random() < 0.5 else -1)
    v1 = rng.uniform(-2, 2) * e + vt * n
    accels = [order * k * e, -order * k * e][: 2 if T2 > 0 else 1]
    durations = [T1, T2][: len(accels)]
    v2, d = simulate_chain(v1, accels, durations)
    bc = BoundaryConditions(v1[0], v1[1], v2[0], v2[1], d[0], d[1], k)
    return bc, order, T1, T2


def continuous_problem(rng):
    u1, v1, u2, v2 = rng.uniform(-2, 2, 4)
    dx, dy = rng.uniform(-3, 3, 2)
    return BoundaryConditions(u1, v1, u2, v2, dx, dy)


def rotate_bc(bc: BoundaryConditions, angle: float) -> BoundaryConditions:
    c, s = math.cos(angle), math.sin(angle)
    rot = lambda x, y: (c * x - s * y, s * x + c * y)
    u1, v1 = rot(bc.u1, bc.v1)
    u2, v2 = rot(bc.u2, bc.v2)
    dx, dy = rot(bc.dx, bc.dy)
    return BoundaryConditions(u1, v1, u2, v2, dx, dy, bc.accel_bound)


def dilate_bc(bc: BoundaryConditions, c: float) -> BoundaryConditions:
    return BoundaryConditions(
        c * bc.u1, c * bc.v1, c * bc.u2, c * bc.v2, c * c * bc.dx, c * c * bc.dy, bc.accel_bound
    )


def sinh1_instance() -> BoundaryConditions:
    s, ch = math.sinh(1.0), math.cosh(1.0)
    return BoundaryConditions(0.0, 0.0, 1.0, 0.0, 2 * s / 4, (1 - s * ch) / 4)
