"""Canonical functions f, g and evaluable trajectory representations.

Every continuous-acceleration minimizer is, up to rotation, reflection and a
space-time dilation, the curve whose acceleration is (1, t)/sqrt(1 + t^2).
Its position components are the closed forms ``f`` and ``g`` below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NonFinite, OutOfDomain

_ASINH_LARGE = 1e8


class Vec2(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def scale(self, c: float) -> "Vec2":
        return Vec2(c * self.x, c * self.y)


def as_vec2(p) -> Vec2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise NonFinite(f"non-finite vector ({x}, {y})")
    return Vec2(x, y)


def rotate(xy, angle):
    """Rotate points counter-clockwise by ``angle``.

    ``xy`` has shape (..., 2); ``angle`` broadcasts against the leading axes.
    """
    xy = np.asarray(xy, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    x, y = xy[..., 0], xy[..., 1]
    return np.stack([c * x - s * y, s * x + c * y], axis=-1)


@dataclass(frozen=True)
class Rotation2:
    angle: float

    def apply(self, p) -> Vec2:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return Vec2(c * p[0] - s * p[1], s * p[0] + c * p[1])

    def inverse(self) -> "Rotation2":
        return Rotation2(-self.angle)

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])


def arcsinh(z):
    """arcsinh via ln(z + sqrt(1 + z^2)), evaluated on |z| and sign-restored.

    The log1p rewrite keeps full relative precision near zero; the odd
    extension avoids the cancellation of the plain log form for z << 0.
    """
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        small = np.log1p(a + a * a / (1.0 + np.hypot(1.0, a)))
        large = np.log(2.0 * a) + 0.25 / (a * a)
    r = np.where(a > _ASINH_LARGE, large, small)
    r = np.copysign(r, z)
    return r if r.ndim else float(r)


def eval_fg(t):
    """Return (f, g, f', g', f'', g'') at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    root = np.hypot(1.0, t)
    ash = np.asarray(arcsinh(t))
    f = t * ash - root
    g = 0.5 * (t * root + ash)
    out = (f, g, ash, root, 1.0 / root, t / root)
    if t.ndim == 0:
        return tuple(float(v) for v in out)
    return out


@dataclass(frozen=True)
class CanonicalParams:
    """Parameters of one canonical arc.

    Physical time t maps to dilated time tau = alpha * t; the arc lives on
    t in [tau1 / alpha, tau2 / alpha]. The reflection acts on g only and
    (u0, v0) are already expressed in the reflected frame.
    """

    alpha: float
    theta: float
    eta: int
    tau1: float
    tau2: float
    u0: float
    v0: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise OutOfDomain(f"alpha must be positive, got {self.alpha}")
        if not abs(self.theta) < math.pi / 2:
            raise OutOfDomain(f"theta must lie in (-pi/2, pi/2), got {self.theta}")
        if self.eta not in (1, -1):
            raise OutOfDomain(f"eta must be +1 or -1, got {self.eta}")
        if not self.tau2 > self.tau1:
            raise OutOfDomain("tau2 must exceed tau1")
        for v in (self.tau1, self.tau2, self.u0, self.v0):
            if not math.isfinite(v):
                raise NonFinite("canonical parameters must be finite")

    @property
    def t_start(self) -> float:
        return self.tau1 / self.alpha

    @property
    def t_end(self) -> float:
        return self.tau2 / self.alpha

    @property
    def duration(self) -> float:
        return (self.tau2 - self.tau1) / self.alpha


def _canonical_arrays(params: CanonicalParams, t):
    a, eta = params.alpha, params.eta
    tau = a * np.asarray(t, dtype=float)
    f, g, fp, gp, fpp, gpp = eval_fg(tau)
    local_p = np.stack([f + params.u0 * tau, eta * g + params.v0 * tau], axis=-1) / a**2
    local_v = np.stack([fp + params.u0, eta * gp + params.v0], axis=-1) / a
    local_a = np.stack([np.broadcast_to(fpp, tau.shape), eta * gpp], axis=-1)
    th = params.theta
    return rotate(local_p, th), rotate(local_v, th), rotate(local_a, th)


def _check_domain(params: CanonicalParams, t):
    lo, hi = params.t_start, params.t_end
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < lo - slack) or np.any(t > hi + slack):
        raise OutOfDomain(f"time outside canonical arc [{lo}, {hi}]")
    return np.clip(t, lo, hi)


def eval_canonical_state(params: CanonicalParams, t: float):
    """Position, velocity and acceleration of the canonical arc at time ``t``."""
    t = _check_domain(params, t)
    p, v, a = _canonical_arrays(params, t)
    return Vec2(*map(float, p)), Vec2(*map(float, v)), Vec2(*map(float, a))


# --- trajectories --------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    accel: Vec2
    duration: float


@dataclass(frozen=True)
class ZeroTrajectory:
    position: Vec2 = Vec2(0.0, 0.0)
    velocity: Vec2 = Vec2(0.0, 0.0)

    @property
    def duration(self) -> float:
        return 0.0

    def states(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        n = times.shape[0]
        return (
            np.tile(np.asarray(self.position), (n, 1)),
            np.tile(np.asarray(self.velocity), (n, 1)),
            np.zeros((n, 2)),
        )

    def state(self, s: float):
        return _single(self.states([s]))


@dataclass(frozen=True)
class ConstantChain:
    """Piecewise-constant acceleration, one segment (constant) or two (bang-bang)."""

    segments: tuple
    velocity: Vec2
    position: Vec2 = Vec2(0.0, 0.0)

    @property
    def duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    def _knots(self):
        p = np.asarray(self.position, dtype=float)
        v = np.asarray(self.velocity, dtype=float)
        starts = []
        t0 = 0.0
        for seg in self.segments:
            starts.append((t0, p, v))
            a = np.asarray(seg.accel, dtype=float)
            d = seg.duration
            p = p + v * d + 0.5 * a * d * d
            v = v + a * d
            t0 += d
        return starts, (t0, p, v)

    def states(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        starts, _ = self._knots()
        bounds = np.array([s[0] for s in starts])
        idx = np.clip(np.searchsorted(bounds, times, side="right") - 1, 0, len(starts) - 1)
        p0 = np.array([s[1] for s in starts])[idx]
        v0 = np.array([s[2] for s in starts])[idx]
        acc = np.array([np.asarray(seg.accel, dtype=float) for seg in self.segments])[idx]
        dt = (times - bounds[idx])[:, None]
        return p0 + v0 * dt + 0.5 * acc * dt * dt, v0 + acc * dt, acc

    def end_state(self):
        _, (_, p, v) = self._knots()
        return Vec2(*map(float, p)), Vec2(*map(float, v))

    def state(self, s: float):
        return _single(self.states([s]))


@dataclass(frozen=True)
class CanonicalArc:
    """A canonical arc, optionally viewed through a normalization frame.

    Trajectory time s runs over [0, duration]; positions are anchored so the
    arc starts at ``position``.
    """

    params: CanonicalParams
    frame: object = None
    position: Vec2 = field(default=Vec2(0.0, 0.0))

    @property
    def time_scale(self) -> float:
        return 1.0 if self.frame is None else self.frame.time_scale

    @property
    def duration(self) -> float:
        return self.params.duration * self.time_scale

    def states(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        t = _check_domain(self.params, self.params.t_start + times / self.time_scale)
        p, v, a = _canonical_arrays(self.params, t)
        p0, _, _ = _canonical_arrays(self.params, np.array([self.params.t_start]))
        p = p - p0
        if self.frame is not None:
            p, v, a = self.frame.to_original(p, v, a)
        return p + np.asarray(self.position, dtype=float), v, a

    def state(self, s: float):
        return _single(self.states([s]))


def _single(arrays):
    return tuple(Vec2(float(a[0, 0]), float(a[0, 1])) for a in arrays)


def chain_from_accels(accels: Sequence, durations: Sequence, velocity, position=(0.0, 0.0)) -> ConstantChain:
    segs = tuple(Segment(Vec2(float(a[0]), float(a[1])), float(d)) for a, d in zip(accels, durations))
    return ConstantChain(segs, Vec2(float(velocity[0]), float(velocity[1])), Vec2(float(position[0]), float(position[1])))
