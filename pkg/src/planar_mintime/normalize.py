"""Map arbitrary boundary data to the unit-velocity-change frame and back.

Forward: velocities are divided by ``accel_bound * beta`` and displacements by
``accel_bound * beta**2`` after a horizontal flip (``sigma``) and a rotation by
``-phi``; time is divided by ``beta``. The inverse undoes the same steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .canonical import CanonicalArc, ConstantChain, Segment, Vec2, ZeroTrajectory, rotate
from .errors import DegenerateEqualVelocities, NonFinite, OutOfDomain


@dataclass(frozen=True)
class BoundaryConditions:
    u1: float
    v1: float
    u2: float
    v2: float
    dx: float
    dy: float
    accel_bound: float = 1.0

    def __post_init__(self):
        vals = (self.u1, self.v1, self.u2, self.v2, self.dx, self.dy, self.accel_bound)
        if not all(math.isfinite(float(v)) for v in vals):
            raise NonFinite("boundary conditions must be finite")
        if not self.accel_bound > 0:
            raise OutOfDomain(f"accel_bound must be positive, got {self.accel_bound}")

    @property
    def v_start(self) -> Vec2:
        return Vec2(self.u1, self.v1)

    @property
    def v_end(self) -> Vec2:
        return Vec2(self.u2, self.v2)

    @property
    def delta(self) -> Vec2:
        return Vec2(self.dx, self.dy)

    def rescaled(self) -> "BoundaryConditions":
        """The equivalent problem with unit acceleration bound (time unchanged)."""
        a = self.accel_bound
        return BoundaryConditions(self.u1 / a, self.v1 / a, self.u2 / a, self.v2 / a, self.dx / a, self.dy / a, 1.0)


@dataclass(frozen=True)
class NormalizedProblem:
    """Unit-bound problem whose final velocity is (u + 1, v)."""

    u: float
    v: float
    dx: float
    dy: float

    def as_boundary_conditions(self) -> BoundaryConditions:
        return BoundaryConditions(self.u, self.v, self.u + 1.0, self.v, self.dx, self.dy)


@dataclass(frozen=True)
class NormalizationRecord:
    beta: float
    phi: float
    sigma: int
    accel_scale: float = 1.0
    eta_norm: int = 1

    @classmethod
    def identity(cls) -> "NormalizationRecord":
        return cls(1.0, 0.0, 1, 1.0)

    @property
    def time_scale(self) -> float:
        return self.beta

    def _flip(self, xy):
        xy = np.array(xy, dtype=float)
        xy[..., 0] *= self.sigma
        return xy

    def forward_velocity(self, vel):
        return rotate(self._flip(vel), -self.phi) / (self.accel_scale * self.beta)

    def forward_displacement(self, d):
        return rotate(self._flip(d), -self.phi) / (self.accel_scale * self.beta**2)

    def to_original(self, p, v, a):
        """Map normalized-frame position/velocity/acceleration arrays back."""
        k, b = self.accel_scale, self.beta
        p = self._flip(rotate(p, self.phi)) * (k * b * b)
        v = self._flip(rotate(v, self.phi)) * (k * b)
        a = self._flip(rotate(a, self.phi)) * k
        return p, v, a


def normalize(bc: BoundaryConditions, tol: float = 0.0):
    """Return ``(NormalizedProblem, NormalizationRecord)`` for ``bc``.

    Raises DegenerateEqualVelocities when the endpoint velocities coincide
    (to within ``tol`` relative to the velocity magnitudes).
    """
    k = bc.accel_bound
    r = bc.rescaled()
    du, dv = r.u2 - r.u1, r.v2 - r.v1
    beta = math.hypot(du, dv)
    vscale = max(abs(r.u1), abs(r.v1), abs(r.u2), abs(r.v2))
    if beta == 0.0 or beta <= tol * vscale:
        raise DegenerateEqualVelocities("equal endpoint velocities cannot be normalized")
    sigma = -1 if du < 0 else 1
    phi = math.atan2(dv, sigma * du)
    rec = NormalizationRecord(beta=beta, phi=phi, sigma=sigma, accel_scale=k)
    u, v = rec.forward_velocity([bc.u1, bc.v1])
    dx, dy = rec.forward_displacement([bc.dx, bc.dy])
    return NormalizedProblem(float(u), float(v), float(dx), float(dy)), rec


def denormalize_solution(traj, time_span, record: NormalizationRecord):
    """Express a normalized-frame trajectory and its time span in the original frame."""
    t1, t2 = time_span
    span = (t1 * record.beta, t2 * record.beta)
    if isinstance(traj, ZeroTrajectory):
        p, v, _ = record.to_original(np.asarray(traj.position), np.asarray(traj.velocity), np.zeros(2))
        return ZeroTrajectory(Vec2(*map(float, p)), Vec2(*map(float, v))), span
    if isinstance(traj, ConstantChain):
        z = np.zeros(2)
        segs = []
        for seg in traj.segments:
            _, _, a = record.to_original(z, z, np.asarray(seg.accel))
            segs.append(Segment(Vec2(*map(float, a)), seg.duration * record.beta))
        p, v, _ = record.to_original(np.asarray(traj.position), np.asarray(traj.velocity), z)
        return ConstantChain(tuple(segs), Vec2(*map(float, v)), Vec2(*map(float, p))), span
    if isinstance(traj, CanonicalArc):
        if traj.frame is not None:
            raise ValueError("canonical arc already carries a frame")
        p, _, _ = record.to_original(np.asarray(traj.position), np.zeros(2), np.zeros(2))
        return replace(traj, frame=record, position=Vec2(*map(float, p))), span
    raise TypeError(f"unsupported trajectory type {type(traj).__name__}")
