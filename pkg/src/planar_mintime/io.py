"""JSON records for problems and solutions.

Floats are written with Python's shortest round-trip repr, so a solution
file reloads to bit-identical trajectory parameters.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .canonical import CanonicalArc, CanonicalParams, ConstantChain, Segment, Vec2, ZeroTrajectory
from .normalize import BoundaryConditions, NormalizationRecord


class ProblemFile(BaseModel):
    model_config = ConfigDict(allow_inf_nan=False, extra="ignore")

    u1: float
    v1: float
    u2: float
    v2: float
    dx: float
    dy: float
    accel_bound: float = Field(default=1.0, gt=0)
    id: Optional[str] = None

    def to_boundary_conditions(self) -> BoundaryConditions:
        return BoundaryConditions(self.u1, self.v1, self.u2, self.v2, self.dx, self.dy, self.accel_bound)


class FrameRecord(BaseModel):
    beta: float
    phi: float
    sigma: Literal[1, -1]
    accel_scale: float

    def to_record(self) -> NormalizationRecord:
        return NormalizationRecord(self.beta, self.phi, self.sigma, self.accel_scale)


class SegmentRecord(BaseModel):
    ax: float
    ay: float
    duration: float


class CanonicalRecord(BaseModel):
    alpha: float
    theta: float
    eta: Literal[1, -1]
    tau1: float
    tau2: float
    u0: float
    v0: float


class RootRecord(BaseModel):
    theta: float
    alpha: float
    eta: int
    T: float
    residual_norm: float


class DiagnosticsSummary(BaseModel):
    roots_found: list[RootRecord] = []
    grid_cells_scanned: int = 0
    newton_iterations_total: int = 0
    refined: bool = False
    bang_bang_candidate_T: Optional[float] = None


class SolutionFile(BaseModel):
    id: Optional[str] = None
    kind: Literal["zero", "constant", "bang-bang", "canonical"]
    case: str
    total_time: float
    frame: FrameRecord
    initial_velocity: tuple[float, float]
    segments: Optional[list[SegmentRecord]] = None
    canonical: Optional[CanonicalRecord] = None
    diagnostics: DiagnosticsSummary = DiagnosticsSummary()

    @classmethod
    def from_solution(cls, sol, problem_id: str | None = None) -> "SolutionFile":
        traj = sol.trajectory
        rec = sol.record
        frame = FrameRecord(beta=rec.beta, phi=rec.phi, sigma=rec.sigma, accel_scale=rec.accel_scale)
        v0, segments, canonical = None, None, None
        if isinstance(traj, CanonicalArc):
            p = traj.params
            canonical = CanonicalRecord(
                alpha=p.alpha, theta=p.theta, eta=p.eta, tau1=p.tau1, tau2=p.tau2, u0=p.u0, v0=p.v0
            )
            v0 = traj.state(0.0)[1]
        elif isinstance(traj, ConstantChain):
            segments = [SegmentRecord(ax=s.accel.x, ay=s.accel.y, duration=s.duration) for s in traj.segments]
            v0 = traj.velocity
        else:
            v0 = traj.velocity
        d = sol.diagnostics
        diag = DiagnosticsSummary(
            roots_found=[RootRecord(**r.__dict__) for r in d.roots_found],
            grid_cells_scanned=d.grid_cells_scanned,
            newton_iterations_total=d.newton_iterations_total,
            refined=d.refined,
            bang_bang_candidate_T=d.bang_bang_candidate_T,
        )
        return cls(
            id=problem_id,
            kind=sol.kind,
            case=sol.case.name,
            total_time=sol.total_time,
            frame=frame,
            initial_velocity=(float(v0[0]), float(v0[1])),
            segments=segments,
            canonical=canonical,
            diagnostics=diag,
        )

    def trajectory(self):
        """Rebuild the trajectory, starting at the origin."""
        if self.kind == "canonical":
            if self.canonical is None:
                raise ValueError("canonical solution without canonical parameters")
            c = self.canonical
            params = CanonicalParams(c.alpha, c.theta, c.eta, c.tau1, c.tau2, c.u0, c.v0)
            return CanonicalArc(params, frame=self.frame.to_record())
        if self.kind == "zero":
            return ZeroTrajectory(Vec2(0.0, 0.0), Vec2(*self.initial_velocity))
        if not self.segments:
            raise ValueError(f"{self.kind} solution without segments")
        segs = tuple(Segment(Vec2(s.ax, s.ay), s.duration) for s in self.segments)
        return ConstantChain(segs, Vec2(*self.initial_velocity))


def load_problem(path) -> ProblemFile:
    return ProblemFile.model_validate_json(Path(path).read_text())


def load_solution(path) -> SolutionFile:
    return SolutionFile.model_validate_json(Path(path).read_text())


def dump_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2) + "\n"
