"""Decomposition of an evolution's accumulated phase into dynamic and geometric
parts, and independent loop geometry on the Bloch sphere.

Definitions (for a trajectory that is cyclic up to phase):

* total phase     arg<psi(0)|psi(T)>, reported in (-pi, pi];
* dynamic phase   -integral of <psi|H|psi> dt, composite trapezoid on the
                  uniform per-segment sample grid, an unwrapped real;
* geometric phase total - dynamic.  The raw difference is kept (it can leave
                  (-pi, pi] when the dynamic phase is large) together with
                  its wrapped value, which is the canonical cyclic phase.

The loop-geometry route computes the signed solid angle of the state's
Bloch-sphere loop as a fan of oriented spherical triangles about a fixed
reference point; for a cyclic evolution the wrapped geometric phase equals
-ORIENTATION_SIGN * solid_angle / 2 modulo 2 pi.  ORIENTATION_SIGN is pinned
once by the constant-field precession test: with the rotation convention of
:mod:`squidphase.core` (r(t) = R(n, -|B|t) r(0)) it is +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractViolation, Trajectory

_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2 fallback

#: Relates loop orientation to phase sign: geometric = -ORIENTATION_SIGN * Omega / 2.
#: Fixed by test_orientation_sign_pinned_by_precession; do not change casually.
ORIENTATION_SIGN = 1.0

CYCLICITY_TOL = 1e-9
MIN_STEP_OVERLAP = 0.99
LOOP_CLOSURE_TOL = 1e-6
LOOP_NORM_TOL = 1e-8
ANTIPODAL_TOL = 1e-12


class NonCyclicTrajectory(ValueError):
    """Raised when |<psi(0)|psi(T)>| falls short of cyclicity; carries the defect."""

    def __init__(self, defect: float):
        self.defect = float(defect)
        super().__init__(f"non-cyclic trajectory (defect {self.defect:.3e})")


@dataclass(frozen=True)
class PhaseReport:
    """Total / dynamic / geometric split for one cyclic trajectory."""

    total_phase: float
    dynamic_phase: float
    geometric_phase: float          # total - dynamic, unwrapped real
    geometric_phase_wrapped: float  # same value wrapped to (-pi, pi]
    cyclicity_defect: float


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = np.remainder(x + np.pi, 2.0 * np.pi) - np.pi
    if w == -np.pi:
        w = np.pi
    return float(w)


def _check_sampling(traj: Trajectory):
    states = traj.states
    if states.shape[0] < 2:
        raise ContractViolation("need at least 2 samples")
    overlaps = np.abs(np.einsum("ni,ni->n", states[:-1].conj(), states[1:]))
    if overlaps.min() < MIN_STEP_OVERLAP:
        raise ContractViolation(
            f"per-step overlap {overlaps.min():.4f} below {MIN_STEP_OVERLAP}; sample more densely"
        )


def dynamic_phase(traj: Trajectory) -> float:
    """-integral <psi|H|psi> dt, trapezoid rule segment by segment."""
    _check_sampling(traj)
    acc = 0.0
    for ts, states, h in zip(traj.segment_times, traj.segment_states,
                             traj.segment_hamiltonians):
        expect = np.einsum("ni,ij,nj->n", states.conj(), h, states).real
        acc += _trapezoid(expect, ts)
    return float(-acc)


def cyclicity_defect(traj: Trajectory) -> float:
    return float(1.0 - abs(np.vdot(traj.initial_state, traj.final_state)))


def total_phase(traj: Trajectory) -> float:
    """arg<psi(0)|psi(T)> in (-pi, pi]; errors if the trajectory is not cyclic."""
    defect = cyclicity_defect(traj)
    if defect > CYCLICITY_TOL:
        raise NonCyclicTrajectory(defect)
    return float(np.angle(np.vdot(traj.initial_state, traj.final_state)))


def geometric_phase(traj: Trajectory) -> PhaseReport:
    """Full phase decomposition of a cyclic trajectory."""
    total = total_phase(traj)
    dyn = dynamic_phase(traj)
    geo = total - dyn
    return PhaseReport(
        total_phase=total,
        dynamic_phase=dyn,
        geometric_phase=geo,
        geometric_phase_wrapped=wrap_angle(geo),
        cyclicity_defect=cyclicity_defect(traj),
    )


def bloch_loop(traj: Trajectory) -> np.ndarray:
    """(n, 3) Bloch vectors of a 2-dim trajectory's flat samples."""
    states = traj.states
    if states.shape[1] != 2:
        raise ContractViolation("Bloch loops are defined for 2-dim trajectories only")
    a, b = states[:, 0], states[:, 1]
    ab = a.conj() * b
    return np.stack([2.0 * ab.real, 2.0 * ab.imag,
                     np.abs(a) ** 2 - np.abs(b) ** 2], axis=1)


def _reference_point(points: np.ndarray) -> np.ndarray:
    candidates = []
    centroid = points.mean(axis=0)
    if np.linalg.norm(centroid) > 1e-6:
        candidates.append(centroid / np.linalg.norm(centroid))
    candidates += [np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]),
                   np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
                   np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)]
    for ref in candidates:
        if np.min(1.0 + points @ ref) > 1e-9:
            return ref
    raise ContractViolation("no safe reference point for this loop")


def solid_angle(points) -> float:
    """Signed solid angle enclosed by a closed loop of unit Bloch vectors.

    The loop is treated as a geodesic polygon and decomposed into oriented
    spherical triangles (reference, v_i, v_i+1); each triangle contributes
    2 atan2(v0.(v1 x v2), 1 + v0.v1 + v1.v2 + v2.v0).  The result lies in
    (-4 pi, 4 pi).  Consecutive antipodal points make the connecting
    geodesic ambiguous and raise instead of guessing.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 4:
        raise ContractViolation("a loop needs at least 4 points of 3 components")
    norms = np.linalg.norm(pts, axis=1)
    if np.max(np.abs(norms - 1.0)) > LOOP_NORM_TOL:
        raise ContractViolation("loop points must lie on the unit sphere")
    if np.linalg.norm(pts[0] - pts[-1]) > LOOP_CLOSURE_TOL:
        raise ContractViolation("loop is not closed")
    # Close exactly; drop a duplicated endpoint to avoid a zero-length edge.
    if np.linalg.norm(pts[0] - pts[-1]) > 0:
        pts = np.vstack([pts, pts[0]])
    else:
        pts = np.vstack([pts[:-1], pts[0]])

    dots = np.einsum("ij,ij->i", pts[:-1], pts[1:])
    if np.min(1.0 + dots) < ANTIPODAL_TOL:
        raise ContractViolation("ambiguous geodesic: consecutive antipodal points")

    ref = _reference_point(pts)
    v1, v2 = pts[:-1], pts[1:]
    num = np.einsum("i,ni->n", ref, np.cross(v1, v2))
    den = 1.0 + v1 @ ref + v2 @ ref + dots
    return float(np.sum(2.0 * np.arctan2(num, den)))


def geodesic_deviation(points) -> float:
    """Greatest distance of the points from the best-fit plane through the origin.

    Zero (to rounding) exactly when the points sit on one great circle.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise ContractViolation("need at least 3 points of 3 components")
    moment = pts.T @ pts
    w, v = np.linalg.eigh(moment)
    normal = v[:, 0]
    return float(np.max(np.abs(pts @ normal)))


def phase_consistency(traj: Trajectory) -> dict:
    """Compare the state-phase and loop-area routes to the geometric phase.

    Returns geo_from_phase (wrapped), geo_from_area = -s * Omega / 2 with the
    module's orientation constant s, and the wrapped absolute mismatch.
    """
    report = geometric_phase(traj)
    loop = bloch_loop(traj)
    omega = solid_angle(loop)
    geo_area = -ORIENTATION_SIGN * omega / 2.0
    mismatch = abs(wrap_angle(report.geometric_phase_wrapped - geo_area))
    return {
        "geo_from_phase": report.geometric_phase_wrapped,
        "geo_from_area": geo_area,
        "solid_angle": omega,
        "mismatch": mismatch,
    }
