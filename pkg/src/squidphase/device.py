"""Hamiltonians of a flux-tunable split-junction charge qubit.

The device is a superconducting island with a two-junction loop: the offset
charge n_x and the loop flux (entered here as the dimensionless fraction
f = Phi/Phi_0) are the external controls.  The effective Josephson coupling
is E_J(f) = 2 E_J0 cos(pi f), so f = 1/2 switches the coupling off and is
used as the idle point throughout.

Two model levels are provided:

* the two-level reduction H = -B.sigma/2 with fictitious field
  B = (E_J(f), 0, E_ch (1 - 2 n_x)), valid in the charging regime
  E_J0 << E_ch near n_x = 1/2;
* the truncated charge-basis model H = E_ch (n - n_x)^2 - E_J(f) cos(chi),
  used as the validation oracle for the reduction.

Capacitively coupled pairs add Delta (N1 - n_x1)(N2 - n_x2) with N the
island Cooper-pair number; in the two-level window N = (sigma_z + 1)/2,
i.e. |dn> carries 0 excess pairs and |up> carries 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ContractViolation,
    IDENTITY_2,
    PAULI_X,
    PAULI_Z,
    kron,
    require_hermitian,
)

#: Two-level Cooper-pair number operator, N |dn> = 0, N |up> = |up>.
COOPER_NUMBER = 0.5 * (PAULI_Z + IDENTITY_2)

#: Flux fraction at which the Josephson coupling vanishes (idle point).
IDLE_FLUX = 0.5
#: Flux fraction giving the full coupling +2 E_J0.
DRIVE_FLUX = 0.0

CHARGING_REGIME_RATIO = 0.2
WEAK_COUPLING_RATIO = 0.1


@dataclass(frozen=True)
class DeviceParams:
    """Device energies: single-junction coupling, charging energy, qubit-qubit coupling."""

    e_j0: float
    e_ch: float
    delta_coupling: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.e_j0) and self.e_j0 > 0):
            raise ContractViolation("e_j0 must be positive and finite")
        if not (math.isfinite(self.e_ch) and self.e_ch > 0):
            raise ContractViolation("e_ch must be positive and finite")
        if not (math.isfinite(self.delta_coupling) and self.delta_coupling >= 0):
            raise ContractViolation("delta_coupling must be non-negative and finite")

    def warnings(self) -> list[str]:
        """Validity warnings; surfaced by the CLI, never silently dropped."""
        notes = []
        if self.e_j0 / self.e_ch > CHARGING_REGIME_RATIO:
            notes.append(
                f"charging regime strained: e_j0/e_ch = {self.e_j0 / self.e_ch:.4g} > "
                f"{CHARGING_REGIME_RATIO}; the two-level reduction degrades"
            )
        if self.delta_coupling and self.delta_coupling / self.e_ch > WEAK_COUPLING_RATIO:
            notes.append(
                f"weak-coupling assumption strained: delta_coupling/e_ch = "
                f"{self.delta_coupling / self.e_ch:.4g} > {WEAK_COUPLING_RATIO}"
            )
        return notes


@dataclass(frozen=True)
class ControlSegment:
    """One piecewise-constant control setting: offset charge, flux fraction, duration."""

    n_x: float
    flux_frac: float
    duration: float

    def __post_init__(self):
        for name in ("n_x", "flux_frac", "duration"):
            if not math.isfinite(getattr(self, name)):
                raise ContractViolation(f"{name} must be finite")
        if self.duration <= 0:
            raise ContractViolation("segment duration must be positive")


@dataclass(frozen=True)
class Schedule:
    """Per-qubit control segments.

    An empty ``qubit1_segments`` tuple marks a single-qubit schedule whose
    segments live in ``qubit2_segments``.  Two-qubit schedules must carry the
    same segment boundaries on both qubits (split segments beforehand so the
    time grids coincide).
    """

    qubit1_segments: tuple[ControlSegment, ...]
    qubit2_segments: tuple[ControlSegment, ...]
    coupling_on: bool = False

    def __post_init__(self):
        if not self.qubit2_segments:
            raise ContractViolation("a schedule needs at least one segment")
        if self.qubit1_segments:
            b1 = np.cumsum([s.duration for s in self.qubit1_segments])
            b2 = np.cumsum([s.duration for s in self.qubit2_segments])
            if len(b1) != len(b2) or np.max(np.abs(b1 - b2)) > 1e-12 * max(1.0, b1[-1]):
                raise ContractViolation("misaligned schedule")

    @classmethod
    def single(cls, segments) -> "Schedule":
        return cls((), tuple(segments), coupling_on=False)

    @property
    def is_single_qubit(self) -> bool:
        return not self.qubit1_segments

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.qubit2_segments))


def josephson_energy(e_j0: float, flux_frac: float) -> float:
    """Effective coupling 2 e_j0 cos(pi f); negative values are legal."""
    return 2.0 * e_j0 * math.cos(math.pi * flux_frac)


def effective_field(params: DeviceParams, seg: ControlSegment) -> np.ndarray:
    """Fictitious field (E_J(f), 0, E_ch (1 - 2 n_x)) in energy units."""
    return np.array([
        josephson_energy(params.e_j0, seg.flux_frac),
        0.0,
        params.e_ch * (1.0 - 2.0 * seg.n_x),
    ])


def two_level_hamiltonian(params: DeviceParams, seg: ControlSegment) -> np.ndarray:
    """H = -(B_x sigma_x + B_z sigma_z)/2 for the segment's effective field."""
    b = effective_field(params, seg)
    return -0.5 * (b[0] * PAULI_X + b[2] * PAULI_Z)


def charge_hamiltonian(params: DeviceParams, seg: ControlSegment,
                       n_min: int, n_max: int) -> np.ndarray:
    """Truncated charge-basis Hamiltonian on {|n_min>, ..., |n_max>}.

    Diagonal entries are the charging parabola E_ch (n - n_x)^2; the
    cos(chi) coupling contributes -E_J/2 on nearest neighbors only, from
    <n|cos chi|n+1> = 1/2.
    """
    if n_max <= n_min:
        raise ContractViolation("n_max must exceed n_min")
    ns = np.arange(n_min, n_max + 1)
    h = np.diag(params.e_ch * (ns - seg.n_x) ** 2).astype(complex)
    e_j = josephson_energy(params.e_j0, seg.flux_frac)
    for i in range(len(ns) - 1):
        h[i, i + 1] = h[i + 1, i] = -0.5 * e_j
    return h


def coupled_hamiltonian(params: DeviceParams, seg1: ControlSegment,
                        seg2: ControlSegment) -> np.ndarray:
    """Two-qubit Hamiltonian H1 x I + I x H2 + Delta (N1 - n_x1)(N2 - n_x2).

    The full product form is the ground truth here; the pure sigma_z x sigma_z
    shorthand only holds at the symmetric bias point up to single-qubit and
    identity terms, and those remainders matter for conditional phases.
    """
    h1 = two_level_hamiltonian(params, seg1)
    h2 = two_level_hamiltonian(params, seg2)
    h = kron(h1, IDENTITY_2) + kron(IDENTITY_2, h2)
    h += params.delta_coupling * kron(
        COOPER_NUMBER - seg1.n_x * IDENTITY_2,
        COOPER_NUMBER - seg2.n_x * IDENTITY_2,
    )
    return h


def schedule_hamiltonians(params: DeviceParams, schedule: Schedule):
    """Bridge a Schedule to (Hermitian H, duration) pairs for the evolver.

    Single-qubit schedules produce 2x2 Hamiltonians; two-qubit schedules
    produce 4x4 ones on the shared time grid (the coupling term is included
    only when ``coupling_on`` is set).
    """
    out = []
    if schedule.is_single_qubit:
        for seg in schedule.qubit2_segments:
            out.append((two_level_hamiltonian(params, seg), seg.duration))
        return out
    for seg1, seg2 in zip(schedule.qubit1_segments, schedule.qubit2_segments):
        if abs(seg1.duration - seg2.duration) > 1e-12 * max(1.0, seg1.duration):
            raise ContractViolation("misaligned schedule")
        if schedule.coupling_on:
            h = coupled_hamiltonian(params, seg1, seg2)
        else:
            h = coupled_hamiltonian(
                DeviceParams(params.e_j0, params.e_ch, 0.0), seg1, seg2
            )
        out.append((require_hermitian(h), seg1.duration))
    return out
