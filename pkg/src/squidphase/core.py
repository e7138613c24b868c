"""Time evolution of 2- and 4-dimensional quantum states under piecewise-constant
Hermitian Hamiltonians, plus the Bloch-sphere map.

Conventions fixed here and used by every other module:

* hbar = 1; energies are in one arbitrary common unit, times in its inverse.
* Single-qubit basis order is (|up>, |dn>), the sigma_z eigenstates with
  eigenvalues +1 and -1.  Two-qubit basis order is (|uu>, |ud>, |du>, |dd>)
  with qubit 1 as the left tensor factor.
* Pauli matrices are the standard ones; in particular
  sigma_y = [[0, -i], [i, 0]], so (|up> + i|dn>)/sqrt(2) has <sigma_y> = +1.
* Propagators are literally exp(-iHt); no global phase is ever stripped.
* Under H = -B.sigma/2 the Bloch vector rotates about n = B/|B| through the
  angle -|B|t, i.e. r(t) = R(n, -|B|t) r(0).  This sign is pinned by the
  tests against the eigendecomposition propagator; every downstream phase
  sign refers to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

KET_UP = np.array([1.0, 0.0], dtype=complex)
KET_DN = np.array([0.0, 1.0], dtype=complex)
#: sigma_y eigenstates, eigenvalues +1 and -1.
KET_Y_PLUS = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)
KET_Y_MINUS = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0)

STATE_NORM_TOL = 1e-12
HERMITICITY_TOL = 1e-12
#: Garbage guard for trajectory samples only: coarse rk4 meshes may drift by
#: their truncation error, so the per-method bounds (1e-10 closed form, 1e-8
#: rk4 at default sampling) are enforced by the test suite, not here.
TRAJECTORY_NORM_GUARD = 0.05


class ContractViolation(ValueError):
    """An input violated a documented numeric contract."""


def as_state(amplitudes, dim=None) -> np.ndarray:
    """Validate and return a normalized complex state vector.

    Raises ContractViolation for non-finite entries, wrong dimension, or a
    norm off from 1 by more than 1e-12.
    """
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    if dim is not None and psi.size != dim:
        raise ContractViolation(f"expected a {dim}-dimensional state, got {psi.size}")
    if psi.size not in (2, 4):
        raise ContractViolation(f"state dimension must be 2 or 4, got {psi.size}")
    if not np.all(np.isfinite(psi.view(float))):
        raise ContractViolation("state amplitudes must be finite")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > STATE_NORM_TOL:
        raise ContractViolation(f"state norm {norm!r} deviates from 1 beyond {STATE_NORM_TOL}")
    return psi


def require_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractViolation(f"operator must be square, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > tol:
        raise ContractViolation("operator is not Hermitian within tolerance")
    return h


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two single-qubit operators, qubit 1 on the left."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ContractViolation("kron expects two 2x2 operators")
    return np.kron(a, b)


def bloch_from_state(state) -> np.ndarray:
    """Pauli expectation vector (<sx>, <sy>, <sz>) of a normalized 2-dim state."""
    psi = as_state(state, dim=2)
    a, b = psi
    ab = np.conj(a) * b
    return np.array([2.0 * ab.real, 2.0 * ab.imag, (abs(a) ** 2 - abs(b) ** 2)])


def two_level_propagator(b_field, t: float) -> np.ndarray:
    """Closed-form exp(-iHt) for H = -B.sigma/2.

    Returns cos(|B|t/2) I + i sin(|B|t/2) (n.sigma) with n = B/|B|; the
    identity for B = 0.  Valid for all t >= 0.
    """
    if t < 0:
        raise ContractViolation("propagation time must be non-negative")
    b = np.asarray(b_field, dtype=float)
    if b.shape != (3,):
        raise ContractViolation("field must be a real 3-vector")
    norm = np.linalg.norm(b)
    if norm == 0.0:
        return IDENTITY_2.copy()
    half = 0.5 * norm * t
    n = b / norm
    n_sigma = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return np.cos(half) * IDENTITY_2 + 1.0j * np.sin(half) * n_sigma


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) through the eigendecomposition of a Hermitian H.

    Serves as the independent oracle for every closed-form propagator.
    """
    h = require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1.0j * w * t)) @ v.conj().T


def field_hamiltonian(b_field) -> np.ndarray:
    """H = -B.sigma/2 as an explicit 2x2 matrix."""
    b = np.asarray(b_field, dtype=float)
    return -0.5 * (b[0] * PAULI_X + b[1] * PAULI_Y + b[2] * PAULI_Z)


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped states along a piecewise-constant evolution.

    One block per Hamiltonian segment: ``segment_times[k]`` are absolute
    times (the first block starts at 0, each block starts where the previous
    one ended), ``segment_states[k]`` is the (n_samples, dim) array of states
    at those times, and ``segment_hamiltonians[k]`` is the constant
    Hamiltonian that drove block k.  Junction samples are stored in both
    adjacent blocks so segment-wise quadrature sees the correct Hamiltonian
    on either side of a sudden switch.
    """

    segment_times: tuple = field(repr=False)
    segment_states: tuple = field(repr=False)
    segment_hamiltonians: tuple = field(repr=False)

    def __post_init__(self):
        if not self.segment_times:
            raise ContractViolation("empty schedule")
        prev_end = 0.0
        for k, (ts, states) in enumerate(zip(self.segment_times, self.segment_states)):
            if ts.ndim != 1 or len(ts) < 2:
                raise ContractViolation("each segment needs at least 2 samples")
            if np.any(np.diff(ts) <= 0):
                raise ContractViolation("sample times must be strictly increasing")
            if abs(ts[0] - prev_end) > 1e-12 * max(1.0, abs(prev_end)):
                raise ContractViolation("segments must be contiguous in time")
            prev_end = ts[-1]
            norms = np.linalg.norm(states, axis=1)
            if np.max(np.abs(norms - 1.0)) > TRAJECTORY_NORM_GUARD:
                raise ContractViolation(f"segment {k} contains badly non-normalized states")

    @property
    def dim(self) -> int:
        return self.segment_states[0].shape[1]

    @property
    def n_segments(self) -> int:
        return len(self.segment_times)

    @property
    def duration(self) -> float:
        return float(self.segment_times[-1][-1])

    @property
    def times(self) -> np.ndarray:
        """Flat strictly-increasing times (junction duplicates dropped)."""
        parts = [self.segment_times[0]]
        parts += [ts[1:] for ts in self.segment_times[1:]]
        return np.concatenate(parts)

    @property
    def states(self) -> np.ndarray:
        """Flat (n, dim) states matching :attr:`times`."""
        parts = [self.segment_states[0]]
        parts += [st[1:] for st in self.segment_states[1:]]
        return np.vstack(parts)

    @property
    def initial_state(self) -> np.ndarray:
        return self.segment_states[0][0]

    @property
    def final_state(self) -> np.ndarray:
        return self.segment_states[-1][-1]


def _closed_form_segment(h, psi0, ts_local):
    w, v = np.linalg.eigh(h)
    coef = v.conj().T @ psi0
    phases = np.exp(-1.0j * np.outer(ts_local, w))
    # psi(t)_j = sum_k V[j,k] exp(-i w_k t) coef_k, vectorized over t
    return (phases * coef) @ v.T


def _rk4_segment(h, psi0, ts_local):
    def deriv(psi):
        return -1.0j * (h @ psi)

    states = np.empty((len(ts_local), psi0.size), dtype=complex)
    states[0] = psi0
    psi = psi0
    for i in range(len(ts_local) - 1):
        dt = ts_local[i + 1] - ts_local[i]
        k1 = deriv(psi)
        k2 = deriv(psi + 0.5 * dt * k1)
        k3 = deriv(psi + 0.5 * dt * k2)
        k4 = deriv(psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[i + 1] = psi
    return states


def evolve_schedule(hamiltonian_segments, initial, samples_per_segment: int = 1001,
                    method: str = "closed_form") -> Trajectory:
    """Evolve a state through a list of (Hermitian H, duration) segments.

    ``closed_form`` applies the per-segment eigendecomposition propagator at
    each sample time; ``rk4`` integrates dpsi/dt = -iH psi with fixed step
    duration/(samples_per_segment - 1).  Each segment is sampled uniformly,
    endpoints included.
    """
    segments = list(hamiltonian_segments)
    if not segments:
        raise ContractViolation("empty schedule")
    if samples_per_segment < 2:
        raise ContractViolation("samples_per_segment must be at least 2")
    if method not in ("closed_form", "rk4"):
        raise ContractViolation(f"unknown method {method!r}")

    psi = as_state(initial)
    seg_times, seg_states, seg_hams = [], [], []
    t0 = 0.0
    for h, duration in segments:
        if duration <= 0:
            raise ContractViolation("segment durations must be positive")
        h = require_hermitian(h)
        if h.shape[0] != psi.size:
            raise ContractViolation("Hamiltonian dimension does not match the state")
        ts_local = np.linspace(0.0, float(duration), samples_per_segment)
        if method == "closed_form":
            states = _closed_form_segment(h, psi, ts_local)
        else:
            states = _rk4_segment(h, psi, ts_local)
        seg_times.append(t0 + ts_local)
        seg_states.append(states)
        seg_hams.append(h)
        psi = states[-1]
        t0 += float(duration)
    return Trajectory(tuple(seg_times), tuple(seg_states), tuple(seg_hams))
