"""Two-level-approximation check against the truncated charge-basis model.

The single-qubit loop is rerun with the full charging Hamiltonian on a
window of charge states (default n in [-2, 3], two parabola levels beyond
the computational pair on each side) and compared with the two-level run.
States are compared index-aligned: charge state |0> maps to the first
two-level basis vector, |1> to the second, matching the entrywise agreement
between the windowed charge Hamiltonian and the two-level one.  The
discrepancy is the global-phase-minimized state distance, and the leakage
is the final population outside {|0>, |1>}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContractViolation, expm_hermitian, two_level_propagator
from .device import DeviceParams, charge_hamiltonian, effective_field
from .protocols import SingleQubitPlan, build_single_qubit_schedule

DEFAULT_WINDOW = (-2, 3)
DEFAULT_RATIOS = (0.2, 0.1, 0.05, 0.025)


@dataclass(frozen=True)
class ValidityRow:
    ratio: float
    delta: float
    tau: float
    leakage: float
    discrepancy: float


def charge_basis_final_state(params: DeviceParams, plan: SingleQubitPlan,
                             n_min: int, n_max: int) -> np.ndarray:
    """Final state of the loop run in the charge window, starting from |n=0>."""
    if n_min > 0 or n_max < 1:
        raise ContractViolation("window must contain charge states 0 and 1")
    dim = n_max - n_min + 1
    psi = np.zeros(dim, dtype=complex)
    psi[0 - n_min] = 1.0
    for seg in build_single_qubit_schedule(params, plan).qubit2_segments:
        h = charge_hamiltonian(params, seg, n_min, n_max)
        psi = expm_hermitian(h, seg.duration) @ psi
    return psi


def two_level_final_state(params: DeviceParams, plan: SingleQubitPlan) -> np.ndarray:
    """Two-level loop from the first basis vector (the |n=0>-aligned one)."""
    psi = np.array([1.0, 0.0], dtype=complex)
    for seg in build_single_qubit_schedule(params, plan).qubit2_segments:
        psi = two_level_propagator(effective_field(params, seg), seg.duration) @ psi
    return psi


def compare_models(params: DeviceParams, plan: SingleQubitPlan,
                   n_min: int = DEFAULT_WINDOW[0],
                   n_max: int = DEFAULT_WINDOW[1]) -> tuple[float, float]:
    """(leakage, discrepancy) of the charge run against the two-level run."""
    psi_c = charge_basis_final_state(params, plan, n_min, n_max)
    psi_2 = two_level_final_state(params, plan)
    embedded = np.zeros_like(psi_c)
    embedded[0 - n_min] = psi_2[0]
    embedded[1 - n_min] = psi_2[1]
    leakage = 1.0 - abs(psi_c[0 - n_min]) ** 2 - abs(psi_c[1 - n_min]) ** 2
    overlap = abs(np.vdot(embedded, psi_c))
    discrepancy = math.sqrt(max(0.0, 2.0 - 2.0 * overlap))
    return float(leakage), float(discrepancy)


def validity_sweep(e_ch: float = 50.0, delta_coupling: float = 0.0,
                   ratios=DEFAULT_RATIOS, target_gamma: float = 0.5 * math.pi,
                   n_min: int = DEFAULT_WINDOW[0],
                   n_max: int = DEFAULT_WINDOW[1]) -> list[ValidityRow]:
    """Leakage / discrepancy rows across coupling ratios e_j0/e_ch.

    Each point runs the loop biased for the same target phase, so the rows
    compare physically equivalent protocols as the charging regime deepens.
    """
    rows = []
    for ratio in ratios:
        params = DeviceParams(e_j0=ratio * e_ch, e_ch=e_ch,
                              delta_coupling=delta_coupling)
        delta = (2.0 * params.e_j0 / params.e_ch) * math.tan(0.5 * target_gamma)
        plan = SingleQubitPlan.for_device(params, delta)
        leakage, discrepancy = compare_models(params, plan, n_min, n_max)
        rows.append(ValidityRow(ratio=float(ratio), delta=delta, tau=plan.tau,
                                leakage=leakage, discrepancy=discrepancy))
    return rows


def discrepancies_monotone(rows) -> bool:
    """True when the discrepancy column strictly decreases down the sweep."""
    values = [r.discrepancy for r in rows]
    return all(b < a for a, b in zip(values, values[1:]))
