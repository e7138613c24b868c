"""Config parsing and report / trajectory / sweep serialization.

File formats are fixed and plot-tool agnostic:

* config: flat ``key = value`` text, ``#`` comments;
* report: one JSON document, floats at full round-trip precision, no
  timestamps, so identical configs produce byte-identical reports;
* trajectory / sweep: CSV with a header row, one sample or grid point per
  row, numbers written with round-trip precision.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .core import Trajectory


class BadInput(ValueError):
    """Invalid configuration or command-line input (CLI exit code 2)."""


def parse_angle(text: str) -> float:
    """Parse a float or a simple pi expression like 'pi/8' or '3*pi/16'."""
    s = str(text).strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    m = re.fullmatch(r"(-?)(?:(\d+(?:\.\d+)?)\*)?pi(?:/(\d+(?:\.\d+)?))?", s)
    if not m:
        raise BadInput(f"cannot parse angle {text!r}")
    sign = -1.0 if m.group(1) else 1.0
    num = float(m.group(2)) if m.group(2) else 1.0
    den = float(m.group(3)) if m.group(3) else 1.0
    return sign * num * math.pi / den


def parse_bool(text: str) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise BadInput(f"cannot parse boolean {text!r}")


def load_config_file(path) -> dict[str, str]:
    """Read a flat key = value config file."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadInput(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def fnum(x) -> str:
    """Round-trip-exact text for a float (shortest repr)."""
    return repr(float(x))


def matrix_document(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def state_document(psi: np.ndarray) -> list[list[float]]:
    psi = np.asarray(psi, dtype=complex)
    return [[float(a.real), float(a.imag)] for a in psi]


def write_report(path, document: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def reduced_bloch_vectors(psi4: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-qubit Bloch vectors of a two-qubit state (core tensor order).

    Computed from the reduced density matrices; entangled states give
    vectors shorter than 1.
    """
    psi = np.asarray(psi4, dtype=complex).reshape(2, 2)
    rho1 = psi @ psi.conj().T
    rho2 = psi.T @ psi.conj()

    def vec(rho):
        return np.array([2.0 * rho[0, 1].real, -2.0 * rho[0, 1].imag,
                         (rho[0, 0] - rho[1, 1]).real])

    return vec(rho1), vec(rho2)


def trajectory_header(dim: int) -> list[str]:
    if dim == 2:
        return ["t", "re_up", "im_up", "re_dn", "im_dn",
                "bloch_x", "bloch_y", "bloch_z"]
    cols = ["t"]
    for k in range(4):
        cols += [f"re_a{k}", f"im_a{k}"]
    for q in (1, 2):
        cols += [f"q{q}_bloch_x", f"q{q}_bloch_y", f"q{q}_bloch_z"]
    return cols


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    """One row per flat sample: time, amplitudes, Bloch coordinates."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    times = traj.times
    states = traj.states
    lines = [",".join(trajectory_header(traj.dim))]
    for t, psi in zip(times, states):
        row = [fnum(t)]
        for a in psi:
            row += [fnum(a.real), fnum(a.imag)]
        if traj.dim == 2:
            a, b = psi
            ab = np.conj(a) * b
            row += [fnum(2.0 * ab.real), fnum(2.0 * ab.imag),
                    fnum(abs(a) ** 2 - abs(b) ** 2)]
        else:
            for v in reduced_bloch_vectors(psi):
                row += [fnum(v[0]), fnum(v[1]), fnum(v[2])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_csv(path, header: list[str], rows: list[list]) -> Path:
    """Generic CSV writer; floats get round-trip formatting, rest via str."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fnum(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def load_csv(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    return header, [line.split(",") for line in text[1:]]
