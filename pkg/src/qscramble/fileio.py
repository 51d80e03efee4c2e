"""JSON file formats for states and probability data.

State files: {"rho_re": [[...]], "rho_im": [[...]]} with 4x4 row-major
entries in the computational basis.  Probability files: {"xx": [p1..p4],
"zz": [...], "yy": [... optional], "scrambled": bool}; when scrambled is
true the array order is meaningless and canonicalized on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .measurement import XX, YY, ZZ, OutcomeDistribution, ScrambledData, scramble
from .quantum import DensityMatrix


def write_state(path, rho: DensityMatrix) -> None:
    payload = {
        "rho_re": rho.matrix.real.tolist(),
        "rho_im": rho.matrix.imag.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def read_state(path) -> DensityMatrix:
    """Parse and fully validate a state file; diagnostics name the violated invariant."""
    payload = json.loads(Path(path).read_text())
    for key in ("rho_re", "rho_im"):
        if key not in payload:
            raise DomainError(f"state file is missing the {key!r} field")
    re = np.asarray(payload["rho_re"], dtype=float)
    im = np.asarray(payload["rho_im"], dtype=float)
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise DomainError(f"state file arrays must be 4x4, got {re.shape} and {im.shape}")
    return DensityMatrix.from_matrix(re + 1j * im)


@dataclass(frozen=True)
class ProbabilityFile:
    """Parsed probability data; ``dists`` is None when the file was scrambled."""

    data: ScrambledData
    dists: list[OutcomeDistribution] | None


_KEY_FOR = {"xx": XX, "zz": ZZ, "yy": YY}


def write_probabilities(path, dists=None, data: ScrambledData | None = None) -> None:
    if (dists is None) == (data is None):
        raise DomainError("pass exactly one of labeled distributions or scrambled data")
    payload: dict = {"scrambled": data is not None}
    if dists is not None:
        for d in dists:
            payload[d.setting.lower()] = d.p.tolist()
    else:
        for label in data.settings:
            payload[label.lower()] = data.multiset(label).tolist()
    Path(path).write_text(json.dumps(payload, indent=1))


def read_probabilities(path) -> ProbabilityFile:
    payload = json.loads(Path(path).read_text())
    scrambled = bool(payload.get("scrambled", False))
    arrays: dict[str, np.ndarray] = {}
    for key, label in _KEY_FOR.items():
        if key in payload:
            arr = np.asarray(payload[key], dtype=float)
            if arr.shape != (4,):
                raise DomainError(f"field {key!r} must hold 4 probabilities")
            arrays[label] = arr
    if XX not in arrays or ZZ not in arrays:
        raise DomainError("probability file needs at least the 'xx' and 'zz' fields")
    if scrambled:
        return ProbabilityFile(ScrambledData(arrays), None)
    dists = [OutcomeDistribution(label, arr) for label, arr in arrays.items()]
    return ProbabilityFile(scramble(dists), dists)
