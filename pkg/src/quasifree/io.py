"""JSON serialization of matrices and instance files.

Matrices are objects ``{"re": [[...]], "im": [[...]]}`` with ``im`` omitted
for real matrices; bare nested lists are accepted as real matrices.  An
instance file looks like::

    {
      "dim": 2,
      "sigma": [[0, 0.5], [-0.5, 0]],
      "polarizations": {"S": {"re": [[0.5, 0], [0, 0.5]]}, "T": {"re": [[1, 0], [0, 1]]}},
      "options": {"ker_rel": 1e-9}
    }

Imaginary parts of polarizations always come from ``sigma``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ccr import Polarization, PresymplecticSpace, make_polarization
from .errors import InvalidMatrix, ValidationError
from .policy import NumericPolicy


class InstanceError(ValidationError):
    pass


def encode_matrix(m) -> dict:
    m = np.asarray(m)
    out = {"re": np.real(m).tolist()}
    if np.iscomplexobj(m) and np.any(m.imag != 0):
        out["im"] = m.imag.tolist()
    return out


def decode_matrix(obj, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            if "re" not in obj:
                raise InvalidMatrix("matrix object needs an 're' entry")
            m = np.asarray(obj["re"], dtype=float)
            if "im" in obj:
                m = m + 1j * np.asarray(obj["im"], dtype=float)
        else:
            m = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"cannot read matrix: {exc}") from exc
    if m.ndim == 0 and shape == (1, 1):
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise InvalidMatrix(f"expected a 2-d matrix, got {m.ndim} dimensions")
    if shape is not None and m.shape != shape:
        raise InvalidMatrix(f"expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    return m


def to_jsonable(obj):
    """Recursively convert numpy scalars and arrays into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj) if obj.ndim == 2 else {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


@dataclass(frozen=True, eq=False)
class Instance:
    space: PresymplecticSpace
    real_parts: dict
    options: dict = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.real_parts)

    def polarization(self, name: str) -> Polarization:
        if name not in self.real_parts:
            raise InstanceError(f"no polarization named {name!r}; have {self.names}")
        return make_polarization(self.space, self.real_parts[name])

    def policy(self, base: NumericPolicy | None = None) -> NumericPolicy:
        base = base or NumericPolicy()
        known = {f.name for f in dataclasses.fields(NumericPolicy)}
        unknown = set(self.options) - known
        if unknown:
            raise InstanceError(f"unknown options {sorted(unknown)}")
        return base.replace(**self.options)

    def to_json(self) -> dict:
        return {
            "dim": self.space.dim,
            "sigma": self.space.sigma.tolist(),
            "polarizations": {k: encode_matrix(v) for k, v in self.real_parts.items()},
            "options": dict(self.options),
        }


def parse_instance(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("dim", "sigma", "polarizations"):
        if key not in obj:
            raise InstanceError(f"instance is missing {key!r}")
    try:
        n = int(obj["dim"])
    except (TypeError, ValueError) as exc:
        raise InstanceError("dim must be an integer") from exc
    if n < 1:
        raise InstanceError("dim must be positive")
    sigma = decode_matrix(obj["sigma"], (n, n))
    if np.iscomplexobj(sigma):
        raise InstanceError("sigma must be real")
    pols = obj["polarizations"]
    if not isinstance(pols, dict) or not pols:
        raise InstanceError("polarizations must be a nonempty object")
    parts = {}
    for name, entry in pols.items():
        m = decode_matrix(entry, (n, n))
        if isinstance(entry, dict) and "im" in entry:
            raise InstanceError(f"{name}: imaginary parts are derived from sigma and must not be given")
        parts[str(name)] = m
    options = obj.get("options", {}) or {}
    if not isinstance(options, dict):
        raise InstanceError("options must be an object")
    return Instance(PresymplecticSpace(sigma), parts, dict(options))


def load_instance(path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path} is not valid JSON: {exc}") from exc
    return parse_instance(obj)
