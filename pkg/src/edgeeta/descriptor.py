"""JSON descriptors for edge spaces, operators, spectra and rho pairs.

Descriptors are validated against a strict schema (unknown fields are
rejected) before any object is built. Exact link eigenvalues may be written
as strings such as ``"3/2"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import DescriptorError
from .geometry import ConePoint, EdgeDescriptor, EdgeStratum, LinkSpectrum, OperatorDescriptor, OPERATOR_KINDS
from .model_spectra import (
    Spectrum,
    TailModel,
    circle_dirac_spectrum,
    cone_eigenvalues,
    sphere_dirac_spectrum,
    spin_cone_nu,
    unit_disk_spectrum,
)

SCHEMA_VERSION = 1

_number_or_rational = {
    "anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]
}

_link = {
    "type": "object",
    "additionalProperties": False,
    "required": ["entries"],
    "properties": {
        "entries": {
            "type": "array",
            "items": {"type": "array", "prefixItems": [_number_or_rational, {"type": "integer", "minimum": 1}],
                      "minItems": 2, "maxItems": 2},
        },
        "middle_cohomology_dim": {"type": "integer", "minimum": 0},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["version"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "m": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["b", "f"],
                "properties": {"b": {"type": "integer"}, "f": {"type": "integer"}, "link": _link},
            },
        },
        "cone_points": {"type": "integer", "minimum": 0},
        "has_boundary": {"type": "boolean"},
        "operator": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(OPERATOR_KINDS)},
                "declared_parity": {"enum": ["even", "odd", None]},
                "twist_rank": {"type": "integer", "minimum": 1},
                "base_kind": {"enum": ["GaussBonnet", "Signature", "OddSignature", "SpinDirac", None]},
            },
        },
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "required": ["model"],
            "properties": {
                "model": {"enum": ["circle", "sphere", "disk", "cone", "explicit"]},
                "a": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "f": {"type": "integer", "minimum": 1},
                "cutoff": {"type": "number", "minimum": 1},
                "link": _link,
                "nu": {"enum": ["spin", "abs"]},
                "k_max": {"type": "integer", "minimum": 1},
                "entries": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
                "kernel_dim": {"type": "integer", "minimum": 0},
                "tail": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
        "rho": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "flavor": {"enum": ["APS", "CheegerGromov"]},
                "a": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "b": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "twist_ranks": {"type": "array", "items": {"type": "integer", "minimum": 1},
                                "minItems": 2, "maxItems": 2},
            },
        },
        "mellin": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"s": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}},
        },
    },
}


def _rational(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def _link_from(data) -> LinkSpectrum:
    return LinkSpectrum(tuple((_rational(lam), int(m)) for lam, m in data["entries"]),
                        data.get("middle_cohomology_dim", 0))


@dataclass(frozen=True)
class Descriptor:
    raw: dict
    space: Optional[EdgeDescriptor]
    operator: Optional[OperatorDescriptor]

    def require_space(self) -> EdgeDescriptor:
        if self.space is None:
            raise DescriptorError("descriptor has no 'm' field describing an edge space")
        return self.space

    def require_operator(self) -> OperatorDescriptor:
        if self.operator is None:
            raise DescriptorError("descriptor has no 'operator' section")
        return self.operator

    def spectrum(self, cutoff=None, zero_cache=None) -> Spectrum:
        spec = self.raw.get("spectrum")
        if spec is None:
            raise DescriptorError("descriptor has no 'spectrum' section")
        return build_spectrum(spec, cutoff, zero_cache)


def build_spectrum(spec: dict, cutoff=None, zero_cache=None) -> Spectrum:
    model = spec["model"]
    cut = cutoff if cutoff is not None else spec.get("cutoff")

    def need(key):
        if key not in spec:
            raise DescriptorError(f"spectrum model {model!r} needs field {key!r}")
        return spec[key]

    if model == "circle":
        return circle_dirac_spectrum(need("a"), cut if cut is not None else 200.0)
    if model == "sphere":
        return sphere_dirac_spectrum(need("f"), cut if cut is not None else 50.0)
    if model == "disk":
        return unit_disk_spectrum(cut if cut is not None else 1e4, zero_cache=zero_cache)
    if model == "cone":
        link = _link_from(need("link"))
        if spec.get("nu", "spin") == "spin":
            nu_map = spin_cone_nu
        else:
            nu_map = lambda mu: abs(mu)  # noqa: E731
        k_max = spec.get("k_max")
        if k_max is not None:
            return cone_eigenvalues(link, nu_map, k_max=k_max, zero_cache=zero_cache)
        return cone_eigenvalues(link, nu_map, cutoff=cut if cut is not None else 1e4, zero_cache=zero_cache)
    entries = [(float(_rational(lam)), int(m)) for lam, m in need("entries")]
    tail = spec.get("tail")
    kw = {"tail": None if tail is None else TailModel(*tail)}
    if cut is not None:
        kw["cutoff"] = float(cut)
    return Spectrum.from_entries(entries, spec.get("kernel_dim", 0), label="explicit", **kw)


def parse_descriptor(data: dict) -> Descriptor:
    """Validate a descriptor mapping and build the geometric objects it names.

    Raises:
        DescriptorError: schema violations (unknown fields, wrong types).
        InvalidDimensions: edge dimensions inconsistent with m; the message
            names the offending stratum.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise DescriptorError(f"{where}: {e.message}")
    space = None
    if "m" in data:
        edges = tuple(
            EdgeStratum(e["b"], e["f"], _link_from(e["link"]) if "link" in e else None)
            for e in data.get("edges", [])
        )
        cones = tuple(ConePoint() for _ in range(data.get("cone_points", 0)))
        space = EdgeDescriptor(data["m"], edges, cones, data.get("has_boundary", False))
    op = None
    if "operator" in data:
        o = data["operator"]
        op = OperatorDescriptor(o["kind"], o.get("declared_parity"), o.get("twist_rank", 1), o.get("base_kind"))
    return Descriptor(data, space, op)


def load_descriptor(path) -> Descriptor:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise DescriptorError(f"descriptor file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"descriptor is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DescriptorError("descriptor must be a JSON object")
    return parse_descriptor(data)
