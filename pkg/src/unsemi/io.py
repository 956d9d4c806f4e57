"""Lift files, run manifests and atomic output."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .circuit import node_from_dict
from .formula import Atom, Rel, parse
from .lift import (
    AndNode, BridgeNode, EqLeaf, GeLeaf, GtLeaf, Lift, NeLeaf, OpaqueWitness, OrNode,
    Witness,
)
from .poly import AffineMap, Polynomial, as_fraction

__all__ = [
    "LIFT_FORMAT", "dump_lift", "lift_from_dict", "lift_to_dict", "load_lift",
    "make_manifest", "sha256_file", "write_atomic",
]

LIFT_FORMAT = "unsemi-lift"
LIFT_VERSION = 1


def write_atomic(path: str | os.PathLike, data: str | bytes) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_manifest(command: str, inputs: Sequence[str], config: Mapping | None = None,
                  seed: int | None = None) -> dict:
    """Run record embedded in every output: no timestamps, so reruns are byte-identical."""
    return {
        "command": command,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "config": dict(config) if config is not None else None,
        "tool_version": __version__,
        "seed": seed,
    }


# ---------------------------------------------------------------------------
# witness trees

def _leaf_poly(text: str, m: int) -> Polynomial:
    atom = parse(f"{text} = 0", m)
    return atom.poly


_LEAVES = {"eq": (EqLeaf, Rel.EQ), "ge": (GeLeaf, Rel.GE),
           "gt": (GtLeaf, Rel.GT), "ne": (NeLeaf, Rel.NE)}


def witness_from_dict(data: Mapping, m: int) -> Witness:
    kind = data["kind"]
    if kind in _LEAVES:
        cls, rel = _LEAVES[kind]
        return cls(Atom(_leaf_poly(data["poly"], m), rel))
    if kind == "and":
        return AndNode(tuple(witness_from_dict(c, m) for c in data["children"]))
    if kind == "or":
        return OrNode(tuple(witness_from_dict(c, m) for c in data["children"]))
    if kind == "bridge":
        return BridgeNode(witness_from_dict(data["inner"], m),
                          AffineMap.from_dict(data["affine"]),
                          tuple(as_fraction(v) for v in data["base_point"]))
    if kind == "opaque":
        return OpaqueWitness(int(data["size"]))
    raise ValueError(f"unknown witness node {kind!r}")


# ---------------------------------------------------------------------------
# lifts

def lift_to_dict(lift: Lift, manifest: Mapping | None = None) -> dict:
    pd = lift.poly.to_dict()
    return {
        "format": LIFT_FORMAT,
        "version": LIFT_VERSION,
        "base_dim": lift.base_dim,
        "aux_dim": lift.aux_dim,
        "var_names": pd["var_names"],
        "degree": lift.degree(),
        "n_terms": len(pd["terms"]),
        "source_text": lift.source_text,
        "terms": pd["terms"],
        "witness": lift.witness.to_dict(),
        "circuit": lift.circuit.to_dict(),
        "manifest": dict(manifest) if manifest is not None else None,
    }


def lift_from_dict(data: Mapping) -> Lift:
    if data.get("format") != LIFT_FORMAT:
        raise ValueError("not a lift file")
    if data.get("version") != LIFT_VERSION:
        raise ValueError(f"unsupported lift file version {data.get('version')!r}")
    m, k = int(data["base_dim"]), int(data["aux_dim"])
    poly = Polynomial.from_dict({"var_names": data["var_names"], "terms": data["terms"]})
    if poly.nvars != m + k:
        raise ValueError("variable count does not match base_dim + aux_dim")
    witness = witness_from_dict(data["witness"], m)
    if witness.size != k:
        raise ValueError("witness tree does not match aux_dim")
    circuit = node_from_dict(data["circuit"])
    src = data.get("source_text") or ""
    source = parse(src, m) if src else None
    return Lift(poly, m, k, witness, circuit, source)


def dump_lift(lift: Lift, manifest: Mapping | None = None) -> str:
    return json.dumps(lift_to_dict(lift, manifest), indent=2) + "\n"


def load_lift(text: str) -> Lift:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"lift file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError("not a lift file")
    try:
        return lift_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed lift file: {exc!r}") from None
