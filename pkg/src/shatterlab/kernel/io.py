"""JSON encoding of semilinear sets.

Each atom is the vector ``[a1, ..., am, b]`` of ``"p/q"`` strings. Parsed
sets are normalized, so canonical output is a fixed point of a round trip.
"""
import json

from ..errors import ParseError
from .linear import EQ, LE, LT, Atom, as_fraction, fraction_str
from .sets import BasicCell, SemilinearSet

_KEYS = {"eq": EQ, "lt": LT, "le": LE}


def atom_to_json(atom):
    return [fraction_str(c) for c in atom.coeffs] + [fraction_str(atom.const)]


def set_to_json(s):
    cells = []
    for c in s.cells:
        cells.append({
            "eq": [atom_to_json(a) for a in c.eqs],
            "lt": [atom_to_json(a) for a in c.lts],
            "le": [atom_to_json(a) for a in c.les],
        })
    return {"dim": s.dim, "cells": cells}


def set_from_json(obj):
    try:
        dim = obj["dim"]
        cells_obj = obj["cells"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"semilinear set needs 'dim' and 'cells': {exc}") from exc
    if not isinstance(dim, int) or dim < 0:
        raise ParseError(f"bad dimension {dim!r}")
    cells = []
    for cobj in cells_obj:
        if not isinstance(cobj, dict) or set(cobj) - set(_KEYS):
            raise ParseError(f"bad cell {cobj!r}")
        atoms = []
        for key, rel in _KEYS.items():
            for vec in cobj.get(key, []):
                if not isinstance(vec, list) or len(vec) != dim + 1:
                    raise ParseError(f"atom vector must have {dim + 1} entries: {vec!r}")
                vals = [as_fraction(v) for v in vec]
                atoms.append(Atom.make(vals[:-1], vals[-1], rel))
        cells.append(BasicCell.make(dim, atoms))
    return SemilinearSet(dim, tuple(cells))


def dumps_set(s):
    return json.dumps(set_to_json(s), sort_keys=True)


def loads_set(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    return set_from_json(obj)
