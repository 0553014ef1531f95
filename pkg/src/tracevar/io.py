"""JSON encoding of algebras, operators, resolutions and reports.

Operator files have the layout::

    {"algebra": {"blocks": [{"dim": 2, "weight": 1.0}, ...]},
     "operator": {"blocks": [[[[re, im], ...], ...], ...]}}

where each block is a row-major matrix of ``[re, im]`` pairs. Floats are
written with 17 significant digits so every double survives a round trip.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .algebra import BlockOperator, ResolutionOfIdentity, TracialAlgebra
from .errors import ContractError, TracevarError


class ParseError(TracevarError):
    code = "parse_error"


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot encode non-finite float {x!r}")
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps(obj: Any) -> str:
    """Deterministic compact JSON with 17-digit floats."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def algebra_to_dict(algebra: TracialAlgebra) -> dict:
    return {"blocks": [{"dim": b.dim, "weight": float(b.weight)} for b in algebra.blocks]}


def _matrix_to_list(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def operator_blocks_to_dict(x: BlockOperator) -> dict:
    return {"blocks": [_matrix_to_list(a) for a in x.blocks]}


def operator_to_dict(x: BlockOperator) -> dict:
    return {"algebra": algebra_to_dict(x.algebra), "operator": operator_blocks_to_dict(x)}


def operator_to_json(x: BlockOperator) -> str:
    return dumps(operator_to_dict(x)) + "\n"


def resolution_to_dict(R: ResolutionOfIdentity) -> dict:
    return {"algebra": algebra_to_dict(R.algebra),
            "projections": [operator_blocks_to_dict(p) for p in R.projections]}


def resolution_to_json(R: ResolutionOfIdentity) -> str:
    return dumps(resolution_to_dict(R)) + "\n"


def algebra_from_dict(data: dict) -> TracialAlgebra:
    try:
        blocks = [(b["dim"], b["weight"]) for b in data["blocks"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed algebra description: {exc}") from exc
    for dim, weight in blocks:
        if not isinstance(dim, int) or isinstance(dim, bool):
            raise ParseError(f"block dim must be an integer, got {dim!r}")
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise ParseError(f"block weight must be a number, got {weight!r}")
    try:
        return TracialAlgebra(blocks)
    except ContractError as exc:
        raise ParseError(str(exc)) from exc


def _blocks_from_dict(algebra: TracialAlgebra, data: dict) -> BlockOperator:
    try:
        raw = data["blocks"]
        arrays = []
        for block in raw:
            arr = np.array(block, dtype=float)
            if arr.ndim != 3 or arr.shape[2] != 2:
                raise ParseError("each matrix entry must be an [re, im] pair")
            arrays.append(arr[..., 0] + 1j * arr[..., 1])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed operator blocks: {exc}") from exc
    try:
        return BlockOperator(algebra, arrays)
    except TracevarError as exc:
        raise ParseError(str(exc)) from exc


def operator_from_dict(data: dict, symmetrize: bool = False,
                       require_hermitian: bool = True) -> BlockOperator:
    """Parse an operator file; non-Hermitian input is rejected unless
    ``symmetrize`` replaces it by ``(x + x*) / 2``."""
    if not isinstance(data, dict) or "algebra" not in data or "operator" not in data:
        raise ParseError("operator file needs 'algebra' and 'operator' keys")
    algebra = algebra_from_dict(data["algebra"])
    x = _blocks_from_dict(algebra, data["operator"])
    if symmetrize:
        x = x.symmetrized()
    elif require_hermitian and not x.is_hermitian():
        raise ParseError(
            f"operator is not Hermitian (residual {x.hermitian_residual():.3g}); "
            "pass --symmetrize to use (x + x*)/2")
    return x


def operator_from_json(text: str, **kwargs) -> BlockOperator:
    return operator_from_dict(_loads(text), **kwargs)


def resolution_from_dict(data: dict) -> ResolutionOfIdentity:
    if not isinstance(data, dict) or "algebra" not in data or "projections" not in data:
        raise ParseError("resolution file needs 'algebra' and 'projections' keys")
    algebra = algebra_from_dict(data["algebra"])
    return ResolutionOfIdentity(algebra, [_blocks_from_dict(algebra, p)
                                          for p in data["projections"]])


def resolution_from_json(text: str) -> ResolutionOfIdentity:
    return resolution_from_dict(_loads(text))


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def read_json(path: str):
    try:
        with open(path) as fh:
            return _loads(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
