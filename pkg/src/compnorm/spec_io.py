"""JSON interchange format for symbols.

Nodes are objects with a "type" key; complex numbers are [re, im] pairs::

    {"type": "compose",
     "outer": {"type": "mobius", "alpha": [0.5, 0]},
     "inner": {"type": "blaschke", "zeros": [[0, 0], [0.5, 0]], "rotation": [1, 0]}}
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .symbols import (
    Blaschke,
    Compose,
    Constant,
    Identity,
    Mobius,
    Polynomial,
    Product,
    Symbol,
    SymbolError,
    validate_self_map,
)

log = logging.getLogger(__name__)


class SymbolSpecError(ValueError):
    """Malformed symbol specification (syntax or schema)."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line
        self.column = column


class SelfMapError(ValueError):
    """The specified map does not send the disk into itself."""


_FIELDS = {
    "mobius": {"alpha"},
    "blaschke": {"zeros", "rotation"},
    "poly": {"coeffs"},
    "compose": {"outer", "inner"},
    "product": {"left", "right"},
    "const": {"c"},
    "identity": set(),
}


def _cplx(v, path: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if (
        isinstance(v, list)
        and len(v) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    ):
        return complex(v[0], v[1])
    raise SymbolSpecError(f"{path}: expected [re, im], got {json.dumps(v)}")


def symbol_from_dict(node, path: str = "$") -> Symbol:
    if not isinstance(node, dict) or "type" not in node:
        raise SymbolSpecError(f"{path}: expected an object with a 'type' key")
    kind = node["type"]
    if kind not in _FIELDS:
        raise SymbolSpecError(f"{path}: unknown node type {kind!r}")
    extra = set(node) - _FIELDS[kind] - {"type"}
    if extra:
        raise SymbolSpecError(f"{path}: unexpected keys {sorted(extra)} for {kind!r}")
    required = _FIELDS[kind] - ({"rotation"} if kind == "blaschke" else set())
    missing = required - set(node)
    if missing:
        raise SymbolSpecError(f"{path}: missing keys {sorted(missing)} for {kind!r}")
    try:
        if kind == "mobius":
            return Mobius(_cplx(node["alpha"], path + ".alpha"))
        if kind == "blaschke":
            zs = node["zeros"]
            if not isinstance(zs, list):
                raise SymbolSpecError(f"{path}.zeros: expected a list")
            rot = _cplx(node.get("rotation", [1, 0]), path + ".rotation")
            return Blaschke(tuple(_cplx(z, f"{path}.zeros[{i}]") for i, z in enumerate(zs)), rot)
        if kind == "poly":
            cs = node["coeffs"]
            if not isinstance(cs, list) or not cs:
                raise SymbolSpecError(f"{path}.coeffs: expected a non-empty list")
            return Polynomial(tuple(_cplx(c, f"{path}.coeffs[{i}]") for i, c in enumerate(cs)))
        if kind == "compose":
            return Compose(symbol_from_dict(node["outer"], path + ".outer"), symbol_from_dict(node["inner"], path + ".inner"))
        if kind == "product":
            return Product(symbol_from_dict(node["left"], path + ".left"), symbol_from_dict(node["right"], path + ".right"))
        if kind == "const":
            return Constant(_cplx(node["c"], path + ".c"))
        return Identity()
    except SymbolError as exc:
        raise SymbolSpecError(f"{path}: {exc}") from exc


def _pair(c: complex) -> list:
    return [c.real, c.imag]


def symbol_to_dict(sym: Symbol) -> dict:
    """Canonical spec for a symbol (inverse of symbol_from_dict)."""
    if isinstance(sym, Mobius):
        return {"type": "mobius", "alpha": _pair(sym.alpha)}
    if isinstance(sym, Blaschke):
        return {"type": "blaschke", "zeros": [_pair(a) for a in sym.zeros], "rotation": _pair(sym.rotation)}
    if isinstance(sym, Polynomial):
        return {"type": "poly", "coeffs": [_pair(c) for c in sym.coeffs]}
    if isinstance(sym, Compose):
        return {"type": "compose", "outer": symbol_to_dict(sym.outer), "inner": symbol_to_dict(sym.inner)}
    if isinstance(sym, Product):
        return {"type": "product", "left": symbol_to_dict(sym.left), "right": symbol_to_dict(sym.right)}
    if isinstance(sym, Constant):
        return {"type": "const", "c": _pair(sym.c)}
    if isinstance(sym, Identity):
        return {"type": "identity"}
    raise TypeError(f"not a symbol: {sym!r}")


def loads_symbol(text: str) -> Symbol:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SymbolSpecError(exc.msg, exc.lineno, exc.colno) from exc
    try:
        return symbol_from_dict(data)
    except SymbolSpecError as exc:
        line, col = _locate(text, exc)
        if line is None:
            raise
        raise SymbolSpecError(str(exc), line, col) from exc


def _locate(text: str, exc: SymbolSpecError):
    """Best-effort line/column of the innermost key named in the error path."""
    msg = str(exc)
    path = msg.split(":", 1)[0]
    key = path.rsplit(".", 1)[-1].split("[", 1)[0] if "." in path else None
    idx = text.find(f'"{key}"') if key else text.find("{")
    if idx < 0:
        return None, None
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def parse_symbol(path, samples: int = 1024, tol: float = 1e-6) -> Symbol:
    """Read, validate and self-map-check a symbol spec file."""
    text = Path(path).read_text()
    sym = loads_symbol(text)
    report = validate_self_map(sym, samples, tol)
    log.info(
        "self-map check for %s: max|psi|=%.17g accepted=%s boundary_touching=%s",
        path, report.max_modulus, report.accepted, report.boundary_touching,
    )
    if not report.accepted:
        raise SelfMapError(f"{path}: not a self-map of the disk (max |psi| = {report.max_modulus:.6g})")
    return sym


def dumps_symbol(sym: Symbol) -> str:
    return json.dumps(symbol_to_dict(sym), indent=2)
