"""Model export to MPS and CPLEX-LP text, plus an MPS reader for round-trips.

Naming scheme (documented contract): columns are named from their structured
identity (`s_<robot>_<k>`, `v_<robot>_<k>`, `mu_<robot>_<k>`, `sg_<robot>_<k>`,
`pi_<winner>_<loser>_c<comp>`, `e{p|q}{i|o}_<a>_<b>_c<comp>_<i|j>_<k>`), rows
from their constraint tags with non-alphanumeric characters mapped to `_`.
Both writers are deterministic: the same model produces byte-identical files.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field

from .model import MilpModel

__all__ = ["ExportError", "export_model", "write_mps", "write_lp",
           "read_mps", "ParsedMps"]

_NAME_RE = re.compile(r"[^A-Za-z0-9_]")


class ExportError(ValueError):
    pass


def _num(v: float) -> str:
    return f"{v:.12g}"


def _row_names(model: MilpModel) -> list[str]:
    names = []
    seen = {}
    for con in model.constraints:
        base = _NAME_RE.sub("_", con.tag).strip("_")
        n = seen.get(base, 0)
        seen[base] = n + 1
        names.append(base if n == 0 else f"{base}_{n}")
    return names


def write_mps(model: MilpModel) -> str:
    """Fixed-layout MPS with OBJSENSE MAX and integer markers."""
    if model.n_cols == 0 or not model.constraints:
        raise ExportError("refusing to export an empty model")
    col_names = [c.index.name() for c in model.columns]
    row_names = _row_names(model)
    out = io.StringIO()
    out.write(f"NAME          PATHSYNC_{model.meta.get('hash', 'MODEL')}\n")
    out.write("OBJSENSE\n    MAX\n")
    out.write("ROWS\n")
    out.write(" N  OBJ\n")
    sense_code = {"<=": "L", ">=": "G", "=": "E"}
    for con, name in zip(model.constraints, row_names):
        out.write(f" {sense_code[con.sense]}  {name}\n")

    # column-major entries, in column order then row order
    per_col: list[list[tuple[str, float]]] = [[] for _ in range(model.n_cols)]
    for con, name in zip(model.constraints, row_names):
        for c, a in sorted(con.coeffs.items()):
            per_col[c].append((name, a))
    for c, w in model.objective.items():
        per_col[c].append(("OBJ", w))

    out.write("COLUMNS\n")
    in_int = False
    marker = 0
    for c, col in enumerate(model.columns):
        if col.is_binary != in_int:
            kind = "INTORG" if col.is_binary else "INTEND"
            out.write(f"    MARKER{marker:04d}  'MARKER'                 '{kind}'\n")
            in_int = col.is_binary
            marker += 1
        for row, a in per_col[c]:
            out.write(f"    {col_names[c]:<24}{row:<24}{_num(a)}\n")
    if in_int:
        out.write(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'\n")

    out.write("RHS\n")
    for con, name in zip(model.constraints, row_names):
        if con.rhs != 0.0:
            out.write(f"    RHS     {name:<24}{_num(con.rhs)}\n")
    out.write("BOUNDS\n")
    for c, col in enumerate(model.columns):
        out.write(f" LO BND     {col_names[c]:<24}{_num(col.lb)}\n")
        out.write(f" UP BND     {col_names[c]:<24}{_num(col.ub)}\n")
    out.write("ENDATA\n")
    return out.getvalue()


def write_lp(model: MilpModel) -> str:
    """CPLEX LP text format (maximization)."""
    if model.n_cols == 0 or not model.constraints:
        raise ExportError("refusing to export an empty model")
    col_names = [c.index.name() for c in model.columns]
    row_names = _row_names(model)
    out = io.StringIO()
    out.write(f"\\ pathsync model {model.meta.get('hash', '')}\n")
    out.write("Maximize\n obj:")
    for c in sorted(model.objective):
        w = model.objective[c]
        out.write(f" {'+' if w >= 0 else '-'} {_num(abs(w))} {col_names[c]}")
    out.write("\nSubject To\n")
    op = {"<=": "<=", ">=": ">=", "=": "="}
    for con, name in zip(model.constraints, row_names):
        out.write(f" {name}:")
        for c, a in sorted(con.coeffs.items()):
            out.write(f" {'+' if a >= 0 else '-'} {_num(abs(a))} {col_names[c]}")
        out.write(f" {op[con.sense]} {_num(con.rhs)}\n")
    out.write("Bounds\n")
    for c, col in enumerate(model.columns):
        out.write(f" {_num(col.lb)} <= {col_names[c]} <= {_num(col.ub)}\n")
    binaries = [col_names[c] for c in model.binary_columns()]
    if binaries:
        out.write("Binaries\n")
        for name in binaries:
            out.write(f" {name}\n")
    out.write("End\n")
    return out.getvalue()


def export_model(model: MilpModel, fmt: str = "mps") -> bytes:
    if fmt.lower() == "mps":
        return write_mps(model).encode()
    if fmt.lower() in ("lp", "lp-text"):
        return write_lp(model).encode()
    raise ExportError(f"unknown export format {fmt!r}")


@dataclass
class ParsedMps:
    name: str = ""
    maximize: bool = False
    rows: dict[str, str] = field(default_factory=dict)          # name -> sense
    rhs: dict[str, float] = field(default_factory=dict)
    entries: dict[tuple[str, str], float] = field(default_factory=dict)
    objective: dict[str, float] = field(default_factory=dict)
    bounds: dict[str, list[float]] = field(default_factory=dict)
    integers: set[str] = field(default_factory=set)
    column_order: list[str] = field(default_factory=list)


def read_mps(text: str) -> ParsedMps:
    """Parser for the subset written by `write_mps` (round-trip checks)."""
    parsed = ParsedMps()
    section = None
    in_int = False
    expect_objsense = False
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0].upper()
            if section == "NAME" and len(head) > 1:
                parsed.name = head[1]
            expect_objsense = section == "OBJSENSE"
            if section == "ENDATA":
                break
            continue
        fields = raw.split()
        if expect_objsense:
            parsed.maximize = fields[0].upper() in ("MAX", "MAXIMIZE")
            expect_objsense = False
            continue
        if section == "ROWS":
            code, name = fields
            if code == "N":
                continue
            parsed.rows[name] = {"L": "<=", "G": ">=", "E": "="}[code]
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                in_int = fields[2] == "'INTORG'"
                continue
            col = fields[0]
            if col not in parsed.bounds:
                parsed.bounds[col] = [0.0, float("inf")]
                parsed.column_order.append(col)
                if in_int:
                    parsed.integers.add(col)
            for row, val in zip(fields[1::2], fields[2::2]):
                if row == "OBJ":
                    parsed.objective[col] = float(val)
                else:
                    parsed.entries[(row, col)] = float(val)
        elif section == "RHS":
            for row, val in zip(fields[1::2], fields[2::2]):
                parsed.rhs[row] = float(val)
        elif section == "BOUNDS":
            kind, _bnd, col = fields[0], fields[1], fields[2]
            val = float(fields[3]) if len(fields) > 3 else 0.0
            entry = parsed.bounds.setdefault(col, [0.0, float("inf")])
            if col not in parsed.column_order:
                parsed.column_order.append(col)
            if kind == "LO":
                entry[0] = val
            elif kind == "UP":
                entry[1] = val
            elif kind == "FX":
                entry[0] = entry[1] = val
            elif kind == "BV":
                entry[0], entry[1] = 0.0, 1.0
                parsed.integers.add(col)
    return parsed
