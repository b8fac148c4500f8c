"""
Manifest loading.

A manifest is a JSON document describing one polarized tropical manifold:
cells, affine data, gluing data, slab functions and cycles. See
docs/MANIFEST_FORMAT.md for the grammar. Errors carry the manifest line
they refer to whenever it can be located.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .affine_structure import AffineData, MonodromyGenerator, MPAFunction
from .errors import ComplexError, ManifestError, TropicalError
from .period_engine import GluingData, SlabFunction
from .polyhedral_complex import BarycentricSubdivision, Cell, PolyComplex, Side, barycentric_subdivide, validate
from .tropical_cycles import (
    CycleEdge,
    CycleVertex,
    SkeletonWeights,
    TropicalOneCycle,
    from_skeleton_weights,
)

logger = logging.getLogger(__name__)

SECTIONS = {"name", "dimension", "cells", "affine", "gluing", "slabs", "cycles", "options", "description"}


@dataclass
class SkeletonSpec:
    weights: SkeletonWeights
    choose: str = "lower"


@dataclass
class Manifest:
    name: str
    n: int
    complex: PolyComplex
    affine: AffineData
    gluing: GluingData
    slabs: Dict[str, SlabFunction] = field(default_factory=dict)
    cycles: Dict[str, TropicalOneCycle] = field(default_factory=dict)
    skeletons: Dict[str, SkeletonSpec] = field(default_factory=dict)
    options: Dict = field(default_factory=dict)
    path: Optional[Path] = None

    def generated_cycles(self) -> Dict[str, TropicalOneCycle]:
        return {name: from_skeleton_weights(self.affine, spec.weights, spec.choose, name)
                for name, spec in sorted(self.skeletons.items())}

    def all_cycles(self) -> Dict[str, TropicalOneCycle]:
        cycles = dict(self.cycles)
        cycles.update(self.generated_cycles())
        return cycles


class _Lines:
    """Best-effort mapping from ids back to manifest lines."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def of(self, *tokens: str) -> Optional[int]:
        for i, line in enumerate(self.lines, 1):
            if all(f'"{tok}"' in line for tok in tokens):
                return i
        return None


def _coefficient(value, where: str, line: Optional[int]):
    """int, "p/q" -> Fraction, float, or [re, im] -> complex."""
    if isinstance(value, bool):
        raise ManifestError("Syntax", f"{where}: boolean is not a coefficient", line)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return complex(value)
    if isinstance(value, str) and re.fullmatch(r"\s*-?\d+\s*(/\s*\d+\s*)?", value):
        return Fraction(value.replace(" ", ""))
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise ManifestError("Syntax", f"{where}: cannot read coefficient {value!r}", line)


def _int_list(value, length: int, where: str, line: Optional[int]) -> Tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise ManifestError("Syntax", f"{where}: expected a list of integers", line)
    if len(value) != length:
        raise ManifestError("DimensionMismatch", f"{where}: expected {length} entries, got {len(value)}", line)
    return tuple(value)


def _require(data: Dict, key: str, where: str, lines: _Lines):
    if key not in data:
        raise ManifestError("Syntax", f"{where}: missing '{key}'", lines.of(key))
    return data[key]


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

def _parse_cells(data, lines: _Lines) -> Tuple[PolyComplex, int]:
    if not isinstance(data, list) or not data:
        raise ManifestError("Syntax", "'cells' must be a non-empty list", lines.of("cells"))
    cells: List[Cell] = []
    for entry in data:
        if not isinstance(entry, dict) or "id" not in entry or "dim" not in entry:
            raise ManifestError("Syntax", f"cell entry {entry!r} needs 'id' and 'dim'", lines.of("cells"))
        cid = str(entry["id"])
        facets = []
        for f in entry.get("facets", []):
            if not (isinstance(f, list) and len(f) == 2 and isinstance(f[1], int)):
                raise ManifestError("Syntax", f"cell '{cid}': facets are [id, ±1] pairs", lines.of(cid))
            facets.append((str(f[0]), f[1]))
        cells.append(Cell(cid, int(entry["dim"]), facets, int(entry.get("orientation", 1))))

    ids = {c.id: c for c in cells}
    for c in cells:
        for f, _ in c.facets:
            if f not in ids:
                raise ManifestError("DanglingId", f"cell '{c.id}' has unknown facet '{f}'", lines.of(c.id, f))
            if ids[f].dim != c.dim - 1:
                raise ManifestError("DimensionMismatch",
                                    f"facet '{f}' of '{c.id}' has dimension {ids[f].dim}, expected {c.dim - 1}",
                                    lines.of(c.id, f))
    try:
        P = PolyComplex(cells)
    except ComplexError as exc:
        raise ManifestError("Syntax", exc.message, lines.of("cells"))
    return P, P.n


def _side(P: PolyComplex, piece_parent: str, entry: Dict, where: str, lines: _Lines) -> Side:
    cell = str(entry.get("side", ""))
    if cell not in P.cells:
        raise ManifestError("DanglingId", f"{where}: unknown side cell '{cell}'", lines.of(cell) or lines.of("side"))
    slots = P.slots_of(piece_parent, cell)
    if not slots:
        raise ManifestError("DanglingId", f"{where}: '{cell}' is not adjacent to '{piece_parent}'", lines.of(cell))
    if "slot" in entry:
        if entry["slot"] not in slots:
            raise ManifestError("DanglingId", f"{where}: slot {entry['slot']} of '{cell}' is not '{piece_parent}'",
                                lines.of(cell))
        return Side(cell, entry["slot"])
    if len(slots) > 1:
        raise ManifestError("Syntax", f"{where}: '{cell}' meets '{piece_parent}' twice; give a slot", lines.of(cell))
    return Side(cell, slots[0])


def _pieces(bary: BarycentricSubdivision, key: str, where: str, lines: _Lines) -> List[str]:
    """A key naming a codimension-one cell expands to all of its pieces."""
    P = bary.base
    if key in P.cells and P.dim(key) == P.n - 1:
        return bary.pieces_of(key)
    if key in bary.flags and key in set(bary.pieces()):
        return [key]
    raise ManifestError("DanglingId", f"{where}: '{key}' is neither a codimension-one cell nor a piece",
                        lines.of(key))


def _parse_affine(P: PolyComplex, n: int, data: Dict, lines: _Lines) -> AffineData:
    embedding = _require(data, "embedding", "affine", lines)
    for sigma in embedding:
        if sigma not in P.cells:
            raise ManifestError("DanglingId", f"embedding of unknown cell '{sigma}'", lines.of(sigma))
    for sigma, coords in embedding.items():
        points = coords.values() if isinstance(coords, dict) else coords
        for p in points:
            if not isinstance(p, list) or len(p) != n:
                raise ManifestError("DimensionMismatch", f"embedding of '{sigma}': point {p!r} needs {n} coordinates",
                                    lines.of(sigma))
        if isinstance(coords, dict):
            for v in coords:
                if v not in P.cells:
                    raise ManifestError("DanglingId", f"embedding of '{sigma}' names unknown vertex '{v}'",
                                        lines.of(v))

    bary = barycentric_subdivide(P)
    transports = data.get("transports", {})
    for key, M in transports.items():
        _pieces(bary, key, "transport", lines)
        if not isinstance(M, list) or len(M) != n or any(not isinstance(r, list) or len(r) != n for r in M):
            raise ManifestError("DimensionMismatch", f"transport '{key}' is not {n}x{n}", lines.of(key))

    discriminant = []
    for entry in data.get("discriminant", []):
        cell = str(entry.get("cell", ""))
        ref = str(entry.get("reference", ""))
        for c in (cell, ref):
            if c not in P.cells:
                raise ManifestError("DanglingId", f"discriminant entry names unknown cell '{c}'", lines.of(c))
        M = entry.get("matrix")
        if not isinstance(M, list) or len(M) != n or any(len(r) != n for r in M):
            raise ManifestError("DimensionMismatch", f"monodromy at '{cell}' is not {n}x{n}", lines.of(cell))
        discriminant.append(MonodromyGenerator(cell, tuple(tuple(r) for r in M), ref))

    refined = bool(data.get("refined", False))
    kinks: Dict[str, int] = {}
    for key, value in data.get("kinks", {}).items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise ManifestError("Syntax", f"kink on '{key}' must be an integer", lines.of(key))
        if not refined and key not in P.cells:
            raise ManifestError("Syntax", f"per-piece kink on '{key}' needs \"refined\": true", lines.of(key))
        for piece in _pieces(bary, key, "kinks", lines):
            kinks[piece] = value

    return AffineData(P, embedding, transports, discriminant, MPAFunction(kinks, refined), bary)


def _parse_gluing(affine: AffineData, data: Dict, lines: _Lines) -> GluingData:
    values = {}
    for entry in data.get("values", []):
        key = str(entry.get("piece", ""))
        s = entry.get("s")
        if not isinstance(s, list):
            raise ManifestError("Syntax", f"gluing on '{key}' needs a list 's'", lines.of(key))
        if len(s) != affine.n:
            raise ManifestError("DimensionMismatch", f"gluing on '{key}' needs {affine.n} values", lines.of(key))
        for piece in _pieces(affine.bary, key, "gluing", lines):
            side = _side(affine.complex, affine.bary.ancestor(piece), entry, f"gluing on '{key}'", lines)
            values[(piece, side)] = [_coefficient(x, f"gluing on '{key}'", lines.of(key)) for x in s]
    return GluingData(affine.n, values, bool(data.get("strict", False)))


def _parse_slabs(affine: AffineData, data: List, lines: _Lines) -> Dict[str, SlabFunction]:
    slabs: Dict[str, SlabFunction] = {}
    for entry in data:
        key = str(entry.get("carrier", ""))
        line = lines.of(key)
        order = entry.get("order", 0)
        terms = {}
        for term in entry.get("terms", []):
            if not (isinstance(term, list) and len(term) == 3):
                raise ManifestError("Syntax", f"slab '{key}': terms are [monomial, t-power, coefficient]", line)
            m = _int_list(term[0], affine.n, f"slab '{key}' monomial", line)
            terms[(m, int(term[1]))] = _coefficient(term[2], f"slab '{key}'", line)
        for piece in _pieces(affine.bary, key, "slab", lines):
            slab = SlabFunction(piece, order, dict(terms), affine.n)
            if slab.tangency_defects(affine):
                raise ManifestError("DimensionMismatch",
                                    f"slab '{key}': exponents {slab.tangency_defects(affine)} are not tangent to the slab",
                                    line)
            slabs[piece] = slab
    return slabs


def _parse_cycle(affine: AffineData, entry: Dict, lines: _Lines):
    name = str(_require(entry, "name", "cycle", lines))
    line = lines.of(name)
    if "skeleton" in entry:
        weights = entry["skeleton"]
        for omega, a in weights.items():
            if omega not in affine.complex.cells:
                raise ManifestError("DanglingId", f"cycle '{name}': skeleton weight on unknown cell '{omega}'",
                                    lines.of(omega))
            if not isinstance(a, int):
                raise ManifestError("Syntax", f"cycle '{name}': weights must be integers", line)
        return name, SkeletonSpec(SkeletonWeights(dict(weights)), entry.get("choose", "lower"))

    vertices: Dict[str, CycleVertex] = {}
    for v in _require(entry, "vertices", f"cycle '{name}'", lines):
        vid, cell = str(v.get("id", "")), str(v.get("cell", ""))
        if cell not in affine.complex.cells:
            raise ManifestError("DanglingId", f"cycle '{name}': vertex '{vid}' in unknown cell '{cell}'",
                                lines.of(vid, cell) or line)
        vertices[vid] = CycleVertex(vid, cell)
    edges: List[CycleEdge] = []
    pieces = set(affine.bary.pieces())
    for e in _require(entry, "edges", f"cycle '{name}'", lines):
        eid = str(e.get("id", ""))
        eline = lines.of(eid) or line
        for end in ("source", "target"):
            if e.get(end) not in vertices:
                raise ManifestError("DanglingId", f"cycle '{name}': edge '{eid}' has unknown {end} '{e.get(end)}'",
                                    eline)
        xi = _int_list(e.get("xi"), affine.n, f"cycle '{name}' edge '{eid}' ξ", eline)
        route = []
        for step in e.get("route", []):
            piece = step[0] if isinstance(step, list) else step
            if piece not in pieces:
                raise ManifestError("DanglingId", f"cycle '{name}': edge '{eid}' crosses unknown piece '{piece}'",
                                    lines.of(piece) or eline)
            route.append((piece, int(step[1])) if isinstance(step, list) else piece)
        edges.append(CycleEdge(eid, e["source"], e["target"], xi, route))
    return name, TropicalOneCycle(name, vertices, edges)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def parse(text: str, path: Optional[Path] = None) -> Manifest:
    lines = _Lines(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError("Syntax", exc.msg, exc.lineno)
    if not isinstance(data, dict):
        raise ManifestError("Syntax", "manifest must be a JSON object", 1)
    for key in data:
        if key not in SECTIONS:
            raise ManifestError("Syntax", f"unknown section '{key}'", lines.of(key))

    P, n = _parse_cells(_require(data, "cells", "manifest", lines), lines)
    if "dimension" in data and data["dimension"] != n:
        raise ManifestError("DimensionMismatch", f"declared dimension {data['dimension']} but top cells have {n}",
                            lines.of("dimension"))
    report = validate(P)
    if not report.is_valid:
        first = report.errors[0]
        raise ComplexError(first["kind"], f"{first['subject']}: {first['message']}", lines.of(first["subject"]))

    try:
        affine = _parse_affine(P, n, _require(data, "affine", "manifest", lines), lines)
        gluing = _parse_gluing(affine, data.get("gluing", {}), lines)
        slabs = _parse_slabs(affine, data.get("slabs", []), lines)
    except ManifestError:
        raise
    except TropicalError as exc:
        exc.line = exc.line or lines.of("affine")
        raise

    cycles: Dict[str, TropicalOneCycle] = {}
    skeletons: Dict[str, SkeletonSpec] = {}
    for entry in data.get("cycles", []):
        name, cycle = _parse_cycle(affine, entry, lines)
        if name in cycles or name in skeletons:
            raise ManifestError("Syntax", f"duplicate cycle name '{name}'", lines.of(name))
        if isinstance(cycle, SkeletonSpec):
            skeletons[name] = cycle
        else:
            cycles[name] = cycle

    name = str(data.get("name", path.stem if path else "manifest"))
    logger.debug("manifest %s: n=%d, %d cells, %d cycles, %d skeleton cycles",
                 name, n, len(P.cells), len(cycles), len(skeletons))
    return Manifest(name, n, P, affine, gluing, slabs, cycles, skeletons, dict(data.get("options", {})), path)


def load_manifest(path: Union[str, Path]) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError("Syntax", f"manifest not found: {path}")
    return parse(path.read_text(encoding="utf-8"), path)
