"""
Combinatorial polyhedral complexes with oriented cells.

A cell lists its facets as (facet id, raw sign) slots and carries an
orientation flag; incidence signs are derived as raw sign times both flags.
Facets may repeat inside one cell only for one-dimensional complexes, which
is how a circle with a single vertex is described.

The barycentric subdivision is built from flags of the face poset. Its cells
are named by their flags, e.g. ``v0<e0<f1`` or ``v0<e0#1`` when the facet
``v0`` occurs twice in ``e0``.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import ComplexError
from .validation import ValidationReport

logger = logging.getLogger(__name__)

FLAG_SEP = "<"
SLOT_MARK = "#"


@dataclass(frozen=True)
class Side:
    """One coface slot of a facet: the facet sits at ``cell.facets[slot]``."""

    cell: str
    slot: int


@dataclass
class Cell:
    id: str
    dim: int
    facets: List[Tuple[str, int]] = field(default_factory=list)
    orientation: int = 1

    def facet_ids(self) -> List[str]:
        return [f for f, _ in self.facets]


@dataclass(frozen=True)
class RefinedCodim1Cell:
    """A piece of a codimension-one cell cut out by the barycentric subdivision."""

    parent: str
    piece: str


class PolyComplex:
    """Oriented polyhedral complex, immutable once built."""

    def __init__(self, cells: Iterable[Cell]):
        self.cells: Dict[str, Cell] = {}
        for cell in cells:
            if cell.id in self.cells:
                raise ComplexError("Invalid", f"duplicate cell id '{cell.id}'")
            self.cells[cell.id] = cell
        self.n = max((c.dim for c in self.cells.values()), default=-1)

        self._by_dim: Dict[int, List[str]] = defaultdict(list)
        for cid in sorted(self.cells):
            self._by_dim[self.cells[cid].dim].append(cid)

        self._cofaces: Dict[str, List[Side]] = defaultdict(list)
        for cid in sorted(self.cells):
            for slot, (f, _) in enumerate(self.cells[cid].facets):
                self._cofaces[f].append(Side(cid, slot))

        self._closure: Dict[str, FrozenSet[str]] = {}
        self._boundary: Optional[FrozenSet[str]] = None

    # -- basic queries -----------------------------------------------------

    def __contains__(self, cell_id: str) -> bool:
        return cell_id in self.cells

    def cell(self, cell_id: str) -> Cell:
        try:
            return self.cells[cell_id]
        except KeyError:
            raise ComplexError("DanglingFace", f"unknown cell '{cell_id}'")

    def dim(self, cell_id: str) -> int:
        return self.cell(cell_id).dim

    def ids(self, dim: int) -> List[str]:
        return list(self._by_dim.get(dim, []))

    def maximal_cells(self) -> List[str]:
        return self.ids(self.n)

    def cofaces(self, cell_id: str) -> List[Side]:
        return list(self._cofaces.get(cell_id, []))

    def has_loops(self) -> bool:
        return any(len(set(c.facet_ids())) != len(c.facets) for c in self.cells.values())

    def slots_of(self, tau: str, sigma: str) -> List[int]:
        return [i for i, (f, _) in enumerate(self.cell(sigma).facets) if f == tau]

    def epsilon(self, tau: str, sigma: str, slot: Optional[int] = None) -> int:
        """Incidence sign ε_{τ⊂σ} of a facet slot."""
        cell = self.cell(sigma)
        if slot is None:
            slots = self.slots_of(tau, sigma)
            if len(slots) != 1:
                raise ComplexError(
                    "Invalid", f"'{tau}' is not a unique facet of '{sigma}' (slots {slots})")
            slot = slots[0]
        facet, sign = cell.facets[slot]
        if facet != tau:
            raise ComplexError("Invalid", f"slot {slot} of '{sigma}' is '{facet}', not '{tau}'")
        return sign * self.cell(tau).orientation * cell.orientation

    def closure(self, cell_id: str) -> FrozenSet[str]:
        """All faces of a cell, the cell included."""
        if cell_id not in self._closure:
            faces = {cell_id}
            for f in self.cell(cell_id).facet_ids():
                if f in self.cells:
                    faces |= self.closure(f)
            self._closure[cell_id] = frozenset(faces)
        return self._closure[cell_id]

    def is_face(self, tau: str, sigma: str) -> bool:
        return tau in self.closure(sigma)

    def vertices(self, cell_id: str) -> List[str]:
        return sorted(c for c in self.closure(cell_id) if self.cells[c].dim == 0)

    def cells_containing(self, tau: str, dim: Optional[int] = None) -> List[str]:
        return sorted(c for c in self.cells
                      if tau in self.closure(c) and (dim is None or self.cells[c].dim == dim))

    def boundary_cells(self) -> FrozenSet[str]:
        """Cells of ∂B: closures of (n−1)-cells with a single coface slot."""
        if self._boundary is None:
            cells = set()
            for rho in self.ids(self.n - 1):
                if len(self._cofaces.get(rho, [])) == 1:
                    cells |= self.closure(rho)
            self._boundary = frozenset(cells)
        return self._boundary

    def is_boundary(self, cell_id: str) -> bool:
        return cell_id in self.boundary_cells()

    def interior_sides(self, rho: str) -> Tuple[Side, Side]:
        """Coface slots (σ₋, σ₊) of an interior codimension-one cell.

        σ₋ is the side inducing ε = +1 and σ₊ the side inducing ε = −1.
        """
        sides = self.cofaces(rho)
        if len(sides) != 2 or self.dim(rho) != self.n - 1:
            raise ComplexError("NonManifold", f"'{rho}' is not an interior codimension-one cell")
        signs = [self.epsilon(rho, s.cell, s.slot) for s in sides]
        if signs[0] == signs[1]:
            raise ComplexError("NonOrientable", f"cofaces of '{rho}' induce the same orientation")
        return (sides[0], sides[1]) if signs[0] == 1 else (sides[1], sides[0])

    # -- chains ------------------------------------------------------------

    def boundary_matrix(self, dim: int,
                        rows: Optional[Sequence[str]] = None,
                        cols: Optional[Sequence[str]] = None) -> List[List[int]]:
        """Matrix of ∂: C_dim → C_{dim−1} in the given (default sorted) bases."""
        rows = list(rows) if rows is not None else self.ids(dim - 1)
        cols = list(cols) if cols is not None else self.ids(dim)
        index = {r: i for i, r in enumerate(rows)}
        M = [[0] * len(cols) for _ in rows]
        for j, sigma in enumerate(cols):
            for slot, (tau, _) in enumerate(self.cell(sigma).facets):
                if tau in index:
                    M[index[tau]][j] += self.epsilon(tau, sigma, slot)
        return M

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(self.ids(d)) for d in range(self.n + 1))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(P: PolyComplex) -> ValidationReport:
    """Check incidence counts, face closure, ∂² = 0 and orientability."""
    report = ValidationReport("polyhedral_complex")
    if P.n < 0:
        report.add_error("NonManifold", "complex", "no cells")
        return report

    for cid, cell in sorted(P.cells.items()):
        if FLAG_SEP in cid or SLOT_MARK in cid:
            report.add_error("Invalid", cid, f"cell ids may not contain '{FLAG_SEP}' or '{SLOT_MARK}'")
        if cell.orientation not in (1, -1):
            report.add_error("Invalid", cid, "orientation flag must be ±1")
        if cell.dim > 0 and not cell.facets:
            report.add_error("DanglingFace", cid, "cell of positive dimension without facets")
        for f, sign in cell.facets:
            if f not in P.cells:
                report.add_error("DanglingFace", cid, f"facet '{f}' does not exist")
            elif P.cells[f].dim != cell.dim - 1:
                report.add_error("DanglingFace", cid,
                                 f"facet '{f}' has dimension {P.cells[f].dim}, expected {cell.dim - 1}")
            if sign not in (1, -1):
                report.add_error("Invalid", cid, f"raw sign of facet '{f}' must be ±1")
        if len(set(cell.facet_ids())) != len(cell.facets) and P.n != 1:
            report.add_error("NonManifold", cid, "repeated facets are only allowed in dimension one")
    if not report.is_valid:
        return report

    for cid in sorted(P.cells):
        if P.cells[cid].dim < P.n and not P.cofaces(cid):
            report.add_error("NonManifold", cid, "cell is not a face of any maximal cell")

    for rho in P.ids(P.n - 1):
        count = len(P.cofaces(rho))
        if count not in (1, 2):
            report.add_error("NonManifold", rho,
                             f"codimension-one cell has {count} coface slots (expected 1 or 2)")
        elif count == 2:
            a, b = P.cofaces(rho)
            if P.epsilon(rho, a.cell, a.slot) == P.epsilon(rho, b.cell, b.slot):
                report.add_error("NonOrientable", rho,
                                 f"'{a.cell}' and '{b.cell}' induce the same orientation")

    if P.n == 2:
        _check_vertex_links(P, report)

    for d in range(2, P.n + 1):
        upper = P.boundary_matrix(d)
        lower = P.boundary_matrix(d - 1)
        for i, row in enumerate(lower):
            for j in range(len(upper[0]) if upper else 0):
                if sum(row[k] * upper[k][j] for k in range(len(row))):
                    report.add_error("NonOrientable", P.ids(d)[j],
                                     f"∂∂ ≠ 0 at '{P.ids(d - 2)[i]}'")

    if report.is_valid:
        report.add_info("summary", "complex",
                        f"n={P.n}, cells per dimension "
                        f"{[len(P.ids(d)) for d in range(P.n + 1)]}, "
                        f"{len([c for c in P.boundary_cells() if P.dim(c) == P.n - 1])} boundary facets")
    return report


def _check_vertex_links(P: PolyComplex, report: ValidationReport):
    """In dimension two every vertex link must be a single circle or arc."""
    for v in P.ids(0):
        edges = [s.cell for s in P.cofaces(v)]
        adjacency: Dict[str, List[str]] = defaultdict(list)
        for f in P.cells_containing(v, dim=2):
            at_v = [e for e in P.cell(f).facet_ids() if v in P.cell(e).facet_ids()]
            if len(at_v) != 2:
                report.add_error("NonManifold", v, f"face '{f}' meets the vertex in {len(at_v)} edges")
                continue
            adjacency[at_v[0]].append(at_v[1])
            adjacency[at_v[1]].append(at_v[0])
        if not edges:
            continue
        seen = {edges[0]}
        queue = deque([edges[0]])
        while queue:
            e = queue.popleft()
            for other in adjacency[e]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        if len(seen) != len(set(edges)):
            report.add_error("NonManifold", v, "vertex link is disconnected")


def incidence_sign(P: PolyComplex, tau: str, sigma: str, slot: Optional[int] = None) -> int:
    """ε_{τ⊂σ}; τ must be a facet of σ."""
    if tau not in P.cell(sigma).facet_ids():
        raise ComplexError("Invalid", f"'{tau}' is not a facet of '{sigma}'")
    return P.epsilon(tau, sigma, slot)


def _fraction_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    A = [[Fraction(x) for x in row] for row in rows]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            q = A[i][c] / A[c][c]
            A[i] = [a - q * b for a, b in zip(A[i], A[c])]
    return det


def orientation_sign(outward_normal: Sequence, facet_basis: Sequence[Sequence],
                     cell_basis: Sequence[Sequence]) -> int:
    """+1 iff (outward normal, facet orientation) is a positive frame of the cell."""
    lhs = _fraction_det(list(zip(*([outward_normal] + list(facet_basis)))))
    rhs = _fraction_det(list(zip(*cell_basis)))
    if lhs == 0 or rhs == 0:
        raise ComplexError("Invalid", "degenerate frame in orientation_sign")
    return 1 if (lhs > 0) == (rhs > 0) else -1


# ---------------------------------------------------------------------------
# Barycentric subdivision
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Flag:
    """Chain c_0 < ... < c_k; ``slots[j]`` picks the occurrence of c_{j−1} in c_j."""

    cells: Tuple[str, ...]
    slots: Tuple[Optional[int], ...]

    @property
    def id(self) -> str:
        parts = [self.cells[0]]
        for c, s in zip(self.cells[1:], self.slots[1:]):
            parts.append(c if s is None else f"{c}{SLOT_MARK}{s}")
        return FLAG_SEP.join(parts)

    @property
    def dim(self) -> int:
        return len(self.cells) - 1

    @property
    def ancestor(self) -> str:
        return self.cells[-1]

    def drop(self, i: int) -> "Flag":
        cells = self.cells[:i] + self.cells[i + 1:]
        slots = list(self.slots[:i] + self.slots[i + 1:])
        if slots:
            slots[0] = None
        if 0 < i < len(self.cells) - 1:
            slots[i] = None
        return Flag(cells, tuple(slots))


class BarycentricSubdivision:
    """Simplicial refinement of a complex together with its ancestry map."""

    def __init__(self, base: PolyComplex, flags: Dict[str, Flag], complex_: PolyComplex):
        self.base = base
        self.flags = flags
        self.complex = complex_
        self.n = base.n

    def ancestor(self, bary_id: str) -> str:
        return self.flags[bary_id].ancestor

    def flag(self, bary_id: str) -> Flag:
        return self.flags[bary_id]

    def chambers(self) -> List[str]:
        return self.complex.ids(self.n)

    def pieces(self) -> List[str]:
        return [f for f in self.complex.ids(self.n - 1)
                if self.base.dim(self.ancestor(f)) == self.n - 1]

    def walls(self) -> List[str]:
        return [f for f in self.complex.ids(self.n - 1)
                if self.base.dim(self.ancestor(f)) == self.n]

    def pieces_of(self, rho: str) -> List[str]:
        return [p for p in self.pieces() if self.ancestor(p) == rho]

    def piece_vertex(self, piece: str) -> str:
        """The 𝒫-vertex at the start of the piece's flag."""
        return self.flags[piece].cells[0]

    def side_chamber(self, piece: str, side: Side) -> str:
        """Chamber obtained by extending the piece's flag through a coface slot."""
        f = self.flags[piece]
        slot = side.slot if len(self.base.slots_of(f.ancestor, side.cell)) > 1 else None
        return Flag(f.cells + (side.cell,), f.slots + (slot,)).id

    def chamber_side(self, chamber: str) -> Side:
        """Coface slot of the chamber's codimension-one element in its maximal cell."""
        f = self.flags[chamber]
        rho, sigma = f.cells[-2], f.cells[-1]
        slot = f.slots[-1]
        if slot is None:
            slot = self.base.slots_of(rho, sigma)[0]
        return Side(sigma, slot)

    def bary_edge(self, vertex_cell: str, side: Side) -> str:
        """Bary edge from b(vertex_cell) to b(side.cell), honouring loop slots."""
        repeated = len(self.base.slots_of(vertex_cell, side.cell)) > 1
        return Flag((vertex_cell, side.cell), (None, side.slot if repeated else None)).id

    def chambers_containing(self, bary_id: str) -> List[str]:
        return self.complex.cells_containing(bary_id, dim=self.n)


def _up_relations(P: PolyComplex, c: str) -> List[Tuple[str, Optional[int]]]:
    out = []
    for d in P.cells_containing(c):
        if d == c:
            continue
        if P.dim(d) == P.dim(c) + 1:
            slots = P.slots_of(c, d)
            if len(slots) > 1:
                out.extend((d, s) for s in slots)
                continue
        out.append((d, None))
    return out


def barycentric_subdivide(P: PolyComplex) -> BarycentricSubdivision:
    """Barycentric subdivision with coherent orientations on top simplices."""
    up = {c: _up_relations(P, c) for c in P.cells}

    flags: Dict[str, Flag] = {}
    stack = [Flag((c,), (None,)) for c in sorted(P.cells)]
    while stack:
        f = stack.pop()
        flags[f.id] = f
        for d, slot in up[f.cells[-1]]:
            stack.append(Flag(f.cells + (d,), f.slots + (slot,)))

    def orientation(f: Flag) -> int:
        if f.dim != P.n:
            return 1
        o = 1
        for j in range(1, len(f.cells)):
            o *= (-1) ** j * P.epsilon(f.cells[j - 1], f.cells[j], f.slots[j])
        return o

    cells = []
    for fid, f in flags.items():
        facets = []
        if f.dim > 0:
            facets = [(f.drop(i).id, (-1) ** i) for i in range(len(f.cells))]
        cells.append(Cell(fid, f.dim, facets, orientation(f)))

    bary = PolyComplex(cells)
    logger.debug("barycentric subdivision: %d flags, cells per dimension %s",
                 len(flags), [len(bary.ids(d)) for d in range(bary.n + 1)])
    return BarycentricSubdivision(P, flags, bary)


def refined_cells(P: PolyComplex, bary: Optional[BarycentricSubdivision] = None) -> List[RefinedCodim1Cell]:
    """Pieces of every codimension-one cell (one per vertex for n = 1)."""
    bary = bary or barycentric_subdivide(P)
    return [RefinedCodim1Cell(bary.ancestor(p), p) for p in bary.pieces()]
