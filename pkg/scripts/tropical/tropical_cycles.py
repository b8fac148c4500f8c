"""
Tropical 1-cycles on (B, 𝒫).

A cycle is stored combinatorially: vertices sit in maximal cells (or in
boundary cells when univalent), edges carry a section ξ in the frame of the
source vertex's cell and a route listing the pieces they cross. Everything
downstream (balancing, crossings, homology classes, periods) is read off by
walking these routes with the transports of the affine structure.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .affine_structure import AffineData, ConstructibleSheaf, Step
from .errors import AffineError, CycleError, SheafError
from .lattice_core import (
    IntCovector,
    IntVector,
    add_vectors,
    hstack,
    is_zero,
    matvec,
    pairing,
    rank,
    scale_vector,
    smith_normal_form,
    unimodular_inverse,
)
from .polyhedral_complex import Side
from .sheaf_homology import ChainComplex, HomologyResult, homology, simplicial_chain_complex
from .validation import ValidationReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CycleVertex:
    id: str
    cell: str


@dataclass
class CycleEdge:
    id: str
    source: str
    target: str
    xi: IntVector
    route: List[Step] = field(default_factory=list)


@dataclass
class Crossing:
    """One passage of an edge through a piece, seen from the side it enters."""

    edge: str
    piece: str
    parent: str
    from_side: Side
    to_side: Side
    xi_before: IntVector
    xi: IntVector
    d: IntCovector
    kappa: int
    traverse: int

    @property
    def pairing(self) -> int:
        return pairing(self.d, self.xi)


@dataclass
class SkeletonWeights:
    weights: Dict[str, int]


@dataclass
class TropicalOneCycle:
    name: str
    vertices: Dict[str, CycleVertex]
    edges: List[CycleEdge]

    def valency(self, vertex: str) -> int:
        return sum((e.source == vertex) + (e.target == vertex) for e in self.edges)

    def valency_sum(self) -> int:
        return sum(self.valency(v) for v in self.vertices)

    def scaled(self, m: int) -> "TropicalOneCycle":
        return TropicalOneCycle(f"{m}·{self.name}", dict(self.vertices),
                                [replace(e, xi=scale_vector(m, e.xi)) for e in self.edges])

    def reversed(self, affine: AffineData) -> "TropicalOneCycle":
        """−β: every edge turned around, carrying its ξ transported to the new first frame."""
        edges = []
        for e in self.edges:
            walk = walk_edge(affine, self, e)
            route = [(piece, -sign) for piece, sign in reversed(walk.steps)]
            edges.append(CycleEdge(e.id, e.target, e.source, walk.xi_end, route))
        return TropicalOneCycle(f"-{self.name}", dict(self.vertices), edges)

    def disjoint_union(self, other: "TropicalOneCycle") -> "TropicalOneCycle":
        taken = set(self.vertices) | {e.id for e in self.edges}

        def fresh(name: str) -> str:
            while name in taken:
                name = name + "'"
            taken.add(name)
            return name

        vmap = {v: fresh(v) for v in other.vertices}
        vertices = dict(self.vertices)
        for v, vert in other.vertices.items():
            vertices[vmap[v]] = CycleVertex(vmap[v], vert.cell)
        edges = list(self.edges)
        for e in other.edges:
            edges.append(CycleEdge(fresh(e.id), vmap[e.source], vmap[e.target], e.xi, list(e.route)))
        return TropicalOneCycle(f"{self.name}+{other.name}", vertices, edges)


# ---------------------------------------------------------------------------
# Walking edges
# ---------------------------------------------------------------------------

@dataclass
class EdgeWalk:
    start_cell: str
    end_cell: str
    xi_end: IntVector
    steps: List[Tuple[str, int]]
    crossings: List[Crossing]


def frame_cell(affine: AffineData, vertex: CycleVertex) -> str:
    """Maximal cell whose frame carries ξ at a cycle vertex."""
    P = affine.complex
    if vertex.cell not in P.cells:
        raise CycleError(f"vertex '{vertex.id}' lies in unknown cell '{vertex.cell}'")
    if P.dim(vertex.cell) == P.n:
        return vertex.cell
    if P.is_boundary(vertex.cell):
        return P.cells_containing(vertex.cell, dim=P.n)[0]
    raise CycleError(f"interior vertex '{vertex.id}' must lie in a maximal cell, not '{vertex.cell}'")


def walk_edge(affine: AffineData, cycle: TropicalOneCycle, edge: CycleEdge) -> EdgeWalk:
    for end in (edge.source, edge.target):
        if end not in cycle.vertices:
            raise CycleError(f"edge '{edge.id}' references unknown vertex '{end}'")
    if is_zero(edge.xi):
        raise CycleError(f"edge '{edge.id}' carries ξ = 0")
    if len(edge.xi) != affine.n:
        raise CycleError(f"edge '{edge.id}': ξ has {len(edge.xi)} entries, expected {affine.n}")
    bary = affine.bary
    pieces = set(bary.pieces())
    start = frame_cell(affine, cycle.vertices[edge.source])
    current = start
    xi = tuple(edge.xi)
    steps, found = [], []
    for step in edge.route:
        piece = step[0] if isinstance(step, (tuple, list)) else step
        if piece in affine.discriminant:
            raise CycleError(f"edge '{edge.id}' crosses Δ at '{piece}'")
        if piece in bary.flags and piece not in pieces:
            raise CycleError(f"edge '{edge.id}' crosses '{piece}' on a piece boundary")
        try:
            piece, src, dst = affine.resolve_step(current, step)
        except AffineError as exc:
            raise CycleError(f"edge '{edge.id}': {exc.message}")
        rho = bary.ancestor(piece)
        xi_before = xi
        xi = matvec(affine.transport_across(piece, src), xi)
        d = affine.primitive_normal(rho, dst)
        minus, _ = affine.piece_sides(piece)
        kappa = affine.kinks.kinks.get(piece, 0)
        found.append(Crossing(edge.id, piece, rho, src, dst, xi_before, xi, d, kappa, 1 if src == minus else -1))
        steps.append((piece, 1 if src == minus else -1))
        current = dst.cell
    end = frame_cell(affine, cycle.vertices[edge.target])
    if current != end:
        raise CycleError(f"edge '{edge.id}' ends in '{current}' but its target lies in '{end}'")
    return EdgeWalk(start, current, xi, steps, found)


def _boundary_vertex(affine: AffineData, vertex: CycleVertex) -> bool:
    P = affine.complex
    return P.dim(vertex.cell) < P.n and P.is_boundary(vertex.cell)


def validate_cycle(affine: AffineData, cycle: TropicalOneCycle) -> ValidationReport:
    report = ValidationReport("tropical_cycles")
    if not cycle.edges:
        report.add_error("Empty", cycle.name, "cycle has no edges")
        return report
    for v in cycle.vertices.values():
        univalent = cycle.valency(v.id) == 1
        try:
            frame_cell(affine, v)
        except CycleError as exc:
            report.add_error("Vertex", v.id, exc.message)
            continue
        if _boundary_vertex(affine, v) != univalent:
            report.add_error("Vertex", v.id, "a vertex is univalent exactly when it lies on ∂B")
    if not report.is_valid:
        return report
    try:
        sums = balancing_defects(affine, cycle)
    except CycleError as exc:
        report.add_error("Route", cycle.name, exc.message)
        return report
    for v, total in sorted(sums.items()):
        if not is_zero(total):
            report.add_error("Unbalanced", v, f"Σ ε ξ = {total}")
    if report.is_valid and cycle.valency_sum() % 2:
        report.add_warning("Sign", cycle.name, "odd valency sum")
    return report


def balancing_defects(affine: AffineData, cycle: TropicalOneCycle) -> Dict[str, IntVector]:
    """Σ ε_{e,v} ξ_e per interior vertex (incoming ends +1), in the vertex's frame."""
    zero = tuple([0] * affine.n)
    sums: Dict[str, IntVector] = {}
    for v in cycle.vertices.values():
        if not _boundary_vertex(affine, v):
            sums[v.id] = zero
    for e in cycle.edges:
        walk = walk_edge(affine, cycle, e)
        if e.target in sums:
            sums[e.target] = add_vectors(sums[e.target], walk.xi_end)
        if e.source in sums:
            sums[e.source] = add_vectors(sums[e.source], scale_vector(-1, e.xi))
    return sums


def check_balancing(affine: AffineData, cycle: TropicalOneCycle) -> bool:
    return all(is_zero(v) for v in balancing_defects(affine, cycle).values())


def crossings(affine: AffineData, cycle: TropicalOneCycle) -> List[Crossing]:
    """All crossings, with d_p positive along the edge and κ_p looked up."""
    found = []
    for e in cycle.edges:
        for c in walk_edge(affine, cycle, e).crossings:
            if c.kappa <= 0:
                raise CycleError(f"no positive kink on crossed piece '{c.piece}'")
            found.append(c)
    return found


# ---------------------------------------------------------------------------
# Skeleton weights
# ---------------------------------------------------------------------------

def _base_cone(affine: AffineData, v: str):
    cones, _ = affine.fan(v)
    if not cones:
        raise CycleError(f"vertex '{v}' lies in no maximal cell")
    return cones[0]


def _edge_ends(affine: AffineData, omega: str):
    """(vertex, cone of ω at that vertex) for both ends of a 𝒫-edge."""
    P = affine.complex
    if affine.n == 1:
        return [(f, (omega, slot)) for slot, f in enumerate(P.cell(omega).facet_ids())]
    sigma = P.cells_containing(omega, dim=affine.n)[0]
    return [(v, (sigma, None)) for v in P.vertices(omega)]


def _ray(affine: AffineData, v: str, omega: str, cone) -> IntVector:
    sigma, slot = cone
    return affine.edge_direction(v, omega, sigma, slot)


def vertex_balancing(affine: AffineData, weights: SkeletonWeights) -> Dict[str, IntVector]:
    """Σ_{ω∋v} a(ω)·d_{v,ω} in the frame of v's base cone."""
    sums: Dict[str, IntVector] = {}
    for omega, a in sorted(weights.weights.items()):
        if not a:
            continue
        for v, cone in _edge_ends(affine, omega):
            base = _base_cone(affine, v)
            path = affine.cone_path(v, base, cone)
            back = unimodular_inverse(affine.parallel_transport(base[0], path))
            d = matvec(back, _ray(affine, v, omega, cone))
            sums[v] = add_vectors(sums.get(v, tuple([0] * affine.n)), scale_vector(a, d))
    return sums


def from_skeleton_weights(affine: AffineData, weights: SkeletonWeights,
                          choose: str = "lower", name: str = "skeleton") -> TropicalOneCycle:
    """Perturb the weighted 1-skeleton into a cycle: one edge per ω with a(ω) ≠ 0."""
    P = affine.complex
    if choose not in ("lower", "upper"):
        raise CycleError(f"choose must be 'lower' or 'upper', not '{choose}'")
    for omega in weights.weights:
        if omega not in P.cells or P.dim(omega) != 1:
            raise CycleError(f"skeleton weight on '{omega}', which is not an edge of 𝒫")
    active = {w: a for w, a in weights.weights.items() if a}
    if not active:
        raise CycleError("all skeleton weights vanish (empty cycle)")
    for v, total in sorted(vertex_balancing(affine, weights).items()):
        if not P.is_boundary(v) and not is_zero(total):
            raise CycleError(f"unbalanced weights at '{v}': Σ a·d = {total}")

    vertices: Dict[str, CycleVertex] = {}
    edges: List[CycleEdge] = []
    for omega, a in sorted(active.items()):
        ends = _edge_ends(affine, omega)
        ends = sorted(ends, key=lambda e: (e[0], -1 if e[1][1] is None else e[1][1]))
        if choose == "upper":
            ends = list(reversed(ends))
        (start, start_cone), (end, end_cone) = ends
        for v in (start, end):
            if v not in vertices:
                vertices[v] = CycleVertex(v, v if P.is_boundary(v) else _base_cone(affine, v)[0])
        try:
            lead = affine.cone_path(start, _base_cone(affine, start), start_cone)
            tail = affine.cone_path(end, _base_cone(affine, end), end_cone)
        except AffineError as exc:
            raise CycleError(f"cannot route edge for '{omega}': {exc.message}")
        route = list(lead) + [(p, -s) for p, s in reversed(tail)]
        lead_transport = affine.parallel_transport(_base_cone(affine, start)[0], lead)
        xi = matvec(unimodular_inverse(lead_transport), scale_vector(a, _ray(affine, start, omega, start_cone)))
        edges.append(CycleEdge(f"e_{omega}", start, end, xi, route))
    cycle = TropicalOneCycle(name, vertices, edges)
    logger.debug("skeleton cycle %s: %d edges, %d vertices", name, len(edges), len(vertices))
    return cycle


# ---------------------------------------------------------------------------
# Homology classes
# ---------------------------------------------------------------------------

@dataclass
class HomologyClass:
    free: Tuple[int, ...]
    torsion: Tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.free) and not any(self.torsion)


class CycleHomology:
    """H₁(B, ∂B; i_*Λ) on the barycentric subdivision, reused across cycles."""

    def __init__(self, affine: AffineData, sheaf: Optional[ConstructibleSheaf] = None):
        self.affine = affine
        self.sheaf = sheaf or ConstructibleSheaf(affine, "bary")
        B = affine.bary.complex
        self.chain: ChainComplex = simplicial_chain_complex(B, set(B.boundary_cells()), self.sheaf)
        self.index = {lab: i for i, lab in enumerate(self.chain.labels.get(1, []))}
        self._homology: Optional[HomologyResult] = None
        self._snf = None

    @property
    def homology(self) -> HomologyResult:
        if self._homology is None:
            self._homology = homology(self.chain)
        return self._homology

    @property
    def target_rank(self) -> int:
        return self.homology.rank(1)

    def _add(self, chain: List[int], bary_edge: str, coefficient: int, xi: IntVector):
        if coefficient == 0 or bary_edge not in self.affine.bary.flags:
            raise CycleError(f"straightening uses unknown cell '{bary_edge}'")
        if self.affine.bary.complex.is_boundary(bary_edge):
            return
        try:
            coords = self.sheaf.coordinates(bary_edge, xi)
        except SheafError:
            raise CycleError(f"section {xi} is not in Γ('{bary_edge}'): monodromy obstruction")
        for k, x in enumerate(coords):
            chain[self.index[(bary_edge, k)]] += coefficient * x

    def _traverse(self, chain: List[int], vertex_cell: str, side: Side, xi: IntVector, outward: bool):
        """Add the bary edge b(vertex_cell)–b(side.cell), walked outward (to b(σ)) or inward."""
        bary = self.affine.bary
        E = bary.bary_edge(vertex_cell, side)
        o = bary.complex.cell(E).orientation
        self._add(chain, E, o if outward else -o, xi)

    def chain_of(self, cycle: TropicalOneCycle) -> List[int]:
        """Straighten every edge to a 1-chain on the subdivision with Λ coefficients."""
        a = self.affine
        P = a.complex
        chain = [0] * self.chain.dim(1)
        for e in cycle.edges:
            walk = walk_edge(a, cycle, e)
            xi = tuple(e.xi)
            source, target = cycle.vertices[e.source], cycle.vertices[e.target]
            if _boundary_vertex(a, source):
                side = Side(walk.start_cell, P.slots_of(source.cell, walk.start_cell)[0]) \
                    if P.dim(source.cell) == P.n - 1 else Side(walk.start_cell, 0)
                self._traverse(chain, source.cell, side, xi, outward=True)
            for c in walk.crossings:
                v = a.bary.piece_vertex(c.piece)
                self._traverse(chain, v, c.from_side, c.xi_before, outward=False)
                self._traverse(chain, v, c.to_side, c.xi, outward=True)
            if _boundary_vertex(a, target):
                side = Side(walk.end_cell, P.slots_of(target.cell, walk.end_cell)[0]) \
                    if P.dim(target.cell) == P.n - 1 else Side(walk.end_cell, 0)
                self._traverse(chain, target.cell, side, walk.xi_end, outward=False)
        boundary = self.chain.boundary(1)
        if any(sum(row[j] * chain[j] for j in range(len(chain)) if chain[j]) for row in boundary):
            raise CycleError(f"straightened chain of '{cycle.name}' is not a relative cycle")
        return chain

    def to_homology_class(self, cycle: TropicalOneCycle) -> HomologyClass:
        return self.class_of_chain(self.chain_of(cycle))

    def class_of_chain(self, z: Sequence[int]) -> HomologyClass:
        """Coordinates of a relative 1-cycle in H₁ = coker ∂₂ restricted to cycles."""
        if len(z) != self.chain.dim(1):
            raise CycleError(f"chain has {len(z)} entries, expected {self.chain.dim(1)}")
        if self._snf is None:
            self._snf = smith_normal_form(self.chain.boundary(2), self.chain.dim(2))
        y = matvec(self._snf.U, z)
        diag = self._snf.diagonal
        r = self._snf.rank
        torsion = tuple(y[i] % diag[i] for i in range(r) if diag[i] > 1)
        return HomologyClass(tuple(y[r:]), torsion)

    def generation_check(self, cycles: Sequence[TropicalOneCycle]) -> Tuple[int, int, bool]:
        target = self.target_rank
        if not cycles:
            return 0, target, target == 0
        Z = [[x] for x in self.chain_of(cycles[0])]
        for c in cycles[1:]:
            Z = hstack(Z, [[x] for x in self.chain_of(c)])
        D2 = self.chain.boundary(2)
        achieved = rank(hstack(Z, D2)) - rank(D2)
        return achieved, target, achieved == target


def to_homology_class(affine: AffineData, cycle: TropicalOneCycle,
                      context: Optional[CycleHomology] = None) -> HomologyClass:
    return (context or CycleHomology(affine)).to_homology_class(cycle)


def generation_check(affine: AffineData, cycles: Sequence[TropicalOneCycle],
                     context: Optional[CycleHomology] = None) -> Tuple[int, int, bool]:
    return (context or CycleHomology(affine)).generation_check(cycles)
