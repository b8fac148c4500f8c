"""
Integral-affine data on a polyhedral complex.

Every maximal cell carries its own frame (a basis of the tangent lattice) and
a rational embedding of its vertices. Crossing a piece of a codimension-one
cell ρ from σ₋ to σ₊ applies the piece's transport matrix; walls inside a
maximal cell never change frames. Chambers of the barycentric subdivision
inherit the frame of their maximal cell.

Monodromy around a barycentric cell τ is read off the chamber graph G_τ
(chambers containing τ, joined through codimension-one cells containing τ):
every cycle of a BFS spanning tree gives one generator. The pushforward i_*Λ
assigns to τ the saturated lattice fixed by all of them.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import AffineError, SheafError
from .lattice_core import (
    IntCovector,
    IntMatrix,
    IntVector,
    determinant,
    from_columns,
    identity,
    integer_kernel,
    is_zero,
    matmul,
    matvec,
    primitive_part,
    solve_integer,
    unimodular_inverse,
    vecmat,
)
from .polyhedral_complex import (
    BarycentricSubdivision,
    PolyComplex,
    Side,
    barycentric_subdivide,
)
from .validation import ValidationReport

logger = logging.getLogger(__name__)

Position = Tuple[Fraction, ...]
Cone = Tuple[str, Optional[int]]
Step = Union[str, Tuple[str, int]]


@dataclass
class MPAFunction:
    """Kinks κ of the multivalued PL function, one positive integer per piece."""

    kinks: Dict[str, int] = field(default_factory=dict)
    refined: bool = False

    def kink(self, piece: str) -> int:
        try:
            return self.kinks[piece]
        except KeyError:
            raise AffineError(f"no kink declared for piece '{piece}'")


@dataclass(frozen=True)
class MonodromyGenerator:
    """User-declared monodromy around a discriminant cell, in a reference maximal cell's frame."""

    cell: str
    matrix: Tuple[Tuple[int, ...], ...]
    reference: str


@dataclass
class PLRepresentative:
    """Local PL function φ_v: one slope covector per cone, values on ray generators."""

    vertex: str
    reference: Cone
    slopes: Dict[Cone, IntCovector]
    ray_values: Dict[str, int]


def _identity_tuple(n: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(row) for row in identity(n))


class AffineData:
    """Frames, transports, discriminant and kinks on (B, 𝒫)."""

    def __init__(
        self,
        complex_: PolyComplex,
        embedding: Dict[str, Union[Dict[str, Sequence], List[Sequence]]],
        transports: Optional[Dict[str, Sequence[Sequence[int]]]] = None,
        discriminant: Optional[List[MonodromyGenerator]] = None,
        kinks: Optional[MPAFunction] = None,
        bary: Optional[BarycentricSubdivision] = None,
    ):
        self.complex = complex_
        self.n = complex_.n
        self.bary = bary or barycentric_subdivide(complex_)
        self.kinks = kinks or MPAFunction()
        self.discriminant: Dict[str, MonodromyGenerator] = {g.cell: g for g in (discriminant or [])}

        self._slot_pos: Dict[str, List[Position]] = {}
        self._pos: Dict[str, Dict[str, Position]] = {}
        for sigma in complex_.maximal_cells():
            if sigma not in embedding:
                raise AffineError(f"maximal cell '{sigma}' has no embedding")
            self._load_embedding(sigma, embedding[sigma])

        self.transports: Dict[str, IntMatrix] = {}
        for key, matrix in (transports or {}).items():
            self._load_transport(key, matrix)

        self._tree_cache: Dict[str, Tuple[str, Dict[str, IntMatrix], List[IntMatrix]]] = {}
        self._inverse_cache: Dict[Tuple, IntMatrix] = {}

    # -- loading -----------------------------------------------------------

    def _load_embedding(self, sigma: str, data):
        cell = self.complex.cell(sigma)
        if isinstance(data, dict):
            pos = {v: tuple(Fraction(x) for x in coords) for v, coords in data.items()}
            self._pos[sigma] = pos
            if self.n == 1:
                self._slot_pos[sigma] = [pos[f] for f in cell.facet_ids()]
        else:
            if self.n != 1 or len(data) != len(cell.facets):
                raise AffineError(f"slot-list embedding of '{sigma}' needs one entry per facet slot (n = 1)")
            slots = [tuple(Fraction(x) for x in coords) for coords in data]
            self._slot_pos[sigma] = slots
            self._pos[sigma] = {}
            for f, p in zip(cell.facet_ids(), slots):
                self._pos[sigma].setdefault(f, p)
        for v in self.complex.vertices(sigma):
            if v not in self._pos[sigma]:
                raise AffineError(f"embedding of '{sigma}' misses vertex '{v}'")
            if len(self._pos[sigma][v]) != self.n:
                raise AffineError(f"vertex '{v}' of '{sigma}' has {len(self._pos[sigma][v])} coordinates, expected {self.n}")

    def _load_transport(self, key: str, matrix):
        M = [list(map(int, row)) for row in matrix]
        if len(M) != self.n or any(len(r) != self.n for r in M):
            raise AffineError(f"transport '{key}' is not {self.n}x{self.n}")
        if key in self.complex.cells:
            for piece in self.bary.pieces_of(key):
                self.transports.setdefault(piece, M)
        elif key in self.bary.flags and key in self.bary.pieces():
            self.transports[key] = M
        else:
            raise AffineError(f"transport declared on unknown piece '{key}'")

    # -- geometry ----------------------------------------------------------

    def position(self, sigma: str, vertex: str, slot: Optional[int] = None) -> Position:
        if slot is not None and sigma in self._slot_pos:
            return self._slot_pos[sigma][slot]
        try:
            return self._pos[sigma][vertex]
        except KeyError:
            raise AffineError(f"vertex '{vertex}' is not embedded in '{sigma}'")

    def barycenter(self, cell: str, sigma: str, slot: Optional[int] = None) -> Position:
        """Barycenter of a face of σ in σ's frame; ``slot`` selects a loop facet in n = 1."""
        if cell == sigma and sigma in self._slot_pos:
            pts = self._slot_pos[sigma]
        elif self.complex.dim(cell) == 0:
            pts = [self.position(sigma, cell, slot)]
        else:
            pts = [self.position(sigma, v) for v in self.complex.vertices(cell)]
        return tuple(sum(p[i] for p in pts) / len(pts) for i in range(self.n))

    def tangent_vectors(self, cell: str, sigma: str) -> List[Position]:
        vs = self.complex.vertices(cell)
        if len(vs) < 2:
            return []
        base = self.position(sigma, vs[0])
        return [tuple(a - b for a, b in zip(self.position(sigma, v), base)) for v in vs[1:]]

    def primitive_normal(self, rho: str, side: Side) -> IntCovector:
        """Primitive covector d_ρ in the frame of ``side.cell``, killing Λ_ρ, positive into the side."""
        sigma = side.cell
        tangents = self.tangent_vectors(rho, sigma)
        rows = []
        for u in tangents:
            denom = 1
            for x in u:
                denom = denom * x.denominator // math.gcd(denom, x.denominator)
            rows.append([int(x * denom) for x in u])
        kernel = integer_kernel(rows, self.n) if rows else [tuple(r) for r in identity(self.n)]
        if len(kernel) != 1:
            raise AffineError(f"degenerate embedding of '{rho}' in '{sigma}' (normal space rank {len(kernel)})")
        d = kernel[0]
        inward = tuple(a - b for a, b in zip(self.barycenter(sigma, sigma),
                                             self.barycenter(rho, sigma, side.slot)))
        pair = sum(Fraction(a) * b for a, b in zip(d, inward))
        if pair == 0:
            raise AffineError(f"degenerate embedding: '{sigma}' is flat over '{rho}'")
        d, _ = primitive_part(d if pair > 0 else tuple(-a for a in d))
        return d

    # -- transports --------------------------------------------------------

    def _inverse(self, key, M: IntMatrix) -> IntMatrix:
        if key not in self._inverse_cache:
            self._inverse_cache[key] = unimodular_inverse(M)
        return self._inverse_cache[key]

    def piece_transport(self, piece: str) -> IntMatrix:
        return self.transports.get(piece, identity(self.n))

    def piece_sides(self, piece: str) -> Tuple[Side, Side]:
        return self.complex.interior_sides(self.bary.ancestor(piece))

    def transport_across(self, piece: str, from_side: Side) -> IntMatrix:
        """Matrix carrying vectors from ``from_side``'s frame to the other side's frame."""
        minus, plus = self.piece_sides(piece)
        T = self.piece_transport(piece)
        if from_side == minus:
            return T
        if from_side == plus:
            return self._inverse(("piece", piece), T)
        raise AffineError(f"'{from_side.cell}' is not a side of piece '{piece}'")

    def other_side(self, piece: str, side: Side) -> Side:
        minus, plus = self.piece_sides(piece)
        if side == minus:
            return plus
        if side == plus:
            return minus
        raise AffineError(f"'{side.cell}' is not a side of piece '{piece}'")

    def resolve_step(self, current: str, step: Step) -> Tuple[str, Side, Side]:
        """Turn a route step into (piece, from side, to side) starting in ``current``."""
        if isinstance(step, (tuple, list)):
            piece, sign = step[0], int(step[1])
        else:
            piece, sign = step, 0
        if piece not in self.bary.flags or piece not in set(self.bary.pieces()):
            raise AffineError(f"unknown piece '{piece}'")
        minus, plus = self.piece_sides(piece)
        if sign == 1:
            src = minus
        elif sign == -1:
            src = plus
        elif minus.cell == plus.cell:
            raise AffineError(f"piece '{piece}' joins '{current}' to itself; give a traverse sign")
        elif current == minus.cell:
            src = minus
        elif current == plus.cell:
            src = plus
        else:
            raise AffineError(f"piece '{piece}' is not adjacent to '{current}'")
        if src.cell != current:
            raise AffineError(f"piece '{piece}' is not adjacent to '{current}'")
        dst = plus if src == minus else minus
        return piece, src, dst

    def parallel_transport(self, start: str, steps: Sequence[Step]) -> IntMatrix:
        """Product T_m ⋯ T_1 of the transports crossed by a route starting in ``start``."""
        M = identity(self.n)
        current = start
        for step in steps:
            piece, src, dst = self.resolve_step(current, step)
            M = matmul(self.transport_across(piece, src), M)
            current = dst.cell
        return M

    def parallel_transport_cells(self, path: Sequence[str]) -> IntMatrix:
        """Transport along maximal cells through shared codimension-one cells."""
        steps: List[Step] = []
        for a, b in zip(path, path[1:]):
            candidates = []
            for rho in self.complex.ids(self.n - 1):
                sides = self.complex.cofaces(rho)
                if len(sides) == 2 and {sides[0].cell, sides[1].cell} == {a, b} and a != b:
                    candidates.extend(self.bary.pieces_of(rho))
            if not candidates:
                raise AffineError(f"cells '{a}' and '{b}' do not share a codimension-one cell")
            matrices = {tuple(map(tuple, self.transport_across(p, self._side_in(p, a)))) for p in candidates}
            if len(matrices) != 1:
                raise AffineError(f"path '{a}' -> '{b}' is ambiguous; give the crossed piece")
            steps.append(candidates[0])
        return self.parallel_transport(path[0], steps) if path else identity(self.n)

    def _side_in(self, piece: str, cell: str) -> Side:
        minus, plus = self.piece_sides(piece)
        return minus if minus.cell == cell else plus

    # -- chamber graphs and monodromy -------------------------------------

    def crossing_matrix(self, bary_cell: str, from_chamber: str) -> IntMatrix:
        """Frame change from a chamber across one of its codimension-one faces."""
        if self.complex.dim(self.bary.ancestor(bary_cell)) == self.n:
            return identity(self.n)
        return self.transport_across(bary_cell, self.bary.chamber_side(from_chamber))

    def link_graph(self, tau: str) -> Tuple[List[str], List[Tuple[str, str, str]]]:
        """Chambers containing τ and the codimension-one cells joining them."""
        bc = self.bary.complex
        nodes = self.bary.chambers_containing(tau)
        edges = []
        for F in bc.cells_containing(tau, dim=self.n - 1):
            cof = bc.cofaces(F)
            if len(cof) == 2:
                edges.append((F, cof[0].cell, cof[1].cell))
        return nodes, edges

    def _tree(self, tau: str):
        if tau in self._tree_cache:
            return self._tree_cache[tau]
        nodes, edges = self.link_graph(tau)
        if not nodes:
            raise AffineError(f"'{tau}' lies in no chamber")
        base = nodes[0]
        frames: Dict[str, IntMatrix] = {base: identity(self.n)}
        adjacency: Dict[str, List[Tuple[str, str]]] = {c: [] for c in nodes}
        for F, a, b in edges:
            adjacency[a].append((F, b))
            adjacency[b].append((F, a))
        used = set()
        queue = deque([base])
        while queue:
            c = queue.popleft()
            for F, other in sorted(adjacency[c]):
                if other in frames:
                    continue
                frames[other] = matmul(self.crossing_matrix(F, c), frames[c])
                used.add((F, min(c, other), max(c, other)))
                queue.append(other)
        if len(frames) != len(nodes):
            raise AffineError(f"chamber graph around '{tau}' is disconnected")
        generators = []
        for F, a, b in edges:
            if (F, min(a, b), max(a, b)) in used:
                continue
            loop = matmul(self._inverse(("frame", tau, b), frames[b]),
                          matmul(self.crossing_matrix(F, a), frames[a]))
            if loop != identity(self.n):
                generators.append(loop)
        self._tree_cache[tau] = (base, frames, generators)
        return self._tree_cache[tau]

    def base_chamber(self, tau: str) -> str:
        return self._tree(tau)[0]

    def monodromy(self, tau: str) -> List[IntMatrix]:
        """Non-trivial loop monodromies around τ, in the frame of its base chamber."""
        return list(self._tree(tau)[2])

    def transfer(self, c1: str, c2: str, via: str) -> IntMatrix:
        """Frame change from chamber c1 to chamber c2 inside the star of ``via``."""
        _, frames, _ = self._tree(via)
        if c1 not in frames or c2 not in frames:
            raise AffineError(f"chambers '{c1}', '{c2}' do not both contain '{via}'")
        return matmul(frames[c2], self._inverse(("frame", via, c1), frames[c1]))

    def common_chamber(self, a: str, b: str) -> str:
        shared = sorted(set(self.bary.chambers_containing(a)) & set(self.bary.chambers_containing(b)))
        if not shared:
            raise AffineError(f"no chamber contains both '{a}' and '{b}'")
        return shared[0]

    # -- validation --------------------------------------------------------

    def validate(self) -> ValidationReport:
        report = ValidationReport("affine_structure")
        n = self.n

        for piece, T in sorted(self.transports.items()):
            if determinant(T) != 1:
                report.add_error("Transport", piece, f"determinant {determinant(T)} (expected +1)")
                continue
            rho = self.bary.ancestor(piece)
            if len(self.complex.cofaces(rho)) != 2:
                report.add_error("Transport", piece, "transport declared on a boundary piece")
                continue
            minus, plus = self.complex.interior_sides(rho)
            for u_minus, u_plus in zip(self.tangent_vectors(rho, minus.cell),
                                       self.tangent_vectors(rho, plus.cell)):
                image = tuple(sum(Fraction(T[i][j]) * u_minus[j] for j in range(n)) for i in range(n))
                if image != u_plus:
                    report.add_error("Transport", piece, "transport does not fix the tangent lattice of its cell")
                    break

        for rho in self.complex.ids(n - 1):
            for side in self.complex.cofaces(rho):
                try:
                    self.primitive_normal(rho, side)
                except AffineError as exc:
                    report.add_error("Embedding", rho, exc.message)

        if n >= 2:
            for tau in self.bary.complex.ids(n - 2):
                self._validate_codim2(tau, report)
        for cell in self.discriminant:
            if cell not in self.bary.flags or self.bary.complex.dim(cell) != n - 2:
                report.add_error("Discriminant", cell, "discriminant cells must be codimension-two barycentric cells")

        for piece in self.bary.pieces():
            rho = self.bary.ancestor(piece)
            if self.complex.is_boundary(rho):
                continue
            k = self.kinks.kinks.get(piece)
            if k is None:
                report.add_error("Kink", piece, "no kink declared")
            elif k <= 0:
                report.add_error("Kink", piece, f"kink {k} must be positive")
        if not kink_consistency(self.kinks, self.bary):
            report.add_error("Kink", "kinks", "pieces of one cell carry different kinks in single-parameter mode")
        return report

    def _validate_codim2(self, tau: str, report: ValidationReport):
        flag = self.bary.flag(tau)
        dims = [self.complex.dim(c) for c in flag.cells]
        declared = self.discriminant.get(tau)
        try:
            derived = self.monodromy(tau)
        except AffineError as exc:
            report.add_error("Monodromy", tau, exc.message)
            return
        if declared is None:
            if derived:
                report.add_error("Monodromy", tau,
                                 "non-trivial monodromy around a cell outside the discriminant")
            return
        if 0 in dims or self.n in dims:
            report.add_error("Discriminant", tau, "discriminant must avoid vertices and barycenters of maximal cells")
        if not derived:
            report.add_warning("Discriminant", tau, "declared discriminant cell has trivial monodromy")
            return
        base = self.base_chamber(tau)
        reference = next((c for c in self.bary.chambers_containing(tau)
                          if self.bary.ancestor(c) == declared.reference), None)
        if reference is None:
            report.add_error("Discriminant", tau, f"reference cell '{declared.reference}' does not contain it")
            return
        conj = self.transfer(base, reference, tau)
        conj_inv = unimodular_inverse(conj)
        candidates = []
        for M in derived:
            Mr = matmul(conj, matmul(M, conj_inv))
            candidates.extend([Mr, unimodular_inverse(Mr)])
        D = [list(row) for row in declared.matrix]
        if D not in candidates:
            report.add_error("Monodromy", tau, "inconsistent monodromy: declared generator differs from derived")
        sigma = self.bary.ancestor(reference)
        points = [self.barycenter(c, sigma) for c in flag.cells]
        for p in points[1:]:
            u = tuple(a - b for a, b in zip(p, points[0]))
            image = tuple(sum(Fraction(D[i][j]) * u[j] for j in range(self.n)) for i in range(self.n))
            if image != u:
                report.add_error("Monodromy", tau, "generator does not fix the tangent space of its cell")
                break

    # -- PL function -------------------------------------------------------

    def cone_of(self, side: Side) -> Cone:
        return (side.cell, side.slot) if self.n == 1 else (side.cell, None)

    def fan(self, v: str) -> Tuple[List[Cone], List[Tuple[str, Cone, Cone]]]:
        """Cones at a 𝒫-vertex and the pieces through v separating them."""
        pieces = [p for p in self.bary.pieces()
                  if v in self.bary.flag(p).cells and not self.complex.is_boundary(self.bary.ancestor(p))]
        cones = set()
        if self.n == 1:
            cones = {self.cone_of(s) for s in self.complex.cofaces(v)}
        else:
            cones = {(sigma, None) for sigma in self.complex.cells_containing(v, dim=self.n)}
        links = []
        for p in pieces:
            minus, plus = self.piece_sides(p)
            links.append((p, self.cone_of(minus), self.cone_of(plus)))
        return sorted(cones, key=lambda c: (c[0], -1 if c[1] is None else c[1])), links

    def cone_path(self, v: str, start: Cone, goal: Cone) -> List[Tuple[str, int]]:
        """BFS path of (piece, traverse sign) steps from one cone at v to another."""
        cones, links = self.fan(v)
        if start not in cones or goal not in cones:
            raise AffineError(f"cone {goal if start in cones else start} is not at vertex '{v}'")
        prev: Dict[Cone, Optional[Tuple[Cone, str, int]]] = {start: None}
        queue = deque([start])
        while queue:
            c = queue.popleft()
            if c == goal:
                break
            for p, a, b in sorted(links):
                for src, dst, sign in ((a, b, 1), (b, a, -1)):
                    if src == c and dst not in prev:
                        prev[dst] = (c, p, sign)
                        queue.append(dst)
        if goal not in prev:
            raise AffineError(f"cones at '{v}' are not connected through interior pieces")
        path = []
        c = goal
        while prev[c] is not None:
            before, p, sign = prev[c]
            path.append((p, sign))
            c = before
        return list(reversed(path))

    def local_pl_representative(self, v: str) -> PLRepresentative:
        cones, links = self.fan(v)
        if not cones:
            raise AffineError(f"'{v}' is not a vertex of a maximal cell")
        for p, _, _ in links:
            if self.kinks.kink(p) <= 0:
                raise AffineError(f"kink of '{p}' must be positive")
        reference = cones[0]
        slopes: Dict[Cone, IntCovector] = {reference: tuple([0] * self.n)}
        queue = deque([reference])
        while queue:
            c = queue.popleft()
            for p, a, b in sorted(links):
                for src, dst, side in ((a, b, 1), (b, a, -1)):
                    if src != c:
                        continue
                    minus, plus = self.piece_sides(p)
                    from_side, to_side = (minus, plus) if side == 1 else (plus, minus)
                    T_inv = self.transport_across(p, to_side)
                    d = self.primitive_normal(self.bary.ancestor(p), to_side)
                    k = self.kinks.kink(p)
                    slope = tuple(x + k * y for x, y in zip(vecmat(slopes[c], T_inv), d))
                    if dst in slopes:
                        if slopes[dst] != slope:
                            raise AffineError(f"kinks around '{v}' are inconsistent at piece '{p}'")
                    else:
                        slopes[dst] = slope
                        queue.append(dst)
        if len(slopes) != len(cones):
            raise AffineError(f"non-manifold fan at '{v}'")

        values: Dict[str, int] = {}
        if self.n == 1:
            for cone in cones:
                sigma, slot = cone
                other = 1 - slot
                direction = tuple(a - b for a, b in zip(self._slot_pos[sigma][other], self._slot_pos[sigma][slot]))
                ray = _primitive_fraction(direction)
                values[f"{sigma}#{slot}"] = sum(a * b for a, b in zip(slopes[cone], ray))
        else:
            for edge in self.complex.cells_containing(v, dim=1):
                sigma = self.complex.cells_containing(edge, dim=self.n)[0]
                ray = self.edge_direction(v, edge, sigma)
                values[edge] = sum(a * b for a, b in zip(slopes[(sigma, None)], ray))
        return PLRepresentative(v, reference, slopes, values)

    def edge_direction(self, v: str, edge: str, sigma: str, slot: Optional[int] = None) -> IntVector:
        """Primitive tangent of an edge pointing away from v, in σ's frame."""
        if self.n == 1:
            other = 1 - slot
            start = self._slot_pos[sigma][slot]
            end = self._slot_pos[sigma][other]
        else:
            ends = self.complex.vertices(edge)
            w = ends[1] if ends[0] == v else ends[0]
            start, end = self.position(sigma, v), self.position(sigma, w)
        return _primitive_fraction(tuple(a - b for a, b in zip(end, start)))



def _primitive_fraction(u: Sequence[Fraction]) -> IntVector:
    denom = 1
    for x in u:
        denom = denom * Fraction(x).denominator // math.gcd(denom, Fraction(x).denominator)
    v = tuple(int(Fraction(x) * denom) for x in u)
    if is_zero(v):
        raise AffineError("zero-length edge in embedding")
    return primitive_part(v)[0]


def primitive_normal(affine: AffineData, rho: str, side: Side) -> IntCovector:
    return affine.primitive_normal(rho, side)


def parallel_transport(affine: AffineData, start: str, steps: Sequence[Step]) -> IntMatrix:
    return affine.parallel_transport(start, steps)


def kink_consistency(kinks: MPAFunction, bary: BarycentricSubdivision) -> bool:
    """Per-cell constancy of kinks; skipped in refined mode."""
    if kinks.refined:
        return True
    for rho in bary.base.ids(bary.n - 1):
        values = {kinks.kinks[p] for p in bary.pieces_of(rho) if p in kinks.kinks}
        if len(values) > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Coefficient systems
# ---------------------------------------------------------------------------

class ConstantSheaf:
    """ℤ^r on every cell with identity restrictions."""

    def __init__(self, rank: int = 1):
        self.r = rank

    def rank(self, cell: str) -> int:
        return self.r

    def sections(self, cell: str) -> List[IntVector]:
        return [tuple(row) for row in identity(self.r)]

    def restriction(self, sigma: str, tau: str) -> IntMatrix:
        return identity(self.r)


class ConstructibleSheaf:
    """The pushforward i_*Λ on barycentric cells (``level="bary"``) or on 𝒫 cells (``level="cells"``).

    ``stalk(τ)`` is the invariant lattice S(τ) of the open star; ``sections(τ)``
    is Γ over the closed cell, the intersection of the stalks of its faces,
    expressed in the frame of the base chamber.
    """

    def __init__(self, affine: AffineData, level: str = "bary"):
        if level not in ("bary", "cells"):
            raise SheafError(f"unknown sheaf level '{level}'")
        self.affine = affine
        self.level = level
        self.n = affine.n
        self._stalks: Dict[str, List[IntVector]] = {}
        self._sections: Dict[str, List[IntVector]] = {}
        self._constraints: Dict[str, List[IntCovector]] = {}

    def frame_chamber(self, cell: str) -> str:
        return self.affine.base_chamber(cell)

    def constraints(self, tau: str) -> List[IntCovector]:
        """Rows (M − I) over the monodromy generators around a barycentric cell."""
        if tau not in self._constraints:
            rows = []
            for M in self.affine.monodromy(tau):
                for i in range(self.n):
                    row = tuple(M[i][j] - (1 if i == j else 0) for j in range(self.n))
                    if not is_zero(row):
                        rows.append(row)
            self._constraints[tau] = rows
        return self._constraints[tau]

    def stalk(self, tau: str) -> List[IntVector]:
        if tau not in self._stalks:
            rows = self.constraints(tau)
            self._stalks[tau] = integer_kernel([list(r) for r in rows], self.n) if rows \
                else [tuple(r) for r in identity(self.n)]
        return self._stalks[tau]

    def _faces(self, cell: str) -> List[str]:
        bary = self.affine.bary
        if self.level == "bary":
            return sorted(bary.complex.closure(cell))
        closure = self.affine.complex.closure(cell)
        return sorted(f for f, flag in bary.flags.items() if set(flag.cells) <= closure)

    def _to_face_frame(self, cell: str, face: str) -> IntMatrix:
        """Frame change from the cell's base chamber to the face's base chamber."""
        a = self.affine
        start = self.frame_chamber(cell)
        if self.level == "bary":
            return a.transfer(start, a.base_chamber(face), face)
        c = a.common_chamber(face, cell)
        return matmul(a.transfer(c, a.base_chamber(face), face), a.transfer(start, c, cell))

    def sections(self, cell: str) -> List[IntVector]:
        if cell not in self._sections:
            rows: List[List[int]] = []
            for face in self._faces(cell):
                K = self.constraints(face)
                if not K:
                    continue
                A = self._to_face_frame(cell, face)
                rows.extend(list(vecmat(k, A)) for k in K)
            rows = [r for r in rows if not is_zero(r)]
            self._sections[cell] = integer_kernel(rows, self.n) if rows \
                else [tuple(r) for r in identity(self.n)]
        return self._sections[cell]

    def rank(self, cell: str) -> int:
        return len(self.sections(cell))

    def to_frame(self, sigma: str, tau: str) -> IntMatrix:
        """Frame change from σ's base chamber to τ's base chamber, τ a face of σ."""
        a = self.affine
        if self.level == "bary":
            return a.transfer(a.base_chamber(sigma), a.base_chamber(tau), tau)
        c = a.common_chamber(sigma, tau)
        return matmul(a.transfer(c, a.base_chamber(tau), tau),
                      a.transfer(a.base_chamber(sigma), c, sigma))

    def coordinates(self, cell: str, vector: Sequence[int]) -> IntVector:
        basis = self.sections(cell)
        x = solve_integer(from_columns(basis, self.n), list(vector), len(basis))
        if x is None:
            raise SheafError(f"section {tuple(vector)} is not in Γ('{cell}')")
        return x

    def restriction(self, sigma: str, tau: str) -> IntMatrix:
        """Matrix of Γ(σ) → Γ(τ) in the chosen section bases."""
        A = self.to_frame(sigma, tau)
        cols = []
        for b in self.sections(sigma):
            image = matvec(A, b)
            x = solve_integer(from_columns(self.sections(tau), self.n), list(image), self.rank(tau))
            if x is None:
                raise SheafError(f"restriction '{sigma}' -> '{tau}' leaves Γ('{tau}')")
            cols.append(x)
        return from_columns(cols, self.rank(tau)) if cols else [[] for _ in range(self.rank(tau))]


def build_pushforward(affine: AffineData, level: str = "bary") -> ConstructibleSheaf:
    """i_*Λ after checking the affine data (inconsistent monodromy raises)."""
    report = affine.validate()
    monodromy_errors = [e for e in report.errors if e["kind"] in ("Monodromy", "Discriminant")]
    if monodromy_errors:
        first = monodromy_errors[0]
        raise SheafError(f"{first['subject']}: {first['message']}")
    sheaf = ConstructibleSheaf(affine, level)
    logger.debug("built pushforward sheaf at level %s", level)
    return sheaf
