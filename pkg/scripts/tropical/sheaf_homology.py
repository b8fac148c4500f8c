"""
Chain and cochain complexes with constructible coefficients.

- simplicial_chain_complex: relative cellular chains C_•(B, A; F)
- cech_complex: Čech cochains for the cover by neighbourhoods of maximal cells
- filtration_graded: the pieces C_τ^• of the filtration by τ_I
- comparison_map / poincare_lefschetz_check: the E₁ differential of the
  filtered Čech complex against the chain boundary

A coefficient system is anything with ``rank(cell)`` and
``restriction(sigma, tau)`` (see ConstantSheaf and ConstructibleSheaf).
All (co)homology is computed from Smith normal forms.
"""

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .affine_structure import AffineData, ConstantSheaf, ConstructibleSheaf
from .errors import AffineError, HomologyError, SheafError, TropicalError
from .lattice_core import IntMatrix, determinant, integer_kernel, invariant_factors, matmul, transpose, zeros
from .polyhedral_complex import PolyComplex, barycentric_subdivide

logger = logging.getLogger(__name__)

ChainLabel = Tuple[str, int]
CechLabel = Tuple[Tuple[str, ...], str, int]


# ---------------------------------------------------------------------------
# Complexes and homology
# ---------------------------------------------------------------------------

@dataclass
class ChainComplex:
    """Free groups C_i with boundaries ∂_i: C_i → C_{i−1} (rows index C_{i−1})."""

    labels: Dict[int, List[ChainLabel]]
    boundaries: Dict[int, IntMatrix] = field(default_factory=dict)

    @classmethod
    def from_matrices(cls, dims: Dict[int, int], boundaries: Dict[int, IntMatrix]) -> "ChainComplex":
        labels = {d: [(f"g{d}", k) for k in range(size)] for d, size in dims.items()}
        return cls(labels, {d: [list(r) for r in M] for d, M in boundaries.items()})

    def degrees(self) -> List[int]:
        return sorted(self.labels)

    def dim(self, i: int) -> int:
        return len(self.labels.get(i, []))

    def boundary(self, i: int) -> IntMatrix:
        M = self.boundaries.get(i)
        return M if M is not None else zeros(self.dim(i - 1), self.dim(i))

    def check(self):
        for i in self.degrees():
            if not _composes_to_zero(self.boundary(i), self.boundary(i + 1),
                                     self.dim(i - 1), self.dim(i), self.dim(i + 1)):
                raise HomologyError(f"∂∂ ≠ 0 in degree {i + 1}")


@dataclass
class CochainComplex:
    """Groups C^i with differentials d^i: C^i → C^{i+1} (rows index C^{i+1})."""

    labels: Dict[int, List]
    differentials: Dict[int, IntMatrix] = field(default_factory=dict)
    complex: Optional[PolyComplex] = None
    order: List[str] = field(default_factory=list)

    def degrees(self) -> List[int]:
        return sorted(self.labels)

    def dim(self, i: int) -> int:
        return len(self.labels.get(i, []))

    def differential(self, i: int) -> IntMatrix:
        M = self.differentials.get(i)
        return M if M is not None else zeros(self.dim(i + 1), self.dim(i))

    def check(self):
        for i in self.degrees():
            if not _composes_to_zero(self.differential(i + 1), self.differential(i),
                                     self.dim(i + 2), self.dim(i + 1), self.dim(i)):
                raise HomologyError(f"d∘d ≠ 0 in degree {i}")


def _composes_to_zero(A: IntMatrix, B: IntMatrix, rows: int, inner: int, cols: int) -> bool:
    for r in range(rows):
        row = A[r]
        for c in range(cols):
            if sum(row[k] * B[k][c] for k in range(inner) if row[k]):
                return False
    return True


@dataclass
class HomologyGroup:
    free: int
    torsion: List[int] = field(default_factory=list)

    def __str__(self) -> str:
        parts = []
        if self.free:
            parts.append("ℤ" if self.free == 1 else f"ℤ^{self.free}")
        parts.extend(f"ℤ/{d}" for d in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"


@dataclass
class HomologyResult:
    kind: str
    groups: Dict[int, HomologyGroup]
    chain_ranks: Dict[int, int]

    def rank(self, i: int) -> int:
        g = self.groups.get(i)
        return g.free if g else 0

    def torsion(self, i: int) -> List[int]:
        g = self.groups.get(i)
        return list(g.torsion) if g else []

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * g.free for i, g in self.groups.items())

    def euler_consistent(self) -> bool:
        return self.euler_characteristic() == sum((-1) ** i * r for i, r in self.chain_ranks.items())

    def same_as(self, other: "HomologyResult") -> bool:
        degrees = set(self.groups) | set(other.groups)
        return all(self.rank(i) == other.rank(i) and self.torsion(i) == other.torsion(i) for i in degrees)

    def to_dict(self) -> Dict:
        return {i: {"free": g.free, "torsion": g.torsion} for i, g in sorted(self.groups.items())}

    def summary(self) -> str:
        sym = "H_" if self.kind == "homology" else "H^"
        return ", ".join(f"{sym}{i} = {g}" for i, g in sorted(self.groups.items()))


def _matrix_data(M: IntMatrix, rows: int, cols: int) -> Tuple[int, List[int]]:
    if rows == 0 or cols == 0:
        return 0, []
    factors = invariant_factors(M)
    return len(factors), factors


def homology(C) -> HomologyResult:
    """Free ranks and torsion per degree of a chain or cochain complex."""
    C.check()
    groups: Dict[int, HomologyGroup] = {}
    ranks = {i: C.dim(i) for i in C.degrees()}
    if isinstance(C, ChainComplex):
        outgoing = {i: _matrix_data(C.boundary(i), C.dim(i - 1), C.dim(i)) for i in C.degrees()}
        incoming = {i: _matrix_data(C.boundary(i + 1), C.dim(i), C.dim(i + 1)) for i in C.degrees()}
        kind = "homology"
    else:
        outgoing = {i: _matrix_data(C.differential(i), C.dim(i + 1), C.dim(i)) for i in C.degrees()}
        incoming = {i: _matrix_data(C.differential(i - 1), C.dim(i), C.dim(i - 1)) for i in C.degrees()}
        kind = "cohomology"
    for i in C.degrees():
        free = C.dim(i) - outgoing[i][0] - incoming[i][0]
        torsion = [d for d in incoming[i][1] if d > 1]
        groups[i] = HomologyGroup(free, torsion)
    return HomologyResult(kind, groups, ranks)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

def _stalk_rank(F, cell: str) -> int:
    try:
        return F.rank(cell)
    except (KeyError, AffineError) as exc:
        raise SheafError(f"coefficients missing on '{cell}': {exc}")


def simplicial_chain_complex(P: PolyComplex, A: Optional[Set[str]], F) -> ChainComplex:
    """C_i(P, A; F) with blocks ε_{τ⊂σ}·res(σ→τ)."""
    A = set(A or ())
    labels: Dict[int, List[ChainLabel]] = {}
    for d in range(P.n + 1):
        labels[d] = [(c, k) for c in P.ids(d) if c not in A for k in range(_stalk_rank(F, c))]
    index = {d: {lab: i for i, lab in enumerate(labels[d])} for d in labels}

    boundaries: Dict[int, IntMatrix] = {}
    for d in range(1, P.n + 1):
        M = zeros(len(labels[d - 1]), len(labels[d]))
        for sigma in P.ids(d):
            if sigma in A:
                continue
            for slot, (tau, _) in enumerate(P.cell(sigma).facets):
                if tau in A:
                    continue
                eps = P.epsilon(tau, sigma, slot)
                R = F.restriction(sigma, tau)
                for a, row in enumerate(R):
                    for b, x in enumerate(row):
                        if x:
                            M[index[d - 1][(tau, a)]][index[d][(sigma, b)]] += eps * x
        boundaries[d] = M
    C = ChainComplex(labels, boundaries)
    logger.debug("chain complex on %d cells: ranks %s", len(P.cells), [len(labels[d]) for d in sorted(labels)])
    return C


def relative_homology(P: PolyComplex, F) -> HomologyResult:
    """H_•(B, ∂B; F)."""
    return homology(simplicial_chain_complex(P, set(P.boundary_cells()), F))


def barycentric_comparison(P: Optional[PolyComplex] = None, relative: bool = True,
                           affine: Optional[AffineData] = None,
                           constant_rank: int = 1) -> Tuple[HomologyResult, HomologyResult, bool]:
    """Homology on 𝒫 and on its barycentric subdivision, with the verdict that they agree.

    With ``affine`` the coefficients are i_*Λ, otherwise ℤ^constant_rank on ``P``.
    """
    if affine is not None:
        P, bary = affine.complex, affine.bary
        F_cells, F_bary = ConstructibleSheaf(affine, "cells"), ConstructibleSheaf(affine, "bary")
    elif P is not None:
        bary = barycentric_subdivide(P)
        F_cells = F_bary = ConstantSheaf(constant_rank)
    else:
        raise SheafError("barycentric_comparison needs a complex or affine data")
    B = bary.complex
    A_cells = set(P.boundary_cells()) if relative else set()
    A_bary = set(B.boundary_cells()) if relative else set()
    h_cells = homology(simplicial_chain_complex(P, A_cells, F_cells))
    h_bary = homology(simplicial_chain_complex(B, A_bary, F_bary))
    return h_cells, h_bary, h_cells.same_as(h_bary)


def homology_level(affine: AffineData) -> str:
    """Cells when the structure is smooth and loop-free, else the subdivision."""
    if affine.discriminant or affine.complex.has_loops():
        return "bary"
    return "cells"


def level_complex(affine: AffineData, level: str) -> PolyComplex:
    return affine.complex if level == "cells" else affine.bary.complex


# ---------------------------------------------------------------------------
# Čech complex
# ---------------------------------------------------------------------------

def cover_components(P: PolyComplex, I: Sequence[str]) -> List[str]:
    """Maximal cells of the common face set of the cells in I."""
    common = set(P.closure(I[0]))
    for sigma in I[1:]:
        common &= P.closure(sigma)
    maximal = sorted(c for c in common
                     if not any(c != d and c in P.closure(d) for d in common))
    for a, b in combinations(maximal, 2):
        if P.closure(a) & P.closure(b):
            raise SheafError(f"cover components '{a}' and '{b}' of {'∩'.join(I)} touch")
    return maximal


def nerve(P: PolyComplex, order: Sequence[str]) -> Dict[int, List[Tuple[Tuple[str, ...], str]]]:
    """Index pairs (I, τ_I) by degree |I| − 1."""
    position = {s: i for i, s in enumerate(order)}
    found: Set[Tuple[str, ...]] = set()
    for v in P.ids(0):
        star = [s for s in order if v in P.closure(s)]
        for size in range(1, len(star) + 1):
            found.update(combinations(star, size))
    by_degree: Dict[int, List[Tuple[Tuple[str, ...], str]]] = {}
    for I in sorted(found, key=lambda I: (len(I), [position[s] for s in I])):
        for tau in cover_components(P, I):
            by_degree.setdefault(len(I) - 1, []).append((I, tau))
    return by_degree


def _check_order(P: PolyComplex, order: Optional[Sequence[str]]) -> List[str]:
    maximal = P.maximal_cells()
    if not maximal:
        raise SheafError("empty complex")
    if order is None:
        return maximal
    order = list(order)
    if sorted(order) != maximal:
        raise SheafError("order must list every maximal cell exactly once")
    return order


def cech_complex(P: PolyComplex, F, order: Optional[Sequence[str]] = None) -> CochainComplex:
    """Čech cochains ⊕_{|I|=i+1} Γ(τ_I; F) with the alternating differential."""
    started = time.time()
    order = _check_order(P, order)
    indices = nerve(P, order)
    labels: Dict[int, List[CechLabel]] = {}
    for i, pairs in indices.items():
        labels[i] = [(I, tau, k) for I, tau in pairs for k in range(_stalk_rank(F, tau))]
    index = {i: {lab: j for j, lab in enumerate(labs)} for i, labs in labels.items()}
    components = {I: [] for pairs in indices.values() for I, _ in pairs}
    for pairs in indices.values():
        for I, tau in pairs:
            components[I].append(tau)

    differentials: Dict[int, IntMatrix] = {}
    for i in sorted(labels):
        if i + 1 not in labels:
            continue
        M = zeros(len(labels[i + 1]), len(labels[i]))
        for J, tau_J in indices[i + 1]:
            for j in range(len(J)):
                I = J[:j] + J[j + 1:]
                tau_I = next(t for t in components[I] if P.is_face(tau_J, t))
                R = F.restriction(tau_I, tau_J)
                sign = (-1) ** j
                for a, row in enumerate(R):
                    for b, x in enumerate(row):
                        if x:
                            M[index[i + 1][(J, tau_J, a)]][index[i][(I, tau_I, b)]] += sign * x
        differentials[i] = M
    C = CochainComplex(labels, differentials, P, order)
    logger.debug("Čech complex: ranks %s (%.2fs)", [len(labels[i]) for i in sorted(labels)], time.time() - started)
    return C


@dataclass
class GradedPiece:
    cell: str
    codim: int
    complex: CochainComplex


def filtration_graded(C: CochainComplex) -> Dict[str, GradedPiece]:
    """Split C into the pieces C_τ^• spanned by indices whose component is τ."""
    if C.complex is None:
        raise SheafError("Čech complex carries no cell data")
    P = C.complex
    cells = sorted({lab[1] for labs in C.labels.values() for lab in labs})
    pieces = {}
    for tau in cells:
        positions = {i: [j for j, lab in enumerate(labs) if lab[1] == tau] for i, labs in C.labels.items()}
        labels = {i: [C.labels[i][j] for j in pos] for i, pos in positions.items()}
        differentials = {}
        for i in labels:
            if i + 1 in labels:
                D = C.differential(i)
                differentials[i] = [[D[r][c] for c in positions[i]] for r in positions[i + 1]]
        pieces[tau] = GradedPiece(tau, P.n - P.dim(tau), CochainComplex(labels, differentials, P, C.order))
    for tau in P.cells:
        if tau not in pieces:
            pieces[tau] = GradedPiece(tau, P.n - P.dim(tau), CochainComplex({}, {}, P, C.order))
    return pieces


def check_graded_concentration(P: PolyComplex, order: Optional[Sequence[str]] = None) -> Dict[str, bool]:
    """Per cell: H^i(C_τ^•; ℤ) is ℤ exactly at i = codim τ (interior) or vanishes (boundary)."""
    pieces = filtration_graded(cech_complex(P, ConstantSheaf(1), order))
    boundary = P.boundary_cells()
    verdict = {}
    for tau, piece in sorted(pieces.items()):
        h = homology(piece.complex)
        expected = {} if tau in boundary else {piece.codim: 1}
        ok = all(h.rank(i) == expected.get(i, 0) and not h.torsion(i) for i in h.groups)
        if tau not in boundary and piece.codim not in h.groups:
            ok = False
        verdict[tau] = ok
    return verdict


# ---------------------------------------------------------------------------
# Comparison map
# ---------------------------------------------------------------------------

def _bezout(values: Sequence[int]) -> Optional[List[int]]:
    """Coefficients a with Σ a_i·values_i = 1, or None when the gcd is not 1."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        if v == 0:
            continue
        if g == 0:
            g, coeffs = v, [0] * len(values)
            coeffs[i] = 1
            continue
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        coeffs = [c * old_s for c in coeffs]
        coeffs[i] += old_t
        g = old_r
    if g < 0:
        g, coeffs = -g, [-c for c in coeffs]
    return coeffs if g == 1 else None


@dataclass
class ComparisonResult:
    """Generators g_τ, reading functionals λ_τ and the E₁ differentials D₁^k."""

    level_complex: PolyComplex
    chain: ChainComplex
    cech: CochainComplex
    generators: Dict[str, Dict[Tuple[str, ...], int]]
    functionals: Dict[str, Dict[Tuple[str, ...], int]]
    e1_labels: Dict[int, List[ChainLabel]]
    e1_differentials: Dict[int, IntMatrix]

    def chain_map(self, i: int) -> IntMatrix:
        """f_i: C_i(B, ∂B; F) → C^{n−i} sending τ ⊗ s to g_τ ⊗ s."""
        n = self.level_complex.n
        cols = self.chain.labels.get(i, [])
        rows = self.cech.labels.get(n - i, [])
        index = {lab: r for r, lab in enumerate(rows)}
        M = zeros(len(rows), len(cols))
        for c, (tau, s) in enumerate(cols):
            for I, coeff in self.generators.get(tau, {}).items():
                M[index[(I, tau, s)]][c] = coeff
        return M

    def reading_map(self, k: int) -> IntMatrix:
        """C^k → E₁^k reading the (J, τ, s) entries with λ_τ."""
        rows = self.e1_labels.get(k, [])
        cols = self.cech.labels.get(k, [])
        index = {lab: r for r, lab in enumerate(rows)}
        M = zeros(len(rows), len(cols))
        for c, (J, tau, s) in enumerate(cols):
            lam = self.functionals.get(tau, {}).get(J)
            if lam and (tau, s) in index:
                M[index[(tau, s)]][c] = lam
        return M

    def induced_map(self, i: int) -> IntMatrix:
        """The comparison C_i(B, ∂B; F) → E₁^{n−i}; unimodular when every g_τ generates."""
        return matmul(self.reading_map(self.level_complex.n - i), self.chain_map(i))

    def non_invertible_degrees(self) -> List[int]:
        out = []
        for i in range(self.level_complex.n + 1):
            M = self.induced_map(i)
            size = self.chain.dim(i)
            if len(M) != size or any(len(row) != size for row in M) or determinant(M) not in (1, -1):
                out.append(i)
        return out

    def mismatches(self) -> List[str]:
        n = self.level_complex.n
        out = []
        for k, D in sorted(self.e1_differentials.items()):
            if D != self.chain.boundary(n - k):
                out.append(f"d₁ differs from ∂ in Čech degree {k}")
        return out

    @property
    def chain_map_holds(self) -> bool:
        return not self.mismatches()

    def e1_complex(self) -> CochainComplex:
        return CochainComplex(dict(self.e1_labels), dict(self.e1_differentials), self.level_complex)


def comparison_map(P: PolyComplex, F, order: Optional[Sequence[str]] = None) -> ComparisonResult:
    """Build g_τ from the orientations and compare d₁ on E₁ with ∂ on C_•(B, ∂B; F)."""
    n = P.n
    boundary = P.boundary_cells()
    interior = {c for c in P.cells if c not in boundary}
    order = _check_order(P, order)

    cech_z = cech_complex(P, ConstantSheaf(1), order)
    pieces = filtration_graded(cech_z)
    cech_f = cech_complex(P, F, order)
    chain = simplicial_chain_complex(P, set(boundary), F)

    generators: Dict[str, Dict[Tuple[str, ...], int]] = {}
    functionals: Dict[str, Dict[Tuple[str, ...], int]] = {}
    z_index = {i: {lab[0:2]: j for j, lab in enumerate(labs)} for i, labs in cech_z.labels.items()}

    for k in range(n + 1):
        for tau in P.ids(n - k):
            if tau not in interior:
                continue
            piece = pieces[tau].complex
            basis = [lab[0] for lab in piece.labels.get(k, [])]
            h = homology(piece)
            if h.rank(k) != 1 or h.torsion(k) or any(h.rank(i) for i in h.groups if i != k):
                raise SheafError(f"generator normalization failure at '{tau}': graded piece is {h.summary()}")
            if k == 0:
                g = {(tau,): 1}
            else:
                omega = sorted(s.cell for s in P.cofaces(tau))[0]
                eps = P.epsilon(tau, omega) if len(P.slots_of(tau, omega)) == 1 else None
                if eps is None:
                    raise SheafError(f"'{tau}' repeats in '{omega}'; use the barycentric level")
                D = cech_z.differential(k - 1)
                g = {}
                for I_w, coeff in generators[omega].items():
                    col = z_index[k - 1][(I_w, omega)]
                    for J in basis:
                        x = D[z_index[k][(J, tau)]][col]
                        if x:
                            g[J] = g.get(J, 0) + eps * coeff * x
                g = {J: x for J, x in g.items() if x}
            vec = [g.get(J, 0) for J in basis]
            if k + 1 in piece.labels:
                Dk = piece.differential(k)
                if any(sum(row[j] * vec[j] for j in range(len(vec))) for row in Dk):
                    raise SheafError(f"generator normalization failure at '{tau}': not a cocycle")
            if k - 1 in piece.labels and piece.dim(k - 1):
                functionals_basis = integer_kernel(transpose(piece.differential(k - 1)), len(basis))
            else:
                functionals_basis = [tuple(1 if a == b else 0 for b in range(len(basis))) for a in range(len(basis))]
            values = [sum(y[j] * vec[j] for j in range(len(vec))) for y in functionals_basis]
            coeffs = _bezout(values)
            if coeffs is None:
                raise SheafError(f"generator normalization failure at '{tau}': class is not a generator")
            lam = [sum(a * y[j] for a, y in zip(coeffs, functionals_basis)) for j in range(len(basis))]
            generators[tau] = g
            functionals[tau] = {J: x for J, x in zip(basis, lam) if x}

    e1_labels = {k: [(tau, s) for tau in P.ids(n - k) if tau in interior for s in range(F.rank(tau))]
                 for k in range(n + 1)}
    f_index = {i: {lab: j for j, lab in enumerate(labs)} for i, labs in cech_f.labels.items()}
    e1_differentials: Dict[int, IntMatrix] = {}
    for k in range(n):
        rows, cols = e1_labels[k + 1], e1_labels[k]
        M = zeros(len(rows), len(cols))
        D = cech_f.differential(k)
        row_pos = {lab: r for r, lab in enumerate(rows)}
        for c, (omega, s) in enumerate(cols):
            source = [(f_index[k][(I, omega, s)], x) for I, x in generators[omega].items()]
            for (J, tau, s2), r in f_index.get(k + 1, {}).items():
                if (tau, s2) not in row_pos:
                    continue
                lam = functionals[tau].get(J)
                if not lam:
                    continue
                value = sum(D[r][col] * x for col, x in source)
                if value:
                    M[row_pos[(tau, s2)]][c] += lam * value
        e1_differentials[k] = M
    return ComparisonResult(P, chain, cech_f, generators, functionals, e1_labels, e1_differentials)


@dataclass
class PoincareLefschetzReport:
    holds: bool
    chain_map_holds: bool = False
    homology: Optional[HomologyResult] = None
    cohomology: Optional[HomologyResult] = None
    problems: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds


def poincare_lefschetz_check(P: PolyComplex, F, order: Optional[Sequence[str]] = None) -> PoincareLefschetzReport:
    """H_i(B, ∂B; F) ≅ H^{n−i}(B; F) through the filtered Čech comparison."""
    try:
        comp = comparison_map(P, F, order)
        problems = comp.mismatches()
        problems += [f"comparison map is not invertible in degree {i}" for i in comp.non_invertible_degrees()]
        h = homology(comp.chain)
        c = homology(comp.cech)
        e1 = homology(comp.e1_complex())
    except TropicalError as exc:
        logger.info("Poincaré–Lefschetz check aborted: %s", exc)
        return PoincareLefschetzReport(False, problems=[str(exc)])

    n = P.n
    for i in range(n + 1):
        if h.rank(i) != c.rank(n - i) or h.torsion(i) != c.torsion(n - i):
            problems.append(f"H_{i} = {h.groups.get(i, HomologyGroup(0))} but H^{n - i} = "
                            f"{c.groups.get(n - i, HomologyGroup(0))}")
        if e1.rank(n - i) != c.rank(n - i) or e1.torsion(n - i) != c.torsion(n - i):
            problems.append(f"E₁ cohomology differs from Čech cohomology in degree {n - i}")
    return PoincareLefschetzReport(not problems, comp.chain_map_holds, h, c, problems)


def pushforward_homology(affine: AffineData, sheaf: Optional[ConstructibleSheaf] = None):
    """Relative homology, Čech cohomology and comparison for i_*Λ at the working level."""
    level = homology_level(affine)
    F = sheaf or ConstructibleSheaf(affine, level)
    P = level_complex(affine, level)
    report = poincare_lefschetz_check(P, F)
    if report.homology is None:
        raise SheafError("; ".join(report.problems))
    return level, report
