"""
Periods of tropical 1-cycles.

``compute_period`` evaluates the closed product formula for the canonical
coordinate h_β(t) = (−1)^ν · Π_p s_p · t^{κ_p⟨ξ,d_p⟩}. ``assemble_integral``
rebuilds the same number from the piecewise pieces of ∫_β Ω (edge segments,
slab crossings, vertices, walls) with symbolic endpoint radii, checks that
every radius term cancels and exponentiates the result. The two code paths
share only the crossing walk.

All t-exponents and signs are exact integers; gluing values and slab
constants are mpmath complex numbers compared with a relative tolerance.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from mpmath import mp, mpc, mpf

from .affine_structure import AffineData
from .errors import NormalizationError, PeriodError
from .lattice_core import IntCovector, IntVector, add_vectors, is_zero, pairing, scale_vector
from .polyhedral_complex import Side
from .series import TruncatedSeries
from .tropical_cycles import Crossing, TropicalOneCycle, check_balancing, crossings, walk_edge

logger = logging.getLogger(__name__)

FLOAT_TOLERANCE = 1e-12


def two_pi_i() -> mpc:
    return mpc(0, 2 * mp.pi)


def branch_log(z) -> mpc:
    """Logarithm with imaginary part in [0, 2π)."""
    z = mpc(z)
    if z == 0:
        raise PeriodError("logarithm of zero")
    w = mp.log(z)
    if w.imag < 0:
        w += two_pi_i()
    return mpc(w)


def _close(a, b, tol: float = FLOAT_TOLERANCE) -> bool:
    scale = max(abs(a), abs(b), 1)
    return abs(a - b) <= tol * scale


# ---------------------------------------------------------------------------
# Gluing data and slab functions
# ---------------------------------------------------------------------------

class GluingData:
    """Values s_j ∈ ℂ^× per (piece, adjacent side) on the basis of that side's frame."""

    def __init__(self, n: int, values: Optional[Mapping[Tuple[str, Side], Sequence]] = None,
                 strict: bool = False):
        self.n = n
        self.strict = strict
        self.values: Dict[Tuple[str, Side], Tuple[mpc, ...]] = {}
        for (piece, side), s in (values or {}).items():
            s = tuple(mpc(x) for x in s)
            if len(s) != n:
                raise PeriodError(f"gluing on '{piece}' at '{side.cell}' needs {n} values, got {len(s)}")
            if any(x == 0 for x in s):
                raise PeriodError(f"gluing on '{piece}' at '{side.cell}' has a zero value")
            self.values[(piece, side)] = s

    @classmethod
    def trivial(cls, n: int) -> "GluingData":
        return cls(n)

    def is_trivial(self) -> bool:
        return all(x == 1 for s in self.values.values() for x in s)

    def value(self, piece: str, side: Side, xi: Sequence[int]) -> mpc:
        """s(ξ) = Π s_j^{ξ_j}, ξ in the frame of ``side.cell``."""
        s = self.values.get((piece, side))
        if s is None:
            if self.strict:
                raise PeriodError(f"missing gluing values for piece '{piece}' at '{side.cell}'")
            return mpc(1)
        out = mpc(1)
        for sj, x in zip(s, xi):
            out *= sj ** int(x)
        return out


@dataclass
class SlabFunction:
    """f = Σ c_{m,e} z^m t^e on a piece, truncated at t-order ``order``."""

    carrier: str
    order: int
    terms: Dict[Tuple[IntVector, int], object]
    rank: int = 1

    def __post_init__(self):
        self.terms = {(tuple(m), e): c for (m, e), c in self.terms.items() if c != 0}
        for (m, e) in self.terms:
            if len(m) != self.rank:
                raise PeriodError(f"slab '{self.carrier}': monomial {m} does not have rank {self.rank}")
            if e < 0 or e > self.order:
                raise PeriodError(f"slab '{self.carrier}': t-power {e} outside 0..{self.order}")
        if self.constant == 0:
            raise PeriodError(f"slab '{self.carrier}' has zero constant term")

    @property
    def constant(self):
        return self.terms.get((tuple([0] * self.rank), 0), 0)

    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.terms.values())

    def series(self) -> TruncatedSeries:
        return TruncatedSeries(self.rank, self.order, self.terms)

    def normalized_part(self) -> TruncatedSeries:
        """f̃ with f = a(1 + f̃)."""
        a = self.constant
        inv = Fraction(1) / a if isinstance(a, (int, Fraction)) else 1 / a
        return self.series().scale(inv) - TruncatedSeries.one(self.rank, self.order)

    def tangency_defects(self, affine: AffineData) -> List[IntVector]:
        """Exponents not in Λ_ρ (⟨d_ρ, m⟩ ≠ 0 in the σ₋ frame)."""
        minus, _ = affine.piece_sides(self.carrier)
        d = affine.primitive_normal(affine.bary.ancestor(self.carrier), minus)
        return [m for (m, _) in self.terms if pairing(d, m) != 0]


def trivial_slab(carrier: str, rank: int, order: int = 0) -> SlabFunction:
    return SlabFunction(carrier, order, {(tuple([0] * rank), 0): 1}, rank)


def slab_constant(slabs: Mapping[str, SlabFunction], piece: str):
    f = slabs.get(piece)
    return 1 if f is None else f.constant


# ---------------------------------------------------------------------------
# Period products
# ---------------------------------------------------------------------------

@dataclass
class CrossingTerm:
    edge: str
    piece: str
    parent: str
    kappa: int
    pairing: int
    s_p: mpc

    @property
    def t_exponent(self) -> int:
        return self.kappa * self.pairing


@dataclass
class PeriodProduct:
    """h_β(t) = sign · constant · t^{t_exponent}."""

    sign: int
    constant: mpc
    t_exponent: int
    crossings: List[CrossingTerm] = field(default_factory=list)

    def evaluate(self, t) -> mpc:
        return self.sign * self.constant * mpc(t) ** self.t_exponent

    def inverse(self) -> "PeriodProduct":
        return PeriodProduct(self.sign, 1 / self.constant, -self.t_exponent, [])

    def __mul__(self, other: "PeriodProduct") -> "PeriodProduct":
        return PeriodProduct(self.sign * other.sign, self.constant * other.constant,
                             self.t_exponent + other.t_exponent, self.crossings + other.crossings)

    def equals(self, other: "PeriodProduct", tol: float = FLOAT_TOLERANCE) -> bool:
        return (self.t_exponent == other.t_exponent
                and _close(self.sign * self.constant, other.sign * other.constant, tol))

    def format(self, precision: int = 12, name: str = "h_β") -> str:
        c = self.sign * self.constant
        if self.t_exponent == 0:
            tpart = ""
        elif self.t_exponent == 1:
            tpart = "t"
        else:
            tpart = f"t^{self.t_exponent}"
        if _close(c, 1):
            coeff = "" if tpart else "1"
        elif _close(c, -1):
            coeff = "-" if tpart else "-1"
        else:
            coeff = format_complex(c, precision) + ("·" if tpart else "")
        return f"{name} = {coeff}{tpart}"


def format_complex(z, precision: int = 12) -> str:
    z = mpc(z)
    re = mp.nstr(z.real, precision)
    if abs(z.imag) <= FLOAT_TOLERANCE * max(1, abs(z)):
        return re
    im = mp.nstr(abs(z.imag), precision)
    return f"({re}{'-' if z.imag < 0 else '+'}{im}i)"


def s_p(crossing: Crossing, gluing: GluingData, a=1) -> mpc:
    """a^{⟨d,ξ⟩} · s_B(ξ_B) / s_A(ξ_A) for a traverse from side A to side B."""
    if a == 0:
        raise PeriodError(f"slab constant on '{crossing.piece}' is zero")
    before = gluing.value(crossing.piece, crossing.from_side, crossing.xi_before)
    after = gluing.value(crossing.piece, crossing.to_side, crossing.xi)
    return mpc(a) ** crossing.pairing * after / before


def _interior_or_raise(affine: AffineData, cycle: TropicalOneCycle):
    P = affine.complex
    for v in cycle.vertices.values():
        if v.cell in P.cells and P.dim(v.cell) < P.n and P.is_boundary(v.cell):
            raise PeriodError(f"cycle '{cycle.name}' meets ∂B at '{v.id}'; its period is not finite")
    if not cycle.edges:
        raise PeriodError(f"cycle '{cycle.name}' is empty")
    if not check_balancing(affine, cycle):
        raise PeriodError(f"cycle '{cycle.name}' is not balanced")


def compute_period(affine: AffineData, cycle: TropicalOneCycle, gluing: Optional[GluingData] = None,
                   slabs: Optional[Mapping[str, SlabFunction]] = None) -> PeriodProduct:
    gluing = gluing or GluingData.trivial(affine.n)
    slabs = slabs or {}
    _interior_or_raise(affine, cycle)

    nu = cycle.valency_sum()
    if nu % 2:
        logger.warning("cycle %s has odd valency sum %d", cycle.name, nu)
    terms = []
    for c in crossings(affine, cycle):
        terms.append(CrossingTerm(c.edge, c.piece, c.parent, c.kappa, c.pairing,
                                  s_p(c, gluing, slab_constant(slabs, c.piece))))
    constant = mpc(1)
    for term in terms:
        constant *= term.s_p
    exponent = sum(term.t_exponent for term in terms)
    logger.debug("period of %s: %d crossings, t-exponent %d", cycle.name, len(terms), exponent)
    return PeriodProduct(-1 if nu % 2 else 1, constant, exponent, terms)


# ---------------------------------------------------------------------------
# Slab functions: normalization, compatibility, wall transforms
# ---------------------------------------------------------------------------

def normalization_defects(f: SlabFunction, k: Optional[int] = None) -> Dict[int, object]:
    """Non-vanishing coefficients of pure t^e (1 ≤ e ≤ k) in log(f/a)."""
    k = f.order if k is None else k
    if k > f.order:
        raise NormalizationError(f"order {k} exceeds the truncation order {f.order} of '{f.carrier}'")
    log = f.normalized_part().truncate(k).log1p()
    exact = f.is_exact()
    defects = {}
    for e, c in sorted(log.pure_t_terms().items()):
        if 1 <= e <= k and (c != 0 if exact else abs(complex(c)) > FLOAT_TOLERANCE):
            defects[e] = c
    return defects


def check_normalized(f: SlabFunction, k: Optional[int] = None) -> bool:
    defects = normalization_defects(f, k)
    for e, c in defects.items():
        logger.debug("slab %s: log coefficient %s at t^%d", f.carrier, c, e)
    return not defects


def compatibility_check(f: SlabFunction, f_other: SlabFunction, m: Sequence[int],
                        kappa: int, kappa_other: int) -> bool:
    """t^κ f = z^m t^{κ'} f' as truncated series."""
    if f.order != f_other.order:
        raise PeriodError(f"truncation orders differ: {f.order} vs {f_other.order}")
    if f.rank != f_other.rank or len(m) != f.rank:
        raise PeriodError("slab functions live on lattices of different rank")
    lhs = f.series().shift(tuple([0] * f.rank), kappa)
    rhs = f_other.series().shift(m, kappa_other)
    if f.is_exact() and f_other.is_exact():
        return lhs == rhs
    return lhs.almost_equal(rhs)


def wall_transform(f: TruncatedSeries, d: IntCovector, m: Sequence[int]) -> TruncatedSeries:
    """z^m ↦ f^{⟨d,m⟩} z^m."""
    if not f.is_unipotent():
        raise PeriodError("wall function is not ≡ 1 mod t")
    return (f ** pairing(d, m)).shift(m)


# ---------------------------------------------------------------------------
# Symbolic assembly of the period integral
# ---------------------------------------------------------------------------

@dataclass
class LogTValue:
    """I = L·log t + C + half_periods·πi, with I = ∫_β Ω / (2πi)^{n−1}.

    ``radius_terms`` maps an endpoint label to the coefficient vector of
    log r_label; a finished assembly must have all of them zero.
    """

    log_t: int = 0
    constant: mpc = field(default_factory=lambda: mpc(0))
    half_periods: int = 0
    radius_terms: Dict[str, IntVector] = field(default_factory=dict)
    radii: Dict[str, Tuple] = field(default_factory=dict)

    def __add__(self, other: "LogTValue") -> "LogTValue":
        terms = dict(self.radius_terms)
        for label, v in other.radius_terms.items():
            terms[label] = add_vectors(terms[label], v) if label in terms else tuple(v)
        radii = dict(self.radii)
        radii.update(other.radii)
        return LogTValue(self.log_t + other.log_t, self.constant + other.constant,
                         self.half_periods + other.half_periods, terms, radii)

    def uncancelled(self) -> Dict[str, IntVector]:
        return {label: v for label, v in sorted(self.radius_terms.items()) if not is_zero(v)}

    def radius_value(self) -> mpf:
        total = mpf(0)
        for label, v in self.uncancelled().items():
            r = self.radii.get(label)
            if r is None:
                raise PeriodError(f"no radius assigned to endpoint '{label}'")
            for x, rj in zip(v, r):
                total += x * mp.log(rj)
        return total

    def symbolic(self) -> Tuple[int, mpc, int]:
        return self.log_t, self.constant, self.half_periods

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogTValue):
            return NotImplemented
        return self.symbolic() == other.symbolic() and self.uncancelled() == other.uncancelled()

    def evaluate(self, t) -> mpc:
        """Numeric I(t) on the [0, 2π) branch of log t."""
        return (self.log_t * branch_log(t) + self.constant + self.radius_value()
                + self.half_periods * mpc(0, mp.pi))

    def exponentiate(self) -> PeriodProduct:
        """h = exp(−I) = (−1)^{half_periods} · e^{−C} · t^{−L}."""
        if self.uncancelled():
            raise PeriodError(f"radius terms do not cancel: {self.uncancelled()}")
        sign = -1 if self.half_periods % 2 else 1
        return PeriodProduct(sign, mp.exp(-self.constant), -self.log_t)


def _positive_radii(label: str, r: Optional[Sequence], n: int) -> Dict[str, Tuple]:
    if r is None:
        return {}
    if len(r) != n or any(x <= 0 for x in r):
        raise PeriodError(f"endpoint radii at '{label}' must be {n} positive numbers, got {tuple(r)}")
    return {label: tuple(mpf(x) for x in r)}


def edge_segment_term(xi: Sequence[int], start: str, end: str) -> LogTValue:
    """Straight segment inside one cell from endpoint ``start`` to ``end``."""
    return LogTValue(radius_terms={start: tuple(xi), end: scale_vector(-1, xi)})


def slab_integral_closed_form(crossing: Crossing, gluing: GluingData, a=1,
                              r: Optional[Sequence] = None, r_prime: Optional[Sequence] = None,
                              labels: Tuple[str, str] = ("r", "r'")) -> LogTValue:
    """Contribution of one slab crossing, radii r before and r' after the slab."""
    if a == 0:
        raise PeriodError(f"slab constant on '{crossing.piece}' is zero")
    n = len(crossing.xi)
    k = crossing.pairing
    ratio = (gluing.value(crossing.piece, crossing.to_side, crossing.xi)
             / gluing.value(crossing.piece, crossing.from_side, crossing.xi_before))
    constant = -(k * branch_log(a) + branch_log(ratio))
    before, after = labels
    radii = {}
    radii.update(_positive_radii(before, r, n))
    radii.update(_positive_radii(after, r_prime, n))
    terms = {before: tuple(crossing.xi_before), after: scale_vector(-1, crossing.xi)}
    return LogTValue(-crossing.kappa * k, constant, 0, terms, radii)


def vertex_term(valency: int) -> LogTValue:
    """Vertex chains contribute (2πi)^n·½ℤ; the half-integer count is the valency."""
    return LogTValue(half_periods=valency)


@dataclass
class Assembly:
    value: LogTValue
    product: PeriodProduct
    reference: PeriodProduct
    agrees: bool
    pieces: int


def _random_radii(labels: Sequence[str], n: int, rng: random.Random) -> Dict[str, Tuple]:
    return {label: tuple(mpf(rng.uniform(0.05, 0.95)) for _ in range(n)) for label in labels}


def assemble_integral(affine: AffineData, cycle: TropicalOneCycle, gluing: Optional[GluingData] = None,
                      slabs: Optional[Mapping[str, SlabFunction]] = None,
                      radii: Optional[Mapping[str, Sequence]] = None,
                      rng: Optional[random.Random] = None) -> Assembly:
    gluing = gluing or GluingData.trivial(affine.n)
    slabs = slabs or {}
    _interior_or_raise(affine, cycle)
    rng = rng or random.Random(0)

    total = LogTValue()
    labels: List[str] = []
    pieces = 0
    for e in cycle.edges:
        walk = walk_edge(affine, cycle, e)
        here = f"vertex:{e.source}"
        xi = tuple(e.xi)
        for i, c in enumerate(walk.crossings):
            if c.kappa <= 0:
                raise PeriodError(f"no positive kink on crossed piece '{c.piece}'")
            before, after = f"{e.id}:{i}:in", f"{e.id}:{i}:out"
            total = total + edge_segment_term(xi, here, before)
            total = total + slab_integral_closed_form(c, gluing, slab_constant(slabs, c.piece),
                                                      labels=(before, after))
            labels.extend([before, after])
            here, xi = after, c.xi
            pieces += 2
        total = total + edge_segment_term(xi, here, f"vertex:{e.target}")
        pieces += 1
    # walls inside maximal cells carry no function and contribute nothing
    for v in cycle.vertices:
        total = total + vertex_term(cycle.valency(v))
        labels.append(f"vertex:{v}")
        pieces += 1

    assigned = _random_radii(sorted(set(labels)), affine.n, rng)
    for label, r in (radii or {}).items():
        assigned.update(_positive_radii(label, r, affine.n))
    total.radii = assigned

    if total.uncancelled():
        raise PeriodError(f"cycle '{cycle.name}': endpoint radius terms do not cancel "
                          f"({len(total.uncancelled())} endpoints left)")
    product = total.exponentiate()
    reference = compute_period(affine, cycle, gluing, slabs)
    agrees = product.equals(reference)
    if not agrees:
        logger.warning("assembly of %s gives %s, product formula gives %s",
                       cycle.name, product.format(), reference.format())
    return Assembly(total, product, reference, agrees, pieces)
