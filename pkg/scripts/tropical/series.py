"""
Truncated Laurent series in lattice monomials z^m and the parameter t.

Elements of A_k[Λ] = ℂ[Λ][t]/(t^{k+1}) are sparse maps (m, e) -> coefficient.
Coefficients may be exact (int, Fraction) or complex (complex, mpmath.mpc);
products drop every term of t-degree above the order.
"""

from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .errors import PeriodError
from .lattice_core import IntCovector, IntVector, add_vectors, pairing

Monomial = Tuple[IntVector, int]


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _divide(x, i: int):
    return Fraction(x, i) if isinstance(x, int) else x / i


class TruncatedSeries:
    def __init__(self, rank: int, order: int, terms: Optional[Dict[Monomial, object]] = None):
        if order < 0:
            raise PeriodError(f"truncation order must be non-negative, got {order}")
        self.rank = rank
        self.order = order
        self.terms: Dict[Monomial, object] = {}
        for (m, e), c in (terms or {}).items():
            m = tuple(m)
            if len(m) != rank:
                raise PeriodError(f"monomial {m} does not have rank {rank}")
            if e <= order and c != 0:
                self.terms[(m, e)] = self.terms.get((m, e), 0) + c
        self.terms = {k: c for k, c in self.terms.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def one(cls, rank: int, order: int) -> "TruncatedSeries":
        return cls(rank, order, {(tuple([0] * rank), 0): 1})

    @classmethod
    def monomial(cls, rank: int, order: int, m: Sequence[int], e: int = 0, c=1) -> "TruncatedSeries":
        return cls(rank, order, {(tuple(m), e): c})

    @property
    def zero_exponent(self) -> IntVector:
        return tuple([0] * self.rank)

    # -- queries -----------------------------------------------------------

    def coefficient(self, m: Sequence[int], e: int):
        return self.terms.get((tuple(m), e), 0)

    def constant(self):
        return self.coefficient(self.zero_exponent, 0)

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def pure_t_terms(self) -> Dict[int, object]:
        return {e: c for (m, e), c in self.terms.items() if m == self.zero_exponent}

    def t_degree_zero(self) -> Dict[IntVector, object]:
        return {m: c for (m, e), c in self.terms.items() if e == 0}

    def almost_equal(self, other: "TruncatedSeries", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(complex(self.terms.get(k, 0)) - complex(other.terms.get(k, 0))) <= tol for k in keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.rank == other.rank and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (m, e), c in sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            mono = "" if not any(m) else f"z^{m}"
            tpow = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
            parts.append(f"{c}{'·' if mono or tpow else ''}{mono}{tpow}")
        return " + ".join(parts)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if self.rank != other.rank:
            raise PeriodError(f"rank mismatch: {self.rank} vs {other.rank}")

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.rank, order, self.terms)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        order = min(self.order, other.order)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return TruncatedSeries(self.rank, order, terms)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.rank, self.order, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.rank, self.order, {k: c * x for k, x in self.terms.items()})

    def shift(self, m: Sequence[int], e: int = 0) -> "TruncatedSeries":
        """Multiply by z^m t^e."""
        return TruncatedSeries(self.rank, self.order,
                               {(add_vectors(k, m), f + e): c for (k, f), c in self.terms.items()})

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        order = min(self.order, other.order)
        terms: Dict[Monomial, object] = {}
        for (m1, e1), c1 in self.terms.items():
            for (m2, e2), c2 in other.terms.items():
                e = e1 + e2
                if e > order:
                    continue
                key = (add_vectors(m1, m2), e)
                terms[key] = terms.get(key, 0) + c1 * c2
        return TruncatedSeries(self.rank, order, terms)

    __rmul__ = scale

    def is_unipotent(self) -> bool:
        """f ≡ 1 mod t."""
        return self.t_degree_zero() == {self.zero_exponent: 1}

    def inverse(self) -> "TruncatedSeries":
        """Geometric-series inverse of a series congruent to 1 mod t."""
        if not self.is_unipotent():
            raise PeriodError("series is not invertible (not ≡ 1 mod t)")
        g = self - TruncatedSeries.one(self.rank, self.order)
        result = TruncatedSeries.one(self.rank, self.order)
        power = TruncatedSeries.one(self.rank, self.order)
        for _ in range(self.order):
            power = power * (-g)
            result = result + power
        return result

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = TruncatedSeries.one(self.rank, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- logarithm ---------------------------------------------------------

    def grading(self, search: int = 3) -> IntCovector:
        """A covector positive on every t-degree-zero exponent (used to bound log expansions)."""
        exponents = [m for m in self.t_degree_zero()]
        if self.zero_exponent in exponents:
            raise PeriodError("log1p needs a series without constant term")
        if not exponents:
            return tuple([0] * self.rank)
        for g in product(range(-search, search + 1), repeat=self.rank):
            if all(pairing(g, m) > 0 for m in exponents):
                return g
        raise PeriodError("t-degree-zero exponents do not lie in an open half-space")

    def log1p(self) -> "TruncatedSeries":
        """log(1 + self) on the terms with lattice part 0.

        Terms whose lattice exponent can no longer return to 0 within the
        remaining t-order are pruned, so the result is exact on pure t^e
        coefficients and partial elsewhere.
        """
        g = self.grading()
        k = self.order
        drop = max([0] + [-pairing(g, m) for (m, e) in self.terms if e > 0])

        def prune(s: TruncatedSeries) -> TruncatedSeries:
            return TruncatedSeries(s.rank, s.order,
                                   {(m, e): c for (m, e), c in s.terms.items()
                                    if pairing(g, m) <= drop * (k - e)})

        max_power = k + k * drop
        result = TruncatedSeries(self.rank, k)
        power = TruncatedSeries.one(self.rank, k)
        for i in range(1, max_power + 1):
            power = prune(power * self)
            if not power.terms:
                break
            sign = 1 if i % 2 else -1
            result = result + TruncatedSeries(self.rank, k, {key: sign * _divide(c, i) for key, c in power.terms.items()})
        return prune(result)


def series_from_terms(rank: int, order: int, terms: Iterable[Tuple[Sequence[int], int, object]]) -> TruncatedSeries:
    """Build from (m, e, c) triples."""
    return TruncatedSeries(rank, order, {(tuple(m), e): c for m, e, c in terms})
