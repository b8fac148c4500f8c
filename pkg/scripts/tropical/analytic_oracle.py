"""
Numeric checks of the local integrals behind the period formula.

Everything here works on local models only (tori, a Tate chart pair, slab
cylinders, vertex stars) and never calls the symbolic period engine, so the
two can be compared. Quadrature is the trapezoidal rule on uniform angular grids.
"""

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .config import QuadratureConfig
from .errors import OracleError
from .lattice_core import IntVector, determinant, integer_kernel, is_zero
from .series import TruncatedSeries

logger = logging.getLogger(__name__)

TWO_PI = 2 * np.pi


def _torus_integral(integrand: Callable[[Sequence[np.ndarray]], np.ndarray], dim: int, samples: int) -> complex:
    """∫ over [0, 2π]^dim of a periodic integrand, trapezoid along every axis."""
    if dim == 0:
        return complex(integrand([]))
    axis = np.linspace(0.0, TWO_PI, samples + 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    values = integrand(grids)
    for _ in range(dim):
        values = trapezoid(values, axis, axis=-1)
    return complex(values)


# ---------------------------------------------------------------------------
# Vanishing torus
# ---------------------------------------------------------------------------

def integrate_alpha(n: int, cfg: Optional[QuadratureConfig] = None) -> complex:
    """∫ dz₁/z₁ ∧ … ∧ dz_n/z_n over a deformed vanishing torus.

    The torus is log z_j = iθ_j + c·sin θ_{j+1} (indices mod n); the result is
    (2πi)^n for every c.
    """
    if n not in (1, 2, 3):
        raise OracleError(f"integrate_alpha supports n ∈ {{1, 2, 3}}, got {n}")
    cfg = cfg or QuadratureConfig()
    c = cfg.deformation

    def jacobian_det(grids):
        shape = grids[0].shape
        J = np.zeros(shape + (n, n), dtype=complex)
        for j in range(n):
            J[..., j, j] += 1j
            k = (j + 1) % n
            J[..., j, k] += c * np.cos(grids[k])
        return np.linalg.det(J)

    value = _torus_integral(jacobian_det, n, cfg.samples_for(n))
    logger.debug("integrate_alpha(%d) = %s", n, value)
    return value


# ---------------------------------------------------------------------------
# Tate curve
# ---------------------------------------------------------------------------

def principal_log(t: complex) -> complex:
    """log with imaginary part in [0, 2π)."""
    if t == 0:
        raise OracleError("log of zero")
    arg = math.atan2(t.imag, t.real) % (2 * math.pi)
    return complex(math.log(abs(t)), arg)


def tate_period(t: complex, k: int, cfg: Optional[QuadratureConfig] = None) -> complex:
    """∫ dz/z along the closed path on ℂ^×/t^{kℤ} through two charts.

    Chart 1 turns along the unit circle from z = 1 by the angle −k·arg t.
    The end point is carried to chart 2 (coordinate z' = t^k z), where a
    straight segment runs back to z' = 1. Both legs use a smooth step in the
    parameter and the integrand z'(s)/z(s) of the explicit parametrization.
    """
    t = complex(t)
    if not 0 < abs(t) < 1:
        raise OracleError(f"tate_period needs 0 < |t| < 1, got |t| = {abs(t)}")
    cfg = cfg or QuadratureConfig()
    s = np.linspace(0.0, 1.0, cfg.samples_for(1) + 1)
    step = s - np.sin(TWO_PI * s) / TWO_PI
    speed = 1 - np.cos(TWO_PI * s)

    phi = -k * (math.atan2(t.imag, t.real) % TWO_PI)
    z1 = np.cos(phi * step) + 1j * np.sin(phi * step)
    dz1 = phi * speed * (-np.sin(phi * step) + 1j * np.cos(phi * step))
    g1 = trapezoid(dz1 / z1, s)

    w0 = t ** k * z1[-1]
    z2 = w0 + (1 - w0) * step
    dz2 = (1 - w0) * speed
    g2 = trapezoid(dz2 / z2, s)
    return complex(g1 + g2)


def tate_closed_form(t: complex, k: int) -> complex:
    return -k * principal_log(complex(t))


def tate_canonical_coordinate(t: complex, k: int, cfg: Optional[QuadratureConfig] = None) -> complex:
    """exp(−2πi · ∫_β Ω / ∫_α Ω), which should equal t^k."""
    return complex(np.exp(-2j * np.pi * tate_period(t, k, cfg) / integrate_alpha(1, cfg)))


# ---------------------------------------------------------------------------
# Walls
# ---------------------------------------------------------------------------

def _evaluate_series(f: TruncatedSeries, t: complex, points: Sequence[np.ndarray]) -> np.ndarray:
    shape = points[0].shape if points else ()
    value = np.zeros(shape, dtype=complex)
    for (m, e), c in f.terms.items():
        term = complex(c) * t ** e * np.ones(shape, dtype=complex)
        for mj, zj in zip(m, points):
            term = term * zj ** mj
        value = value + term
    return value


def wall_integral(f_tilde: TruncatedSeries, radii: Sequence[float], t: complex,
                  cfg: Optional[QuadratureConfig] = None) -> complex:
    """∫ log(1 + f̃(t, r e^{iθ})) dθ over the torus of the wall's tangent lattice."""
    cfg = cfg or QuadratureConfig()
    dim = f_tilde.rank
    if len(radii) != dim:
        raise OracleError(f"wall_integral needs {dim} radii, got {len(radii)}")
    if f_tilde.constant() != 0:
        raise OracleError("f̃ must not have a constant term")

    def integrand(grids):
        points = [r * np.exp(1j * g) for r, g in zip(radii, grids)]
        values = _evaluate_series(f_tilde, complex(t), points)
        if np.max(np.abs(values)) >= 1:
            raise OracleError("|f̃| ≥ 1 on the sampled torus; log(1 + f̃) leaves its branch")
        return np.log1p(values)

    return _torus_integral(integrand, dim, cfg.samples_for(max(dim, 1)))


# ---------------------------------------------------------------------------
# Torus degrees
# ---------------------------------------------------------------------------

def _oriented_kernel(xi: IntVector) -> List[IntVector]:
    n = len(xi)
    K = integer_kernel([list(xi)], n)
    cols = [list(xi)] + [list(v) for v in K]
    frame = [[cols[c][r] for c in range(n)] for r in range(n)]
    if determinant(frame) < 0:
        K[0] = tuple(-x for x in K[0])
    return K


def torus_degree(xi: Sequence[int], j: int, samples: int = 64, seed: int = 0) -> Tuple[int, float]:
    """Degree of the subgroup {⟨ξ,θ⟩ ∈ ℤ} onto the coordinate torus missing θ_j.

    Returns the exact value, g times the minor of the oriented kernel frame that
    drops row j (g = gcd ξ components), and a sampled estimate: the pulled-back
    volume form of the coordinate torus averaged over random points of every
    component (components oriented with ξ first).
    """
    xi = tuple(int(x) for x in xi)
    n = len(xi)
    if is_zero(xi):
        raise OracleError("torus_degree needs ξ ≠ 0")
    if not 1 <= j <= n:
        raise OracleError(f"coordinate index {j} outside 1..{n}")
    g = math.gcd(*xi)
    if n == 1:
        return xi[0], float(np.sign(xi[0]) * g)

    frame = _oriented_kernel(xi)
    minor = [[v[i] for v in frame] for i in range(n) if i != j - 1]
    exact = g * determinant(minor)

    K = np.array(frame, dtype=float).T  # n × (n−1)
    keep = [i for i in range(n) if i != j - 1]
    rng = np.random.default_rng(seed)
    h = 1e-6
    estimates = []
    for component in range(g):
        shift = np.zeros(n)
        l = int(np.argmax(np.abs(xi)))
        shift[l] = component / xi[l]
        u = rng.random((samples, n - 1))
        base = TWO_PI * (u @ K.T + shift)
        cols = []
        for k in range(n - 1):
            du = np.zeros(n - 1)
            du[k] = h
            moved = TWO_PI * ((u + du) @ K.T + shift)
            cols.append((moved - base)[:, keep] / h)
        jac = np.stack(cols, axis=-1)
        estimates.append(np.mean(np.linalg.det(jac)))
    numeric = float(np.sum(estimates)) / TWO_PI ** (n - 1)
    return exact, numeric


# ---------------------------------------------------------------------------
# Slab cylinders
# ---------------------------------------------------------------------------

def slab_crossing_integral(xi: Sequence[int], d: Sequence[int], kappa: int, a: complex,
                           s_from: Sequence[complex], s_to: Sequence[complex],
                           r: Sequence[float], r_prime: Sequence[float], t: complex,
                           samples: int = 64, seed: int = 0) -> complex:
    """∫ Ω / (2πi)^{n−1} over the cylinder swept through one slab.

    The cylinder is [0, 1] × {⟨ξ,θ⟩ ∈ ℤ} mapped by
    z_j = (s'_j/s_j · r'_j/r_j · (a t^κ)^{d_j})^λ · r_j e^{iθ_j}, with the
    torus components oriented ξ first. Ω = dz₁/z₁ ∧ … ∧ dz_n/z_n is pulled
    back by central differences at random torus points and integrated over λ
    with the trapezoid rule. Only defined mod 2πi.
    """
    xi = tuple(int(x) for x in xi)
    n = len(xi)
    if is_zero(xi):
        raise OracleError("slab_crossing_integral needs ξ ≠ 0")
    if any(len(v) != n for v in (d, s_from, s_to, r, r_prime)):
        raise OracleError(f"slab data must all have length {n}")
    if a == 0 or t == 0 or any(complex(s) == 0 for s in list(s_from) + list(s_to)):
        raise OracleError("slab constant, t and gluing values must be nonzero")
    if any(x <= 0 for x in list(r) + list(r_prime)):
        raise OracleError(f"radii must be positive, got {tuple(r)} and {tuple(r_prime)}")

    at = complex(a) * complex(t) ** kappa
    growth = np.log(np.array([complex(s_to[j]) / complex(s_from[j]) * r_prime[j] / r[j] * at ** int(d[j])
                              for j in range(n)]))
    radii = np.array(r, dtype=float)
    frame = _oriented_kernel(xi) if n > 1 else []
    K = np.array(frame, dtype=float).reshape(len(frame), n).T  # n × (n−1)

    def z(lam, u, shift):
        theta = TWO_PI * (u @ K.T + shift)
        return radii * np.exp(lam[:, None] * growth + 1j * theta)

    lam = np.linspace(0.0, 1.0, samples + 1)
    rng = np.random.default_rng(seed)
    h = 1e-6
    l = int(np.argmax(np.abs(xi)))
    total = 0j
    for component in range(math.gcd(*xi)):
        shift = np.zeros(n)
        shift[l] = component / xi[l]
        u = rng.random((lam.size, n - 1))
        base = z(lam, u, shift)
        cols = [(z(lam + h, u, shift) - z(lam - h, u, shift)) / (2 * h) / base]
        for k in range(n - 1):
            du = np.zeros(n - 1)
            du[k] = h
            cols.append((z(lam, u + du, shift) - z(lam, u - du, shift)) / (2 * h) / base)
        total += trapezoid(np.linalg.det(np.stack(cols, axis=-1)), lam)
    if n == 1:
        total *= np.sign(xi[0])
    value = complex(total / (2j * np.pi) ** (n - 1))
    logger.debug("slab cylinder ξ=%s: %s", xi, value)
    return value


# ---------------------------------------------------------------------------
# Vertex stars
# ---------------------------------------------------------------------------

@dataclass
class VertexStar:
    """Edge vectors ε·ξ at a cycle vertex; balanced means they sum to zero."""

    dim: int
    vectors: List[IntVector]

    def __post_init__(self):
        self.vectors = [tuple(int(x) for x in v) for v in self.vectors]
        if self.dim not in (1, 2):
            raise OracleError(f"vertex stars are supported in dimensions 1 and 2, got {self.dim}")
        for v in self.vectors:
            if len(v) != self.dim or is_zero(v):
                raise OracleError(f"star vector {v} is zero or not of dimension {self.dim}")
        total = tuple(sum(v[i] for v in self.vectors) for i in range(self.dim))
        if not is_zero(total):
            raise OracleError(f"unbalanced star: Σ = {total}")

    @property
    def valency(self) -> int:
        return len(self.vectors)


def _interval_measure(star: VertexStar) -> Fraction:
    """Signed length of the 1-chain on ℝ/ℤ bounded by the points (1/a)ℤ of every edge."""
    charge = {}
    for (a,) in star.vectors:
        sign = 1 if a > 0 else -1
        for l in range(abs(a)):
            p = Fraction(l, abs(a))
            charge[p] = charge.get(p, 0) + sign
    points = sorted(p for p, c in charge.items() if c)
    weight, total = 0, Fraction(0)
    for p, q in zip(points, points[1:] + [Fraction(1)]):
        weight -= charge[p]
        total += weight * (q - p)
    return total


Point = Tuple[Fraction, Fraction]


def _cut(polygon: List[Point], a: IntVector, c: int) -> Tuple[List[Point], List[Point]]:
    """Split a convex polygon along ⟨a, θ⟩ = c into its lower and upper parts."""
    below: List[Point] = []
    above: List[Point] = []
    for p, q in zip(polygon, polygon[1:] + polygon[:1]):
        hp = a[0] * p[0] + a[1] * p[1] - c
        hq = a[0] * q[0] + a[1] * q[1] - c
        if hp <= 0:
            below.append(p)
        if hp >= 0:
            above.append(p)
        if hp * hq < 0:
            r = hp / (hp - hq)
            cross = (p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1]))
            below.append(cross)
            above.append(cross)
    return below, above


def _area(polygon: List[Point]) -> Fraction:
    twice = sum((p[0] * q[1] - q[0] * p[1] for p, q in zip(polygon, polygon[1:] + polygon[:1])), Fraction(0))
    return abs(twice) / 2


def level_set_areas(star: VertexStar) -> Dict[int, Fraction]:
    """Areas of the level sets of w(θ) = Σ {⟨a_i, θ⟩} on the unit square.

    The square is cut along every line ⟨a_i, θ⟩ ∈ ℤ in exact arithmetic. On
    each cell every ⟨a_i, θ⟩ stays between two integers, so w is constant
    there and equals −Σ ⌊⟨a_i, θ⟩⌋ for a balanced star.
    """
    if star.dim != 2:
        raise OracleError(f"level sets are enumerated on T², got a star of dimension {star.dim}")
    square = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
              (Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))]
    cells = [square]
    for a in star.vectors:
        corners = [a[0] * x + a[1] * y for x, y in square]
        for c in range(int(min(corners)) + 1, int(max(corners))):
            split = []
            for cell in cells:
                for part in _cut(cell, a, c):
                    if len(part) >= 3 and _area(part) > 0:
                        split.append(part)
            cells = split

    areas: Dict[int, Fraction] = {}
    for cell in cells:
        centre = (sum(p[0] for p in cell) / len(cell), sum(p[1] for p in cell) / len(cell))
        values = [a[0] * centre[0] + a[1] * centre[1] for a in star.vectors]
        w = sum(v - math.floor(v) for v in values)
        if w.denominator != 1:
            raise OracleError(f"level-set potential {w} is not integral; star does not close up")
        areas[int(w)] = areas.get(int(w), Fraction(0)) + _area(cell)
    logger.debug("level sets of %s: %s", star.vectors, areas)
    return areas


def vertex_measure(star: VertexStar) -> Fraction:
    """Area of Γ_v in units of (2π)^dim, reduced mod 1; always in ½ℤ.

    In dimension 1 Γ_v is built from the alternating intervals directly. In
    dimension 2 it is the level-set chain of w(θ), whose boundary is the sum
    of the edge tori; its area is Σ ℓ·area(w = ℓ) over the exact cell
    decomposition.
    """
    if star.dim == 1:
        value = _interval_measure(star)
    else:
        value = sum((level * area for level, area in level_set_areas(star).items()), Fraction(0))
    value = value % 1
    if (2 * value).denominator != 1:
        raise OracleError(f"vertex measure {value} is not a half-integer")
    return value


def split_star(star: VertexStar) -> List[VertexStar]:
    """Replace a star of valency > 3 by trivalent stars joined by partial-sum edges."""
    if star.valency <= 3:
        return [star]
    vectors = list(star.vectors)
    for _ in range(len(vectors)):
        partial = vectors[0]
        stars, ok = [], True
        for v in vectors[1:-2]:
            total = tuple(a + b for a, b in zip(partial, v))
            if is_zero(total):
                ok = False
                break
            stars.append(VertexStar(star.dim, [partial, v, tuple(-x for x in total)]))
            partial = total
        if ok:
            stars.append(VertexStar(star.dim, [partial, vectors[-2], vectors[-1]]))
            return stars
        vectors = vectors[1:] + vectors[:1]
    raise OracleError(f"cannot split star {star.vectors}: every ordering hits a zero partial sum")


def random_balanced_star(rng: random.Random, dim: int, valency: int, bound: int = 3) -> VertexStar:
    while True:
        vectors = [tuple(rng.randint(-bound, bound) for _ in range(dim)) for _ in range(valency - 1)]
        last = tuple(-sum(v[i] for v in vectors) for i in range(dim))
        vectors.append(last)
        if all(not is_zero(v) for v in vectors):
            return VertexStar(dim, vectors)


# ---------------------------------------------------------------------------
# Moment maps
# ---------------------------------------------------------------------------

def moment_map(points: Sequence[Sequence[int]], z: Sequence[complex]) -> np.ndarray:
    """μ(z) = Σ |z^m|² m / Σ |z^m|² over the lattice points m of σ."""
    if not len(points):
        raise OracleError("moment map of an empty lattice-point set")
    M = np.array(points, dtype=float)
    logs = np.log(np.abs(np.asarray(z, dtype=complex)))
    weights = np.exp(2 * (M @ logs))
    return weights @ M / np.sum(weights)


def canonical_section(points: Sequence[Sequence[int]], b: Sequence[float],
                      tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """The positive real point x = e^u with μ(x) = b, by Newton's method."""
    M = np.array(points, dtype=float)
    b = np.asarray(b, dtype=float)
    u = np.zeros(M.shape[1])

    def residual_at(u):
        w = np.exp(2 * (M @ u))
        w = w / np.sum(w)
        return w, w @ M - b

    for _ in range(max_iter):
        w, residual = residual_at(u)
        if np.max(np.abs(residual)) < tol:
            return np.exp(u)
        centred = M - (w @ M)
        jac = 2 * (centred.T * w) @ centred
        step = np.linalg.solve(jac, residual)
        scale = 1.0
        while scale > 1e-6 and np.linalg.norm(residual_at(u - scale * step)[1]) >= np.linalg.norm(residual):
            scale /= 2
        u = u - scale * step
    raise OracleError(f"section did not converge for b = {b.tolist()}")


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

@dataclass
class VerificationRow:
    quantity: str
    closed_form: complex
    numeric: complex
    error: float
    passed: bool


def _row(quantity: str, closed, numeric, tol: float, relative: bool = False) -> VerificationRow:
    err = abs(complex(numeric) - complex(closed))
    if relative:
        err = err / max(abs(complex(closed)), 1e-300)
    return VerificationRow(quantity, complex(closed), complex(numeric), float(err), err <= tol)


def run_verification(cfg: Optional[QuadratureConfig] = None, seed: int = 0) -> List[VerificationRow]:
    cfg = cfg or QuadratureConfig()
    rng = random.Random(seed)
    rows: List[VerificationRow] = []

    for n, tol in ((1, 1e-8), (2, 1e-8), (3, 1e-6)):
        rows.append(_row(f"alpha_n{n}", (2j * np.pi) ** n, integrate_alpha(n, cfg), tol, relative=True))

    for k in (1, 2):
        for modulus in cfg.t_moduli:
            for arg in cfg.t_arguments:
                t = modulus * np.exp(1j * arg)
                label = f"tate_k{k}_r{modulus:g}_a{arg:g}"
                rows.append(_row(label + "_period", tate_closed_form(t, k), tate_period(t, k, cfg),
                                 cfg.tolerance, relative=True))
                rows.append(_row(label + "_coordinate", t ** k, tate_canonical_coordinate(t, k, cfg),
                                 cfg.tolerance, relative=True))

    for i in range(25):
        xi = tuple(rng.choice([-3, -2, -1, 1, 2, 3]) for _ in range(3))
        j = rng.randint(1, 3)
        exact, numeric = torus_degree(xi, j, seed=seed + i)
        rows.append(_row(f"torus_degree_{xi}_{j}", exact, numeric, 0.1))

    for a in ((1, 1, -2), (2, 3, -5), (1, 2, -3)):
        star = VertexStar(1, [(x,) for x in a])
        rows.append(_row(f"vertex_{a}", 0.5, float(vertex_measure(star)), 1e-9))
    for vectors, expected in ((((1, 0), (0, 1), (-1, -1)), 0.5), (((1, 0), (-1, 0), (0, 1), (0, -1)), 0.0)):
        rows.append(_row(f"vertex_planar_{len(vectors)}", expected,
                         float(vertex_measure(VertexStar(2, list(vectors)))), 1e-9))
    for i in range(10):
        dim = 1 + i % 2
        star = random_balanced_star(rng, dim, rng.randint(3, 5))
        value = vertex_measure(star)
        split = sum((vertex_measure(s) for s in split_star(star)), Fraction(0)) % 1
        rows.append(_row(f"vertex_random_{i}_d{dim}", float(value), float(split), 1e-9))

    radii = (0.7, 0.9)
    normalized = TruncatedSeries(2, 3, {((1, 0), 0): 0.3, ((0, 1), 1): 0.4, ((1, 1), 1): 0.12})
    control = TruncatedSeries(2, 3, {((0, 0), 1): 0.3})
    rows.append(_row("wall_normalized", 0, wall_integral(normalized, radii, 0.5, cfg), 1e-6))
    control_value = wall_integral(control, radii, 0.5, cfg)
    rows.append(VerificationRow("wall_pure_t_control", (2 * np.pi) ** 2 * np.log(1.15), control_value,
                                float(abs(control_value)), abs(control_value) > 1e-3))

    rows.append(_row("moment_P1", 0.5, moment_map([(0,), (1,)], [1.0])[0], 1e-12))
    square = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]
    target = np.array([0.7, 0.4])
    x = canonical_section(square, target)
    rows.append(_row("section_round_trip", 0, float(np.max(np.abs(moment_map(square, x) - target))), 1e-9))

    doubled = cfg.with_samples(2 * cfg.samples_for(2))
    drift = abs(integrate_alpha(2, doubled) - integrate_alpha(2, cfg))
    rows.append(VerificationRow("alpha_n2_convergence", 0, drift, float(drift), drift < 10 * cfg.tolerance))

    failed = [r.quantity for r in rows if not r.passed]
    logger.info("verification: %d checks, %d failed", len(rows), len(failed))
    return rows
