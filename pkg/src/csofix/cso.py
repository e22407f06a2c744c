"""Affine composition-sum operators Tf = sum_i a_i f(s_i (z - z_i) + z_i).

Construction and validation, application to disc series and to singular
functions, l1 contraction diagnostics on D_R, polynomial fixed-point
detection, the derived operators (induced coefficient twist, pinning,
projection), and the structural predicates used to admit singular seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NonSimpleConfigurationError, PreconditionError
from .series import DEFAULT_TRUNCATION, DiscSeries, compose_affine, linear_combine
from .singular import (
    SingularFunction,
    SingularTerm,
    merge_terms,
    pullback_term,
    unbounded_set,
)

REL_TOL = 1e-12
SVD_TOL = 1e-10


def _finite(z: complex, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise PreconditionError(f"{what} must be finite")
    return z


@dataclass(frozen=True)
class AffineMap:
    """z -> s*(z - z_fix) + z_fix; |s| < 1, with s = 0 a constant map."""

    s: complex
    z_fix: complex

    def __post_init__(self):
        s = _finite(self.s, "contraction rate")
        if abs(s) >= 1:
            raise PreconditionError(f"contraction rate |{s}| >= 1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "z_fix", _finite(self.z_fix, "fixed point"))

    @property
    def t(self) -> complex:
        return self.z_fix * (1 - self.s)

    def __call__(self, z: complex) -> complex:
        return self.s * complex(z) + self.t


def affine_map(s: complex, z_fix: complex) -> AffineMap:
    return AffineMap(s, z_fix)


def map_from_shift(s: complex, t: complex) -> AffineMap:
    """Map z -> s z + t written in fixed-point form (needs s != 1)."""
    s, t = complex(s), complex(t)
    if s == 1:
        raise PreconditionError("s = 1 has no fixed point")
    return AffineMap(s, t / (1 - s))


@dataclass(frozen=True)
class AffineCso:
    terms: tuple[tuple[complex, AffineMap], ...]

    def __post_init__(self):
        terms = tuple((complex(a), m) for a, m in self.terms)
        if not terms:
            raise PreconditionError("operator needs at least one term")
        seen = set()
        for a, m in terms:
            _finite(a, "coefficient")
            if a == 0:
                raise PreconditionError("zero coefficient term")
            key = (m.s, m.z_fix)
            if key in seen:
                raise PreconditionError(f"duplicate map {key}")
            seen.add(key)
        object.__setattr__(self, "terms", terms)

    @property
    def ell(self) -> int:
        return len(self.terms)

    @property
    def coefficients(self) -> tuple[complex, ...]:
        return tuple(a for a, _ in self.terms)

    @property
    def maps(self) -> tuple[AffineMap, ...]:
        return tuple(m for _, m in self.terms)

    @property
    def max_rate(self) -> float:
        return max(abs(m.s) for m in self.maps)


def make_cso(terms: Iterable[tuple[complex, AffineMap]]) -> AffineCso:
    return AffineCso(tuple(terms))


def apply_series(T: AffineCso, f: DiscSeries, out_radius: float) -> DiscSeries:
    return linear_combine([(a, compose_affine(f, m, out_radius)) for a, m in T.terms])


def apply_singular(
    T: AffineCso,
    f: SingularFunction,
    *,
    on_interior: str = "error",
    margin: float = 0.0,
    drop_tol: float = 0.0,
    n_terms: int = DEFAULT_TRUNCATION,
) -> SingularFunction:
    """Sum of pullbacks of every singular term through every map, plus the
    regular part pushed through apply_series.

    With the default on_interior="error" the unbounded set must be simple
    under T.  The relocation mode skips that gate; it is meant for the
    iterated-seed machinery, which checks cancellation downstream.
    """
    R = f.radius
    if on_interior == "error":
        verdicts = simplicity_check(T, unbounded_set(f))
        bad = [v for v in verdicts if not v.ok]
        if bad:
            raise NonSimpleConfigurationError(
                f"singular set not simple under operator: {bad[0].reason}")
    weighted: list[tuple[complex, SingularTerm]] = []
    regular_parts: list[tuple[complex, DiscSeries]] = [
        (a, compose_affine(f.regular, m, R)) for a, m in T.terms
    ]
    for a, m in T.terms:
        for term in f.terms:
            pb = pullback_term(term, m, R, on_interior=on_interior,
                               margin=margin, n_terms=n_terms)
            weighted.extend((a, t) for t in pb.terms)
            regular_parts.append((a, pb.regular))
    merged = merge_terms(weighted, drop_below=drop_tol)
    return SingularFunction(merged, linear_combine(regular_parts))


def basis_image_norm(T: AffineCso, n: int, R: float) -> float:
    """Exact l1 norm of T applied to z^n on D_R.

    T z^n = sum_i a_i (s_i z + t_i)^n has coefficient
    sum_i a_i C(n,r) s_i^r t_i^{n-r} on z^r.
    """
    if R <= 0:
        raise PreconditionError("radius must be positive")
    n = int(n)
    total = 0.0
    for r in range(n + 1):
        c = math.comb(n, r)
        inner = 0j
        for a, m in T.terms:
            inner += a * c * m.s ** r * m.t ** (n - r)
        total += abs(inner) * R ** r
    return total


def analytic_ratio_bound(T: AffineCso, n: int, R: float) -> float:
    """Majorant sum_i |a_i| (|s_i| + |t_i|/R)^n for the basis ratio at index n."""
    return sum(abs(a) * (abs(m.s) + abs(m.t) / R) ** n for a, m in T.terms)


def basis_ratio_scan(T: AffineCso, R: float, n_max: int) -> np.ndarray:
    """||T z^n||_R / R^n for n = 0..n_max, via the binomial recurrence on the
    coefficient rows of (s z + t)^n.  Matches basis_image_norm pointwise."""
    rows = [np.array([a], dtype=complex) for a, _ in T.terms]
    rpow = R ** np.arange(n_max + 1)
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        total = np.zeros(n + 1, dtype=complex)
        for row in rows:
            total += row
        out[n] = float(np.abs(total) @ rpow[:n + 1]) / rpow[n]
        if n == n_max:
            break
        for idx, (_, m) in enumerate(T.terms):
            row = rows[idx]
            grown = np.zeros(n + 2, dtype=complex)
            grown[:n + 1] = m.t * row
            grown[1:] += m.s * row
            rows[idx] = grown
    return out


@lru_cache(maxsize=256)
def certified_contraction_rate(T: AffineCso, R: float, n_max: int = 200) -> float:
    """Sup over every basis index of ||T z^n||_R / R^n, with the analytic
    majorant covering n > n_max.  Returns inf when the majorant cannot
    certify the tail.  ||Tf||_R <= rate * ||f||_R for all f on D_R."""
    best = float(np.max(basis_ratio_scan(T, R, n_max)))
    if max(abs(m.s) + abs(m.t) / R for m in T.maps) <= 1.0:
        return max(best, analytic_ratio_bound(T, n_max + 1, R))
    return math.inf


@dataclass(frozen=True)
class ContractionReport:
    mu: float
    R0: float
    N: Optional[int]
    ratios: tuple[float, ...]
    is_contraction: bool
    certified_rate: float

    @property
    def n_max(self) -> int:
        return len(self.ratios) - 1


def contraction_report(T: AffineCso, mu: float, R: float,
                       n_max: int = 200) -> ContractionReport:
    """Basis-wise contraction scan of T on D_R.

    ratios[n] = ||T z^n||_R / R^n, exact for n <= n_max; indices beyond the
    scan are covered by the analytic majorant, which is monotone once every
    |s_i| + |t_i|/R <= 1.  certified_rate is a sup over all n of the ratio
    (inf when the tail cannot be certified), so ||Tf||_R <= certified_rate
    * ||f||_R for every f.
    """
    mu = float(mu)
    smax = T.max_rate
    if not (smax < mu <= 1.0):
        raise PreconditionError(f"need max rate {smax} < mu <= 1, got mu={mu}")
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    R0 = max(abs(m.t) / (mu - abs(m.s)) for m in T.maps)
    ratios = tuple(float(v) for v in basis_ratio_scan(T, R, n_max))
    qs = [abs(m.s) + abs(m.t) / R for m in T.maps]
    if max(qs) <= 1.0:
        tail = analytic_ratio_bound(T, n_max + 1, R)
    else:
        tail = math.inf
    certified = max(max(ratios), tail)
    ok = certified < 1.0
    N: Optional[int] = None
    if tail < 1.0:
        N = 0
        for n in range(n_max, -1, -1):
            if ratios[n] >= 1.0:
                N = n + 1
                break
    return ContractionReport(mu, R0, N, ratios, ok, certified)


def coefficient_power_sum(T: AffineCso, m: int) -> complex:
    return sum(a * mp.s ** m for a, mp in T.terms)


@dataclass(frozen=True)
class PolyDegreeScan:
    degrees: tuple[int, ...]
    cutoff: int


def poly_fp_degrees(T: AffineCso, m_max: int, tol: float = REL_TOL) -> PolyDegreeScan:
    """Degrees m <= m_max where sum_i a_i s_i^m = 1 holds within tol, plus the
    cutoff: the least m with sum_i |a_i||s_i|^m < 1, beyond which the relation
    can never hold again (the majorant is nonincreasing in m)."""
    if m_max < 0:
        raise PreconditionError("m_max must be >= 0")
    degrees = []
    for m in range(m_max + 1):
        sigma = coefficient_power_sum(T, m)
        if abs(sigma - 1.0) <= tol * max(1.0, abs(sigma)):
            degrees.append(m)
    m = 0
    while True:
        major = sum(abs(a) * abs(mp.s) ** m for a, mp in T.terms)
        if major < 1.0 - tol:
            break
        m += 1
    return PolyDegreeScan(tuple(degrees), m)


def monomial_matrix(T: AffineCso, m: int) -> np.ndarray:
    """(m+1)x(m+1) upper-triangular matrix of T on 1, z, ..., z^m."""
    A = np.zeros((m + 1, m + 1), dtype=complex)
    for n in range(m + 1):
        for r in range(n + 1):
            c = math.comb(n, r)
            A[r, n] = sum(a * c * mp.s ** r * mp.t ** (n - r) for a, mp in T.terms)
    return A


def poly_fixed_points(T: AffineCso, m: int, sv_tol: float = SVD_TOL) -> list[np.ndarray]:
    """Basis of the kernel of (I - T) on polynomials of degree <= m.

    Coefficient vectors are returned lowest degree first, scaled so the
    highest-degree nonzero coefficient is 1.
    """
    if m < 0:
        raise PreconditionError("degree bound must be >= 0")
    A = np.eye(m + 1, dtype=complex) - monomial_matrix(T, m)
    _, sv, vh = np.linalg.svd(A)
    cut = sv_tol * max(1.0, sv[0] if sv.size else 1.0)
    basis = []
    for k in range(m, -1, -1):
        if sv[k] <= cut:
            v = vh[k].conj()
            lead = np.max(np.nonzero(np.abs(v) > 1e-14)[0])
            basis.append(v / v[lead])
        else:
            break
    basis.reverse()
    return basis


def induced_m(T: AffineCso, m: int) -> AffineCso:
    """Operator with coefficients a_i s_i^m and the same maps; this is what T
    becomes after m differentiations.  Terms whose rate is zero vanish."""
    if m < 0:
        raise PreconditionError("m must be >= 0")
    if m == 0:
        return T
    terms = [(a * mp.s ** m, mp) for a, mp in T.terms if mp.s != 0]
    if not terms:
        raise PreconditionError("induced operator is zero")
    return AffineCso(tuple(terms))


def induced_norm_bound(T: AffineCso, m: int) -> float:
    return sum(abs(a) * abs(mp.s) ** m for a, mp in T.terms)


def _merge_cso_terms(terms: Sequence[tuple[complex, AffineMap]]) -> AffineCso:
    keyed: dict[tuple, list] = {}
    order = []
    for a, m in terms:
        key = (m.s, m.z_fix)
        if key not in keyed:
            keyed[key] = [0j, m]
            order.append(key)
        keyed[key][0] += complex(a)
    out = [(keyed[k][0], keyed[k][1]) for k in order if keyed[k][0] != 0]
    if not out:
        raise PreconditionError("all terms cancelled")
    return AffineCso(tuple(out))


def pinned(T: AffineCso, c: complex) -> AffineCso:
    """T_c f = Tf - Tf(c): the original terms plus one degenerate constant
    term -a_i at value map_i(c) per term.  Annihilates constants, so fixed
    points g of T_c that are also fixed by T satisfy g(c) = 0."""
    c = _finite(c, "pin point")
    extra = [(-a, AffineMap(0.0, m(c))) for a, m in T.terms]
    return _merge_cso_terms(list(T.terms) + extra)


def projected_j(T: AffineCso, j: int) -> AffineCso:
    """T_j f = Tf - (1/L) sum_{i != j} a_i Tf(map_i(z_j)), L = sum_{i != j} a_i.

    Materialized as a CSO with degenerate constant terms.  When a_j = 1 a
    fixed point of T_j is a fixed point of T.
    """
    if not (0 <= j < T.ell):
        raise PreconditionError(f"term index {j} out of range")
    others = [(a, m) for k, (a, m) in enumerate(T.terms) if k != j]
    L = sum(a for a, _ in others)
    if L == 0:
        raise PreconditionError("projection undefined: off-term coefficients sum to 0")
    zj = T.terms[j][1].z_fix
    extra = []
    for ai, mi in others:
        ci = mi(zj)
        extra.extend((-ai * ak / L, AffineMap(0.0, mk(ci))) for ak, mk in T.terms)
    return _merge_cso_terms(list(T.terms) + extra)


def fixed_point_independence(T: AffineCso, i: int, R: float) -> bool:
    """True iff the fixed point of map i stays strictly outside the closed
    image of D_R under every other map."""
    if not (0 <= i < T.ell):
        raise PreconditionError(f"term index {i} out of range")
    if R <= 0:
        raise PreconditionError("radius must be positive")
    zi = T.terms[i][1].z_fix
    return all(abs(zi - m.t) > abs(m.s) * R
               for k, (_, m) in enumerate(T.terms) if k != i)


@dataclass(frozen=True)
class PointVerdict:
    point: complex
    ok: bool
    fixed_by: tuple[int, ...]
    reason: str = ""


def simplicity_check(T: AffineCso, points: Iterable[complex],
                     tol: float = REL_TOL) -> tuple[PointVerdict, ...]:
    """Per-point verdicts: a point passes iff exactly one map fixes it and
    every other map sends it off the set."""
    pts = sorted({complex(p) for p in points}, key=lambda z: (z.real, z.imag))

    def near(u, v):
        return abs(u - v) <= tol * max(1.0, abs(u), abs(v))

    out = []
    for p in pts:
        fixed = tuple(k for k, (_, m) in enumerate(T.terms) if near(m(p), p))
        if len(fixed) != 1:
            out.append(PointVerdict(p, False, fixed,
                                    f"{p} fixed by {len(fixed)} maps"))
            continue
        hit = next(((k, m(p)) for k, (_, m) in enumerate(T.terms)
                    if k != fixed[0] and any(near(m(p), q) for q in pts)), None)
        if hit is not None:
            out.append(PointVerdict(p, False, fixed,
                                    f"map {hit[0]} sends {p} back into the set"))
        else:
            out.append(PointVerdict(p, True, fixed))
    return tuple(out)


@dataclass(frozen=True)
class SeedVerdict:
    admissible: bool
    index: int
    coefficient: complex
    required: complex


def seed_admissibility(T: AffineCso, term: SingularTerm,
                       tol: float = REL_TOL) -> SeedVerdict:
    """A log seed at the fixed point of map i needs a_i = 1; a pole of order
    k needs a_i = s_i^k.  The location must be fixed by exactly one map."""
    z0 = term.location
    fixed = [k for k, (_, m) in enumerate(T.terms)
             if abs(m.z_fix - z0) <= tol * max(1.0, abs(z0))]
    if len(fixed) != 1:
        raise PreconditionError(
            f"seed location {z0} is fixed by {len(fixed)} maps, need exactly 1")
    i = fixed[0]
    a, m = T.terms[i]
    required = 1.0 + 0j if term.kind == "log" else m.s ** term.order
    ok = abs(a - required) <= tol * max(1.0, abs(required))
    return SeedVerdict(ok, i, a, required)
