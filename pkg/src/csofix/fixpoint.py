"""Seeded fixed points of affine composition-sum operators.

Three construction routes, all returning the singular seed plus a computed
regular correction:

  direct           f* = f0 - N(f0 - T f0), N the Neumann inverse of I - T,
                   usable when f0 - T f0 is already regular on the disc;
  generalized (k)  the same applied to T^k f0 once iterating T stabilizes
                   the singular terms;
  derivative (m)   fix the m-th derivative with a pole seed under the
                   induced operator, integrate back, correct by a polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import AdmissibilityError, ConvergenceError, PreconditionError
from .cso import (
    AffineCso,
    apply_series,
    apply_singular,
    certified_contraction_rate,
    fixed_point_independence,
    induced_m,
    monomial_matrix,
    poly_fp_degrees,
    seed_admissibility,
)
from .series import (
    DEFAULT_TRUNCATION,
    DiscSeries,
    integrate_from_zero,
    l1_norm,
    linear_combine,
    zero_series,
)
from .singular import (
    SingularFunction,
    SingularTerm,
    log_term,
    merge_terms,
    pole_term,
)

REG_MARGIN = 1e-6
CANCEL_TOL = 1e-12
DEFAULT_MAX_ITER = 50_000


@dataclass(frozen=True)
class Route:
    kind: str  # "direct" | "generalized_seed" | "derivative"
    parameter: Optional[int] = None

    def __str__(self):
        return self.kind if self.parameter is None else f"{self.kind}({self.parameter})"


DIRECT = Route("direct")


@dataclass(frozen=True)
class SeedSpec:
    term: SingularTerm
    matched_index: int


@dataclass(frozen=True)
class FixedPointResult:
    fixed_point: SingularFunction
    residual_norm: float
    iterations: int
    route: Route


def make_seed(T: AffineCso, term: SingularTerm, tol: float = CANCEL_TOL) -> SeedSpec:
    v = seed_admissibility(T, term, tol)
    if not v.admissible:
        raise AdmissibilityError(
            f"seed {term.kind} at {term.location}: operator coefficient "
            f"{v.coefficient} != required {v.required}")
    return SeedSpec(term, v.index)


def neumann_inverse(T: AffineCso, g: DiscSeries, R: float, tol: float,
                    max_iter: int = DEFAULT_MAX_ITER) -> DiscSeries:
    """Solve (I - T) h = g on D_R by summing T^n g.

    Stops once the increment norm drops below tol*(1 - K), K the certified
    contraction rate, so the residual bound ||(I-T)h - g|| < tol holds.
    """
    return _neumann(T, g, R, tol, max_iter)[0]


def _neumann(T: AffineCso, g: DiscSeries, R: float, tol: float,
             max_iter: int) -> tuple[DiscSeries, int]:
    # increment slack is tightened to K times the previous slack, which the
    # certified rate justifies; the raw per-term bound compounds by sum|a_i|
    K = certified_contraction_rate(T, R)
    if not K < 1.0:
        raise PreconditionError(f"operator does not contract on D_{R} (rate {K})")
    stop = tol * (1.0 - K)
    term = DiscSeries(R, g.coeffs, g.tail_bound)
    total_coeffs = np.zeros(1, dtype=complex)
    total_tail = 0.0
    for n in range(max_iter):
        if l1_norm(term) < stop:
            return DiscSeries(R, total_coeffs, total_tail), n
        if total_coeffs.size < term.coeffs.size:
            total_coeffs = np.concatenate(
                [total_coeffs, np.zeros(term.coeffs.size - total_coeffs.size, complex)])
        total_coeffs[:term.coeffs.size] += term.coeffs
        total_tail += term.tail_bound
        slack = K * term.tail_bound
        term = apply_series(T, DiscSeries(R, term.coeffs, 0.0), R)
        term = DiscSeries(R, term.coeffs, slack)
    raise ConvergenceError(
        f"Neumann series did not reach {tol} in {max_iter} iterations "
        f"(rate {K:.6f}, last increment {l1_norm(term):.3e})")


def _regular_diff_norm(a: SingularFunction, b: SingularFunction) -> float:
    return l1_norm(linear_combine([(1.0, a.regular), (-1.0, b.regular)]))


def _term_diff(a: SingularFunction, b: SingularFunction) -> tuple:
    scale = max([1.0] + [abs(t.weight) for t in a.terms + b.terms])
    parts = [(1.0, t) for t in a.terms] + [(-1.0, t) for t in b.terms]
    return merge_terms(parts, drop_below=CANCEL_TOL * scale)


def _finish(T: AffineCso, f0: SingularFunction, R: float, tol: float,
            max_iter: int, route: Route, *, on_interior: str,
            n_terms: int) -> FixedPointResult:
    """Common tail of the direct and generalized routes: f0 with stable
    singular terms becomes f0 - N(f0 - T f0)."""
    Tf0 = apply_singular(T, f0, on_interior=on_interior, margin=REG_MARGIN,
                         n_terms=n_terms)
    leftovers = _term_diff(Tf0, f0)
    if leftovers:
        raise PreconditionError(
            f"remainder not regular on D_{R}: uncancelled {leftovers[0].kind} term "
            f"at {leftovers[0].location} (weight {leftovers[0].weight})")
    gbar = linear_combine([(1.0, f0.regular), (-1.0, Tf0.regular)])
    u, iters = _neumann(T, gbar, R, tol, max_iter)
    fstar = SingularFunction(
        f0.terms, linear_combine([(1.0, f0.regular), (-1.0, u)]))
    Tfs = apply_singular(T, fstar, on_interior=on_interior, margin=REG_MARGIN,
                         n_terms=n_terms)
    if _term_diff(Tfs, fstar):
        raise ConvergenceError("fixed point lost singular-term cancellation")
    residual = _regular_diff_norm(Tfs, fstar)
    if not residual < tol:
        raise ConvergenceError(f"residual {residual:.3e} above tolerance {tol}")
    return FixedPointResult(fstar, residual, iters, route)


def seeded_fixed_point(T: AffineCso, seed: Union[SeedSpec, SingularFunction],
                       R: float, tol: float,
                       max_iter: int = DEFAULT_MAX_ITER,
                       n_terms: int = DEFAULT_TRUNCATION) -> FixedPointResult:
    """Direct route: requires f0 - T f0 already regular on D_R, which holds
    when every non-owning map sends the seed location outside its image."""
    f0 = _as_function(seed, R)
    return _finish(T, f0, R, tol, max_iter, DIRECT, on_interior="error",
                   n_terms=n_terms)


def generalized_seed_fixed_point(T: AffineCso, seed: Union[SeedSpec, SingularFunction],
                                 R: float, tol: float, k_max: int = 8,
                                 max_iter: int = DEFAULT_MAX_ITER,
                                 n_terms: int = DEFAULT_TRUNCATION) -> FixedPointResult:
    """Iterate g <- T g until the singular terms stabilize (least k with
    terms(T^{k+1} g) = terms(T^k g)), then finish like the direct route.
    Relocated singularities are tracked exactly, so the stabilized term set
    may be larger than the seed's."""
    g = _as_function(seed, R)
    for k in range(k_max + 1):
        g_next = apply_singular(T, g, on_interior="relocate", margin=REG_MARGIN,
                                n_terms=n_terms)
        if not _term_diff(g_next, g):
            return _finish(T, g, R, tol, max_iter, Route("generalized_seed", k),
                           on_interior="relocate", n_terms=n_terms)
        g = g_next
    raise PreconditionError(
        f"singular terms never stabilized within k <= {k_max}")


def derivative_route_fixed_point(T: AffineCso, i: int, m: int, R: float, tol: float,
                                 max_iter: int = DEFAULT_MAX_ITER,
                                 n_terms: int = DEFAULT_TRUNCATION) -> FixedPointResult:
    """Log-type fixed point at the fixed point of map i, built by fixing the
    m-th derivative.

    Needs a_i = 1, the induced operator contracting on D_R, map i's fixed
    point independent on D_R, and no polynomial fixed points of degree < m
    (otherwise the final correction solve is singular).
    """
    if m < 1:
        raise PreconditionError("derivative order must be >= 1")
    if not (0 <= i < T.ell):
        raise PreconditionError(f"term index {i} out of range")
    a_i, map_i = T.terms[i]
    if abs(a_i - 1.0) > CANCEL_TOL:
        raise PreconditionError(f"coefficient {a_i} of owning map must be 1")
    if not fixed_point_independence(T, i, R):
        raise PreconditionError(
            f"fixed point of map {i} is not independent on D_{R}")
    scan = poly_fp_degrees(T, m - 1)
    if scan.degrees:
        raise PreconditionError(
            f"polynomial fixed points exist at degrees {scan.degrees}; "
            "correction solve would be singular")
    Tm = induced_m(T, m)
    z_i = map_i.z_fix
    weight = math.factorial(m - 1) * (-1.0) ** (m - 1)
    seed = make_seed(Tm, pole_term(z_i, m, weight))
    inner_tol = tol / (4.0 * max(1.0, R) ** m)
    deriv = seeded_fixed_point(Tm, seed, R, inner_tol, max_iter, n_terms)
    U = deriv.fixed_point.regular
    for _ in range(m):
        U = integrate_from_zero(U)
    h = SingularFunction((log_term(z_i, 1.0),), U)
    Th = apply_singular(T, h, on_interior="error", margin=REG_MARGIN,
                        n_terms=n_terms)
    if _term_diff(Th, h):
        raise ConvergenceError("integrated candidate lost term cancellation")
    q = linear_combine([(1.0, Th.regular), (-1.0, h.regular)])
    dust = q.tail_bound + float(np.sum(np.abs(q.coeffs[m:]) *
                                       R ** np.arange(m, q.coeffs.size)))
    if dust > max(tol, 1e-10 * max(1.0, l1_norm(q))):
        raise ConvergenceError(
            f"integrated remainder is not a degree-{m - 1} polynomial "
            f"(excess norm {dust:.3e})")
    A = np.eye(m, dtype=complex) - monomial_matrix(T, m - 1)
    qv = np.zeros(m, dtype=complex)
    qv[:min(m, q.coeffs.size)] = q.coeffs[:m]
    p = np.linalg.solve(A, qv)
    corrected = linear_combine([(1.0, h.regular),
                                (1.0, DiscSeries(R, p, 0.0))])
    fstar = SingularFunction(h.terms, corrected)
    Tfs = apply_singular(T, fstar, on_interior="error", margin=REG_MARGIN,
                         n_terms=n_terms)
    residual = _regular_diff_norm(Tfs, fstar)
    if not residual < tol:
        raise ConvergenceError(f"residual {residual:.3e} above tolerance {tol}")
    return FixedPointResult(fstar, residual, deriv.iterations,
                            Route("derivative", m))


def _as_function(seed: Union[SeedSpec, SingularFunction], R: float) -> SingularFunction:
    if isinstance(seed, SingularFunction):
        if seed.radius != R:
            raise PreconditionError(
                f"seed lives on D_{seed.radius}, requested D_{R}")
        return seed
    return SingularFunction((seed.term,), zero_series(R))
