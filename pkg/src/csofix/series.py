"""Truncated complex power series on a disc D_R with the l1 coefficient norm.

A DiscSeries is the computational stand-in for an element of the Banach space
of analytic functions on D_R whose coefficient sequence is absolutely summable
against R^n.  Every operation propagates a conservative l1 bound on whatever
the truncation discarded, so downstream norms stay honest upper bounds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import PreconditionError

if TYPE_CHECKING:
    from .cso import AffineMap

# Default number of retained coefficients c_0..c_{N-1}.
DEFAULT_TRUNCATION = 128


def _require_finite(z: complex, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise PreconditionError(f"{what} must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class DiscSeries:
    """Coefficients c_0..c_N about 0, valid on the open disc of given radius.

    tail_bound is an upper bound on the l1(R) norm of everything the
    truncation dropped; it is carried, never recomputed from data.
    """

    radius: float
    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise PreconditionError(f"radius must be positive and finite, got {self.radius}")
        if self.tail_bound < 0.0 or not math.isfinite(self.tail_bound):
            raise PreconditionError(f"tail_bound must be finite and >= 0, got {self.tail_bound}")
        arr = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).reshape(-1)
        if arr.size == 0:
            arr = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise PreconditionError("series coefficients must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self) -> int:
        """Truncation order N (highest retained power)."""
        return len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscSeries):
            return NotImplemented
        a, b = _padded_pair(self.coeffs, other.coeffs)
        return (
            self.radius == other.radius
            and self.tail_bound == other.tail_bound
            and bool(np.array_equal(a, b))
        )


def _padded_pair(a: np.ndarray, b: np.ndarray):
    n = max(len(a), len(b))
    return (
        np.pad(a, (0, n - len(a))),
        np.pad(b, (0, n - len(b))),
    )


def make_series(coeffs: Sequence[complex], radius: float) -> DiscSeries:
    """Exact series from explicit coefficients; tail_bound = 0."""
    vals = [_require_finite(c, "coefficient") for c in coeffs]
    if not vals:
        vals = [0.0 + 0.0j]
    return DiscSeries(float(radius), np.array(vals, dtype=complex))


def zero_series(radius: float) -> DiscSeries:
    return make_series([0.0], radius)


def monomial(n: int, radius: float) -> DiscSeries:
    """The basis function Z_n = z^n, of norm radius^n."""
    if n < 0:
        raise PreconditionError("monomial degree must be >= 0")
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    return DiscSeries(float(radius), c)


def with_tail(f: DiscSeries, tail_bound: float) -> DiscSeries:
    return DiscSeries(f.radius, f.coeffs, float(tail_bound))


def l1_norm(f: DiscSeries) -> float:
    powers = f.radius ** np.arange(len(f.coeffs), dtype=float)
    return float(np.abs(f.coeffs) @ powers) + f.tail_bound


def linear_combine(pairs: Iterable[tuple[complex, DiscSeries]]) -> DiscSeries:
    pairs = list(pairs)
    if not pairs:
        raise PreconditionError("linear_combine needs at least one term")
    radius = pairs[0][1].radius
    for _, f in pairs:
        if f.radius != radius:
            raise PreconditionError(
                f"mismatched radii in linear_combine: {f.radius} != {radius}")
    n = max(len(f.coeffs) for _, f in pairs)
    out = np.zeros(n, dtype=complex)
    tail = 0.0
    for w, f in pairs:
        w = _require_finite(w, "weight")
        out[: len(f.coeffs)] += w * f.coeffs
        tail += abs(w) * f.tail_bound
    return DiscSeries(radius, out, tail)


def compose_affine(f: DiscSeries, map: "AffineMap", out_radius: float) -> DiscSeries:
    """Coefficients of f(s z + t) about 0, on D_{out_radius}.

    Requires the image disc strictly inside the domain disc:
    |s| * out_radius + |t| < f.radius.  Under that condition the l1 norm of
    the (polynomial) composition does not exceed the input norm, so the input
    tail_bound remains a valid bound for the composed discarded tail.
    """
    s, t = complex(map.s), complex(map.t)
    out_radius = float(out_radius)
    if out_radius <= 0.0:
        raise PreconditionError("out_radius must be positive")
    if abs(s) * out_radius + abs(t) >= f.radius:
        raise PreconditionError(
            f"image disc escapes domain: |s|*r+|t| = {abs(s) * out_radius + abs(t):.6g}"
            f" >= {f.radius:.6g}")
    # Horner in polynomial arithmetic: p <- p*(s z + t) + c_k, exact in degree.
    c = f.coeffs
    n = len(c)
    acc = np.zeros(n, dtype=complex)
    acc[0] = c[-1]
    deg = 0
    for k in range(n - 2, -1, -1):
        shifted = np.zeros(n, dtype=complex)
        shifted[1 : deg + 2] = s * acc[: deg + 1]
        shifted[: deg + 1] += t * acc[: deg + 1]
        shifted[0] += c[k]
        acc = shifted
        deg += 1
    return DiscSeries(out_radius, acc, f.tail_bound)


def differentiate(f: DiscSeries, margin: float | None = None) -> DiscSeries:
    """Termwise derivative; radius kept.

    The discarded tail's derivative is controlled by the Cauchy estimate with
    inner margin delta (default R/10), giving the factor 1/delta^2 for one
    differentiation.
    """
    delta = f.radius / 10.0 if margin is None else float(margin)
    if not 0.0 < delta < f.radius:
        raise PreconditionError("margin must lie in (0, radius)")
    if len(f.coeffs) == 1:
        return DiscSeries(f.radius, np.zeros(1, dtype=complex), f.tail_bound / delta**2)
    idx = np.arange(1, len(f.coeffs), dtype=float)
    return DiscSeries(f.radius, f.coeffs[1:] * idx, f.tail_bound / delta**2)


def integrate_from_zero(f: DiscSeries) -> DiscSeries:
    """Antiderivative along [0, z], vanishing at 0."""
    out = np.zeros(len(f.coeffs) + 1, dtype=complex)
    out[1:] = f.coeffs / np.arange(1, len(f.coeffs) + 1, dtype=float)
    return DiscSeries(f.radius, out, f.tail_bound * f.radius)


def log_affine(
    a: complex,
    b: complex,
    radius: float,
    n_terms: int = DEFAULT_TRUNCATION,
) -> DiscSeries:
    """Series of log(a + b z) on D_radius, principal branch of log a.

    Mercator expansion log a + sum_{n>=1} (-1)^{n+1} (b/a)^n z^n / n, valid
    when the singularity -a/b lies strictly outside the closed disc, i.e.
    |b|*radius < |a|.  tail_bound is the geometric tail of the dropped terms.
    """
    a = _require_finite(a, "a")
    b = _require_finite(b, "b")
    radius = float(radius)
    if radius <= 0.0:
        raise PreconditionError("radius must be positive")
    if abs(b) * radius >= abs(a):
        raise PreconditionError(
            f"log_affine singularity inside closed disc: |b|R = {abs(b) * radius:.6g}"
            f" >= |a| = {abs(a):.6g}")
    if b == 0:
        return make_series([cmath.log(a)], radius)
    n_terms = max(int(n_terms), 2)
    ratio = -b / a
    n = np.arange(1, n_terms, dtype=float)
    coeffs = np.zeros(n_terms, dtype=complex)
    coeffs[0] = cmath.log(a)
    coeffs[1:] = -(ratio ** n) / n
    q = abs(ratio) * radius  # < 1
    tail = q**n_terms / (n_terms * (1.0 - q))
    return DiscSeries(radius, coeffs, tail)


def eval_at(f: DiscSeries, z: complex) -> complex:
    """Horner evaluation of the retained polynomial; |z| must be < radius."""
    z = _require_finite(z, "evaluation point")
    if abs(z) >= f.radius:
        raise PreconditionError(
            f"evaluation point |z| = {abs(z):.6g} outside open disc of radius {f.radius:.6g}")
    acc = 0.0 + 0.0j
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc)
