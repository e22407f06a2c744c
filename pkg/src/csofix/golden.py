"""Golden-mean case study: Mf(z) = f(-w z) + f(w^2 z + w), w = (sqrt(5)-1)/2.

Everything here is an independent oracle for the fixed-point engine: the
word-expansion partial sums f1/f2, the infinite product converging to 1+w,
the closed-form invariance of log(z/(z-1)), figure data for the two
multiplicative fixed points, the zero-shear spectrum example, and the
general-a family of operators.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cso import AffineCso, AffineMap, make_cso
from .errors import PreconditionError

OMEGA = (math.sqrt(5.0) - 1.0) / 2.0
PHI1 = AffineMap(-OMEGA, 0.0)
PHI2 = AffineMap(OMEGA ** 2, 1.0)
C1 = -OMEGA  # = PHI1(1), pin point whose fixed points vanish there
C2 = OMEGA   # = PHI2(0)

DEFAULT_DEPTH = 18
FIGURE_GRID = (-1.5, 1.5, 401)
_CHUNK = 8192


def make_M() -> AffineCso:
    return make_cso([(1.0, PHI1), (1.0, PHI2)])


@dataclass(frozen=True)
class GoldenConstants:
    omega: float = OMEGA
    phi1: AffineMap = PHI1
    phi2: AffineMap = PHI2
    c1: float = C1
    c2: float = C2


def _level_maps(depth: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (s, t) arrays of all length-n compositions for n = 0..depth.

    Level n+1 extends each word w by one map on the right:
    (s_w s_j, s_w t_j + t_w).  All entries stay real.
    """
    s = np.array([1.0])
    t = np.array([0.0])
    rates = np.array([PHI1.s.real, PHI2.s.real])
    shifts = np.array([PHI1.t.real, PHI2.t.real])
    for _ in range(depth + 1):
        yield s, t
        s, t = (np.concatenate([s * r for r in rates]),
                np.concatenate([s * sh + t for sh in shifts]))


@dataclass(frozen=True)
class WordExpansion:
    depth: int
    levels: tuple[tuple[np.ndarray, np.ndarray], ...]


def word_expansion(depth: int) -> WordExpansion:
    if depth < 0:
        raise PreconditionError("depth must be >= 0")
    return WordExpansion(depth, tuple(_level_maps(depth)))


def _kahan(total: complex, comp: complex, x: complex) -> tuple[complex, complex]:
    y = x - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def word_fixed_point(which: int, depth: int, z: complex) -> complex:
    """Partial sum of the explicit fixed point with a log singularity at 0
    (which=1, vanishing at -w) or at 1 (which=2, vanishing at w).

    Each word contributes log(1 + w phi_word(z)) minus the same term at the
    reference point, principal branch termwise.
    """
    z = complex(z)
    if which == 1:
        if z == 0:
            raise PreconditionError("singular evaluation point 0")
        lead = cmath.log(z / (-OMEGA))
        ref = -OMEGA
    elif which == 2:
        if z == 1:
            raise PreconditionError("singular evaluation point 1")
        lead = cmath.log((z - 1.0) / (OMEGA - 1.0))
        ref = OMEGA
    else:
        raise PreconditionError("which must be 1 or 2")
    total, comp = lead, 0j
    for s, t in _level_maps(depth):
        args = 1.0 + OMEGA * (s * z + t)
        if np.any(args == 0):
            raise PreconditionError(f"word singularity hit at z={z}")
        level = complex(np.sum(np.log(args.astype(complex))))
        level -= complex(np.sum(np.log1p(OMEGA * (s * ref + t))))
        total, comp = _kahan(total, comp, level)
    return total


def identity_partial_products(depth: int) -> np.ndarray:
    """P_d for d = 0..depth, P_d the product over all words of length <= d of
    (1 + w phi_word(w)) / (1 + w phi_word(-w)).  Converges to 1 + w."""
    if depth < 0:
        raise PreconditionError("depth must be >= 0")
    out = np.empty(depth + 1)
    p = 1.0
    for n, (s, t) in enumerate(_level_maps(depth)):
        p *= float(np.prod((1.0 + OMEGA * (s * C2 + t)) /
                           (1.0 + OMEGA * (s * C1 + t))))
        out[n] = p
    return out


def identity_partial_product(depth: int) -> float:
    return float(identity_partial_products(depth)[-1])


def log_ratio_invariance(z_samples: Iterable[complex]) -> float:
    """g(z) = z/(z-1) satisfies g(-wz) * g(w^2 z + w) = g(z) exactly; returns
    the max relative deviation over the samples (pure rounding)."""
    worst = 0.0
    for z in z_samples:
        z = complex(z)
        pieces = []
        for m in (PHI1, PHI2):
            u = m(z)
            if u == 1 or u == 0:
                raise PreconditionError(f"sample {z} maps onto a singularity")
            pieces.append(u / (u - 1.0))
        if z == 0 or z == 1:
            raise PreconditionError(f"singular sample {z}")
        rhs = z / (z - 1.0)
        worst = max(worst, abs(pieces[0] * pieces[1] / rhs - 1.0))
    return worst


def _level_row_sums(x: np.ndarray, s: np.ndarray, t: np.ndarray,
                    ref: float) -> np.ndarray:
    """Sum over a level's words of log(1+w phi(x)) - log(1+w phi(ref)),
    vectorized over the real grid x, chunked to bound memory."""
    acc = np.zeros_like(x)
    for lo in range(0, s.size, _CHUNK):
        sw, tw = s[lo:lo + _CHUNK], t[lo:lo + _CHUNK]
        args = OMEGA * (x[:, None] * sw[None, :] + tw[None, :])
        if np.any(args <= -1.0):
            raise PreconditionError("grid point escapes the log domain")
        acc += np.sum(np.log1p(args), axis=1)
        acc -= float(np.sum(np.log1p(OMEGA * (sw * ref + tw))))
    return acc


def figure_data(grid: Sequence[float], depth: int = DEFAULT_DEPTH,
                parallel: bool = False) -> np.ndarray:
    """Rows (x, Re exp f1, Re exp f2, ratio_dev) over a real grid.

    The exponentiated partial sums are evaluated multiplicatively, so the
    removable zeros at x = 0 (f1) and x = 1 (f2) come out exactly 0.
    ratio_dev checks exp f1 / exp f2 = x/(x-1) * w * P_depth; it is set to 0
    at the removable points where the quotient form degenerates.
    """
    x = np.asarray(grid, dtype=float)
    levels = list(_level_maps(depth))

    def one(level, ref):
        return _level_row_sums(x, level[0], level[1], ref)

    if parallel:
        with ThreadPoolExecutor() as pool:
            rows1 = list(pool.map(lambda lv: one(lv, C1), levels))
            rows2 = list(pool.map(lambda lv: one(lv, C2), levels))
    else:
        rows1 = [one(lv, C1) for lv in levels]
        rows2 = [one(lv, C2) for lv in levels]
    S1 = np.zeros_like(x)
    c1 = np.zeros_like(x)
    S2 = np.zeros_like(x)
    c2 = np.zeros_like(x)
    for r1, r2 in zip(rows1, rows2):
        y = r1 - c1
        t = S1 + y
        c1 = (t - S1) - y
        S1 = t
        y = r2 - c2
        t = S2 + y
        c2 = (t - S2) - y
        S2 = t
    e1 = np.exp(S1) * x / (-OMEGA) + 0.0
    e2 = np.exp(S2) * (x - 1.0) / (OMEGA - 1.0) + 0.0
    pd = identity_partial_product(depth)
    removable = (x == 0.0) | (x == 1.0)
    dev = np.zeros_like(x)
    ok = ~removable
    with np.errstate(invalid="ignore", divide="ignore"):
        dev[ok] = np.abs((e1[ok] / e2[ok]) * ((x[ok] - 1.0) / x[ok])
                         / (OMEGA * pd) - 1.0)
    return np.column_stack([x, e1, e2, dev])


def default_figure_grid() -> np.ndarray:
    lo, hi, n = FIGURE_GRID
    return np.linspace(lo, hi, n)


def sfs_spectrum(n: int) -> tuple[list[list[Fraction]], np.ndarray]:
    """Exact matrix of T c(x) = c((x-1)/2) - c((1-x)/2) on monomials up to
    x^{2n-1}, plus its eigenvalues.

    T x^m = 2^{1-m} (x-1)^m for odd m and 0 for even m, so the matrix is
    upper triangular with diagonal (0, 1, 0, 1/4, 0, 1/16, ...).
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    dim = 2 * n
    A = [[Fraction(0) for _ in range(dim)] for _ in range(dim)]
    for m in range(1, dim, 2):
        lead = Fraction(1, 2 ** (m - 1))
        for r in range(m + 1):
            A[r][m] = lead * math.comb(m, r) * (-1) ** (m - r)
    eig = np.linalg.eigvals(np.array(A, dtype=float))
    order = np.argsort(-eig.real)
    return A, eig[order]


def sfs_fixed_vector(n: int) -> list[Fraction]:
    """Coefficients of x - 1, the degree-1 fixed point, padded to dimension 2n."""
    v = [Fraction(0)] * (2 * n)
    v[0], v[1] = Fraction(-1), Fraction(1)
    return v


def oracle_comparison_points() -> tuple[complex, ...]:
    """20 deterministic points for engine-vs-oracle comparison of the
    fixed point vanishing at w.

    They sit within 0.2 of w, in the closed upper half plane and on the far
    side from the singularity at 1, where the depth-18 truncation tail of
    the word sum stays below the comparison tolerance (the tail scales
    roughly linearly with |z - w|).
    """
    radii = (0.05, 0.10, 0.15, 0.20)
    angles = (90.0, 120.0, 150.0, 180.0)
    pts = [OMEGA + r * cmath.exp(1j * math.radians(th))
           for r in radii for th in angles]
    pts += [OMEGA + 0.18 * cmath.exp(1j * math.radians(th))
            for th in (100.0, 130.0, 160.0, 175.0)]
    return tuple(pts)


def general_a_cso(a: int) -> AffineCso:
    """Additive operator for the metallic mean w with w^2 + a w = 1:
    a copies of f(-w x - i) plus f(w^2 x + a w).  a = 1 recovers M."""
    if a < 1:
        raise PreconditionError("a must be >= 1")
    w = (math.sqrt(a * a + 4.0) - a) / 2.0
    terms = [(1.0, AffineMap(-w, -i / (1.0 + w))) for i in range(a)]
    terms.append((1.0, AffineMap(w * w, 1.0)))
    return make_cso(terms)
