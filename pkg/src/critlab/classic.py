"""Exact small-case verifiers: convex hull containment, real-root
interlacing, Jensen disks, the Steiner-inellipse focus construction, and the
z^n - 1 perturbation demonstration.

The inellipse is built purely from triangle geometry (an affine image of the
equilateral case), never from the derivative, so the Marden comparison stays
independent of the solver under test.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import _mp
from .errors import DomainError
from .polyroots import (
    PolynomialRoots,
    RootPolynomial,
    aberth_roots,
    critical_points,
    polynomial_derivative,
)

_HULL_TOL_FACTOR = 1e-12


# ---------------------------------------------------------------------------
# Gauss-Lucas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HullCheck:
    contained: bool
    worst_violation: float  # signed distance to the hull; negative = inside


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise, distinct vertices."""
    pts = sorted(set((float(p.real), float(p.imag)) for p in points))
    if len(pts) <= 2:
        return np.array([complex(*p) for p in pts])

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array([complex(*p) for p in hull])


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    if a == b:
        return abs(p - a)
    t = ((p - a) / (b - a)).real
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * (b - a)))


def signed_hull_distance(point: complex, hull: np.ndarray) -> float:
    """Signed distance to the hull boundary; negative inside, positive outside.

    Degenerate hulls (a point or a segment) give the plain distance.
    """
    k = len(hull)
    if k == 1:
        return abs(point - hull[0])
    if k == 2:
        return _segment_distance(point, hull[0], hull[1])
    best = -math.inf
    for i in range(k):
        a, b = hull[i], hull[(i + 1) % k]
        edge = b - a
        # hull is counterclockwise: outward normal points right of the edge
        signed = ((point - a) * edge.conjugate()).imag / abs(edge)
        signed = -signed
        if signed > best:
            best = signed
    if best > 0:
        # outside: the true distance is to the nearest edge segment
        return min(_segment_distance(point, hull[i], hull[(i + 1) % k]) for i in range(k))
    return best


def gauss_lucas_check(roots, cps) -> HullCheck:
    """Check every critical point against the convex hull of the roots.

    Tolerance is 1e-12 times the root diameter; collinear root sets fall back
    to segment containment.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    pts = np.atleast_1d(np.asarray(getattr(cps, "points", cps), dtype=complex))
    hull = _convex_hull(roots)
    diameter = float(np.abs(roots[:, None] - roots[None, :]).max()) if len(roots) > 1 else 0.0
    tol = _HULL_TOL_FACTOR * max(diameter, 1e-300)
    worst = -math.inf
    for p in pts:
        worst = max(worst, signed_hull_distance(p, hull))
    return HullCheck(contained=bool(worst <= tol), worst_violation=worst)


# ---------------------------------------------------------------------------
# Interlacing for real roots
# ---------------------------------------------------------------------------


def interlacing_check(roots, cps, merge_tol: float | None = None) -> bool:
    """Rolle bookkeeping for real-rooted polynomials.

    Between consecutive distinct roots there must be exactly one critical
    point, and each distinct root of multiplicity m must carry exactly m-1
    critical points; together those account for all n-1 of them.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    pts = np.atleast_1d(np.asarray(getattr(cps, "points", cps), dtype=complex))
    scale = max(1.0, float(np.abs(roots).max()))
    if np.max(np.abs(roots.imag)) > 1e-12 * scale:
        raise DomainError("interlacing check requires real roots")
    if merge_tol is None:
        merge_tol = 1e-9 * scale
    xs = np.sort(roots.real)
    distinct: list[float] = []
    mult: list[int] = []
    for x in xs:
        if distinct and x - distinct[-1] <= merge_tol:
            mult[-1] += 1
        else:
            distinct.append(float(x))
            mult.append(1)
    if np.max(np.abs(pts.imag)) > 1e-9 * scale:
        return False
    cs = np.sort(pts.real)
    used = np.zeros(len(cs), dtype=bool)
    for x, m in zip(distinct, mult):
        at_root = np.abs(cs - x) <= merge_tol
        if int(at_root.sum()) != m - 1:
            return False
        used |= at_root
    for left, right in zip(distinct[:-1], distinct[1:]):
        inside = (~used) & (cs > left + merge_tol) & (cs < right - merge_tol)
        if int(inside.sum()) != 1:
            return False
        used |= inside
    return bool(used.all())


# ---------------------------------------------------------------------------
# Jensen disks
# ---------------------------------------------------------------------------


def jensen_check(roots, cps, tol: float = 1e-12) -> bool:
    """Non-real critical points of a real polynomial lie in a Jensen disk.

    Each disk has the segment joining a conjugate root pair as a diameter.
    Requires the root multiset to be closed under conjugation; borderline
    points (within tol of a disk boundary) count as contained.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    pts = np.atleast_1d(np.asarray(getattr(cps, "points", cps), dtype=complex))
    scale = max(1.0, float(np.abs(roots).max()))
    pool = list(roots)
    for r in roots:
        match = min(pool, key=lambda s: abs(s - r.conjugate()), default=None)
        if match is None or abs(match - r.conjugate()) > 1e-9 * scale:
            raise DomainError("root multiset is not closed under conjugation")
        pool.remove(match)
    disks = [
        (complex(r.real, 0.0), abs(r.imag))
        for r in roots
        if r.imag > 1e-12 * scale
    ]
    for p in pts:
        if abs(p.imag) <= 1e-12 * scale:
            continue
        if not any(abs(p - c) <= rad + tol * scale for c, rad in disks):
            return False
    return True


# ---------------------------------------------------------------------------
# Marden / Steiner inellipse
# ---------------------------------------------------------------------------


def marden_check(z1: complex, z2: complex, z3: complex, precision_bits: int = 256):
    """Compare Steiner-inellipse foci with the solver's two critical points.

    The inellipse is the affine image of the incircle of the equilateral
    triangle: center at the centroid, complex axes A, B from the first
    Fourier coefficients of the vertices, foci c +/- sqrt(A*B). Tangency at
    the side midpoints is verified as a construction self-check. Returns
    ((focus1, focus2), max_deviation).
    """
    z1, z2, z3 = complex(z1), complex(z2), complex(z3)
    scale = max(abs(z1 - z2), abs(z2 - z3), abs(z3 - z1))
    area2 = abs(((z2 - z1) * (z3 - z1).conjugate()).imag)
    if area2 <= 1e-12 * scale * scale:
        raise DomainError("vertices are collinear")

    ctx = _mp.context(precision_bits)
    zs = [_mp.to_mpc(z) for z in (z1, z2, z3)]
    three = gmpy2.mpz(3)
    c = ctx.div(ctx.add(ctx.add(zs[0], zs[1]), zs[2]), three)
    tau = ctx.div(ctx.mul(gmpy2.mpz(2), ctx.const_pi()), three)
    omega = gmpy2.mpc(ctx.cos(tau), ctx.sin(tau), precision_bits)

    def conj(z):
        return _mp.conj(z, ctx)

    A = gmpy2.mpc(0)
    B = gmpy2.mpc(0)
    wk = gmpy2.mpc(1)
    for z in zs:
        v = ctx.sub(z, c)
        A = ctx.add(A, ctx.mul(v, conj(wk)))  # omega^{-k} = conj(omega^k) on the circle
        B = ctx.add(B, ctx.mul(v, wk))
        wk = ctx.mul(wk, omega)
    A = ctx.div(A, three)
    B = ctx.div(B, three)

    # construction self-check: side midpoints must land on |w| = 1/2
    det = ctx.sub(ctx.mul(A, conj(A)), ctx.mul(B, conj(B)))
    for i, j in ((0, 1), (1, 2), (2, 0)):
        m = ctx.sub(ctx.div(ctx.add(zs[i], zs[j]), gmpy2.mpz(2)), c)
        w = ctx.div(ctx.sub(ctx.mul(conj(A), m), ctx.mul(B, conj(m))), det)
        tangency_gap = ctx.abs(ctx.sub(ctx.abs(w), gmpy2.mpfr(0.5)))
        assert tangency_gap < gmpy2.mpfr(2) ** (-(precision_bits // 2))

    fdist = ctx.sqrt(ctx.mul(A, B))
    f1, f2 = ctx.add(c, fdist), ctx.sub(c, fdist)

    cps = critical_points(RootPolynomial([z1, z2, z3], precision_bits))
    if cps.mp_points is not None:
        p1, p2 = cps.mp_points
    else:
        p1, p2 = (_mp.to_mpc(p) for p in cps.points)
    pairing_a = max(ctx.abs(ctx.sub(f1, p1)), ctx.abs(ctx.sub(f2, p2)))
    pairing_b = max(ctx.abs(ctx.sub(f1, p2)), ctx.abs(ctx.sub(f2, p1)))
    deviation = float(min(pairing_a, pairing_b))
    return (_mp.to_complex(f1), _mp.to_complex(f2)), deviation


# ---------------------------------------------------------------------------
# z^n - 1 perturbation demonstration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationDemo:
    """Trajectory of max |critical point| as one root slides into its neighbor."""

    n: int
    fractions: np.ndarray
    max_moduli: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("perturbation_fraction,max_cp_modulus\n")
            for t, m in zip(self.fractions, self.max_moduli):
                fh.write(f"{t:.17g},{m:.17g}\n")


def moved_root_coefficients(n: int, t: float) -> list[complex]:
    """Coefficients of (1 + z + ... + z^{n-1}) (z - omega(t)), ascending.

    omega(t) = exp(2 pi i t / n): the configuration is z^n - 1 with the root
    at angle 0 moved a fraction t of the way to its neighbor. At t = 0 the
    coefficients are exactly those of z^n - 1.
    """
    omega = cmath.exp(2j * math.pi * t / n)
    return [-omega] + [1.0 - omega] * (n - 1) + [1.0]


def unity_critical_points(n: int, precision_bits: int = 256) -> PolynomialRoots:
    """Critical points of the exact polynomial z^n - 1 (all at the origin)."""
    coeffs = [-1.0] + [0.0] * (n - 1) + [1.0]
    return aberth_roots(polynomial_derivative(coeffs), precision_bits)


def perturbation_demo(
    n: int, seed: int = 0, steps: int = 21, precision_bits: int = 256
) -> PerturbationDemo:
    """Track max |critical point| while one root of z^n - 1 slides to its neighbor.

    The trajectory jumps from (numerically) zero at t = 0 out to modulus ~1 at
    full collision. The construction is deterministic; seed is accepted for
    interface uniformity with the sampling pipelines.
    """
    del seed
    if n < 3:
        raise DomainError("need n >= 3")
    ts = np.linspace(0.0, 1.0, steps)
    maxima = np.empty(steps)
    for i, t in enumerate(ts):
        dcoeffs = polynomial_derivative(moved_root_coefficients(n, float(t)))
        solved = aberth_roots(dcoeffs, precision_bits)
        maxima[i] = float(np.abs(solved.points).max()) if len(solved.points) else 0.0
    return PerturbationDemo(n=n, fractions=ts, max_moduli=maxima)
