"""Certified critical points of polynomials given in root form.

The polynomial f(z) = prod (z - X_j) is never expanded for solving: the
simultaneous Aberth-Ehrlich iteration evaluates the Newton ratio f'/f''
through the pole sums

    M1(z) = sum m_j/(z - Y_j),   M2(z) = sum m_j/(z - Y_j)^2,

over the distinct roots Y_j with multiplicities m_j. All summands are O(1),
which sidesteps the catastrophic coefficient growth that makes expanded
high-degree polynomials unsolvable in double precision. A float64 pass
supplies starting points; every reported point is then certified by
evaluating |f'(a)| at twice the working precision, and the working precision
doubles (up to 8 times) until certification succeeds.

A separate Aberth backend for coefficient-form polynomials backs the exact
fixtures (z^n - 1 and its perturbations) and the truncated random series;
it deflates exact zero trailing coefficients before iterating, so fixtures
with an exact root at the origin report it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import _mp
from .errors import DomainError, IndeterminateCountError, PoleError, SolverFailure

DEFAULT_PRECISION_BITS = 256
MAX_ESCALATIONS = 8

_F64_STEP_TOL = 5e-15
_F64_MAX_SWEEPS = 500
_INIT_JITTER = 1.7e-9 + 3.1e-9j  # breaks exactly symmetric configurations


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootPolynomial:
    """f(z) = prod (z - roots[j]) with an internal working precision."""

    roots: np.ndarray
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __post_init__(self):
        roots = np.atleast_1d(np.asarray(self.roots, dtype=complex))
        roots.setflags(write=False)
        object.__setattr__(self, "roots", roots)
        if len(roots) < 1:
            raise DomainError("need at least one root")
        if self.precision_bits < 53:
            raise DomainError("precision_bits must be >= 53")

    @property
    def n(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class CriticalPointSet:
    """All n-1 zeros of f' with certified residuals, sorted by (Re, Im).

    `points` is the complex128 view used by downstream consumers. When the
    solver escalated into arbitrary precision, `mp_points` holds the actual
    certified values and the residuals were evaluated there; otherwise the
    float points themselves are the certified values.
    """

    points: np.ndarray            # complex128 view of the certified points
    residuals: np.ndarray         # |f'(a)| at 2x precision, as float64
    log2_residuals: np.ndarray    # exact log2 of the residuals (overflow-safe)
    precision_bits: int           # working precision that certified the set
    tau_log2: float               # log2 of the certification threshold
    mp_points: tuple | None = None  # full-precision certified points when refined

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PolynomialRoots:
    """All roots of a coefficient-form polynomial, certified like above."""

    points: np.ndarray
    residuals: np.ndarray
    precision_bits: int
    mp_points: tuple | None = None

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_log_derivative(p: RootPolynomial, z: complex) -> complex:
    """f'(z)/f(z) = sum 1/(z - X_j) with compensated summation.

    Raises PoleError naming the offending index when z is exactly a root.
    """
    z = complex(z)
    hits = np.nonzero(p.roots == z)[0]
    if len(hits):
        raise PoleError(int(hits[0]))
    if p.precision_bits <= 53:
        terms = 1.0 / (z - p.roots)
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    ctx = _mp.context(p.precision_bits)
    zm = _mp.to_mpc(z)
    total = _mp.kahan_sum(
        (ctx.div(1, ctx.sub(zm, _mp.to_mpc(r))) for r in p.roots), ctx
    )
    return _mp.to_complex(total)


def derivative_coefficients(p: RootPolynomial) -> list[complex]:
    """Monomial coefficients of f' (ascending), expanded at precision_bits.

    The expansion multiplies the factors (z - X_j) incrementally and then
    differentiates formally; the leading coefficient is exactly n.
    """
    ctx = _mp.context(p.precision_bits)
    coeffs = [gmpy2.mpc(1)]
    for r in p.roots:
        rm = _mp.to_mpc(complex(r))
        nxt = [ctx.mul(ctx.minus(rm), coeffs[0])]
        for i in range(1, len(coeffs)):
            nxt.append(ctx.sub(coeffs[i - 1], ctx.mul(rm, coeffs[i])))
        nxt.append(coeffs[-1])
        coeffs = nxt
    deriv = [ctx.mul(gmpy2.mpz(k), coeffs[k]) for k in range(1, len(coeffs))]
    return [_mp.to_complex(c) for c in deriv]


def polynomial_derivative(coeffs) -> list[complex]:
    """Formal derivative of an ascending coefficient list."""
    return [k * complex(c) for k, c in enumerate(coeffs)][1:]


# ---------------------------------------------------------------------------
# Multiplicity handling
# ---------------------------------------------------------------------------


def _merge_roots(roots: np.ndarray, tol: float):
    """Cluster roots closer than tol into multiplicity atoms (union-find)."""
    n = len(roots)
    order = np.lexsort((roots.imag, roots.real))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    sorted_roots = roots[order]
    # neighbors within tol have nearby real parts; scan a sliding window
    for a in range(n):
        b = a + 1
        while b < n and sorted_roots[b].real - sorted_roots[a].real <= tol:
            if abs(sorted_roots[b] - sorted_roots[a]) <= tol:
                ra, rb = find(order[a]), find(order[b])
                if ra != rb:
                    parent[rb] = ra
            b += 1
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    distinct = np.array([roots[idx[0]] for idx in groups.values()], dtype=complex)
    mult = np.array([len(idx) for idx in groups.values()], dtype=float)
    return distinct, mult


# ---------------------------------------------------------------------------
# Aberth-Ehrlich on the pole representation
# ---------------------------------------------------------------------------


def _aberth_poles_f64(Y: np.ndarray, mult: np.ndarray):
    """Float64 Aberth pass for the zeros of M1; returns (points, converged)."""
    k = len(Y)
    m = k - 1
    if m == 0:
        return np.empty(0, dtype=complex), True
    scale = 1.0 + np.abs(Y).max()
    centroid = Y.mean()
    z = Y[:m] + (centroid - Y[:m]) * (0.5 / k) + _INIT_JITTER * scale
    last_step = math.inf
    for _ in range(_F64_MAX_SWEEPS):
        D = z[:, None] - Y[None, :]
        with np.errstate(divide="ignore", invalid="ignore", under="ignore", over="ignore"):
            invD = 1.0 / D
            M1 = (mult * invD).sum(axis=1)
            M2 = (mult * invD * invD).sum(axis=1)
            P1 = invD.sum(axis=1)
            N = M1 / (M1 * P1 - M2)
            Zd = z[:, None] - z[None, :]
            np.fill_diagonal(Zd, np.inf)
            A = (1.0 / Zd).sum(axis=1)
            w = N / (1.0 - N * A)
        bad = ~np.isfinite(w)
        if bad.any():
            w = np.where(bad, 0.0, w)
            z = np.where(bad, z + _INIT_JITTER * scale, z)
        z = z - w
        step = float(np.max(np.abs(w) / (1.0 + np.abs(z))))
        if step < _F64_STEP_TOL and last_step < _F64_STEP_TOL:
            return z, True
        last_step = step
    return z, False


def _aberth_poles_mp(Y, mult, start, bits, max_sweeps=64):
    """Arbitrary-precision Aberth refinement from warm-start points."""
    ctx = _mp.context(bits)
    Ym = [_mp.to_mpc(complex(y)) for y in Y]
    mm = [gmpy2.mpz(int(v)) for v in mult]
    z = [_mp.to_mpc(p) for p in start]
    m = len(z)
    stop = gmpy2.mpfr(2) ** (-(bits - 8))
    quiet = 0
    for _ in range(max_sweeps):
        max_rel = gmpy2.mpfr(0)
        for i in range(m):
            zi = z[i]
            M1 = gmpy2.mpc(0)
            M2 = gmpy2.mpc(0)
            P1 = gmpy2.mpc(0)
            for yj, mj in zip(Ym, mm):
                d = ctx.sub(zi, yj)
                if d == 0:
                    d = ctx.add(d, gmpy2.mpfr(2) ** (-(bits // 2)))
                r = ctx.div(1, d)
                P1 = ctx.add(P1, r)
                mr = ctx.mul(mj, r)
                M1 = ctx.add(M1, mr)
                M2 = ctx.add(M2, ctx.mul(mr, r))
            denom = ctx.sub(ctx.mul(M1, P1), M2)
            if denom == 0:
                continue
            N = ctx.div(M1, denom)
            A = gmpy2.mpc(0)
            for l in range(m):
                if l != i:
                    dz = ctx.sub(zi, z[l])
                    if dz != 0:
                        A = ctx.add(A, ctx.div(1, dz))
            corr = ctx.sub(gmpy2.mpc(1), ctx.mul(N, A))
            w = ctx.div(N, corr) if corr != 0 else N
            z[i] = ctx.sub(zi, w)
            rel = abs(w) / (1 + abs(z[i]))
            if rel > max_rel:
                max_rel = rel
        if max_rel < stop:
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
    # Newton polish per point
    for _ in range(2):
        for i in range(m):
            zi = z[i]
            M1 = gmpy2.mpc(0)
            M2 = gmpy2.mpc(0)
            P1 = gmpy2.mpc(0)
            for yj, mj in zip(Ym, mm):
                d = ctx.sub(zi, yj)
                if d == 0:
                    continue
                r = ctx.div(1, d)
                P1 = ctx.add(P1, r)
                mr = ctx.mul(mj, r)
                M1 = ctx.add(M1, mr)
                M2 = ctx.add(M2, ctx.mul(mr, r))
            denom = ctx.sub(ctx.mul(M1, P1), M2)
            if denom != 0:
                z[i] = ctx.sub(zi, ctx.div(M1, denom))
    return z


def _certify_rootform(Y, mult, points, precision_bits):
    """Residuals |f'(a)| for each point, evaluated at 2x precision."""
    ctx = _mp.context(2 * precision_bits)
    sub, mul, add, div, powf = ctx.sub, ctx.mul, ctx.add, ctx.div, ctx.pow
    Ym = [_mp.to_mpc(complex(y)) for y in Y]
    mm = [int(v) for v in mult]
    simple = all(m == 1 for m in mm)
    one = gmpy2.mpc(1)
    huge = gmpy2.mpfr("1e308")
    residuals = []
    log2res = []
    for a in points:
        am = _mp.to_mpc(a)
        fval = one
        M1 = gmpy2.mpc(0)
        singular = False
        if simple:
            for yj in Ym:
                d = sub(am, yj)
                if d == 0:
                    singular = True
                    break
                fval = mul(fval, d)
                M1 = add(M1, div(1, d))
        else:
            for yj, mj in zip(Ym, mm):
                d = sub(am, yj)
                if d == 0:
                    singular = True
                    break
                fval = mul(fval, d if mj == 1 else powf(d, mj))
                M1 = add(M1, div(mj, d))
        if singular:
            residuals.append(math.inf)
            log2res.append(math.inf)
            continue
        r = abs(mul(fval, M1))
        log2res.append(_mp.log2_abs(r))
        residuals.append(float(r) if r < huge else math.inf)
    return np.array(residuals), np.array(log2res)


def _tau_log2(n: int, max_abs: float, precision_bits: int) -> float:
    """log2 of the certification threshold 2^{-pb/4} * n * (1+max|X|)^{n-1}."""
    return -precision_bits / 4.0 + math.log2(n) + (n - 1) * math.log2(1.0 + max_abs)


def critical_points(p: RootPolynomial) -> CriticalPointSet:
    """All n-1 zeros of f' with multiplicity, certified by residuals.

    Roots closer than 2^{-precision_bits/2} are first merged into
    multiplicity-m atoms; each atom of multiplicity m is itself a critical
    point of order m-1 (residual exactly zero) and the remaining zeros are
    found by Aberth-Ehrlich iteration on the deflated pole sum. Working
    precision doubles on certification failure, up to 8 escalations.
    """
    n = p.n
    if n < 2:
        raise DomainError("critical points need degree >= 2")
    merge_tol = 2.0 ** (-(p.precision_bits // 2))
    Y, mult = _merge_roots(p.roots, merge_tol)
    max_abs = float(np.abs(p.roots).max())

    atom_points = []
    for y, m in zip(Y, mult):
        atom_points.extend([complex(y)] * (int(m) - 1))

    pb = p.precision_bits
    mp_points = None
    f64_points, f64_ok = _aberth_poles_f64(Y, mult)
    solved = f64_points
    worst = math.inf
    for attempt in range(MAX_ESCALATIONS + 2):
        if attempt == 1:
            mp_points = _aberth_poles_mp(Y, mult, solved, pb)
            solved = mp_points
        elif attempt > 1:
            pb *= 2
            mp_points = _aberth_poles_mp(Y, mult, mp_points, pb)
            solved = mp_points
        if attempt == 0 and not f64_ok:
            continue  # skip certifying an unconverged float pass
        residuals, log2res = _certify_rootform(Y, mult, solved, pb)
        tau = _tau_log2(n, max_abs, pb)
        if len(log2res) == 0 or float(np.max(log2res)) < tau:
            return _assemble(atom_points, solved, residuals, log2res, pb, tau,
                             mp_points if attempt >= 1 else None)
        worst = float(np.max(residuals))
    raise SolverFailure(worst)


def _assemble(atom_points, solved, residuals, log2res, pb, tau, mp_points):
    pts = np.array(atom_points + [_mp.to_complex(z) for z in solved], dtype=complex)
    res = np.concatenate([np.zeros(len(atom_points)), residuals])
    lr = np.concatenate([np.full(len(atom_points), -math.inf), log2res])
    order = np.lexsort((pts.imag, pts.real))
    mp_sorted = None
    if mp_points is not None:
        allmp = [_mp.to_mpc(a) for a in atom_points] + list(mp_points)
        mp_sorted = tuple(allmp[i] for i in order)
    return CriticalPointSet(
        points=pts[order],
        residuals=res[order],
        log2_residuals=lr[order],
        precision_bits=pb,
        tau_log2=tau,
        mp_points=mp_sorted,
    )


# ---------------------------------------------------------------------------
# Ball counting
# ---------------------------------------------------------------------------


def point_uncertainties(p: RootPolynomial, cps: CriticalPointSet) -> np.ndarray:
    """First-order location uncertainty residual/|f''(a)| per point (float64).

    |f''| is evaluated through pole sums in log space, so huge |f| magnitudes
    cannot overflow; a representation-slop floor 2^-precision_bits is added.
    """
    Y, mult = _merge_roots(p.roots, 2.0 ** (-(p.precision_bits // 2)))
    out = np.empty(len(cps.points))
    for i, a in enumerate(cps.points):
        d = a - Y
        if (d == 0).any():
            # multiple root of f: the critical point is exact
            out[i] = np.finfo(float).eps * (1.0 + abs(a))
            continue
        log2f = float(np.sum(mult * np.log2(np.abs(d))))
        M1 = np.sum(mult / d)
        M2 = np.sum(mult / d**2)
        second = abs(M1 * M1 - M2)
        if second == 0:
            out[i] = math.inf
            continue
        log2u = cps.log2_residuals[i] - (log2f + math.log2(second))
        u = 2.0**log2u if log2u < 1000 else math.inf
        # the complex128 view itself carries float rounding
        slop = max(2.0 ** (-p.precision_bits), np.finfo(float).eps)
        out[i] = u + slop * (1.0 + abs(a))
    return out


def rouche_ball_count(
    p: RootPolynomial,
    center: complex,
    radius: float,
    cps: CriticalPointSet | None = None,
) -> int:
    """Number of certified critical points strictly inside the disk.

    This is the computable stand-in for the winding-number count; it refuses
    to answer when a point sits within twice its residual-derived uncertainty
    of the boundary circle.
    """
    if cps is None:
        cps = critical_points(p)
    dist_to_boundary = np.abs(np.abs(cps.points - complex(center)) - radius)
    unc = point_uncertainties(p, cps)
    bad = dist_to_boundary < 2.0 * unc
    if bad.any():
        i = int(np.argmax(bad))
        raise IndeterminateCountError(
            f"critical point {cps.points[i]} is within 2x uncertainty of the boundary"
        )
    return int((np.abs(cps.points - complex(center)) < radius).sum())


# ---------------------------------------------------------------------------
# Aberth-Ehrlich on monomial coefficients (exact fixtures, series zeros)
# ---------------------------------------------------------------------------


def _horner_f64(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full_like(z, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _aberth_coeffs_f64(coeffs: np.ndarray):
    deg = len(coeffs) - 1
    dcoeffs = coeffs[1:] * np.arange(1, deg + 1)
    R = 1.0 + float(np.max(np.abs(coeffs[:-1]) / abs(coeffs[-1]))) if deg else 1.0
    theta = 2.0 * np.pi * (np.arange(deg) + 0.3619) / deg
    z = R * np.exp(1j * theta) + _INIT_JITTER * R
    last_step = math.inf
    for _ in range(_F64_MAX_SWEEPS):
        pv = _horner_f64(coeffs, z)
        dv = _horner_f64(dcoeffs, z)
        with np.errstate(divide="ignore", invalid="ignore", under="ignore", over="ignore"):
            N = pv / dv
            Zd = z[:, None] - z[None, :]
            np.fill_diagonal(Zd, np.inf)
            A = (1.0 / Zd).sum(axis=1)
            w = N / (1.0 - N * A)
        bad = ~np.isfinite(w)
        if bad.any():
            w = np.where(bad, 0.0, w)
            z = np.where(bad, z * (1 + 1e-8) + 1e-8, z)
        z = z - w
        step = float(np.max(np.abs(w) / (1.0 + np.abs(z))))
        if step < _F64_STEP_TOL and last_step < _F64_STEP_TOL:
            return z, True
        last_step = step
    return z, False


def _aberth_coeffs_mp(coeffs, start, bits, max_sweeps=64):
    ctx = _mp.context(bits)
    cm = [_mp.to_mpc(c) for c in coeffs]
    deg = len(cm) - 1
    dm = [ctx.mul(gmpy2.mpz(k), cm[k]) for k in range(1, deg + 1)]
    z = [_mp.to_mpc(p) for p in start]
    stop = gmpy2.mpfr(2) ** (-(bits - 8))
    quiet = 0

    def horner(cs, x):
        acc = cs[-1]
        for c in reversed(cs[:-1]):
            acc = ctx.add(ctx.mul(acc, x), c)
        return acc

    for _ in range(max_sweeps):
        max_rel = gmpy2.mpfr(0)
        for i in range(deg):
            zi = z[i]
            pv = horner(cm, zi)
            dv = horner(dm, zi)
            if dv == 0:
                z[i] = ctx.add(zi, gmpy2.mpfr(2) ** (-(bits // 2)))
                continue
            N = ctx.div(pv, dv)
            A = gmpy2.mpc(0)
            for l in range(deg):
                if l != i:
                    dz = ctx.sub(zi, z[l])
                    if dz != 0:
                        A = ctx.add(A, ctx.div(1, dz))
            corr = ctx.sub(gmpy2.mpc(1), ctx.mul(N, A))
            w = ctx.div(N, corr) if corr != 0 else N
            z[i] = ctx.sub(zi, w)
            rel = abs(w) / (1 + abs(z[i]))
            if rel > max_rel:
                max_rel = rel
        if max_rel < stop:
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
    return z


def _certify_coeffform(coeffs, points, precision_bits):
    """Residuals |p(a)| against the running magnitude bound sum |c_k||a|^k."""
    ctx = _mp.context(2 * precision_bits)
    cm = [_mp.to_mpc(c) for c in coeffs]
    cabs = [abs(c) for c in cm]
    residuals = []
    log2res = []
    log2scale = []
    for a in points:
        am = _mp.to_mpc(a)
        aabs = abs(am)
        acc = cm[-1]
        mag = cabs[-1]
        for c, cb in zip(reversed(cm[:-1]), reversed(cabs[:-1])):
            acc = ctx.add(ctx.mul(acc, am), c)
            mag = ctx.add(ctx.mul(mag, aabs), cb)
        r = abs(acc)
        residuals.append(float(r) if r < gmpy2.mpfr("1e308") else math.inf)
        log2res.append(_mp.log2_abs(r))
        log2scale.append(_mp.log2_abs(mag))
    return np.array(residuals), np.array(log2res), np.array(log2scale)


def aberth_roots(coeffs, precision_bits: int | None = None) -> PolynomialRoots:
    """All roots of the ascending-coefficient polynomial, certified.

    Exactly-zero trailing coefficients are deflated first (those roots are
    emitted as exact zeros), matching how symmetry fixtures like z^n - 1
    carry an exact high-multiplicity critical point at the origin. Working
    precision starts at max(256, 4*degree) and doubles on certification
    failure, up to 8 escalations.
    """
    coeffs = [complex(c) for c in coeffs]
    if len(coeffs) < 2:
        return PolynomialRoots(np.empty(0, complex), np.empty(0), precision_bits or DEFAULT_PRECISION_BITS)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    deg_full = len(coeffs) - 1
    if precision_bits is None:
        precision_bits = max(DEFAULT_PRECISION_BITS, 4 * deg_full)
    n_zero = 0
    while n_zero < len(coeffs) - 1 and coeffs[n_zero] == 0:
        n_zero += 1
    reduced = coeffs[n_zero:]
    deg = len(reduced) - 1
    zero_pts = [0j] * n_zero

    if deg == 0:
        pts = np.array(zero_pts, dtype=complex)
        return PolynomialRoots(pts, np.zeros(len(pts)), precision_bits)

    carr = np.array(reduced, dtype=complex)
    f64_safe = bool(
        np.all(np.isfinite(carr))
        and np.max(np.abs(carr)) < 1e280
        and np.max(np.abs(carr)) / np.min(np.abs(carr[np.abs(carr) > 0])) < 1e12
    )
    solved = None
    f64_ok = False
    if f64_safe:
        solved, f64_ok = _aberth_coeffs_f64(carr)
    if solved is None:
        theta = 2.0 * np.pi * (np.arange(deg) + 0.3619) / deg
        solved = (2.0 * np.exp(1j * theta)).tolist()

    pb = precision_bits
    mp_points = None
    worst = math.inf
    for attempt in range(MAX_ESCALATIONS + 2):
        if attempt == 1:
            mp_points = _aberth_coeffs_mp(reduced, solved, pb)
            solved = mp_points
        elif attempt > 1:
            pb *= 2
            mp_points = _aberth_coeffs_mp(reduced, mp_points, pb)
            solved = mp_points
        if attempt == 0 and not f64_ok:
            continue
        residuals, log2res, log2scale = _certify_coeffform(reduced, solved, pb)
        if np.all(log2res < log2scale - pb / 4.0):
            pts = np.array(zero_pts + [_mp.to_complex(z) for z in solved], dtype=complex)
            res = np.concatenate([np.zeros(n_zero), residuals])
            order = np.lexsort((pts.imag, pts.real))
            mp_sorted = None
            if mp_points is not None:
                allmp = [gmpy2.mpc(0)] * n_zero + list(mp_points)
                mp_sorted = tuple(allmp[i] for i in order)
            return PolynomialRoots(pts[order], res[order], pb, mp_sorted)
        worst = float(np.max(residuals))
    raise SolverFailure(worst)
