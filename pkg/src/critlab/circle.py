"""Unit-circle specifics: power-sum coefficients, the Bernoulli count law,
and zeros of the truncated Gaussian power series.

For roots on the unit circle the log-derivative f'/f, rescaled by -1/sqrt(n),
is the power series with coefficients a_{n,r} = n^{-1/2} sum_j X_j^{-(r+1)}.
These tend to IID standard complex normals, so the critical points inside a
disk B_rho approach the zero set of the Gaussian power series: a determinantal
point process whose point count N(rho) is a sum of independent Bernoullis
with means rho^{2k}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .measures import RootSample, UniformCircle, sample_roots
from .polyroots import RootPolynomial, aberth_roots, critical_points

_CIRCLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Power-sum coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientVector:
    """Normalized inverse power sums a_{n,r} for r = 0..k."""

    entries: np.ndarray
    n: int
    k: int

    def __post_init__(self):
        assert np.all(np.abs(self.entries) <= math.sqrt(self.n) * (1.0 + 1e-12))


def power_sum_coefficients(sample: RootSample, k: int) -> CoefficientVector:
    """a_{n,r} = n^{-1/2} sum_j X_j^{-(r+1)} for r = 0..k, on the unit circle.

    Powers are taken through the angles (X^{-(r+1)} = e^{-i(r+1)theta}), which
    stays exactly on the circle, and each sum is accumulated with fsum.
    """
    X = sample.roots
    n = len(X)
    if np.max(np.abs(np.abs(X) - 1.0)) > _CIRCLE_TOL:
        raise DomainError("power sums require all roots on the unit circle")
    theta = np.angle(X)
    rt_n = math.sqrt(n)
    entries = np.empty(k + 1, dtype=complex)
    for r in range(k + 1):
        ang = (r + 1) * theta
        entries[r] = complex(math.fsum(np.cos(ang)), -math.fsum(np.sin(ang))) / rt_n
    return CoefficientVector(entries=entries, n=n, k=k)


# ---------------------------------------------------------------------------
# Count law N(rho): sum of Bernoulli(rho^{2k})
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountLaw:
    """Poisson-binomial law of the zero count in B_rho."""

    rho: float
    means: tuple
    pmf: np.ndarray

    @property
    def mean(self) -> float:
        return float(sum(self.means))


def poisson_binomial_pmf(probs) -> np.ndarray:
    """pmf of a sum of independent Bernoullis by iterative convolution."""
    pmf = np.array([1.0])
    with np.errstate(under="ignore"):
        for p in probs:
            pmf = np.concatenate([pmf * (1.0 - p), [0.0]]) + np.concatenate([[0.0], pmf * p])
    return pmf


def count_law(rho: float, tail_tol: float = 1e-8) -> CountLaw:
    """Truncated Bernoulli-sum law of N(rho).

    Truncation keeps means rho^{2k} for k = 1..K with K the smallest index
    whose dropped tail sum rho^{2(K+1)}/(1-rho^2) falls below tail_tol.
    """
    if not 0.0 < rho < 1.0:
        raise ConfigurationError("need 0 < rho < 1")
    if not tail_tol > 0:
        raise ConfigurationError("tail_tol must be positive")
    K = 1
    while rho ** (2 * (K + 1)) / (1.0 - rho * rho) >= tail_tol:
        K += 1
    means = tuple(rho ** (2 * k) for k in range(1, K + 1))
    return CountLaw(rho=rho, means=means, pmf=poisson_binomial_pmf(means))


def radial_count_cdf(rho: float):
    """CDF of |zero| on [0, rho] under the (1-r^2)^{-2} one-point intensity."""
    total = rho * rho / (1.0 - rho * rho)

    def cdf(r):
        r = min(max(r, 0.0), rho)
        return (r * r / (1.0 - r * r)) / total

    return cdf


def radial_bin_edges(rho: float, bins: int = 10) -> np.ndarray:
    """Equal-probability radial bin edges under the disk zero intensity."""
    total = rho * rho / (1.0 - rho * rho)
    qs = np.linspace(0.0, 1.0, bins + 1) * total
    return np.sqrt(qs / (1.0 + qs))


# ---------------------------------------------------------------------------
# Gaussian power series zeros
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GafSample:
    """Zeros in B_rho of a truncated IID-Gaussian power series."""

    coefficients: np.ndarray
    zeros_in_B_rho: np.ndarray
    rho: float
    M: int
    boundary_flags: np.ndarray  # True when the truncation tail could move the zero across the boundary

    def __post_init__(self):
        assert np.all(np.abs(self.zeros_in_B_rho) < self.rho)


def gaf_zeros_from_coefficients(coeffs, rho: float) -> GafSample:
    """Zeros inside B_rho of the polynomial with the given coefficients.

    A zero is boundary-flagged when the first-order displacement bound
    (truncation tail)/|G'(z)| could move it across |z| = rho.
    """
    if not 0.0 < rho < 1.0:
        raise ConfigurationError("need 0 < rho < 1")
    coeffs = np.asarray(coeffs, dtype=complex)
    M = len(coeffs) - 1
    solved = aberth_roots(coeffs, precision_bits=256)
    zeros = solved.points[np.abs(solved.points) < rho]
    order = np.lexsort((zeros.imag, zeros.real))
    zeros = zeros[order]
    dcoeffs = coeffs[1:] * np.arange(1, M + 1)
    tail = rho ** (M + 1) / (1.0 - rho)
    flags = np.zeros(len(zeros), dtype=bool)
    for i, z in enumerate(zeros):
        dval = abs(np.polyval(dcoeffs[::-1], z))
        influence = tail / dval if dval > 0 else math.inf
        flags[i] = (rho - abs(z)) < influence
    return GafSample(
        coefficients=coeffs, zeros_in_B_rho=zeros, rho=rho, M=M, boundary_flags=flags
    )


def sample_gaf_zeros(rho: float, tail_tol: float = 1e-8, seed: int = 0) -> GafSample:
    """Draw Y_0..Y_M IID standard complex normal and solve for zeros in B_rho.

    M is the smallest truncation degree with tail bound rho^{M+1}/(1-rho)
    below tail_tol (standard complex normal: Re and Im independent with
    variance 1/2 each, so E|Y|^2 = 1).
    """
    if not 0.0 < rho < 1.0:
        raise ConfigurationError("need 0 < rho < 1")
    if not tail_tol > 0:
        raise ConfigurationError("tail_tol must be positive")
    M = 0
    while rho ** (M + 1) / (1.0 - rho) >= tail_tol:
        M += 1
    rng = np.random.Generator(np.random.PCG64(seed))
    raw = rng.standard_normal(2 * (M + 1)) / math.sqrt(2.0)
    coeffs = raw[0::2] + 1j * raw[1::2]
    return gaf_zeros_from_coefficients(coeffs, rho)


# ---------------------------------------------------------------------------
# One circle trial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleTrialResult:
    n: int
    rho: float
    N_rho: int
    coefficients: CoefficientVector
    modulus_hist: np.ndarray   # counts over 20 equal bins of [0, 1]
    cp_count: int
    precision_used: int

    def fragment(self) -> dict:
        return {
            "n": self.n,
            "rho": self.rho,
            "N_rho": self.N_rho,
            "coefficients": [[c.real, c.imag] for c in self.coefficients.entries],
            "modulus_hist": self.modulus_hist.tolist(),
            "cp_count": self.cp_count,
            "precision_used": self.precision_used,
        }


def circle_trial(
    n: int, rho: float, seed: int, k: int = 3, precision_bits: int | None = None
) -> CircleTrialResult:
    """Sample n circle roots, certify critical points, count N(rho).

    Also records the first k+1 power-sum coefficients and the modulus
    histogram of all critical points. Every critical point must have modulus
    at most 1 up to certification slack (the hull of circle points).
    """
    if n < 2:
        raise ConfigurationError("need n >= 2")
    if not 0.0 < rho < 1.0:
        raise ConfigurationError("need 0 < rho < 1")
    sample = sample_roots(UniformCircle(1.0), n, seed)
    poly = (
        RootPolynomial(sample.roots)
        if precision_bits is None
        else RootPolynomial(sample.roots, precision_bits)
    )
    cps = critical_points(poly)
    moduli = np.abs(cps.points)
    assert moduli.max() <= 1.0 + 1e-9, "Gauss-Lucas bound violated on the circle"
    hist, _ = np.histogram(np.clip(moduli, 0.0, 1.0), bins=np.linspace(0.0, 1.0, 21))
    return CircleTrialResult(
        n=n,
        rho=rho,
        N_rho=int((moduli <= rho).sum()),
        coefficients=power_sum_coefficients(sample, k),
        modulus_hist=hist,
        cp_count=len(cps),
        precision_used=cps.precision_bits,
    )
