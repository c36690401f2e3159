"""Root distributions: sampling, Cauchy transforms, and 1-energy estimates.

A measure spec describes a probability distribution mu on the complex plane.
Samples drawn from it become the roots of the random polynomials under study;
the Cauchy transform V_mu(z) = integral of 1/(z-w) dmu(w) and the 1-energy
(double integral of 1/|z-w|) drive the convergence diagnostics.

Every sampler is a fixed, documented transform of the uniform stream of a
PCG64 generator, so a (spec, n, seed) triple reproduces its sample exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, SingularityError

_TWO_PI = 2.0 * math.pi
_WEIGHT_TOL = 1e-12
_QUAD_RTOL = 1e-10


# ---------------------------------------------------------------------------
# Measure specs
# ---------------------------------------------------------------------------


class MeasureSpec:
    """Base class for root distributions. Concrete kinds are dataclasses."""

    kind: str = "abstract"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformCircle(MeasureSpec):
    radius: float = 1.0
    kind: str = field(default="uniform_circle", init=False, repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("circle radius must be positive")

    def sample(self, n, rng):
        theta = _TWO_PI * rng.random(n)
        return self.radius * np.exp(1j * theta)

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}


@dataclass(frozen=True)
class UniformDisk(MeasureSpec):
    radius: float = 1.0
    kind: str = field(default="uniform_disk", init=False, repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("disk radius must be positive")

    def sample(self, n, rng):
        u = rng.random((n, 2))
        r = self.radius * np.sqrt(u[:, 0])
        return r * np.exp(1j * _TWO_PI * u[:, 1])

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}


@dataclass(frozen=True)
class UniformSegment(MeasureSpec):
    a: complex = 0.0
    b: complex = 1.0
    kind: str = field(default="uniform_segment", init=False, repr=False)

    def __post_init__(self):
        if complex(self.a) == complex(self.b):
            raise ConfigurationError("segment endpoints must be distinct")

    def sample(self, n, rng):
        t = rng.random(n)
        return complex(self.a) + t * (complex(self.b) - complex(self.a))

    def to_dict(self):
        a, b = complex(self.a), complex(self.b)
        return {"kind": self.kind, "a": [a.real, a.imag], "b": [b.real, b.imag]}


@dataclass(frozen=True)
class Atomic(MeasureSpec):
    # tuple of (location, weight); weights strictly positive, summing to 1
    atoms: tuple = ((0j, 1.0),)
    kind: str = field(default="atomic", init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((complex(a), float(w)) for a, w in self.atoms)
        )
        weights = [w for _, w in self.atoms]
        if not weights or any(w <= 0 for w in weights):
            raise ConfigurationError("atomic weights must be strictly positive")
        if abs(sum(weights) - 1.0) > _WEIGHT_TOL:
            raise ConfigurationError("atomic weights must sum to 1 within 1e-12")

    def sample(self, n, rng):
        locs = np.array([a for a, _ in self.atoms], dtype=complex)
        cum = np.cumsum([w for _, w in self.atoms])
        idx = np.searchsorted(cum, rng.random(n), side="right")
        return locs[np.minimum(idx, len(locs) - 1)]

    def to_dict(self):
        return {
            "kind": self.kind,
            "atoms": [[a.real, a.imag, w] for a, w in self.atoms],
        }


@dataclass(frozen=True)
class UniformAnnulus(MeasureSpec):
    r_inner: float = 0.5
    r_outer: float = 1.0
    kind: str = field(default="uniform_annulus", init=False, repr=False)

    def __post_init__(self):
        if not (0 <= self.r_inner < self.r_outer):
            raise ConfigurationError("annulus requires 0 <= r_inner < r_outer")

    def sample(self, n, rng):
        u = rng.random((n, 2))
        # inverse CDF on r^2: area grows linearly in r^2
        r2 = self.r_inner**2 + u[:, 0] * (self.r_outer**2 - self.r_inner**2)
        return np.sqrt(r2) * np.exp(1j * _TWO_PI * u[:, 1])

    def to_dict(self):
        return {"kind": self.kind, "r_inner": self.r_inner, "r_outer": self.r_outer}


@dataclass(frozen=True)
class ComplexGaussian(MeasureSpec):
    mean: complex = 0j
    scale: float = 1.0
    kind: str = field(default="complex_gaussian", init=False, repr=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigurationError("gaussian scale must be positive")

    def sample(self, n, rng):
        # standard complex normal scaled: Re and Im independent N(0, scale^2/2)
        v = rng.standard_normal((n, 2)) * (self.scale / math.sqrt(2.0))
        return complex(self.mean) + v[:, 0] + 1j * v[:, 1]

    def to_dict(self):
        m = complex(self.mean)
        return {"kind": self.kind, "mean": [m.real, m.imag], "scale": self.scale}


_KINDS = {
    cls.__dataclass_fields__["kind"].default: cls
    for cls in (UniformCircle, UniformDisk, UniformSegment, Atomic, UniformAnnulus, ComplexGaussian)
}


def measure_from_dict(d: dict) -> MeasureSpec:
    """Rebuild a measure spec from its to_dict() form (CLI config format)."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown measure kind {kind!r}")
    cls = _KINDS[kind]
    try:
        if kind == "uniform_segment":
            return cls(a=complex(*d["a"]), b=complex(*d["b"]))
        if kind == "atomic":
            return cls(atoms=tuple((complex(x[0], x[1]), x[2]) for x in d["atoms"]))
        if kind == "complex_gaussian":
            return cls(mean=complex(*d["mean"]), scale=d["scale"])
        return cls(**d)
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad parameters for measure {kind!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootSample:
    """An ordered IID sample from a measure, tagged with its provenance."""

    roots: np.ndarray
    seed: int
    spec: MeasureSpec

    @property
    def n(self) -> int:
        return len(self.roots)


def sample_roots(spec: MeasureSpec, n: int, seed: int) -> RootSample:
    """Draw n IID roots from the spec, deterministically in (spec, n, seed)."""
    if n < 1:
        raise ConfigurationError("need n >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    roots = np.asarray(spec.sample(n, rng), dtype=complex)
    roots.setflags(write=False)
    return RootSample(roots=roots, seed=seed, spec=spec)


# ---------------------------------------------------------------------------
# Cauchy transform (closed forms)
# ---------------------------------------------------------------------------

_NAN = complex(float("nan"), float("nan"))


def potential(spec: MeasureSpec, z: complex) -> complex:
    """Cauchy transform V(z) = integral of 1/(z-w) dmu(w), in closed form.

    Points exactly on a one-dimensional support (circle, segment) get the
    NaN flag; hitting an atom of an atomic measure raises SingularityError.
    """
    z = complex(z)
    if isinstance(spec, UniformCircle):
        r = abs(z)
        if r < spec.radius:
            return 0j
        if r > spec.radius:
            return 1.0 / z
        return _NAN
    if isinstance(spec, UniformDisk):
        if abs(z) <= spec.radius:
            return z.conjugate() / spec.radius**2
        return 1.0 / z
    if isinstance(spec, UniformAnnulus):
        r_in, r_out = spec.r_inner, spec.r_outer
        r = abs(z)
        if r <= r_in:
            return 0j
        if r >= r_out:
            return 1.0 / z
        return (z.conjugate() - r_in**2 / z) / (r_out**2 - r_in**2)
    if isinstance(spec, UniformSegment):
        a, b = complex(spec.a), complex(spec.b)
        t = (z - a) / (b - a)
        if t.imag == 0.0 and 0.0 <= t.real <= 1.0:
            return _NAN
        return cmath.log((z - a) / (z - b)) / (b - a)
    if isinstance(spec, Atomic):
        total = 0j
        for a, w in spec.atoms:
            if z == a:
                raise SingularityError(f"z coincides with atom at {a}")
            total += w / (z - a)
        return total
    if isinstance(spec, ComplexGaussian):
        v = z - complex(spec.mean)
        if v == 0:
            return 0j
        return -math.expm1(-abs(v) ** 2 / spec.scale**2) / v
    raise TypeError(f"unsupported measure spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Cauchy transform (quadrature route, kept independent of the closed forms)
# ---------------------------------------------------------------------------


def _quad_complex(f, lo, hi, rtol=_QUAD_RTOL, **kw):
    re, _ = integrate.quad(lambda t: f(t).real, lo, hi, epsabs=1e-13, epsrel=rtol, limit=400, **kw)
    im, _ = integrate.quad(lambda t: f(t).imag, lo, hi, epsabs=1e-13, epsrel=rtol, limit=400, **kw)
    return complex(re, im)


def _ray_disk_interval(z: complex, phi: float, radius: float):
    """Intersection of the ray {z + s e^{i phi}, s>=0} with the disk |w|<=radius."""
    q = (z.conjugate() * cmath.exp(1j * phi)).real
    disc = q * q - (abs(z) ** 2 - radius**2)
    if disc <= 0:
        return 0.0, 0.0
    root = math.sqrt(disc)
    lo, hi = max(0.0, -q - root), max(0.0, -q + root)
    return lo, hi


def potential_quadrature(spec: MeasureSpec, z: complex, rtol: float = _QUAD_RTOL) -> complex:
    """V(z) by numeric integration over the support parametrization.

    Two-dimensional supports are reduced to a single angular integral in polar
    coordinates centered at z (the Jacobian cancels the kernel singularity),
    which keeps this route independent of the shell-theorem closed forms.
    """
    z = complex(z)
    if isinstance(spec, UniformCircle):
        R = spec.radius

        def f(theta):
            return 1.0 / (z - R * cmath.exp(1j * theta)) / _TWO_PI

        return _quad_complex(f, 0.0, _TWO_PI, rtol)
    if isinstance(spec, UniformSegment):
        a, b = complex(spec.a), complex(spec.b)
        return _quad_complex(lambda t: 1.0 / (z - (a + t * (b - a))), 0.0, 1.0, rtol)
    if isinstance(spec, Atomic):
        return potential(spec, z)
    if isinstance(spec, (UniformDisk, UniformAnnulus)):
        if isinstance(spec, UniformDisk):
            r_in, r_out = 0.0, spec.radius
        else:
            r_in, r_out = spec.r_inner, spec.r_outer
        area = math.pi * (r_out**2 - r_in**2)

        def f(phi):
            lo_o, hi_o = _ray_disk_interval(z, phi, r_out)
            length = hi_o - lo_o
            if r_in > 0:
                lo_i, hi_i = _ray_disk_interval(z, phi, r_in)
                length -= hi_i - lo_i
            return -cmath.exp(-1j * phi) * length / area

        return _quad_complex(f, 0.0, _TWO_PI, rtol)
    if isinstance(spec, ComplexGaussian):
        v = z - complex(spec.mean)
        s2 = spec.scale**2
        from scipy.special import erfc

        def f(phi):
            # closed inner integral of the density along the ray from z
            bcoef = (v.conjugate() * cmath.exp(1j * phi)).real
            ray = math.exp(-(abs(v) ** 2 - bcoef**2) / s2) * (
                spec.scale * math.sqrt(math.pi) / 2.0
            ) * erfc(bcoef / spec.scale)
            return -cmath.exp(-1j * phi) * ray / (math.pi * s2)

        return _quad_complex(f, 0.0, _TWO_PI, rtol)
    raise TypeError(f"unsupported measure spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Truncated potential
# ---------------------------------------------------------------------------


def _phi_trunc(z: complex, w: complex, K: float) -> complex:
    """Kernel 1/(z-w) with its magnitude truncated at K; phi(z) := K itself."""
    d = z - w
    r = abs(d)
    if r == 0.0:
        return complex(K, 0.0)
    val = (d.conjugate() / r) / max(r, 1.0 / K)
    assert abs(val) <= K * (1.0 + 1e-12)
    return val


def truncated_potential(spec: MeasureSpec, z: complex, K: float) -> complex:
    """Integral of the truncated kernel phi^{K,z} against the measure.

    The truncation caps the kernel magnitude at K, removing the singularity,
    so the value is finite for every z.
    """
    if not K > 0:
        raise ConfigurationError("need K > 0")
    z = complex(z)
    if isinstance(spec, Atomic):
        return sum(w * _phi_trunc(z, a, K) for a, w in spec.atoms)
    if isinstance(spec, UniformCircle):
        R = spec.radius
        return _quad_complex(
            lambda th: _phi_trunc(z, R * cmath.exp(1j * th), K) / _TWO_PI, 0.0, _TWO_PI
        )
    if isinstance(spec, UniformSegment):
        a, b = complex(spec.a), complex(spec.b)
        return _quad_complex(lambda t: _phi_trunc(z, a + t * (b - a), K), 0.0, 1.0)
    if isinstance(spec, (UniformDisk, UniformAnnulus)):
        if isinstance(spec, UniformDisk):
            r_in, r_out = 0.0, spec.radius
        else:
            r_in, r_out = spec.r_inner, spec.r_outer
        area = math.pi * (r_out**2 - r_in**2)
        cut = 1.0 / K

        def primitive(s):
            # integral of sigma/max(sigma, 1/K) from 0 to s
            if s <= cut:
                return 0.5 * K * s * s
            return 0.5 * cut + (s - cut)

        def f(phi):
            lo_o, hi_o = _ray_disk_interval(z, phi, r_out)
            val = primitive(hi_o) - primitive(lo_o)
            if r_in > 0:
                lo_i, hi_i = _ray_disk_interval(z, phi, r_in)
                val -= primitive(hi_i) - primitive(lo_i)
            return -cmath.exp(-1j * phi) * val / area

        return _quad_complex(f, 0.0, _TWO_PI)
    if isinstance(spec, ComplexGaussian):
        v = z - complex(spec.mean)
        s2 = spec.scale**2
        cut = 1.0 / K
        from scipy.special import erfc

        def density_along(phi, s):
            w = v + s * cmath.exp(1j * phi)
            return math.exp(-abs(w) ** 2 / s2) / (math.pi * s2)

        def f(phi):
            near, _ = integrate.quad(
                lambda s: K * s * density_along(phi, s), 0.0, cut, epsrel=1e-9, epsabs=0
            )
            bcoef = (v.conjugate() * cmath.exp(1j * phi)).real
            tail = math.exp(-(abs(v) ** 2 - bcoef**2) / s2) * (
                spec.scale * math.sqrt(math.pi) / 2.0
            ) * erfc((cut + bcoef) / spec.scale) / (math.pi * s2)
            return -cmath.exp(-1j * phi) * (near + tail)

        return _quad_complex(f, 0.0, _TWO_PI, rtol=1e-8)
    raise TypeError(f"unsupported measure spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# 1-energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyEstimate:
    """Monte Carlo estimate of the 1-energy (mean of 1/|Z-W| over IID pairs)."""

    value: float
    std_error: float
    pairs_used: int
    infinite: bool


def energy_estimate(spec: MeasureSpec, pairs: int, seed: int) -> EnergyEstimate:
    """Estimate the 1-energy of the measure from `pairs` IID pairs.

    Divergence test: the mean of min(1/|Z-W|, T) is tracked while the
    truncation level T doubles; when it grows by more than 5% over each of
    the last four doublings (or any pair collides exactly, as happens for
    atomic measures), the infinite flag is raised. Doubling the truncation,
    rather than the sample count, keeps every summand bounded, so the
    growth signal concentrates; this separates the circle's logarithmic
    divergence from finite-energy measures cleanly at desk scale.
    """
    if pairs < 100:
        raise ConfigurationError("need pairs >= 100")
    rng = np.random.Generator(np.random.PCG64(seed))
    zs = spec.sample(pairs, rng)
    ws = spec.sample(pairs, rng)
    dist = np.abs(np.asarray(zs) - np.asarray(ws))
    exact_hit = bool((dist == 0.0).any())
    with np.errstate(divide="ignore"):
        vals = 1.0 / dist

    if exact_hit:
        return EnergyEstimate(math.inf, math.inf, pairs, True)
    mean = float(np.mean(vals))
    std_error = float(np.std(vals, ddof=1) / math.sqrt(pairs))

    # truncation levels far enough below the sample size to stay concentrated
    top = max(5, int(math.log2(pairs)) - 7)
    growths = []
    prev = None
    for k in range(3, top + 1):
        truncated = float(np.minimum(vals, float(2**k)).mean())
        if prev is not None and prev > 0:
            growths.append(truncated / prev)
        prev = truncated
    diverging = len(growths) >= 4 and all(g > 1.05 for g in growths[-4:])
    return EnergyEstimate(mean, std_error, pairs, diverging)


# ---------------------------------------------------------------------------
# One-dimensional shadows used by the KS diagnostics
# ---------------------------------------------------------------------------


def radial_cdf(spec: MeasureSpec):
    """CDF of |Z| for rotation-invariant kinds; None when not applicable."""
    if isinstance(spec, UniformCircle):
        R = spec.radius
        return lambda t: 0.0 if t < R else 1.0
    if isinstance(spec, UniformDisk):
        R = spec.radius
        return lambda t: min(1.0, max(0.0, (t / R) ** 2))
    if isinstance(spec, UniformAnnulus):
        r_in2, r_out2 = spec.r_inner**2, spec.r_outer**2
        return lambda t: min(1.0, max(0.0, (t * t - r_in2) / (r_out2 - r_in2)))
    return None


def angular_cdf(spec: MeasureSpec):
    """CDF of arg(Z) on [-pi, pi) for rotation-invariant kinds centered at 0."""
    if isinstance(spec, (UniformCircle, UniformDisk, UniformAnnulus)):
        return lambda t: min(1.0, max(0.0, (t + math.pi) / _TWO_PI))
    return None
