"""Thin helpers around gmpy2 multiprecision complex arithmetic.

All high-precision work in the package goes through explicit gmpy2 contexts
(ctx.add, ctx.mul, ...) so concurrent callers at different precisions never
interfere through global state.
"""

from __future__ import annotations

import math

import gmpy2

__all__ = ["context", "to_mpc", "to_complex", "conj", "kahan_sum", "log2_abs"]


def context(precision_bits: int) -> "gmpy2.context":
    """A real/complex context with the given mantissa precision."""
    return gmpy2.context(precision=precision_bits, allow_complex=True)


def to_mpc(z) -> "gmpy2.mpc":
    """Lift a Python/numpy complex to mpc. Doubles convert exactly."""
    if isinstance(z, gmpy2.mpc):
        return z
    z = complex(z)
    return gmpy2.mpc(z.real, z.imag)


def to_complex(z) -> complex:
    """Round any gmpy2 number (or complex) to a Python complex."""
    if isinstance(z, gmpy2.mpc):
        return complex(float(z.real), float(z.imag))
    if isinstance(z, (gmpy2.mpfr, gmpy2.mpz, gmpy2.mpq)):
        return complex(float(z))
    return complex(z)


def conj(z: "gmpy2.mpc", ctx) -> "gmpy2.mpc":
    """Complex conjugate at the context's precision.

    The bare mpc constructor and .conjugate() both round to the *global*
    context, so conjugation must rebuild the value at ctx precision.
    """
    return gmpy2.mpc(z.real, ctx.minus(z.imag), ctx.precision)


def kahan_sum(terms, ctx) -> "gmpy2.mpc":
    """Kahan-compensated sum of an iterable of mpc terms under ctx."""
    total = gmpy2.mpc(0)
    carry = gmpy2.mpc(0)
    for t in terms:
        y = ctx.sub(t, carry)
        s = ctx.add(total, y)
        carry = ctx.sub(ctx.sub(s, total), y)
        total = s
    return total


def log2_abs(z) -> float:
    """log2 |z| as a float; -inf at zero. Safe for huge/tiny exponents."""
    a = abs(z) if isinstance(z, (gmpy2.mpc, gmpy2.mpfr)) else abs(to_mpc(z))
    if a == 0:
        return float("-inf")
    if isinstance(a, gmpy2.mpfr):
        return float(gmpy2.log2(a))
    return math.log2(a)
