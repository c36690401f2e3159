"""Deterministic 64-bit seed derivation for trial scheduling.

Every trial's RNG seed is a pure function of (master_seed, n, trial_index),
so aggregate statistics cannot depend on worker scheduling or thread count.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

# SplitMix64 increment and mixing constants (Steele, Lea, Flood 2014).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Distinct odd multipliers decorrelate the n and trial_index lanes.
_N_LANE = 0xA24BAED4963EE407
_TRIAL_LANE = 0x9FB21C651E98DF25


def splitmix64(x: int) -> int:
    """One SplitMix64 output step for the state ``x`` (mod 2^64)."""
    x = (x + _GAMMA) & _MASK64
    x ^= x >> 30
    x = (x * _MIX1) & _MASK64
    x ^= x >> 27
    x = (x * _MIX2) & _MASK64
    x ^= x >> 31
    return x


def split_seed(master_seed: int, n: int, trial_index: int) -> int:
    """Derive the seed for trial ``trial_index`` of the size-``n`` batch."""
    h = splitmix64((master_seed ^ (n * _N_LANE)) & _MASK64)
    h = splitmix64((h ^ (trial_index * _TRIAL_LANE)) & _MASK64)
    return h
