"""Counter-based uniform random streams.

Every random quantity in a simulation is addressed by the key
(master_seed, trial, unit, purpose) and produced by hashing that key with the
splitmix64 finalizer.  There is no sequential state: trial t of a million-trial
run reads the same uniforms whether it is computed alone, in a batch, or on a
different worker, which is what makes reports reproducible under any chunking.

Units are small integers local to the engine (edge positions; online-vertex
positions are offset by the edge count).  Purposes separate the independent
coins an engine needs for one unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ARRIVAL",
    "ACTIVE",
    "COIN",
    "PRICE",
    "hash_uniform",
    "TrialRNG",
]

# Purpose tags.  ARRIVAL: arrival time in [0,1).  ACTIVE: the value/acceptance
# coin.  COIN: the attenuation (or probe-intent) coin.  PRICE: the price draw.
ARRIVAL = 0
ACTIVE = 1
COIN = 2
PRICE = 3

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0**-53


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer (Stafford mix13)."""
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _key(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def hash_uniform(seed: int, trial, unit, purpose: int) -> np.ndarray:
    """Uniforms in [0, 1) for the keys (seed, trial, unit, purpose).

    `trial` and `unit` may be arrays; they broadcast, so
    ``hash_uniform(s, trials[:, None], units[None, :], p)`` fills a matrix.
    Returns a float64 array of the broadcast shape (0-d for scalar inputs).
    """
    # the hash wants plain mod-2^64 wraparound; stop numpy flagging it
    with np.errstate(over="ignore"):
        h = _mix((_key(seed) + _GAMMA) ^ (_key(trial) * _MIX1))
        h = _mix(h ^ (_key(unit) * _MIX2))
        h = _mix(h ^ (_key(purpose) * _GAMMA))
        return (h >> _S11).astype(np.float64) * _INV53


@dataclass(frozen=True)
class TrialRNG:
    """Handle addressing one trial of one master seed."""

    seed: int
    trial: int

    def uniform(self, unit: int, purpose: int) -> float:
        return float(hash_uniform(self.seed, self.trial, unit, purpose))

    def uniform_units(self, n_units: int, purpose: int, offset: int = 0) -> np.ndarray:
        units = np.arange(offset, offset + n_units, dtype=np.uint64)
        return hash_uniform(self.seed, self.trial, units, purpose)
