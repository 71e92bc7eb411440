"""Counter-based per-trial random streams.

Trial t, stream s draws from numpy's Philox4x64-10 keyed by the seed with
counter words (0, 0, s, t). Because Philox is counter based, the same
draws can be produced for many trials at once; ``philox_block`` does that
with array arithmetic and is checked bit for bit against numpy's
generator.
"""
from __future__ import annotations

import numpy as np

TRAJECTORY_STREAM = 0
POST_STREAM = 1

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a_lo, a_hi = a & _LO32, a >> _S32
    b_lo, b_hi = b & _LO32, b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


def philox_block(seed: int, stream: int, trials: np.ndarray, block: int) -> np.ndarray:
    """Raw 64-bit outputs of block ``block`` (1-based) for each trial, shape (n, 4)."""
    trials = np.asarray(trials, dtype=np.uint64)
    n = trials.size
    c0 = np.full(n, block, dtype=np.uint64)
    c1 = np.zeros(n, dtype=np.uint64)
    c2 = np.full(n, stream, dtype=np.uint64)
    c3 = trials.copy()
    k0 = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    k1 = np.uint64(seed >> 64)
    with np.errstate(over="ignore"):
        for r in range(10):
            if r:
                k0 = k0 + _W0
                k1 = k1 + _W1
            hi0, lo0 = _mulhilo(_M0, c0)
            hi1, lo1 = _mulhilo(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return np.stack([c0, c1, c2, c3], axis=-1)


def to_unit(raw: np.ndarray) -> np.ndarray:
    """numpy's double conversion: top 53 bits scaled to [0, 1)."""
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


class TrialUniforms:
    """Step-by-step uniforms for a set of trials, generated a block at a time.

    Calls must come in step order with an active set that only shrinks.
    """

    def __init__(self, seed: int, trials: np.ndarray, stream: int = TRAJECTORY_STREAM):
        self.seed = seed
        self.trials = np.asarray(trials, dtype=np.uint64)
        self.stream = stream
        self._buf = np.zeros((self.trials.size, 4))

    def at(self, step: int, idx: np.ndarray) -> np.ndarray:
        """Uniform number ``step`` (0-based) for the trials at positions idx."""
        block, word = divmod(step, 4)
        if word == 0:
            self._buf[idx] = to_unit(philox_block(self.seed, self.stream, self.trials[idx], block + 1))
        return self._buf[idx, word]


def first_uniform(seed: int, trials: np.ndarray, stream: int) -> np.ndarray:
    return to_unit(philox_block(seed, stream, np.asarray(trials), 1))[:, 0]


def generator(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, stream, trial]))
