"""Birthday collision search on truncated hashes."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .digest import Digest, HashConfig, truncated_hash
from .errors import DomainError
from .rng import AlnumStream, derive_subseed, make_rng

MIN_BITS = 4
MAX_BITS = 40
DATA_LENGTH = 32
_BATCH = 256

# sqrt(2 ln 2): median sample count is about this times 2**(m/2).
BIRTHDAY_MEDIAN_FACTOR = math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class CollisionRecord:
    input_a: bytes
    input_b: bytes
    digest: Digest
    trials: int


@dataclass(frozen=True)
class AttackStats:
    m: int
    runs: int
    trials_per_run: tuple[int, ...]
    median_trials: float
    mean_trials: float
    predicted_median: float
    seed: int

    def fraction_within(self, s: int) -> float:
        """Share of runs that found their collision within ``s`` hash evaluations."""
        return sum(t <= s for t in self.trials_per_run) / self.runs


def _check_bits(m: int) -> None:
    if isinstance(m, bool) or not isinstance(m, int):
        raise DomainError(f"m must be an integer, got {m!r}")
    if not MIN_BITS <= m <= MAX_BITS or m % 4:
        raise DomainError(f"m must be a multiple of 4 in [{MIN_BITS}, {MAX_BITS}], got {m}")


def find_collision(m: int, subseed: int, data_length: int = DATA_LENGTH) -> CollisionRecord:
    """Draw random strings until two different ones share an ``m``-bit digest.

    ``trials`` counts every hash evaluated, the colliding one included. A
    string identical to one already seen is hashed and counted but is not a
    collision.
    """
    _check_bits(m)
    config = HashConfig(m=m)
    stream = AlnumStream(make_rng(subseed))
    seen: dict[int, bytes] = {}
    trials = 0
    while True:
        for row in stream.take_many(_BATCH, data_length):
            data = row.tobytes()
            trials += 1
            d = truncated_hash(data, config)
            prev = seen.get(d.bits)
            if prev is None:
                seen[d.bits] = data
            elif prev != data:
                return CollisionRecord(prev, data, d, trials)


def attack_stats(m: int, runs: int = 400, master_seed: int = 0) -> AttackStats:
    _check_bits(m)
    if isinstance(runs, bool) or not isinstance(runs, int) or runs < 1:
        raise DomainError(f"runs must be a positive integer, got {runs!r}")
    trials = tuple(
        find_collision(m, derive_subseed(master_seed, "attack", m, i)).trials for i in range(runs)
    )
    return AttackStats(
        m=m,
        runs=runs,
        trials_per_run=trials,
        median_trials=float(statistics.median(trials)),
        mean_trials=statistics.fmean(trials),
        predicted_median=BIRTHDAY_MEDIAN_FACTOR * 2.0 ** (m / 2),
        seed=master_seed,
    )
