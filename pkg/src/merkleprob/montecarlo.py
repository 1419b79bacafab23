"""Empirical root-collision frequencies on truncated SHA-256.

Every trial draws reference data, a fresh path of ``k`` siblings (each the
truncated hash of a random string) and one more random string, then checks
whether both strings fold to the same chain root. ``trials`` such trials
make one repeat; a cell is ``repeats`` repeats for one ``(m, k)``.

Each cell is seeded from ``(master_seed, m, k)`` alone, so results do not
depend on cell order or on the number of worker processes.
"""
from __future__ import annotations

import concurrent.futures
import datetime as _dt
import enum
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError
from .rng import BLOCK_SIZE, derive_subseed, draw_block, generate_random_data, make_rng
from .theory import collision_prob_exact

__all__ = [
    "CellResult",
    "Engine",
    "ExperimentConfig",
    "ExperimentResult",
    "cell_subseed",
    "generate_random_data",
    "run_cell",
    "run_experiment",
]

MAX_EXPERIMENT_BITS = 32
SEED_LIMIT = 2**64


class Engine(str, enum.Enum):
    AUTO = "auto"
    FAST = "fast"
    REFERENCE = "reference"


@dataclass(frozen=True)
class ExperimentConfig:
    m_values: tuple[int, ...] = (4, 8, 12, 16)
    k_values: tuple[int, ...] = tuple(range(1, 17))
    trials: int = 1000
    repeats: int = 100
    data_length: int = 32
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "m_values", tuple(self.m_values))
        object.__setattr__(self, "k_values", tuple(self.k_values))
        if not self.m_values or not self.k_values:
            raise ConfigError("m_values and k_values must be non-empty")
        for m in self.m_values:
            _check_m(m)
        for k in self.k_values:
            if not isinstance(k, int) or k < 0:
                raise ConfigError(f"path length must be a non-negative integer, got {k!r}")
        _check_run_sizes(self.trials, self.repeats, self.data_length)
        if not 0 <= self.master_seed < SEED_LIMIT:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    @property
    def grid(self) -> list[tuple[int, int]]:
        return [(m, k) for m in sorted(set(self.m_values)) for k in sorted(set(self.k_values))]


@dataclass(frozen=True)
class CellResult:
    m: int
    k: int
    trials: int
    repeats: int
    per_repeat: tuple[float, ...]
    total_hits: int
    empirical_mean: float
    empirical_std: float
    theoretical: float
    subseed: int

    @property
    def standard_error(self) -> float:
        """Binomial standard error of the pooled estimate under the theoretical value."""
        p = self.theoretical
        return (p * (1.0 - p) / (self.trials * self.repeats)) ** 0.5


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    cells: tuple[CellResult, ...]
    started: str = ""
    finished: str = ""
    engine: str = ""
    seed: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "seed", self.config.master_seed)

    def cell(self, m: int, k: int) -> CellResult:
        for c in self.cells:
            if c.m == m and c.k == k:
                return c
        raise KeyError((m, k))


def _check_m(m: int) -> None:
    if not isinstance(m, int) or isinstance(m, bool):
        raise ConfigError(f"m must be an integer, got {m!r}")
    if m < 4 or m > MAX_EXPERIMENT_BITS or m % 4:
        raise ConfigError(f"experiment m must be a multiple of 4 in [4, {MAX_EXPERIMENT_BITS}], got {m}")


def _check_run_sizes(trials: int, repeats: int, data_length: int) -> None:
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if repeats < 1:
        raise DomainError(f"repeats must be >= 1, got {repeats}")
    if data_length < 8:
        raise ConfigError(f"data_length must be >= 8, got {data_length}")


def cell_subseed(master_seed: int, m: int, k: int) -> int:
    return derive_subseed(master_seed, m, k)


def _resolve_kernel(engine: Engine | str):
    engine = Engine(engine)
    if engine is Engine.REFERENCE:
        return _kernels.reference_kernel, Engine.REFERENCE
    fast = _kernels.fast_kernel()
    if fast is None:
        if engine is Engine.FAST:
            raise ConfigError("compiled engine unavailable (needs numba and libcrypto)")
        return _kernels.reference_kernel, Engine.REFERENCE
    return fast, Engine.FAST


def _count_hits(kernel, m: int, k: int, trials: int, repeats: int, length: int, subseed: int) -> np.ndarray:
    rng = make_rng(subseed)
    # Expected use is trials*repeats*(k+2)*length characters at 248/256
    # acceptance; a short stream is extended and the cell rerun.
    target = int(trials * repeats * (k + 2) * length * 1.06) + BLOCK_SIZE
    blocks: list[np.ndarray] = []
    while True:
        while len(blocks) * BLOCK_SIZE < target:
            blocks.append(draw_block(rng))
        raw = np.concatenate(blocks)
        hits = np.zeros(repeats, dtype=np.int64)
        if kernel(raw, m, k, trials, repeats, length, hits) >= 0:
            return hits
        target = len(raw) + len(raw) // 4 + BLOCK_SIZE


def run_cell(m: int, k: int, trials: int = 1000, repeats: int = 100, data_length: int = 32,
             subseed: int = 0, engine: Engine | str = Engine.AUTO) -> CellResult:
    """Estimate the root-collision probability for one ``(m, k)`` pair."""
    _check_m(m)
    if not isinstance(k, int) or k < 0:
        raise DomainError(f"k must be a non-negative integer, got {k!r}")
    _check_run_sizes(trials, repeats, data_length)
    kernel, _ = _resolve_kernel(engine)
    hits = _count_hits(kernel, m, k, trials, repeats, data_length, subseed)
    per_repeat = tuple(int(h) / trials for h in hits)
    std = statistics.stdev(per_repeat) if repeats > 1 else 0.0
    return CellResult(
        m=m,
        k=k,
        trials=trials,
        repeats=repeats,
        per_repeat=per_repeat,
        total_hits=int(hits.sum()),
        empirical_mean=statistics.fmean(per_repeat),
        empirical_std=std,
        theoretical=collision_prob_exact(m, k),
        subseed=subseed,
    )


def _run_one(args: tuple) -> CellResult:
    m, k, trials, repeats, length, subseed, engine = args
    return run_cell(m, k, trials, repeats, length, subseed, engine)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_experiment(config: ExperimentConfig, workers: Optional[int] = 1,
                   engine: Engine | str = Engine.AUTO) -> ExperimentResult:
    """Run every ``(m, k)`` cell of ``config``; cells come back sorted by ``(m, k)``.

    ``workers > 1`` spreads cells over processes; results are identical
    for any worker count.
    """
    _, used = _resolve_kernel(engine)
    jobs = [
        (m, k, config.trials, config.repeats, config.data_length,
         cell_subseed(config.master_seed, m, k), used)
        for m, k in config.grid
    ]
    started = _now()
    if workers is not None and workers <= 1:
        cells: Sequence[CellResult] = [_run_one(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_one, jobs))
    return ExperimentResult(config, tuple(cells), started, _now(), used.value)
