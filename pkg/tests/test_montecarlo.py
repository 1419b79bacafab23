import math

import pytest

from merkleprob import _kernels
from merkleprob.errors import ConfigError, DomainError
from merkleprob.montecarlo import (
    ExperimentConfig,
    cell_subseed,
    run_cell,
    run_experiment,
)
from merkleprob.theory import collision_prob_exact

from oracles import finite_table_collision_prob

needs_fast = pytest.mark.skipif(_kernels.fast_kernel() is None, reason="compiled engine unavailable")


@needs_fast
@pytest.mark.parametrize("m, k", [(4, 0), (4, 3), (8, 5), (12, 2), (16, 4), (32, 1)])
def test_engines_agree(m, k):
    a = run_cell(m, k, trials=60, repeats=3, subseed=m * 31 + k, engine="reference")
    b = run_cell(m, k, trials=60, repeats=3, subseed=m * 31 + k, engine="fast")
    assert a == b


@needs_fast
def test_engines_agree_when_stream_must_grow():
    # long strings exhaust the initial estimate of random bytes
    a = run_cell(4, 2, trials=7, repeats=2, data_length=5000, subseed=3, engine="reference")
    b = run_cell(4, 2, trials=7, repeats=2, data_length=5000, subseed=3, engine="fast")
    assert a == b


def test_cell_bookkeeping():
    c = run_cell(4, 3, trials=200, repeats=5, subseed=1)
    assert len(c.per_repeat) == 5
    assert all(0 <= f <= 1 for f in c.per_repeat)
    assert c.empirical_mean == pytest.approx(sum(c.per_repeat) / 5, rel=1e-15)
    assert c.total_hits == sum(round(f * 200) for f in c.per_repeat)
    assert c.theoretical == collision_prob_exact(4, 3)
    assert c.empirical_std > 0


def test_std_zero_when_repeats_agree():
    c = run_cell(32, 1, trials=50, repeats=4, subseed=2)
    assert c.per_repeat == (0.0,) * 4
    assert c.empirical_std == 0.0
    single = run_cell(4, 1, trials=50, repeats=1, subseed=2)
    assert single.empirical_std == 0.0


def test_cell_deterministic():
    assert run_cell(8, 4, 300, 3, subseed=9) == run_cell(8, 4, 300, 3, subseed=9)
    assert run_cell(8, 4, 300, 3, subseed=9) != run_cell(8, 4, 300, 3, subseed=10)


@pytest.mark.parametrize("kwargs, exc", [
    (dict(trials=0), DomainError),
    (dict(repeats=0), DomainError),
    (dict(data_length=7), ConfigError),
    (dict(m=10), ConfigError),
    (dict(m=36), ConfigError),
    (dict(k=-1), DomainError),
])
def test_run_cell_validation(kwargs, exc):
    args = dict(m=4, k=1, trials=10, repeats=1)
    args.update(kwargs)
    with pytest.raises(exc):
        run_cell(**args)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(m_values=(4, 6))
    with pytest.raises(ConfigError):
        ExperimentConfig(master_seed=2**64)
    with pytest.raises(ConfigError):
        ExperimentConfig(k_values=())
    assert len(ExperimentConfig().grid) == 64


def test_experiment_grid_and_seeds():
    cfg = ExperimentConfig(m_values=(8, 4), k_values=(2, 1), trials=50, repeats=2, master_seed=7)
    res = run_experiment(cfg)
    assert [(c.m, c.k) for c in res.cells] == [(4, 1), (4, 2), (8, 1), (8, 2)]
    assert all(c.subseed == cell_subseed(7, c.m, c.k) for c in res.cells)
    assert res.seed == 7


def test_experiment_independent_of_workers_and_order():
    cfg = ExperimentConfig(m_values=(4, 8), k_values=(1, 3, 5), trials=80, repeats=3, master_seed=11)
    serial = run_experiment(cfg)
    parallel = run_experiment(cfg, workers=2)
    assert serial.cells == parallel.cells
    reordered = run_experiment(ExperimentConfig(m_values=(8, 4), k_values=(5, 1, 3), trials=80,
                                                repeats=3, master_seed=11))
    assert reordered.cells == serial.cells


def test_single_cell_same_as_in_experiment():
    cfg = ExperimentConfig(m_values=(8,), k_values=(3,), trials=100, repeats=2, master_seed=5)
    res = run_experiment(cfg)
    direct = run_cell(8, 3, 100, 2, subseed=cell_subseed(5, 8, 3))
    assert res.cells[0] == direct


def _within(mean: float, p: float, n: int, sigmas: float = 4.0) -> bool:
    return abs(mean - p) <= sigmas * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("k", [1, 4, 16])
def test_m4_matches_finite_table_oracle(k):
    # at m=4 the true SHA-256 step table, not the ideal-hash formula, sets the mean
    exact = finite_table_collision_prob(4, 16)
    c = run_cell(4, k, trials=1000, repeats=20, subseed=100 + k)
    assert _within(c.empirical_mean, exact[k], 20_000)


def test_finite_table_oracle_departs_from_ideal_formula_at_m4():
    exact = finite_table_collision_prob(4, 16)
    assert exact[0] == 1 / 16
    assert exact[16] == pytest.approx(0.68651, abs=1e-5)
    assert exact[16] - collision_prob_exact(4, 16) > 0.02


def test_m8_matches_formula():
    c = run_cell(8, 8, trials=1000, repeats=20, subseed=3)
    assert _within(c.empirical_mean, collision_prob_exact(8, 8), 20_000)


def test_k0_is_plain_digest_collision():
    c = run_cell(4, 0, trials=1000, repeats=20, subseed=4)
    assert _within(c.empirical_mean, 1 / 16, 20_000)
