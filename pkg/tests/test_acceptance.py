'''
Long runs against known answers.  Select with `pytest -m slow`.
'''
import math

import numpy as np
import pytest

from libdefer.density import Canoe, Cigar, MoG4, StudentT
from libdefer.density.builtin import student_t_means
from libdefer.engine import Engine, EngineConfig
from libdefer.partition import DomainSpec
from tools.bench import grid_estimate

pytestmark = pytest.mark.slow


def _final(density, budget, seed=0):
    result = Engine(density, DomainSpec.unit(density.dim), EngineConfig(budget, seed=seed, record_timing=False)).run()
    return result.timeline[-1]


def test_cigar_against_grid():
    truth = grid_estimate(Cigar(2), DomainSpec.unit(2), 4096)
    final = _final(Cigar(2), 100000)
    assert abs(final.log_z - truth.log_z) <= 0.02
    assert abs(final.entropy - truth.entropy) <= 0.05

def test_mog4_evidence():
    assert abs(_final(MoG4(), 300000).log_z - math.log(3.5)) <= 0.1

def test_student_t_error_shrinks_with_budget():
    errors = {1000: [], 100000: []}
    for seed in range(5):
        density = StudentT(2, student_t_means(2, seed))
        for budget in errors:
            errors[budget].append(abs(_final(density, budget, seed).log_z))
    assert np.median(errors[100000]) < np.median(errors[1000])

def test_student_t_unique_keys_plateau():
    density = StudentT(10, student_t_means(10, 0))
    timeline = Engine(density, DomainSpec.unit(10), EngineConfig(100000, record_timing=False)).run().timeline
    at_10k = max(c.unique_keys for c in timeline if c.evals <= 10000)
    assert timeline[-1].unique_keys <= 2 * at_10k

def test_canoe_error_shrinks_with_budget():
    truth = grid_estimate(Canoe(2), DomainSpec.unit(2), 4096).log_z
    errors = {1000: [], 100000: []}
    for seed in range(5):
        for budget in errors:
            errors[budget].append(abs(_final(Canoe(2), budget, seed).log_z - truth))
    assert np.median(errors[100000]) < np.median(errors[1000])

def test_decision_time_per_evaluation_stays_flat():
    density = StudentT(10, student_t_means(10, 0))
    config = EngineConfig(300000, checkpoints=[10000, 20000, 200000])
    timeline = Engine(density, DomainSpec.unit(10), config).run().timeline

    def rate(start, stop):
        a = min((c for c in timeline if c.evals >= start), key=lambda c: c.evals)
        b = min((c for c in timeline if c.evals >= stop), key=lambda c: c.evals)
        return (b.decision_seconds - a.decision_seconds) / (b.evals - a.evals)

    assert rate(200000, 300000) <= 3 * rate(10000, 20000)
