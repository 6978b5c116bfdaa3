import numpy as np
import pytest

from fbmac import simulation
from fbmac.exceptions import ParameterError
from fbmac.kramer import KramerParams
from fbmac.simulation import empirical_power_trace, run_campaign, trial_rng, wilson_interval

PARAMS = KramerParams(2, 1.25, 0.25, 16)


def test_reproducible_and_batch_independent():
    a = run_campaign(PARAMS, 300, seed=11)
    b = run_campaign(PARAMS, 300, seed=11)
    assert a.as_dict() == b.as_dict()
    # a prefix of the campaign sees exactly the same per-trial streams
    full = empirical_power_trace(PARAMS, 300, seed=11)
    chunked = simulation._simulate(PARAMS, 300, 11, chunk=7)[2]
    assert np.allclose(full, chunked, atol=1e-14)


def test_different_seeds_differ():
    a = run_campaign(PARAMS, 200, seed=1).empirical_powers
    b = run_campaign(PARAMS, 200, seed=2).empirical_powers
    assert a != b


def test_trial_rng_streams_are_fixed():
    x = trial_rng(5, 3).standard_normal(4)
    assert np.array_equal(x, trial_rng(5, 3).standard_normal(4))
    assert not np.array_equal(x, trial_rng(5, 4).standard_normal(4))


def test_single_trial():
    rep = run_campaign(PARAMS, 1, seed=0)
    assert rep.trials == 1 and rep.message_errors in (0, 1)
    lo, hi = rep.wilson_interval
    assert 0.0 <= lo <= hi <= 1.0


@pytest.mark.parametrize("trials,seed", [(0, 0), (-3, 0), (10, -1), (10, 1 << 64)])
def test_bad_trials_or_seed(trials, seed):
    with pytest.raises(ParameterError):
        run_campaign(PARAMS, trials, seed)


def test_noiseless_forced_message_decodes_exactly():
    forced = [3, PARAMS.grid.size - 1]
    rep = run_campaign(PARAMS, 20, seed=0, noise=False, forced_messages=forced)
    assert rep.message_errors == 0
    assert rep.per_sender_error_counts == [0, 0]


def test_rate_above_log_beta_fails():
    """log2(1.25) ~ 0.32 bits; at 0.5 the code cannot keep up with its grid."""
    rep = run_campaign(KramerParams(2, 1.25, 0.5, 32), 500, seed=3)
    assert rep.error_rate > 0.5


def test_power_trace_converges_to_steady_state():
    rep = run_campaign(KramerParams(2, 1.25, 0.25, 64), 4000, seed=9)
    late = rep.power_trace[-16:].mean(axis=0)
    assert np.allclose(late, rep.k_star_diag, rtol=0.05)
    assert rep.power_trace.shape == (64, 2)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.07
    lo, hi = wilson_interval(100, 100)
    assert hi == 1.0
    lo, hi = wilson_interval(50, 100, confidence=0.95)
    # textbook value for 50/100 at 95%: (0.4038, 0.5962)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    with pytest.raises(ParameterError):
        wilson_interval(0, 0)


def test_budget_blocklength():
    trace = np.array([[3.0], [0.5], [0.5], [0.5], [0.5]])
    # running means 3, 1.75, 1.33, 1.125, 1.0
    assert simulation.budget_blocklength(trace, 1.2) == 4
    assert simulation.budget_blocklength(trace, 5.0) == 1
    assert simulation.budget_blocklength(trace, 0.9) is None
    rep = run_campaign(PARAMS, 50, seed=0)
    assert rep.budget_blocklength == simulation.budget_blocklength(rep.power_trace, 1.0)
