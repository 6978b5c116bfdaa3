import math

import numpy as np
import pytest
from sklearn.base import clone

from fbmac.exceptions import DomainError
from fbmac.maxcorr import (ConditionalMaxCorrelation, GaussianJoint, conditional_correlation,
                           demo_triple, greedy_gap_demo, linear_history,
                           maximal_correlation_estimate)


def test_demo_triple_partial_correlation():
    # hand Schur complement: I - (1/3) 11' on the V block
    assert conditional_correlation(demo_triple()) == pytest.approx(-0.5, abs=1e-14)


def test_independent_and_empty_y():
    assert conditional_correlation(GaussianJoint(np.eye(3))) == 0.0
    K = np.array([[2.0, 0.6], [0.6, 0.5]])
    assert conditional_correlation(GaussianJoint(K)) == pytest.approx(0.6 / math.sqrt(1.0))


def test_singular_y_uses_pseudo_inverse():
    # Y block duplicated: singular K_Y, same answer as a single copy
    C = np.array([[1, 0, 0], [0, 1, 0], [1, 1, 1], [1, 1, 1]], dtype=float)
    assert conditional_correlation(GaussianJoint(C @ C.T)) == pytest.approx(-0.5)


def test_zero_conditional_variance():
    C = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])  # Y = V1
    with pytest.raises(DomainError):
        conditional_correlation(GaussianJoint(C @ C.T))


def test_non_psd_rejected():
    with pytest.raises(DomainError):
        GaussianJoint(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_independent_estimate_near_zero():
    samples = 20_000
    rep = maximal_correlation_estimate(GaussianJoint(np.eye(3)), 2, samples, seed=4)
    assert abs(rep.best_nonlinear_estimate) < 3 / math.sqrt(samples) * 3
    assert abs(rep.linear_estimate) < 3 / math.sqrt(samples)


def test_orthogonality_to_y_features():
    X = demo_triple().sample(5000, seed=0)
    est = ConditionalMaxCorrelation(degree=3, cv=1).fit(X)
    v1, v2, ycols, ybasis = est._split(X)
    for side, v in ((est.side1_, v1), (est.side2_, v2)):
        U = side.transform(v, ybasis, ycols)
        G = math.sqrt(len(X)) * U  # unit mean square, like g
        assert np.max(np.abs(ybasis.T @ G)) / len(X) <= 1e-10


def test_transform_columns_are_normalised():
    X = demo_triple().sample(4000, seed=1)
    G = ConditionalMaxCorrelation(degree=2, cv=1).fit(X).transform(X)
    assert np.allclose(np.mean(G ** 2, axis=0), 1.0, atol=1e-8)


def test_degree_monotone_in_sample():
    X = demo_triple().sample(20_000, seed=2)
    vals = [ConditionalMaxCorrelation(degree=d, cv=1).fit(X).in_sample_correlation_
            for d in (1, 2, 3)]
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


def test_randomised_gaussian_family():
    """Sampled supremum tracks the partial correlation on random covariances."""
    rng = np.random.default_rng(7)
    samples = 20_000
    for seed in range(5):
        M = rng.standard_normal((4, 4))
        joint = GaussianJoint(M @ M.T + 0.1 * np.eye(4))
        rep = maximal_correlation_estimate(joint, 2, samples, seed=seed)
        bound = 3 * (rep.standard_error + 0.02)
        assert abs(rep.best_nonlinear_estimate - abs(rep.partial_correlation)) <= bound


def test_estimator_api():
    est = ConditionalMaxCorrelation(degree=2, cv=3)
    assert est.get_params()["degree"] == 2
    twin = clone(est).set_params(degree=1)
    assert twin.degree == 1 and est.degree == 2
    X = demo_triple().sample(3000, seed=3)
    twin.fit(X)
    assert len(twin.fold_correlations_) == 3
    assert twin.score(X) == pytest.approx(twin.in_sample_correlation_, abs=1e-8)
    with pytest.raises(ValueError):
        ConditionalMaxCorrelation(degree=0).fit(X)
    with pytest.raises(ValueError):
        twin.transform(X[:, :2])


def test_linear_history_shapes_and_first_step():
    C = linear_history((1.0, 2.0), 2)
    assert C.shape == (5, 5)
    # Y_1 = sqrt(P1) V1 + sqrt(P2) V2 + Z_1
    assert np.allclose(C[2], [1.0, math.sqrt(2.0), 1.0, 0.0, 0.0])


def test_greedy_history_zero():
    rep = greedy_gap_demo((1.0, 2.0), 0, samples=20_000)
    assert rep.partial_correlation == 0.0
    assert rep.linear_objective == pytest.approx(0.5 * math.log(4.0))


def test_greedy_history_one_matches_schur_oracle():
    """After one symmetric step Y = V1 + V2 + Z the next-step correlation is
    the demo triple's: -1/2, sign-corrected to +1/2 in the objective."""
    rep = greedy_gap_demo((1.0, 1.0), 1, samples=20_000)
    assert rep.partial_correlation == pytest.approx(-0.5, abs=1e-12)
    assert rep.linear_objective == pytest.approx(0.5 * math.log(1 + 2 + 2 * 0.5))


@pytest.mark.parametrize("h", [0, 1, 2])
def test_mi_surrogate_below_objective(h):
    rep = greedy_gap_demo((1.0, 1.0), h, seed=h, samples=50_000)
    assert rep.mi_surrogate <= rep.linear_objective + 0.01


def test_greedy_rejects_bad_input():
    with pytest.raises(DomainError):
        greedy_gap_demo((-1.0, 1.0), 1)
    with pytest.raises(DomainError):
        greedy_gap_demo((1.0, 1.0), -1)
