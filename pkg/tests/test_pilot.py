import numpy as np
import pytest

from gasvol.errors import ConfigError, EstimationError, PilotFitError
from gasvol.kernels import DesignPairs, design_pairs
from gasvol.pilot import (PilotNetwork, estimate_m4eps, fit_pilot, load_pilot,
                          pilot_eval, pilot_second_derivative, save_pilot)
from gasvol.simulate import Arch1, SimSpec, simulate


def make_pairs(rng, n=400):
    x = rng.normal(0.0, 1.0, size=n - 1)
    y = 0.1 + 0.5 * x ** 2 + 0.05 * rng.normal(size=n - 1) ** 2
    return DesignPairs(regressor=x, response=y, series_length=n)


@pytest.fixture(scope="module")
def arch_fit():
    series = simulate(SimSpec(model=Arch1(0.1, 0.5), n=2000, seed=12))
    pairs = design_pairs(series)
    net, report = fit_pilot(pairs, d_candidates=(1, 2, 3), restarts=2, seed=5)
    return pairs, net, report


class TestEvaluation:
    def test_zero_output_weights_give_bias(self):
        net = PilotNetwork(bias=2.5, out_weights=np.zeros(3),
                           slopes=np.ones(3), offsets=np.zeros(3))
        assert pilot_eval(net, 0.7) == 2.5
        assert pilot_second_derivative(net, 0.7) == 0.0

    def test_single_unit_at_origin(self):
        net = PilotNetwork(bias=0.3, out_weights=np.array([2.0]),
                           slopes=np.array([1.0]), offsets=np.array([0.0]))
        # sigmoid(0) = 1/2, so the unit contributes exactly 1
        assert pilot_eval(net, 0.0) == pytest.approx(0.3 + 1.0, abs=1e-14)
        # the sigmoid's second derivative vanishes at its center
        assert pilot_second_derivative(net, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_saturation_limit(self):
        net = PilotNetwork(bias=0.5, out_weights=np.array([1.5, -2.0, 3.0]),
                           slopes=np.array([2.0, -1.0, 0.5]),
                           offsets=np.array([0.3, -0.2, 0.0]))
        limit = 0.5 + 1.5 + 3.0  # units with positive slope saturate at 1
        assert pilot_eval(net, 1e9) == pytest.approx(limit, abs=1e-9)

    def test_second_derivative_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        net = PilotNetwork(bias=0.2,
                           out_weights=rng.uniform(-2, 2, 4),
                           slopes=rng.uniform(-3, 3, 4),
                           offsets=rng.uniform(-1, 1, 4))
        step = 1e-4
        for x in rng.uniform(-3, 3, 100):
            analytic = pilot_second_derivative(net, x)
            fd = (pilot_eval(net, x + step) - 2 * pilot_eval(net, x)
                  + pilot_eval(net, x - step)) / step ** 2
            assert abs(analytic - fd) <= 1e-5 * max(1.0, abs(analytic))


class TestFitting:
    def test_constant_response(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=199)
        pairs = DesignPairs(regressor=x, response=np.full(199, 5.0),
                            series_length=200)
        net, report = fit_pilot(pairs, d_candidates=(1, 2), restarts=2, seed=0)
        grid = np.linspace(x.min(), x.max(), 101)
        assert np.max(np.abs(pilot_eval(net, grid) - 5.0)) <= 0.01

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(13)
        pairs = make_pairs(rng)
        net1, rep1 = fit_pilot(pairs, d_candidates=(1, 2), restarts=2, seed=42)
        net2, rep2 = fit_pilot(pairs, d_candidates=(1, 2), restarts=2, seed=42)
        assert net1.bias == net2.bias
        assert np.array_equal(net1.out_weights, net2.out_weights)
        assert np.array_equal(net1.slopes, net2.slopes)
        assert np.array_equal(net1.offsets, net2.offsets)
        assert rep1.rss == rep2.rss

    def test_bic_choice_attains_minimum(self):
        rng = np.random.default_rng(17)
        pairs = make_pairs(rng)
        net, report = fit_pilot(pairs, d_candidates=(1, 2, 3), restarts=1, seed=3)
        assert report.chosen_d in report.bic_by_d
        assert report.bic_by_d[report.chosen_d] == min(report.bic_by_d.values())

    def test_more_restarts_never_worse_for_fixed_size(self):
        rng = np.random.default_rng(19)
        pairs = make_pairs(rng)
        rss = [fit_pilot(pairs, d_candidates=(2,), restarts=r, seed=9)[1].rss
               for r in (1, 2, 4)]
        assert rss[1] <= rss[0] + 1e-12
        assert rss[2] <= rss[1] + 1e-12

    def test_weight_budget_enforced(self):
        rng = np.random.default_rng(23)
        pairs = make_pairs(rng)
        net, report = fit_pilot(pairs, d_candidates=(3,), restarts=1, seed=1,
                                weight_budget=0.5)
        assert np.sum(np.abs(net.out_weights)) <= 0.5 + 1e-12

    def test_nonconvergence_carries_best_effort_network(self):
        rng = np.random.default_rng(29)
        pairs = make_pairs(rng)
        with pytest.raises(PilotFitError) as excinfo:
            fit_pilot(pairs, d_candidates=(2,), restarts=1, seed=0, max_iter=1)
        assert isinstance(excinfo.value.network, PilotNetwork)
        assert excinfo.value.report.converged is False

    def test_invalid_configs(self):
        rng = np.random.default_rng(31)
        pairs = make_pairs(rng)
        with pytest.raises(ConfigError):
            fit_pilot(pairs, d_candidates=(), seed=0)
        with pytest.raises(ConfigError):
            fit_pilot(pairs, d_candidates=(1,), restarts=0, seed=0)

    def test_recovers_quadratic_variance_curve(self, arch_fit):
        pairs, net, report = arch_fit
        sd = float(np.std(pairs.regressor))
        grid = np.linspace(-sd, sd, 41)
        err = np.abs(pilot_eval(net, grid) - (0.1 + 0.5 * grid ** 2))
        assert float(err.max()) <= 0.1


class TestFourthMoment:
    def test_ratio_of_equal_sums(self):
        pairs = DesignPairs(regressor=np.linspace(-1, 1, 50),
                            response=np.ones(50), series_length=51)
        net = PilotNetwork(bias=1.0, out_weights=np.zeros(1),
                           slopes=np.ones(1), offsets=np.zeros(1))
        assert estimate_m4eps(pairs, net) == pytest.approx(1.0, abs=1e-14)

    def test_zero_pilot_rejected(self):
        pairs = DesignPairs(regressor=np.linspace(-1, 1, 50),
                            response=np.ones(50), series_length=51)
        net = PilotNetwork(bias=0.0, out_weights=np.zeros(1),
                           slopes=np.ones(1), offsets=np.zeros(1))
        with pytest.raises(EstimationError):
            estimate_m4eps(pairs, net)

    def test_fitted_value_at_least_one(self, arch_fit):
        pairs, net, report = arch_fit
        assert report.m4eps >= 1.0 - 1e-9
        assert report.m4eps == pytest.approx(estimate_m4eps(pairs, net), rel=1e-12)


class TestPersistence:
    def test_round_trip(self, tmp_path, arch_fit):
        _, net, _ = arch_fit
        path = tmp_path / "pilot.txt"
        save_pilot(net, path)
        loaded = load_pilot(path)
        assert loaded.bias == net.bias
        assert np.array_equal(loaded.out_weights, net.out_weights)
        assert np.array_equal(loaded.slopes, net.slopes)
        assert np.array_equal(loaded.offsets, net.offsets)
        assert loaded.x_center == net.x_center
        assert loaded.x_scale == net.x_scale

    def test_missing_field(self, tmp_path):
        path = tmp_path / "broken.txt"
        path.write_text("hidden_count=2\nbias=0.1\n")
        with pytest.raises(ConfigError):
            load_pilot(path)
