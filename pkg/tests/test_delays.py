import numpy as np
import pytest
from scipy.integrate import quad

from stragglersim import (
    Constant,
    DelayModel,
    Discrete,
    TruncatedGaussian,
    sample_trace,
    scenario_preset,
    tg_cdf,
    tg_pdf,
    tg_sample,
)

SCEN1_COMP = TruncatedGaussian(mu=1e-4, sigma=1e-4, a=3e-5, b=3e-5)


class TestTruncatedGaussian:
    def test_zero_off_support(self):
        dist = TruncatedGaussian(mu=1.0, sigma=0.5, a=0.5, b=0.7)
        assert tg_pdf(dist, 0.4999) == 0.0
        assert tg_pdf(dist, 1.7001) == 0.0

    def test_symmetric_pdf(self):
        dist = TruncatedGaussian(mu=2.0, sigma=1.0, a=1.0, b=1.0)
        for x in (0.1, 0.5, 0.99):
            assert tg_pdf(dist, 2.0 - x) == pytest.approx(tg_pdf(dist, 2.0 + x), rel=1e-12)

    def test_pdf_integrates_to_one(self):
        # independent oracle: adaptive quadrature over the support
        dist = SCEN1_COMP
        total, _ = quad(lambda t: tg_pdf(dist, t), dist.lower, dist.upper, epsabs=1e-12)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_cdf_endpoints_and_center(self):
        dist = TruncatedGaussian(mu=2.0, sigma=1.0, a=1.0, b=1.0)
        assert tg_cdf(dist, dist.lower) == 0.0
        assert tg_cdf(dist, dist.upper) == 1.0
        assert tg_cdf(dist, 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_cdf_monotone(self):
        dist = SCEN1_COMP
        grid = np.linspace(dist.lower - 1e-5, dist.upper + 1e-5, 400)
        vals = tg_cdf(dist, grid)
        assert (np.diff(vals) >= 0).all()

    def test_sampler_support_and_determinism(self):
        dist = SCEN1_COMP
        draws = tg_sample(dist, np.random.default_rng(0), size=10_000)
        assert draws.min() >= dist.lower and draws.max() <= dist.upper
        again = tg_sample(dist, np.random.default_rng(0), size=10_000)
        assert np.array_equal(draws, again)

    def test_cdf_of_ppf_round_trip(self):
        dist = SCEN1_COMP
        u = np.linspace(1e-6, 1 - 1e-6, 1000)
        back = tg_cdf(dist, dist.ppf(u))
        assert np.abs(back - u).max() < 1e-9

    def test_sample_mean_matches_quadrature(self):
        dist = SCEN1_COMP
        mean_quad, _ = quad(lambda t: t * tg_pdf(dist, t), dist.lower, dist.upper, epsabs=1e-16)
        draws = tg_sample(dist, np.random.default_rng(123), size=1_000_000)
        stderr = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - mean_quad) < 3 * stderr
        assert dist.mean() == pytest.approx(mean_quad, abs=1e-12)

    def test_kolmogorov_smirnov(self):
        dist = SCEN1_COMP
        m = 100_000
        draws = np.sort(tg_sample(dist, np.random.default_rng(5), size=m))
        cdf_vals = tg_cdf(dist, draws)
        ks = max(
            np.abs(cdf_vals - np.arange(1, m + 1) / m).max(),
            np.abs(cdf_vals - np.arange(0, m) / m).max(),
        )
        assert ks < 1.63 / np.sqrt(m)  # 1% critical value

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(mu=1.0, sigma=0.0, a=0.5, b=0.5),
            dict(mu=1.0, sigma=1.0, a=-0.5, b=0.5),
            dict(mu=1.0, sigma=1.0, a=0.5, b=0.0),
            dict(mu=0.2, sigma=1.0, a=0.5, b=0.5),  # mu - a < 0
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            TruncatedGaussian(**kwargs)


class TestDiscrete:
    def test_validation(self):
        with pytest.raises(ValueError):
            Discrete(support=((1.0, 0.5), (2.0, 0.6)))
        with pytest.raises(ValueError):
            Discrete(support=((2.0, 0.5), (1.0, 0.5)))
        with pytest.raises(ValueError):
            Discrete(support=((-1.0, 0.5), (1.0, 0.5)))
        with pytest.raises(ValueError):
            Discrete(support=())

    def test_strict_survival(self):
        dist = Discrete(support=((1.0, 0.5), (2.0, 0.5)))
        assert dist.sf_strict(0.5) == 1.0
        assert dist.sf_strict(1.0) == 0.5
        assert dist.sf_strict(2.0) == 0.0

    def test_sampling_frequencies(self):
        dist = Discrete(support=((1.0, 0.25), (2.0, 0.75)))
        draws = dist.sample(np.random.default_rng(0), size=100_000)
        assert np.mean(draws == 2.0) == pytest.approx(0.75, abs=0.01)


class TestSampleTrace:
    def test_constant_model(self):
        model = DelayModel.broadcast(n=2, r=2, comp=Constant(1.0), comm=Constant(0.5))
        trace = sample_trace(model, np.random.default_rng(0))
        assert (trace.comp == 1.0).all() and (trace.comm == 0.5).all()

    def test_scenario1_support(self):
        model = scenario_preset("scenario1", n=4, r=3)
        trace = sample_trace(model, np.random.default_rng(1))
        assert trace.comp.min() >= 7e-5 and trace.comp.max() <= 1.3e-4
        assert trace.comm.min() >= 3e-4 and trace.comm.max() <= 7e-4

    def test_seeded_determinism(self):
        model = scenario_preset("scenario1", n=3, r=2)
        a = sample_trace(model, np.random.default_rng(9))
        b = sample_trace(model, np.random.default_rng(9))
        assert np.array_equal(a.comp, b.comp) and np.array_equal(a.comm, b.comm)
        c = sample_trace(model, np.random.default_rng(10))
        assert not np.array_equal(a.comp, c.comp)


class TestScenarioPresets:
    def test_scenario1_identical_workers(self):
        model = scenario_preset("scenario1", n=16, r=4)
        assert len(set(model.comp)) == 1 and len(set(model.comm)) == 1
        assert model.comp[0].mu == 1e-4 and model.comm[0].mu == 5e-4

    def test_scenario2_mean_ladders(self):
        model = scenario_preset("scenario2", n=3, r=2, rng=np.random.default_rng(0))
        comp_means = sorted(d.mu for d in model.comp)
        assert comp_means == pytest.approx([1e-4, 4 / 3 * 1e-4, 5 / 3 * 1e-4])
        comm_means = sorted(d.mu for d in model.comm)
        assert comm_means == pytest.approx([5e-4, 5.5e-4, 6e-4])

    def test_scenario2_steps(self):
        model = scenario_preset("scenario2", n=8, r=2, rng=np.random.default_rng(4))
        comp = np.sort([d.mu for d in model.comp])
        comm = np.sort([d.mu for d in model.comm])
        assert np.allclose(np.diff(comp), 1e-4 / 3)
        assert np.allclose(np.diff(comm), 0.5e-4)

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            scenario_preset("scenario3", n=2, r=1)

    def test_scenario2_needs_rng(self):
        with pytest.raises(ValueError):
            scenario_preset("scenario2", n=2, r=1)


class TestDelayModel:
    def test_horizon(self):
        model = DelayModel.broadcast(n=2, r=3, comp=Constant(1.0), comm=Constant(0.5))
        assert model.horizon() == pytest.approx(3.5)

    def test_worker_count_mismatch(self):
        with pytest.raises(ValueError):
            DelayModel(n=2, r=1, comp=(Constant(1.0),), comm=(Constant(1.0), Constant(2.0)))
