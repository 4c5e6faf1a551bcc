import numpy as np
import pytest

from stragglersim import (
    CompletionConfig,
    DelayModel,
    Constant,
    completion_time,
    cyclic_schedule,
    dgd_step,
    generate_dataset,
    gradient_task,
    run_dgd,
    sample_trace,
    scenario_preset,
)
from stragglersim.dgd import DgdState, loss_value, precompute_xy


def centralized_gd(dataset, iterations, eta):
    """Independent full-gradient reference implementation."""
    theta = np.zeros(dataset.d)
    history = [theta.copy()]
    for _ in range(iterations):
        grad = (2.0 / dataset.rows) * (dataset.x.T @ (dataset.x @ theta) - dataset.x.T @ dataset.y)
        theta = theta - eta * grad
        history.append(theta.copy())
    return np.stack(history)


class TestGenerateDataset:
    def test_shapes_and_partitions(self):
        ds = generate_dataset(20, 4, 5, seed=0)
        assert ds.x.shape == (20, 4) and ds.y.shape == (20,)
        for xp, yp in zip(ds.parts.x_parts, ds.parts.y_parts):
            assert xp.shape == (4, 4) and yp.shape == (4,)

    def test_zero_padding(self):
        ds = generate_dataset(10, 3, 4, seed=1)
        assert ds.rows == 12 and ds.original_rows == 10
        assert np.allclose(ds.x[10:], 0.0) and np.allclose(ds.y[10:], 0.0)

    def test_seeded_determinism(self):
        a = generate_dataset(12, 3, 3, seed=7)
        b = generate_dataset(12, 3, 3, seed=7)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)

    def test_label_formula(self):
        # labels must equal (X_i + Z)^T U with the documented draw order
        big_n, d, n, seed = 12, 3, 3, 4
        ds = generate_dataset(big_n, d, n, seed=seed)
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((big_n, d))
        z = 0.1 * rng.standard_normal((d, big_n // n))
        u = rng.random(d)
        assert np.allclose(ds.x, x)
        for i in range(n):
            block = x[i * 4 : (i + 1) * 4].T
            assert np.allclose(ds.parts.y_parts[i], (block + z).T @ u)


class TestGradientTask:
    def test_zero_theta(self):
        part = np.random.default_rng(0).standard_normal((3, 5))
        assert np.allclose(gradient_task(part, np.zeros(3)), 0.0)

    def test_identity_part(self):
        theta = np.array([1.0, -2.0, 0.5])
        assert np.allclose(gradient_task(np.eye(3), theta), theta)

    def test_partition_sum_matches_dense(self):
        ds = generate_dataset(24, 6, 4, seed=3)
        theta = np.random.default_rng(1).standard_normal(6)
        total = sum(gradient_task(xp, theta) for xp in ds.parts.x_parts)
        dense = ds.x.T @ (ds.x @ theta)
        assert np.linalg.norm(total - dense) <= 1e-9 * max(np.linalg.norm(dense), 1.0)


class TestDgdStep:
    def _state(self, ds, eta=0.05):
        theta = np.zeros(ds.d)
        return DgdState(
            theta=theta, iteration=0, eta=eta,
            loss_history=(loss_value(ds, theta),), elapsed_seconds=0.0,
        )

    def test_full_update_equals_centralized(self):
        ds = generate_dataset(20, 4, 5, seed=2)
        state = dgd_step(ds, self._state(ds), [1, 2, 3, 4, 5])
        ref = centralized_gd(ds, 1, 0.05)[1]
        assert np.abs(state.theta - ref).max() < 1e-9

    def test_zero_eta_keeps_theta(self):
        ds = generate_dataset(20, 4, 5, seed=2)
        state = dgd_step(ds, self._state(ds, eta=0.0), [1, 3])
        assert np.allclose(state.theta, 0.0)

    def test_small_instance_hand_oracle(self):
        ds = generate_dataset(4, 2, 2, seed=9)
        xy = precompute_xy(ds)
        state = dgd_step(ds, self._state(ds, eta=0.1), [2])
        # k=1 of n=2: coefficient 2n/(kN) = 4/4 = 1
        part = ds.parts.x_parts[1]
        grad = part @ (part.T @ np.zeros(2)) - xy[1]
        assert np.allclose(state.theta, -0.1 * 1.0 * grad)

    def test_duplicate_indices_rejected(self):
        ds = generate_dataset(20, 4, 5, seed=2)
        with pytest.raises(ValueError):
            dgd_step(ds, self._state(ds), [1, 1])


class TestRunDgd:
    def test_full_target_matches_centralized_trajectory(self):
        ds = generate_dataset(100, 10, 5, seed=11)
        model = scenario_preset("scenario1", n=5, r=5)
        cfg = CompletionConfig(n=5, r=5, k=5)
        ref = centralized_gd(ds, 100, 0.01)
        for scheme in ("cs", "ss", "ra"):
            res = run_dgd(scheme, model, cfg, ds, iterations=100, eta=0.01, seed=5)
            assert np.abs(res.thetas - ref).max() < 1e-9

    def test_partition_reshuffle_invariant_at_full_target(self):
        ds = generate_dataset(50, 5, 5, seed=21)
        model = scenario_preset("scenario1", n=5, r=5)
        cfg = CompletionConfig(n=5, r=5, k=5)
        plain = run_dgd("cs", model, cfg, ds, iterations=40, eta=0.01, seed=8)
        shuffled = run_dgd("cs", model, cfg, ds, iterations=40, eta=0.01, seed=8, reshuffle_every=10)
        assert np.abs(plain.losses - shuffled.losses).max() < 1e-12

    def test_wall_clock_matches_completion_times(self):
        ds = generate_dataset(40, 4, 4, seed=31)
        model = scenario_preset("scenario1", n=4, r=2)
        cfg = CompletionConfig(n=4, r=2, k=3)
        res = run_dgd("cs", model, cfg, ds, iterations=25, eta=0.01, seed=13)
        sched = cyclic_schedule(4, 2)
        for it in range(25):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=13, spawn_key=(it, 0)))
            trace = sample_trace(model, rng)
            assert res.iteration_seconds[it] == pytest.approx(
                completion_time(sched, trace, 3)
            )
        assert res.cumulative_seconds[-1] == pytest.approx(res.iteration_seconds.sum())

    def test_partial_target_uses_k_distinct(self):
        ds = generate_dataset(30, 3, 6, seed=41)
        model = scenario_preset("scenario1", n=6, r=3)
        cfg = CompletionConfig(n=6, r=3, k=4)
        res = run_dgd("ss", model, cfg, ds, iterations=10, eta=0.005, seed=2)
        assert len(res.losses) == 11
        assert (res.iteration_seconds > 0).all()

    def test_coded_schemes_full_gradient(self):
        ds = generate_dataset(40, 4, 4, seed=51)
        model = scenario_preset("scenario1", n=4, r=2)
        cfg = CompletionConfig(n=4, r=2, k=4)
        ref = centralized_gd(ds, 30, 0.01)
        for scheme in ("pc", "pcmm"):
            res = run_dgd(scheme, model, cfg, ds, iterations=30, eta=0.01, seed=6)
            assert np.abs(res.thetas - ref).max() < 1e-9
            assert (res.iteration_seconds > 0).all()

    def test_loss_decreases_with_small_rate(self):
        ds = generate_dataset(100, 10, 5, seed=61)
        model = scenario_preset("scenario1", n=5, r=5)
        cfg = CompletionConfig(n=5, r=5, k=5)
        res = run_dgd("cs", model, cfg, ds, iterations=200, eta=0.01, seed=1)
        diffs = np.diff(res.losses[1:])
        assert (diffs < 0).all()

    def test_constant_model_wall_clock(self):
        ds = generate_dataset(8, 2, 2, seed=71)
        model = DelayModel.broadcast(n=2, r=2, comp=Constant(1.0), comm=Constant(0.5))
        cfg = CompletionConfig(n=2, r=2, k=2)
        res = run_dgd("cs", model, cfg, ds, iterations=4, eta=0.01, seed=0)
        assert np.allclose(res.iteration_seconds, 1.5)
