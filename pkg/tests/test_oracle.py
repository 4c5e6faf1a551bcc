import numpy as np
import pytest

from stragglersim import (
    CompletionConfig,
    Constant,
    DelayModel,
    Discrete,
    InfeasibleTargetError,
    TaskOrderMatrix,
    cyclic_schedule,
    enumerate_outcomes,
    exact_event_probability,
    exact_mean,
    exact_mean_of,
    exact_survival,
    exact_survival_of,
    lower_bound_completion,
    monte_carlo,
    pc_completion,
    pcmm_completion,
    scenario_preset,
    staircase_schedule,
)
from stragglersim.oracle import completion_atoms

TWO_POINT = Discrete(support=((1.0, 0.5), (2.0, 0.5)))
COMM_HALF = Discrete(support=((0.5, 1.0),))


def small_model(n, r, comp=TWO_POINT, comm=COMM_HALF):
    return DelayModel.broadcast(n=n, r=r, comp=comp, comm=comm)


class TestEnumeration:
    def test_outcome_counts(self):
        assert enumerate_outcomes(small_model(1, 1, comm=TWO_POINT)).total == 4
        const = DelayModel.broadcast(n=2, r=1, comp=Constant(1.0), comm=Constant(0.5))
        assert enumerate_outcomes(const).total == 1
        model = small_model(2, 2, comm=TWO_POINT)
        enum = enumerate_outcomes(model)
        assert enum.total == 2**8

    def test_probabilities_sum_to_one(self):
        enum = enumerate_outcomes(small_model(2, 2, comm=TWO_POINT))
        total = sum(probs.sum() for probs, _, _ in enum.chunks())
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_refuses_continuous(self):
        model = scenario_preset("scenario1", n=2, r=1)
        with pytest.raises(ValueError):
            enumerate_outcomes(model)

    def test_refuses_oversized(self):
        big = Discrete(support=tuple((float(v), 1.0 / 40) for v in range(1, 41)))
        with pytest.raises(ValueError):
            enumerate_outcomes(DelayModel.broadcast(n=3, r=2, comp=big, comm=big))

    def test_iterates_traces(self):
        enum = enumerate_outcomes(small_model(1, 1))
        pairs = list(enum)
        assert len(pairs) == 2
        assert sum(p for p, _ in pairs) == pytest.approx(1.0)


class TestExactSurvival:
    def test_one_at_zero(self):
        model = small_model(2, 2)
        assert exact_survival(cyclic_schedule(2, 2), model, 2, 0.0) == 1.0

    def test_deterministic_step(self):
        model = DelayModel.broadcast(n=2, r=2, comp=Constant(1.0), comm=Constant(0.5))
        sched = cyclic_schedule(2, 2)
        assert exact_survival(sched, model, 2, 1.25) == 1.0
        assert exact_survival(sched, model, 2, 1.5) == 0.0  # strict at the jump
        assert exact_survival(sched, model, 2, 1.75) == 0.0

    def test_right_continuous_nonincreasing_step(self):
        model = small_model(3, 2, comm=Discrete(support=((0.25, 0.5), (0.75, 0.5))))
        sched = staircase_schedule(3, 2)
        values, probs = completion_atoms(sched, model, 2)
        assert (np.diff(values) > 0).all()
        grid = np.linspace(0, 7, 200)
        surv = np.array([exact_survival(sched, model, 2, t) for t in grid])
        assert (np.diff(surv) <= 1e-15).all()
        # right-continuity: value just after an atom equals value at the atom
        for v in values[:4]:
            assert exact_survival(sched, model, 2, float(v)) == pytest.approx(
                exact_survival(sched, model, 2, float(v) + 1e-9), abs=1e-12
            )


class TestExactMean:
    def test_constant_model(self):
        model = DelayModel.broadcast(n=2, r=2, comp=Constant(1.0), comm=Constant(0.5))
        assert exact_mean(cyclic_schedule(2, 2), model, 2) == pytest.approx(1.5)

    def test_two_point_expectation(self):
        model = DelayModel.broadcast(n=1, r=1, comp=TWO_POINT, comm=Constant(0.0))
        assert exact_mean(cyclic_schedule(1, 1), model, 1) == pytest.approx(1.5)

    def test_mean_equals_step_integral(self):
        model = small_model(3, 2, comm=Discrete(support=((0.25, 0.5), (0.75, 0.5))))
        sched = cyclic_schedule(3, 2)
        values, probs = completion_atoms(sched, model, 3)
        grid = np.concatenate([[0.0], values])
        surv = np.array([exact_survival(sched, model, 3, t) for t in grid])
        integral = float(np.dot(surv[:-1], np.diff(grid)))
        assert integral == pytest.approx(exact_mean(sched, model, 3), abs=1e-12)

    def test_lb_mean_dominated(self):
        model = small_model(3, 2)
        for k in (1, 2, 3):
            lb = exact_mean_of(model, lambda tr: lower_bound_completion(tr, k))
            cs = exact_mean(cyclic_schedule(3, 2), model, k)
            assert lb <= cs + 1e-12

    def test_generic_statistics(self):
        model = small_model(2, 2, comm=TWO_POINT)
        pc = exact_mean_of(model, lambda tr: pc_completion(tr, 2, 2))
        pcmm = exact_mean_of(model, lambda tr: pcmm_completion(tr, 2, 2))
        assert pc > 0 and pcmm > 0
        surv = exact_survival_of(model, lambda tr: pc_completion(tr, 2, 2), 0.0)
        assert surv == 1.0

    def test_infeasible_schedule(self):
        model = small_model(2, 1)
        bad = TaskOrderMatrix(n=2, r=1, entries=np.array([[1], [1]]))
        with pytest.raises(InfeasibleTargetError):
            exact_mean(bad, model, 2)


class TestMonteCarloConvergence:
    def test_mc_within_three_stderr_of_exact(self):
        model = small_model(3, 2, comm=Discrete(support=((0.25, 0.5), (0.75, 0.5))))
        cfg = CompletionConfig(n=3, r=2, k=3)
        rep = monte_carlo("cs", model, cfg, reps=20_000, seed=17)
        exact = exact_mean(cyclic_schedule(3, 2), model, 3)
        assert abs(rep.mean_seconds - exact) <= 3 * rep.stderr_seconds


class TestEventProbability:
    def test_disjointness_required(self):
        model = small_model(2, 1)
        with pytest.raises(ValueError):
            exact_event_probability(cyclic_schedule(2, 1), model, {1}, {1}, 1.0)

    def test_partition_of_unity(self):
        # the four late/early splits of two tasks are disjoint and exhaustive
        model = small_model(2, 2)
        sched = cyclic_schedule(2, 2)
        for t in (0.0, 1.4, 1.6, 2.4, 3.1):
            total = sum(
                exact_event_probability(sched, model, late, {1, 2} - late, t)
                for late in (set(), {1}, {2}, {1, 2})
            )
            assert total == pytest.approx(1.0, abs=1e-12)
