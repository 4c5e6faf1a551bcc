"""Distributed gradient descent for linear regression, driven by a
scheduling scheme's per-iteration arrivals.

Each iteration samples a delay trace, determines which k distinct partial
gradients reach the master first (or, for the coded baselines, when the
full gradient is recoverable), applies the partial-gradient update, and
adds the round's completion time to a simulated wall clock. At k=n the
update coincides with centralized gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coded import PartitionedDataset
from .completion import (
    InfeasibleTargetError,
    first_k_distinct,
    pc_completion,
    pcmm_completion,
)
from .delays import DelayModel, sample_trace
from .schedules import (
    CompletionConfig,
    TaskOrderMatrix,
    cyclic_schedule,
    random_assignment_schedule,
    staircase_schedule,
    validate,
)

__all__ = [
    "RegressionDataset",
    "DgdState",
    "DgdResult",
    "generate_dataset",
    "gradient_task",
    "dgd_step",
    "run_dgd",
    "loss_value",
]


@dataclass(frozen=True)
class RegressionDataset:
    """Synthetic regression data, zero-padded so n divides the row count.

    x is rows x d, y has one label per row; parts is the n-way partitioned
    view used by the workers. rows counts the padded size.
    """

    x: np.ndarray
    y: np.ndarray
    parts: PartitionedDataset
    original_rows: int

    @property
    def rows(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def n(self) -> int:
        return self.parts.n


def generate_dataset(big_n: int, d: int, n: int, seed: int) -> RegressionDataset:
    """Draw the synthetic regression problem.

    Data entries are standard normal. Labels are y_i = (X_i + Z)^T U per
    partition, with one shared perturbation Z (std 0.1 entries) and one
    shared weight vector U (uniform on [0,1] entries). Padded rows get zero
    data and zero labels. Deterministic per seed; draw order is X, Z, U.
    """
    if big_n < 1 or d < 1 or n < 1:
        raise ValueError("big_n, d, n must all be >= 1")
    rng = np.random.default_rng(seed)
    cols = -(-big_n // n)
    padded = cols * n
    x = np.zeros((padded, d))
    x[:big_n] = rng.standard_normal((big_n, d))
    z = 0.1 * rng.standard_normal((d, cols))
    u = rng.random(d)
    y = np.zeros(padded)
    for i in range(n):
        block = x[i * cols : (i + 1) * cols].T
        y[i * cols : (i + 1) * cols] = (block + z).T @ u
    y[big_n:] = 0.0
    parts = PartitionedDataset.from_dense(x, y, n)
    return RegressionDataset(x=x, y=y, parts=parts, original_rows=big_n)


def gradient_task(part: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """One worker task: X_i X_i^T theta for a d x (N/n) partition."""
    return part @ (part.T @ theta)


def loss_value(dataset: RegressionDataset, theta: np.ndarray) -> float:
    resid = dataset.x @ theta - dataset.y
    return float(resid @ resid) / dataset.rows


@dataclass(frozen=True)
class DgdState:
    """Parameters plus bookkeeping after `iteration` update steps."""

    theta: np.ndarray
    iteration: int
    eta: float
    loss_history: tuple[float, ...]
    elapsed_seconds: float


def dgd_step(
    dataset: RegressionDataset,
    state: DgdState,
    task_indices,
    xy_parts: tuple[np.ndarray, ...] | None = None,
    completion_seconds: float = 0.0,
) -> DgdState:
    """Apply one partial-gradient update from k distinct task results.

    theta <- theta - eta * (2n / (k N)) * sum_p (X_p X_p^T theta - X_p y_p);
    at k=n this is exactly the centralized full-gradient step.
    """
    indices = [int(p) for p in task_indices]
    if len(set(indices)) != len(indices):
        raise ValueError("task indices must be distinct")
    if not indices:
        raise ValueError("need at least one task index")
    n = dataset.n
    k = len(indices)
    if any(not 1 <= p <= n for p in indices):
        raise ValueError(f"task indices must lie in [1, {n}]")
    if xy_parts is None:
        xy_parts = precompute_xy(dataset)
    grad = np.zeros_like(state.theta)
    for p in indices:
        part = dataset.parts.x_parts[p - 1]
        grad += gradient_task(part, state.theta) - xy_parts[p - 1]
    theta = state.theta - state.eta * (2.0 * n / (k * dataset.rows)) * grad
    return DgdState(
        theta=theta,
        iteration=state.iteration + 1,
        eta=state.eta,
        loss_history=state.loss_history + (loss_value(dataset, theta),),
        elapsed_seconds=state.elapsed_seconds + completion_seconds,
    )


def precompute_xy(dataset: RegressionDataset) -> tuple[np.ndarray, ...]:
    """X_i y_i per partition; fixed across iterations, so computed once."""
    return tuple(
        xp @ yp for xp, yp in zip(dataset.parts.x_parts, dataset.parts.y_parts)
    )


@dataclass
class DgdResult:
    """Trajectories of one run: losses include the initial point, so they
    are one longer than the per-iteration arrays."""

    scheme: str
    losses: np.ndarray
    iteration_seconds: np.ndarray
    thetas: np.ndarray

    @property
    def cumulative_seconds(self) -> np.ndarray:
        return np.cumsum(self.iteration_seconds)

    @property
    def final_theta(self) -> np.ndarray:
        return self.thetas[-1]


_CODED = ("pc", "pcmm")


def run_dgd(
    scheme,
    model: DelayModel,
    config: CompletionConfig,
    dataset: RegressionDataset,
    iterations: int,
    eta: float,
    seed: int,
    reshuffle_every: int | None = None,
) -> DgdResult:
    """Iterate the scheme-driven update, tracking loss and wall clock.

    Uncoded schemes apply the first k distinct arrivals of each sampled
    trace; the coded baselines always recover the full gradient and
    contribute their own completion times. `reshuffle_every` randomly
    re-indexes the partitions every that many iterations (task j then maps
    to a permuted partition), leaving the fixed schedule untouched.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if dataset.n != config.n:
        raise ValueError("dataset partition count must equal config.n")
    if model.n != config.n or model.r != config.r:
        raise ValueError("model shape does not match config")

    label, kind, schedule = _resolve_dgd_scheme(scheme, config)
    xy_parts = precompute_xy(dataset)
    theta = np.zeros(dataset.d)
    state = DgdState(
        theta=theta,
        iteration=0,
        eta=eta,
        loss_history=(loss_value(dataset, theta),),
        elapsed_seconds=0.0,
    )
    thetas = [theta.copy()]
    iter_seconds = np.empty(iterations)
    task_map = np.arange(1, config.n + 1)

    for it in range(iterations):
        if reshuffle_every and it > 0 and it % reshuffle_every == 0:
            shuffle_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(it, 2))
            )
            task_map = shuffle_rng.permutation(config.n) + 1
        trace_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(it, 0))
        )
        trace = sample_trace(model, trace_rng)
        if kind == "fixed" or kind == "ra":
            current = schedule
            if kind == "ra":
                ra_rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=seed, spawn_key=(it, 1))
                )
                current = random_assignment_schedule(config.n, ra_rng)
            tasks, t_done = first_k_distinct(current, trace, config.k)
            parts = [int(task_map[t - 1]) for t in tasks]
        elif kind == "pc":
            t_done = pc_completion(trace, config.n, config.r)
            parts = list(range(1, config.n + 1))
        else:
            t_done = pcmm_completion(trace, config.n, config.r)
            parts = list(range(1, config.n + 1))
        state = dgd_step(dataset, state, parts, xy_parts=xy_parts, completion_seconds=t_done)
        thetas.append(state.theta.copy())
        iter_seconds[it] = t_done

    return DgdResult(
        scheme=label,
        losses=np.array(state.loss_history),
        iteration_seconds=iter_seconds,
        thetas=np.stack(thetas),
    )


def _resolve_dgd_scheme(scheme, config: CompletionConfig):
    if isinstance(scheme, TaskOrderMatrix):
        report = validate(scheme, config)
        if not report.ok:
            raise InfeasibleTargetError("; ".join(report.errors))
        return "custom", "fixed", scheme
    name = str(scheme).lower()
    if name == "cs":
        return "cs", "fixed", cyclic_schedule(config.n, config.r)
    if name == "ss":
        return "ss", "fixed", staircase_schedule(config.n, config.r)
    if name == "ra":
        if config.r != config.n:
            raise InfeasibleTargetError("RA requires full load r = n")
        return "ra", "ra", None
    if name in _CODED:
        if config.r < 2:
            raise InfeasibleTargetError(f"{name.upper()} requires r >= 2")
        if name == "pcmm" and config.n * config.r < 2 * config.n - 1:
            raise InfeasibleTargetError("PCMM needs n*r >= 2n-1")
        return name, name, None
    raise ValueError(f"unknown scheme {scheme!r}")
