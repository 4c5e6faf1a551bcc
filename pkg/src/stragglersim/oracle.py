"""Brute-force ground truth for finite-support delay models.

Enumerates every joint realization of the 2*n*r delay slots (Cartesian
product of the per-slot supports) and reduces exactly over it: survival
probabilities, means, and joint arrival events. Only discrete/constant
distributions are enumerable; the enumeration is refused above 10^7
outcomes. Used to validate the closed-form survival path and the
trace-level completion mechanics against total enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np

from .completion import InfeasibleTargetError, _fixed_schedule_completions
from .delays import DelayModel, DelayTrace, atoms, is_finite_support
from .schedules import TaskOrderMatrix

__all__ = [
    "OutcomeEnumeration",
    "enumerate_outcomes",
    "exact_survival",
    "exact_mean",
    "exact_mean_of",
    "exact_survival_of",
    "exact_event_probability",
    "completion_atoms",
]

MAX_OUTCOMES = 10**7
_CHUNK_ROWS = 1 << 18


@dataclass(frozen=True)
class OutcomeEnumeration:
    """Lazy Cartesian product over delay slots, lexicographic in
    (worker, position, stage-with-computation-first) order."""

    model: DelayModel
    total: int

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def r(self) -> int:
        return self.model.r

    def _slots(self):
        slots = []
        for i in range(self.model.n):
            for p in range(self.model.r):
                slots.append(("comp", i, p, *atoms(self.model.comp[i])))
                slots.append(("comm", i, p, *atoms(self.model.comm[i])))
        return slots

    def chunks(self, max_rows: int = _CHUNK_ROWS) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield (probs, comp, comm) blocks; comp/comm have shape
        (rows, n, r). Concatenating all blocks covers every outcome once."""
        slots = self._slots()
        sizes = [len(vals) for _, _, _, vals, _ in slots]
        for lo in range(0, self.total, max_rows):
            hi = min(lo + max_rows, self.total)
            rows = np.arange(lo, hi)
            comp = np.empty((hi - lo, self.model.n, self.model.r))
            comm = np.empty((hi - lo, self.model.n, self.model.r))
            probs = np.ones(hi - lo)
            rem = rows.copy()
            for stage, i, p, vals, ps in reversed(slots):
                size = len(vals)
                digit = rem % size
                rem //= size
                target = comp if stage == "comp" else comm
                target[:, i, p] = vals[digit]
                probs *= ps[digit]
            yield probs, comp, comm

    def __iter__(self) -> Iterator[tuple[float, DelayTrace]]:
        for probs, comp, comm in self.chunks():
            for row in range(len(probs)):
                yield float(probs[row]), DelayTrace(comp=comp[row], comm=comm[row])

    def __len__(self) -> int:
        return self.total


def enumerate_outcomes(model: DelayModel, n: int | None = None, r: int | None = None) -> OutcomeEnumeration:
    """Build the exhaustive outcome enumeration of a finite-support model."""
    if n is not None and model.n != n:
        raise ValueError(f"model has n={model.n}, expected {n}")
    if r is not None and model.r != r:
        raise ValueError(f"model has r={model.r}, expected {r}")
    total = 1
    for dist in model.comp + model.comm:
        if not is_finite_support(dist):
            raise ValueError(
                f"{type(dist).__name__} is not enumerable; use discrete or constant delays"
            )
        total *= len(atoms(dist)[0]) ** model.r
        if total > MAX_OUTCOMES:
            raise ValueError(f"enumeration exceeds {MAX_OUTCOMES} outcomes")
    return OutcomeEnumeration(model=model, total=total)


@lru_cache(maxsize=64)
def completion_atoms(schedule: TaskOrderMatrix, model: DelayModel, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All achievable completion-time values with their exact probabilities,
    sorted ascending and merged. The full law of the completion time."""
    if len(schedule.distinct_tasks()) < k:
        raise InfeasibleTargetError(
            f"schedule assigns fewer than k={k} distinct tasks"
        )
    enum = enumerate_outcomes(model)
    values = []
    weights = []
    for probs, comp, comm in enum.chunks():
        arrive = np.cumsum(comp, axis=2) + comm
        values.append(_fixed_schedule_completions(schedule, arrive, k))
        weights.append(probs)
    values = np.concatenate(values)
    weights = np.concatenate(weights)
    uniq, inverse = np.unique(values, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, weights)
    return uniq, merged


def exact_survival(schedule: TaskOrderMatrix, model: DelayModel, k: int, t: float) -> float:
    """Pr{completion time > t}, strict, by total enumeration."""
    values, probs = completion_atoms(schedule, model, k)
    return float(probs[values > t].sum())


def exact_mean(schedule: TaskOrderMatrix, model: DelayModel, k: int) -> float:
    """Expected completion time by total enumeration."""
    values, probs = completion_atoms(schedule, model, k)
    return float(np.dot(values, probs))


def _reduce(model: DelayModel, fn: Callable[[DelayTrace], float]) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    enum = enumerate_outcomes(model)
    for probs, comp, comm in enum.chunks():
        vals = np.array([fn(DelayTrace(comp=comp[i], comm=comm[i])) for i in range(len(probs))])
        yield probs, vals

def exact_mean_of(model: DelayModel, fn: Callable[[DelayTrace], float]) -> float:
    """Exact expectation of an arbitrary per-trace statistic (for instance
    the genie bound or a coded baseline's completion)."""
    return float(sum(np.dot(p, v) for p, v in _reduce(model, fn)))


def exact_survival_of(model: DelayModel, fn: Callable[[DelayTrace], float], t: float) -> float:
    """Exact Pr{fn(trace) > t} for an arbitrary per-trace statistic."""
    return float(sum(p[v > t].sum() for p, v in _reduce(model, fn)))


def exact_event_probability(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    late_tasks: Iterable[int],
    early_tasks: Iterable[int],
    t: float,
) -> float:
    """Exact probability that every task in `late_tasks` arrives strictly
    after t while every task in `early_tasks` arrives at or before t."""
    late = sorted(set(int(j) for j in late_tasks))
    early = sorted(set(int(j) for j in early_tasks))
    if set(late) & set(early):
        raise ValueError("late and early task sets overlap")
    enum = enumerate_outcomes(model)
    total = 0.0
    for probs, comp, comm in enum.chunks():
        arrive = np.cumsum(comp, axis=2) + comm
        batch = arrive.shape[0]
        per_task = np.full((batch, schedule.n), np.inf)
        for i in range(schedule.n):
            for p in range(schedule.r):
                j = schedule.entries[i, p] - 1
                np.minimum(per_task[:, j], arrive[:, i, p], out=per_task[:, j])
        mask = np.ones(batch, dtype=bool)
        for j in late:
            mask &= per_task[:, j - 1] > t
        for j in early:
            mask &= per_task[:, j - 1] <= t
        total += probs[mask].sum()
    return float(total)
