"""Closed-form completion-time law for a fixed schedule.

The survival probability Pr{completion > t} expands by inclusion-exclusion
over task subsets S with |S| >= n-k+1:

    sum_S  sign(|S|) * binom(|S|-1, n-k) * Pr{every task in S arrives after t}

and each subset probability factorizes across workers (workers are
independent): a worker's factor is the probability that all of its
computations whose task lies in S arrive after t. That factor is computed
exactly for finite-support delays by enumerating the worker's computation
tuples, and by a seeded quasi-Monte Carlo average over the worker's
computation vector for truncated-Gaussian delays; communication delays are
always integrated out exactly through their survival function.

The mean completion time is the integral of the survival function: exact
step summation for all-discrete models, composite adaptive Simpson
otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .delays import DelayDistribution, DelayModel, atoms, is_finite_support
from .schedules import CompletionConfig, TaskOrderMatrix

__all__ = [
    "SubsetTerm",
    "SurvivalCurve",
    "subset_terms",
    "h_term",
    "survival",
    "survival_curve",
    "average_completion",
    "expand_mixed_event",
    "coefficient_identity_check",
]

MAX_SUBSET_N = 20
DEFAULT_QMC_SAMPLES = 200_000
DEFAULT_QMC_SEED = 7
_T_CHUNK = 64
_MAX_FINITE_TUPLES = 1_000_000


@dataclass(frozen=True)
class SubsetTerm:
    """One inclusion-exclusion term: a task subset with its signed weight."""

    subset: frozenset[int]
    sign: int
    coefficient: int


@dataclass(frozen=True)
class SurvivalCurve:
    """Survival probabilities on an increasing time grid (seconds)."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D and equal length")
        if (np.diff(grid) <= 0).any():
            raise ValueError("grid must be strictly increasing")
        if (np.diff(values) > 1e-9).any():
            raise ValueError("survival values must be nonincreasing")
        # project away sub-tolerance wiggle so consumers see a monotone curve
        values = np.minimum.accumulate(np.clip(values, 0.0, 1.0))
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


def subset_terms(n: int, k: int) -> list[SubsetTerm]:
    """All signed subset terms of the survival expansion for (n, k)."""
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, n={n}]")
    if n > MAX_SUBSET_N:
        raise ValueError(f"analytic path limited to n <= {MAX_SUBSET_N}")
    terms = []
    for size in range(n - k + 1, n + 1):
        sign = -1 if (n - k + size + 1) % 2 else 1
        coeff = math.comb(size - 1, n - k)
        for subset in itertools.combinations(range(1, n + 1), size):
            terms.append(SubsetTerm(subset=frozenset(subset), sign=sign, coefficient=coeff))
    return terms


@lru_cache(maxsize=32)
def _finite_comp_tuples(comp: DelayDistribution, r: int) -> tuple[np.ndarray, np.ndarray]:
    """(weights, prefix sums) over all r-tuples of a finite computation law."""
    vals, probs = atoms(comp)
    size = len(vals)
    total = size**r
    if total > _MAX_FINITE_TUPLES:
        raise ValueError(
            f"computation support too large to enumerate: {size}^{r} tuples"
        )
    rows = np.arange(total)
    comp_matrix = np.empty((total, r))
    weights = np.ones(total)
    rem = rows.copy()
    for p in range(r - 1, -1, -1):
        digit = rem % size
        rem //= size
        comp_matrix[:, p] = vals[digit]
        weights *= probs[digit]
    return weights, np.cumsum(comp_matrix, axis=1)


@lru_cache(maxsize=8)
def _qmc_comp_prefix(comp: DelayDistribution, r: int, samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(weights, prefix sums) from a scrambled Sobol sample of the worker's
    computation vector. The sample count is rounded up to a power of two to
    keep the sequence balanced; the seed makes the estimate reproducible."""
    m = 1 << max(1, math.ceil(math.log2(samples)))
    u = qmc.Sobol(d=r, scramble=True, seed=seed).random(m)
    comp_matrix = comp.ppf(u)
    return np.full(m, 1.0 / m), np.cumsum(comp_matrix, axis=1)


def _worker_tables(comp: DelayDistribution, r: int, samples: int, seed: int):
    if is_finite_support(comp):
        return _finite_comp_tuples(comp, r)
    return _qmc_comp_prefix(comp, r, samples, seed)


def _worker_factor(
    comp: DelayDistribution,
    comm: DelayDistribution,
    positions: tuple[int, ...],
    t: np.ndarray,
    r: int,
    samples: int,
    seed: int,
) -> np.ndarray:
    """Pr{arrival after t for every listed position} for one worker,
    vectorized over t. Positions are 1-based."""
    weights, prefix = _worker_tables(comp, r, samples, seed)
    out = np.empty(len(t))
    for lo in range(0, len(t), _T_CHUNK):
        hi = min(lo + _T_CHUNK, len(t))
        acc = np.ones((len(weights), hi - lo))
        for p in positions:
            acc *= comm.sf_strict(t[None, lo:hi] - prefix[:, p - 1][:, None])
        out[lo:hi] = weights @ acc
    return out


class _SubsetEvaluator:
    """Evaluates subset joint-survival terms, sharing per-worker factors
    across subsets through a caller-held cache (valid for one t batch).

    Workers with identical distribution pairs share cache entries, so
    homogeneous populations cost one factor per distinct position set.
    """

    def __init__(self, schedule: TaskOrderMatrix, model: DelayModel, samples: int, seed: int):
        if schedule.n != model.n or schedule.r != model.r:
            raise ValueError("schedule and model shapes do not match")
        self.schedule = schedule
        self.model = model
        self.samples = samples
        self.seed = seed

    def _positions(self, worker: int, subset: frozenset[int]) -> tuple[int, ...]:
        row = self.schedule.entries[worker - 1]
        return tuple(p + 1 for p in range(self.schedule.r) if int(row[p]) in subset)

    def joint_survival(self, subset: frozenset[int], t: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """Pr{every task in `subset` arrives strictly after t}."""
        if cache is None:
            cache = {}
        result = np.ones(len(t))
        for worker in range(1, self.model.n + 1):
            positions = self._positions(worker, subset)
            if not positions:
                continue
            comp = self.model.comp[worker - 1]
            comm = self.model.comm[worker - 1]
            key = (comp, comm, positions)
            vals = cache.get(key)
            if vals is None:
                vals = _worker_factor(
                    comp, comm, positions, t, self.model.r, self.samples, self.seed
                )
                cache[key] = vals
            result *= vals
        return result


def h_term(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    subset,
    t,
    qmc_samples: int = DEFAULT_QMC_SAMPLES,
    qmc_seed: int = DEFAULT_QMC_SEED,
):
    """Pr{every task in `subset` arrives strictly after t}.

    Factorizes across workers; exact for finite-support delays, seeded
    quasi-Monte Carlo over computation vectors for truncated Gaussians.
    """
    subset = frozenset(int(j) for j in subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ev = _SubsetEvaluator(schedule, model, qmc_samples, qmc_seed)
    vals = ev.joint_survival(subset, t_arr)
    return float(vals[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else vals


def _survival_batch(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    k: int,
    t: np.ndarray,
    samples: int,
    seed: int,
    evaluator: _SubsetEvaluator | None = None,
) -> np.ndarray:
    terms = subset_terms(model.n, k)
    ev = evaluator or _SubsetEvaluator(schedule, model, samples, seed)
    cache: dict = {}
    out = np.zeros(len(t))
    for term in terms:
        out += term.sign * term.coefficient * ev.joint_survival(term.subset, t, cache)
    return out


def _check_shapes(model: DelayModel, config: CompletionConfig) -> None:
    if model.n != config.n or model.r != config.r:
        raise ValueError(
            f"model shape ({model.n}, {model.r}) does not match config "
            f"({config.n}, {config.r})"
        )


def survival(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    config: CompletionConfig,
    t,
    qmc_samples: int = DEFAULT_QMC_SAMPLES,
    qmc_seed: int = DEFAULT_QMC_SEED,
):
    """Pr{completion time > t} by the signed subset expansion, clamped to
    [0, 1] (the raw alternating sum can stray by roundoff)."""
    _check_shapes(model, config)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    raw = _survival_batch(schedule, model, config.k, t_arr, qmc_samples, qmc_seed)
    vals = np.clip(raw, 0.0, 1.0)
    return float(vals[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else vals


def survival_curve(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    config: CompletionConfig,
    points: int = 201,
    qmc_samples: int = DEFAULT_QMC_SAMPLES,
    qmc_seed: int = DEFAULT_QMC_SEED,
) -> SurvivalCurve:
    """Survival evaluated on a uniform grid over [0, horizon]."""
    _check_shapes(model, config)
    grid = np.linspace(0.0, model.horizon(), points)
    ev = _SubsetEvaluator(schedule, model, qmc_samples, qmc_seed)
    raw = _survival_batch(schedule, model, config.k, grid, qmc_samples, qmc_seed, evaluator=ev)
    return SurvivalCurve(grid=grid, values=np.clip(raw, 0.0, 1.0))


def _finite_jump_candidates(schedule: TaskOrderMatrix, model: DelayModel) -> np.ndarray:
    """Every achievable arrival instant of an all-finite-support model; the
    survival function is constant between consecutive candidates."""
    values: set[float] = set()
    for i in range(model.n):
        comp_vals = atoms(model.comp[i])[0]
        comm_vals = atoms(model.comm[i])[0]
        prefixes = np.array([0.0])
        for _ in range(model.r):
            prefixes = np.unique(prefixes[:, None] + comp_vals[None, :])
            arrivals = prefixes[:, None] + comm_vals[None, :]
            values.update(arrivals.ravel().tolist())
            if len(values) > 200_000:
                raise ValueError("too many jump candidates; model too large for exact quadrature")
    return np.array(sorted(values))


def average_completion(
    schedule: TaskOrderMatrix,
    model: DelayModel,
    config: CompletionConfig,
    tol: float = 1e-7,
    qmc_samples: int = DEFAULT_QMC_SAMPLES,
    qmc_seed: int = DEFAULT_QMC_SEED,
) -> float:
    """Mean completion time as the integral of the survival function.

    All-finite-support models integrate the step function exactly over its
    jump candidates; otherwise composite Simpson over [0, horizon] with
    doubling refinement until the change is below `tol` (seconds).
    """
    _check_shapes(model, config)
    ev = _SubsetEvaluator(schedule, model, qmc_samples, qmc_seed)
    t_max = model.horizon()

    if model.all_finite_support():
        jumps = _finite_jump_candidates(schedule, model)
        grid = np.concatenate([[0.0], jumps[jumps > 0.0]])
        vals = np.clip(
            _survival_batch(schedule, model, config.k, grid, qmc_samples, qmc_seed, evaluator=ev),
            0.0,
            1.0,
        )
        return float(np.dot(vals[:-1], np.diff(grid)))

    level = 5
    max_level = 14
    grid = np.linspace(0.0, t_max, (1 << level) + 1)
    vals = np.clip(
        _survival_batch(schedule, model, config.k, grid, qmc_samples, qmc_seed, evaluator=ev),
        0.0,
        1.0,
    )
    estimate = _simpson(vals, t_max)
    while level < max_level:
        mids = 0.5 * (grid[:-1] + grid[1:])
        mid_vals = np.clip(
            _survival_batch(schedule, model, config.k, mids, qmc_samples, qmc_seed, evaluator=ev),
            0.0,
            1.0,
        )
        merged_grid = np.empty(len(grid) + len(mids))
        merged_grid[0::2] = grid
        merged_grid[1::2] = mids
        merged_vals = np.empty_like(merged_grid)
        merged_vals[0::2] = vals
        merged_vals[1::2] = mid_vals
        grid, vals = merged_grid, merged_vals
        level += 1
        refined = _simpson(vals, t_max)
        if abs(refined - estimate) <= tol:
            return float(refined)
        estimate = refined
    return float(estimate)


def _simpson(vals: np.ndarray, width: float) -> float:
    h = width / (len(vals) - 1)
    return h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum())


def expand_mixed_event(late_tasks, early_tasks) -> list[tuple[int, frozenset[int]]]:
    """Expand a mixed late/early arrival event into signed pure-late terms.

    The event {tasks in G late, tasks in G' early} equals the alternating
    sum over supersets G u Ghat (Ghat inside G') of pure all-late events,
    with sign (-1)**(|G| + |G u Ghat|). Returns (sign, superset) pairs.
    """
    late = frozenset(int(j) for j in late_tasks)
    early = frozenset(int(j) for j in early_tasks)
    if not late:
        raise ValueError("the late set must be nonempty")
    if late & early:
        raise ValueError("late and early sets overlap")
    i = len(late)
    n = i + len(early)
    out: list[tuple[int, frozenset[int]]] = []
    for m in range(i, n + 1):
        sign = -1 if (i + m) % 2 else 1
        for extra in itertools.combinations(sorted(early), m - i):
            out.append((sign, late | frozenset(extra)))
    return out


def coefficient_identity_check(s: int, n: int, k: int) -> bool:
    """Exact-integer check that the collapsed inclusion-exclusion weight of
    a size-s subset equals its closed binomial form."""
    if not (n - k + 1) <= s <= n:
        raise ValueError(f"s must be in [n-k+1={n - k + 1}, n={n}]")
    lhs = sum((-1) ** (i + s) * math.comb(s, i) for i in range(n - k + 1, s + 1))
    rhs = (-1) ** (n - k + s + 1) * math.comb(s - 1, n - k)
    return lhs == rhs
