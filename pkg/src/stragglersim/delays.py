"""Statistical models of per-task computation and communication delays.

All delays are in seconds. Three distribution kinds are supported: a
truncated Gaussian on [mu-a, mu+b] (the workhorse for realistic runs), a
finite-support discrete law (enables exact enumeration), and a constant.
Within a worker, per-position delays are drawn i.i.d. from that worker's
distribution; different workers are always independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "TruncatedGaussian",
    "Discrete",
    "Constant",
    "DelayDistribution",
    "DelayModel",
    "DelayTrace",
    "tg_pdf",
    "tg_cdf",
    "tg_sample",
    "sample_trace",
    "scenario_preset",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian N(mu, sigma^2) truncated to [mu - a, mu + b], all in seconds."""

    mu: float
    sigma: float
    a: float
    b: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if self.mu - self.a < 0:
            raise ValueError("mu - a must be >= 0 (delays are nonnegative)")

    @property
    def lower(self) -> float:
        return self.mu - self.a

    @property
    def upper(self) -> float:
        return self.mu + self.b

    def _z_mass(self) -> float:
        return float(ndtr(self.b / self.sigma) - ndtr(-self.a / self.sigma))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        z = (t - self.mu) / self.sigma
        dens = np.exp(-0.5 * z * z) / (_SQRT_2PI * self.sigma * self._z_mass())
        inside = (t >= self.lower) & (t <= self.upper)
        return np.where(inside, dens, 0.0)[()]

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        lo_mass = ndtr(-self.a / self.sigma)
        raw = (ndtr((t - self.mu) / self.sigma) - lo_mass) / self._z_mass()
        return np.clip(np.where(t < self.lower, 0.0, np.where(t > self.upper, 1.0, raw)), 0.0, 1.0)[()]

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        lo_mass = ndtr(-self.a / self.sigma)
        x = self.mu + self.sigma * ndtri(lo_mass + q * self._z_mass())
        return np.clip(x, self.lower, self.upper)[()]

    def sf_strict(self, x):
        """Pr{T > x}; for a continuous law strict vs weak is immaterial."""
        return 1.0 - self.cdf(x)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF sampling: keeps the seed-to-sample map stable."""
        return self.ppf(rng.random(size))

    def mean(self) -> float:
        """Exact mean of the truncated law."""
        za, zb = -self.a / self.sigma, self.b / self.sigma
        phi = lambda z: math.exp(-0.5 * z * z) / _SQRT_2PI
        return self.mu + self.sigma * (phi(za) - phi(zb)) / self._z_mass()


@dataclass(frozen=True)
class Discrete:
    """Finite-support law given as ((value, probability), ...) pairs."""

    support: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.support:
            raise ValueError("support must be nonempty")
        vals = [v for v, _ in self.support]
        probs = [p for _, p in self.support]
        if any(p <= 0 for p in probs):
            raise ValueError("probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        if any(v < 0 for v in vals):
            raise ValueError("values must be nonnegative")
        if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
            raise ValueError("values must be strictly increasing")
        object.__setattr__(self, "support", tuple((float(v), float(p)) for v, p in self.support))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.support])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.support])

    @property
    def lower(self) -> float:
        return self.support[0][0]

    @property
    def upper(self) -> float:
        return self.support[-1][0]

    def sf_strict(self, x):
        """Pr{T > x}, strict: atoms sitting exactly at x do not count."""
        tail = np.concatenate([np.cumsum(self.probs[::-1])[::-1], [0.0]])
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        return tail[idx][()]

    def sample(self, rng: np.random.Generator, size=None):
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.support) - 1)
        return self.values[idx][()]

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))


@dataclass(frozen=True)
class Constant:
    """Degenerate law: the delay is always `value` seconds."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("value must be nonnegative")

    @property
    def lower(self) -> float:
        return self.value

    @property
    def upper(self) -> float:
        return self.value

    def sf_strict(self, x):
        return np.where(np.asarray(x, dtype=float) < self.value, 1.0, 0.0)[()]

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def mean(self) -> float:
        return self.value


DelayDistribution = TruncatedGaussian | Discrete | Constant


def is_finite_support(dist: DelayDistribution) -> bool:
    return isinstance(dist, (Discrete, Constant))


def atoms(dist: DelayDistribution) -> tuple[np.ndarray, np.ndarray]:
    """(values, probabilities) of a finite-support law."""
    if isinstance(dist, Discrete):
        return dist.values, dist.probs
    if isinstance(dist, Constant):
        return np.array([dist.value]), np.array([1.0])
    raise TypeError(f"{type(dist).__name__} has no finite support")


def tg_pdf(dist: TruncatedGaussian, t):
    """Density of the truncated Gaussian at t (zero off-support)."""
    return dist.pdf(t)


def tg_cdf(dist: TruncatedGaussian, t):
    return dist.cdf(t)


def tg_sample(dist: TruncatedGaussian, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)


@dataclass(frozen=True)
class DelayModel:
    """Per-worker delay laws: one computation and one communication
    distribution per worker, applied i.i.d. across the r positions."""

    n: int
    r: int
    comp: tuple[DelayDistribution, ...]
    comm: tuple[DelayDistribution, ...]

    def __post_init__(self):
        if self.n < 1 or self.r < 1:
            raise ValueError("n and r must be >= 1")
        if len(self.comp) != self.n or len(self.comm) != self.n:
            raise ValueError("need exactly one comp and one comm distribution per worker")
        object.__setattr__(self, "comp", tuple(self.comp))
        object.__setattr__(self, "comm", tuple(self.comm))

    @classmethod
    def broadcast(cls, n: int, r: int, comp: DelayDistribution, comm: DelayDistribution) -> "DelayModel":
        """All workers share the same pair of distributions."""
        return cls(n=n, r=r, comp=(comp,) * n, comm=(comm,) * n)

    def all_finite_support(self) -> bool:
        return all(is_finite_support(d) for d in self.comp + self.comm)

    def horizon(self) -> float:
        """Upper bound on any arrival instant: worst worker's r computation
        upper bounds plus one communication upper bound."""
        return max(
            self.r * self.comp[i].upper + self.comm[i].upper for i in range(self.n)
        )


@dataclass(frozen=True)
class DelayTrace:
    """Realized position-indexed delays: comp[i, j] and comm[i, j] are the
    delays of worker i's j-th computation / its transmission (0-based here,
    1-based in the math)."""

    comp: np.ndarray
    comm: np.ndarray

    def __post_init__(self):
        comp = np.asarray(self.comp, dtype=float)
        comm = np.asarray(self.comm, dtype=float)
        if comp.shape != comm.shape or comp.ndim != 2:
            raise ValueError("comp and comm must be matrices of equal shape")
        if not (np.isfinite(comp).all() and np.isfinite(comm).all()):
            raise ValueError("delays must be finite")
        if (comp < 0).any() or (comm < 0).any():
            raise ValueError("delays must be nonnegative")
        comp.setflags(write=False)
        comm.setflags(write=False)
        object.__setattr__(self, "comp", comp)
        object.__setattr__(self, "comm", comm)

    @property
    def n(self) -> int:
        return self.comp.shape[0]

    @property
    def r(self) -> int:
        return self.comp.shape[1]


def sample_trace(model: DelayModel, rng: np.random.Generator) -> DelayTrace:
    """Draw one trace: per worker, r computation delays then r communication
    delays, all independent. Deterministic given the rng state."""
    comp = np.empty((model.n, model.r))
    comm = np.empty((model.n, model.r))
    for i in range(model.n):
        comp[i] = model.comp[i].sample(rng, size=model.r)
        comm[i] = model.comm[i].sample(rng, size=model.r)
    return DelayTrace(comp=comp, comm=comm)


def _scenario_spreads() -> tuple[float, float, float, float]:
    # (a_comp, sigma_comp, a_comm, sigma_comm); symmetric truncation a = b.
    return 3e-5, 1e-4, 2e-4, 2e-4


def scenario_preset(name: str, n: int, r: int, rng: np.random.Generator | None = None) -> DelayModel:
    """Built-in truncated-Gaussian worker populations.

    scenario1: all workers identical (comp mean 0.1 ms, comm mean 0.5 ms).
    scenario2: worker means are random permutations of arithmetic ladders
    (comp step 1/30 ms from 0.1 ms, comm step 0.05 ms from 0.5 ms), so the
    workers are heterogeneous; requires an rng for the permutations.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a1, s1, a2, s2 = _scenario_spreads()
    if name == "scenario1":
        comp = TruncatedGaussian(mu=1e-4, sigma=s1, a=a1, b=a1)
        comm = TruncatedGaussian(mu=5e-4, sigma=s2, a=a2, b=a2)
        return DelayModel.broadcast(n=n, r=r, comp=comp, comm=comm)
    if name == "scenario2":
        if rng is None:
            raise ValueError("scenario2 needs an rng for the mean permutations")
        comp_means = np.array([(2 + i) / 3 * 1e-4 for i in range(1, n + 1)])
        comm_means = np.array([(9 + i) / 2 * 1e-4 for i in range(1, n + 1)])
        comp_means = comp_means[rng.permutation(n)]
        comm_means = comm_means[rng.permutation(n)]
        comp = tuple(TruncatedGaussian(mu=m, sigma=s1, a=a1, b=a1) for m in comp_means)
        comm = tuple(TruncatedGaussian(mu=m, sigma=s2, a=a2, b=a2) for m in comm_means)
        return DelayModel(n=n, r=r, comp=comp, comm=comm)
    raise ValueError(f"unknown scenario preset: {name!r}")
