"""Task-ordering schedules for master-worker computing.

A schedule is an n x r integer matrix: row i lists, in execution order, the
task indices (1-based, in [1, n]) that worker i computes. Constructors build
the cyclic, staircase, and random-assignment orderings; arbitrary matrices
can be loaded from text and checked with :func:`validate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TaskOrderMatrix",
    "CompletionConfig",
    "ValidationReport",
    "wrap_index",
    "cyclic_schedule",
    "staircase_schedule",
    "random_assignment_schedule",
    "validate",
]


@dataclass(frozen=True)
class TaskOrderMatrix:
    """n x r matrix of task indices; row i is worker i's execution order."""

    n: int
    r: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.int64)
        if ent.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        if ent.shape != (self.n, self.r):
            raise ValueError(
                f"entries shape {ent.shape} does not match (n={self.n}, r={self.r})"
            )
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    def row(self, i: int) -> np.ndarray:
        """Execution order of worker i (1-based worker index)."""
        return self.entries[i - 1]

    def task_at(self, i: int, j: int) -> int:
        """Task computed by worker i as its j-th computation (both 1-based)."""
        return int(self.entries[i - 1, j - 1])

    def distinct_tasks(self) -> set[int]:
        return set(np.unique(self.entries).tolist())

    def to_text(self) -> str:
        """Serialize: first line ``n r``, then n rows of r integers."""
        lines = [f"{self.n} {self.r}"]
        lines += [" ".join(str(v) for v in row) for row in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TaskOrderMatrix":
        """Parse the plain text format produced by :meth:`to_text`."""
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty schedule text")
        header = lines[0].split()
        if len(header) != 2:
            raise ValueError("first line must be 'n r'")
        n, r = int(header[0]), int(header[1])
        if len(lines) != n + 1:
            raise ValueError(f"expected {n} matrix rows, got {len(lines) - 1}")
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
        if any(len(row) != r for row in rows):
            raise ValueError(f"every row must have {r} entries")
        return cls(n=n, r=r, entries=np.array(rows, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, TaskOrderMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.r == other.r
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.n, self.r, self.entries.tobytes()))


@dataclass(frozen=True)
class CompletionConfig:
    """Problem size: n workers, computation load r, computation target k."""

    n: int
    r: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 1 <= self.r <= self.n:
            raise ValueError(f"r must be in [1, n={self.n}], got {self.r}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must be in [1, n={self.n}], got {self.k}")


def wrap_index(m: int, n: int) -> int:
    """Map m to the task index in [1, n] by wrapping once around the ring.

    Defined for m in [1-n, 2n], the only range the schedule constructors
    produce; anything outside signals a constructor bug and raises.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (1 - n) <= m <= 2 * n:
        raise ValueError(f"m={m} outside supported range [{1 - n}, {2 * n}]")
    if 1 <= m <= n:
        return m
    if m >= n + 1:
        return m - n
    return m + n


def cyclic_schedule(n: int, r: int) -> TaskOrderMatrix:
    """Cyclic ordering: worker i computes tasks i, i+1, ... wrapping mod n.

    Entry (i, j) is wrap_index(i + j - 1), so every task has the same
    execution position at every worker that holds it.
    """
    if not 1 <= r <= n:
        raise ValueError(f"require 1 <= r <= n, got r={r}, n={n}")
    ent = np.empty((n, r), dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, r + 1):
            ent[i - 1, j - 1] = wrap_index(i + j - 1, n)
    return TaskOrderMatrix(n=n, r=r, entries=ent)


def staircase_schedule(n: int, r: int) -> TaskOrderMatrix:
    """Staircase ordering: odd rows ascend, even rows descend (mod n).

    Entry (i, j) is wrap_index(i + (-1)**(i-1) * (j-1)), giving
    alternating computation directions across workers.
    """
    if not 1 <= r <= n:
        raise ValueError(f"require 1 <= r <= n, got r={r}, n={n}")
    ent = np.empty((n, r), dtype=np.int64)
    for i in range(1, n + 1):
        step = 1 if i % 2 == 1 else -1
        for j in range(1, r + 1):
            ent[i - 1, j - 1] = wrap_index(i + step * (j - 1), n)
    return TaskOrderMatrix(n=n, r=r, entries=ent)


def random_assignment_schedule(n: int, rng: np.random.Generator) -> TaskOrderMatrix:
    """Each worker's row is an independent uniform permutation of [1..n].

    Random assignment always uses full load r = n. Reproducible from the
    caller-supplied rng.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ent = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        ent[i] = rng.permutation(n) + 1
    return TaskOrderMatrix(n=n, r=n, entries=ent)


@dataclass
class ValidationReport:
    """Hard errors make a schedule unusable; lints flag suboptimal rows."""

    errors: list[str]
    lints: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(matrix: TaskOrderMatrix, config: CompletionConfig) -> ValidationReport:
    """Check a schedule against a completion config.

    Hard errors: dimension mismatch with the config, entries outside
    [1, n], or fewer than k distinct tasks assigned anywhere. Duplicate
    entries within a row are legal (any matrix is a valid ordering) but
    never optimal, so they are reported as lints.
    """
    errors: list[str] = []
    lints: list[str] = []

    if matrix.n != config.n or matrix.r != config.r:
        errors.append(
            f"dimension mismatch: matrix is {matrix.n}x{matrix.r}, "
            f"config expects {config.n}x{config.r}"
        )

    ent = matrix.entries
    bad = (ent < 1) | (ent > config.n)
    if bad.any():
        for i, j in zip(*np.nonzero(bad)):
            errors.append(
                f"entry out of range at row {i + 1}, col {j + 1}: "
                f"{ent[i, j]} not in [1, {config.n}]"
            )

    for i, row in enumerate(ent):
        if len(set(row.tolist())) < len(row):
            lints.append(f"duplicate in row {i + 1}")

    distinct = len(matrix.distinct_tasks() & set(range(1, config.n + 1)))
    if distinct < config.k:
        errors.append(f"only {distinct} distinct task(s) assigned < k={config.k}")

    return ValidationReport(errors=errors, lints=lints)
