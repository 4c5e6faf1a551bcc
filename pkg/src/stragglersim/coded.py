"""Worked polynomial-coded baselines at n=4 workers, load r=2.

Two constructions are demonstrated end to end on a 4-way partitioned
dataset: the one-shot code, where each worker returns the sum of its two
encoded products and any 3 of the 4 worker results recover the full
gradient sum through a degree-2 interpolation; and the multi-message code,
where each of the 8 encoded products is an evaluation of one degree-6
vector polynomial and any 7 of them recover it. Both decode back to
sum_i X_i X_i^T theta exactly (up to float interpolation error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BarycentricInterpolator

__all__ = [
    "PartitionedDataset",
    "DEFAULT_PCMM_BETAS",
    "pc_encode_n4r2",
    "pc_worker_output",
    "pc_decode_n4r2",
    "pcmm_encode_n4r2",
    "pcmm_worker_output",
    "pcmm_decode_n4r2",
    "gradient_sum",
    "coded_demo_report",
]

# Chebyshev-style evaluation points on [0.5, 4.5]: well separated from each
# other and from the interpolation targets 1..4, keeping the degree-6
# interpolation well conditioned.
DEFAULT_PCMM_BETAS = tuple(
    2.5 + 2.0 * math.cos((2 * j - 1) * math.pi / 16) for j in range(1, 9)
)


@dataclass(frozen=True)
class PartitionedDataset:
    """Dataset split into n column blocks: x_parts[i] is d x (N/n),
    y_parts[i] has length N/n. Rows are zero-padded so n divides N."""

    x_parts: tuple[np.ndarray, ...]
    y_parts: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.x_parts or len(self.x_parts) != len(self.y_parts):
            raise ValueError("need matching, nonempty x and y partitions")
        d = self.x_parts[0].shape[0]
        cols = self.x_parts[0].shape[1]
        for xp, yp in zip(self.x_parts, self.y_parts):
            if xp.shape != (d, cols) or yp.shape != (cols,):
                raise ValueError("all partitions must share shape (d, N/n)")

    @property
    def n(self) -> int:
        return len(self.x_parts)

    @property
    def d(self) -> int:
        return self.x_parts[0].shape[0]

    @classmethod
    def from_dense(cls, x: np.ndarray, y: np.ndarray, n: int) -> "PartitionedDataset":
        """Split row-blocks of the N x d matrix into n transposed parts,
        zero-padding the tail so every part has ceil(N/n) columns."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError("x must be N x d and y length N")
        big_n = x.shape[0]
        cols = math.ceil(big_n / n)
        pad = cols * n - big_n
        if pad:
            x = np.vstack([x, np.zeros((pad, x.shape[1]))])
            y = np.concatenate([y, np.zeros(pad)])
        x_parts = tuple(x[i * cols : (i + 1) * cols].T.copy() for i in range(n))
        y_parts = tuple(y[i * cols : (i + 1) * cols].copy() for i in range(n))
        return cls(x_parts=x_parts, y_parts=y_parts)


def gradient_sum(parts: PartitionedDataset, theta: np.ndarray) -> np.ndarray:
    """Uncoded reference: sum_i X_i X_i^T theta."""
    return sum(xp @ (xp.T @ theta) for xp in parts.x_parts)


def pc_encode_n4r2(parts: PartitionedDataset) -> list[tuple[np.ndarray, np.ndarray]]:
    """Worker i stores -(i-2)*X1 + (i-1)*X3 and -(i-2)*X2 + (i-1)*X4."""
    if parts.n != 4:
        raise ValueError("this demo is fixed to n=4 partitions")
    x1, x2, x3, x4 = parts.x_parts
    encoded = []
    for i in range(1, 5):
        encoded.append((-(i - 2) * x1 + (i - 1) * x3, -(i - 2) * x2 + (i - 1) * x4))
    return encoded


def pc_worker_output(pair: tuple[np.ndarray, np.ndarray], theta: np.ndarray) -> np.ndarray:
    """Worker-side computation: the summed encoded gradient products."""
    a, b = pair
    return a @ (a.T @ theta) + b @ (b.T @ theta)


def pc_decode_n4r2(results: list[tuple[int, np.ndarray]]) -> np.ndarray:
    """Recover the gradient sum from any 3 worker outputs.

    Worker i's output is the value at x=i of a degree-2 vector polynomial
    whose values at 1 and 2 add up to the full gradient sum.
    """
    if len(results) != 3:
        raise ValueError("need exactly 3 worker results")
    workers = [w for w, _ in results]
    if len(set(workers)) != 3:
        raise ValueError("worker indices must be distinct")
    if any(not 1 <= w <= 4 for w in workers):
        raise ValueError("worker indices must lie in [1, 4]")
    xs = np.array(workers, dtype=float)
    ys = np.stack([np.asarray(v, dtype=float) for _, v in results])
    poly = BarycentricInterpolator(xs, ys)
    return poly(1.0) + poly(2.0)


def pcmm_encode_n4r2(
    parts: PartitionedDataset, betas=DEFAULT_PCMM_BETAS
) -> list[tuple[tuple[float, np.ndarray], tuple[float, np.ndarray]]]:
    """Worker i stores the degree-3 interpolant of X1..X4 evaluated at its
    two points betas[2i-2], betas[2i-1]; returns ((beta, matrix), ...) pairs."""
    if parts.n != 4:
        raise ValueError("this demo is fixed to n=4 partitions")
    betas = tuple(float(b) for b in betas)
    if len(betas) != 8 or len(set(betas)) != 8:
        raise ValueError("need 8 distinct evaluation points")
    encoded = []
    for i in range(4):
        pair = tuple((beta, _lagrange_mix(parts.x_parts, beta)) for beta in betas[2 * i : 2 * i + 2])
        encoded.append(pair)
    return encoded


def _lagrange_mix(x_parts, beta: float) -> np.ndarray:
    """Sum of X_m weighted by the Lagrange basis over nodes 1..4 at beta."""
    mix = np.zeros_like(x_parts[0])
    for m, xp in enumerate(x_parts, start=1):
        weight = 1.0
        for other in range(1, 5):
            if other != m:
                weight *= (beta - other) / (m - other)
        mix += weight * xp
    return mix


def pcmm_worker_output(entry: tuple[float, np.ndarray], theta: np.ndarray) -> tuple[float, np.ndarray]:
    """One sequential computation: (beta, encoded product at beta)."""
    beta, mat = entry
    return beta, mat @ (mat.T @ theta)


def pcmm_decode_n4r2(evaluations: list[tuple[float, np.ndarray]]) -> np.ndarray:
    """Recover the gradient sum from any 7 encoded products.

    The products are evaluations of one degree-6 vector polynomial; its
    values at 1..4 sum to the full gradient sum.
    """
    if len(evaluations) != 7:
        raise ValueError("need exactly 7 evaluations")
    xs = np.array([b for b, _ in evaluations], dtype=float)
    if len(np.unique(xs)) != 7:
        raise ValueError("evaluation points must be distinct")
    ys = np.stack([np.asarray(v, dtype=float) for _, v in evaluations])
    poly = BarycentricInterpolator(xs, ys)
    return sum(poly(float(i)) for i in range(1, 5))


def _relative_error(got: np.ndarray, want: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(want)), 1e-300)
    return float(np.linalg.norm(got - want)) / scale


def coded_demo_report(d: int = 8, big_n: int = 32, seed: int = 0, betas=DEFAULT_PCMM_BETAS) -> dict:
    """Run both demos on fresh random data; report worst relative errors
    over every recoverable subset (all 3-of-4 workers, all 7-of-8 points)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((big_n, d))
    y = rng.standard_normal(big_n)
    theta = rng.standard_normal(d)
    parts = PartitionedDataset.from_dense(x, y, 4)
    want = gradient_sum(parts, theta)

    pc_outputs = [(i + 1, pc_worker_output(pair, theta)) for i, pair in enumerate(pc_encode_n4r2(parts))]
    pc_err = 0.0
    for skip in range(4):
        subset = [pc_outputs[i] for i in range(4) if i != skip]
        pc_err = max(pc_err, _relative_error(pc_decode_n4r2(subset), want))

    encoded = pcmm_encode_n4r2(parts, betas)
    evaluations = [pcmm_worker_output(entry, theta) for pair in encoded for entry in pair]
    pcmm_err = 0.0
    for skip in range(8):
        subset = [evaluations[i] for i in range(8) if i != skip]
        pcmm_err = max(pcmm_err, _relative_error(pcmm_decode_n4r2(subset), want))

    return {"pc_max_rel_error": pc_err, "pcmm_max_rel_error": pcmm_err}
