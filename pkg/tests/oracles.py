"""Independent oracles used only by the test-suite.

These deliberately avoid the package's own evaluation paths: the subentropy
oracle works from the raw pole-sum formula in extended precision, and the
degenerate case is reached by symmetric eigenvalue perturbations followed by
Richardson extrapolation instead of any confluent table.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np


def subentropy_raw(values, dps: int = 60):
    """-sum_i v_i^m ln(v_i) / prod_{j != i}(v_i - v_j) for distinct values."""
    with mp.workdps(dps):
        vals = [mp.mpf(v) for v in values]
        m = len(vals)
        total = mp.mpf(0)
        for i, vi in enumerate(vals):
            if vi == 0:
                continue
            denom = mp.mpf(1)
            for j, vj in enumerate(vals):
                if j != i:
                    denom *= vi - vj
            total += vi**m * mp.log(vi) / denom
        return -total


def _perturb_ties(values, delta):
    """Split exactly tied values by a symmetric, sum-preserving progression."""
    vals = sorted(float(v) for v in values)
    out = []
    i = 0
    while i < len(vals):
        j = i
        while j < len(vals) and vals[j] == vals[i]:
            j += 1
        size = j - i
        for r in range(size):
            out.append(vals[i] + delta * (r - (size - 1) / 2.0))
        i = j
    return out


def subentropy_perturbation_oracle(values, deltas=(1e-6, 1e-7, 1e-8), dps: int = 60) -> float:
    """Subentropy of a degenerate spectrum by the limit definition.

    Evaluates the raw formula at symmetrically split eigenvalues for a
    decreasing sequence of offsets and removes the even-order error terms
    by two Richardson steps (the split is symmetric, so the error expansion
    contains only even powers of the offset).
    """
    if len(deltas) != 3:
        raise ValueError("expected exactly three offsets")
    q_a, q_b, q_c = (subentropy_raw(_perturb_ties(values, d), dps) for d in deltas)
    r1 = (100 * q_b - q_a) / 99
    r2 = (100 * q_c - q_b) / 99
    return float((10000 * r2 - r1) / 9999)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(a, compute_uv=False).sum())


def random_tied_spectrum(gen: np.random.Generator, m: int):
    """A spectrum of dimension m with at least one exactly repeated eigenvalue.

    Distinct levels are kept at least 1e-3 apart relative to the largest and
    no smaller than 1e-3 absolute, so the perturbation oracle stays
    well-conditioned.
    """
    while True:
        k = int(gen.integers(1, m))  # number of distinct levels
        cuts = np.sort(gen.choice(np.arange(1, m), size=k - 1, replace=False)) if k > 1 else []
        sizes = np.diff(np.concatenate(([0], cuts, [m]))).astype(int)
        levels = np.sort(gen.random(k))[::-1]
        values = np.repeat(levels, sizes)
        values = values / values.sum()
        levels_n = np.unique(values)
        if levels_n.min() < 1e-3:
            continue
        if len(levels_n) > 1 and np.diff(levels_n).min() < 1e-3 * levels_n.max():
            continue
        return values
