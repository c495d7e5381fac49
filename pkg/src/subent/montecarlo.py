"""Chunked, reproducible Monte Carlo estimation of the spectral functionals.

Samples are drawn in fixed-size chunks, chunk i from RngStream(seed, i),
and the per-chunk summaries are merged in chunk order. Results therefore
depend only on (seed, chunk size, sample count) and never on how many
workers executed the chunks. A failed sample aborts the whole run; nothing
is resampled, since that would bias the measure.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .closedform import levy_coherence_bound
from .errors import DimensionOrder, DomainError, SingularSample
from .qcore import Spectrum, entropy_values, subentropy_values
from .sampling import RngStream, complex_normals

DEFAULT_CHUNK = 1024
FUNCTIONALS = ("entropy", "subentropy", "coherence")
LIPSCHITZ_FUNCTIONALS = ("coherence", "dephased_entropy", "entropy")
_MIN_PAIR_DISTANCE = 1e-8


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Streaming mean/variance summary of one scalar sample set."""

    mean: float
    variance: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("an estimate needs at least one sample")

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count)

    @property
    def stddev(self) -> float:
        return math.sqrt(self.variance)

    @classmethod
    def from_samples(cls, values) -> "MonteCarloEstimate":
        v = np.asarray(values, dtype=float)
        n = v.size
        mean = float(v.mean())
        variance = float(np.square(v - mean).sum() / (n - 1)) if n > 1 else 0.0
        return cls(mean, variance, n)

    def combine(self, other: "MonteCarloEstimate") -> "MonteCarloEstimate":
        """Merge two disjoint sample summaries (parallel Welford update)."""
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        mean = self.mean + delta * (nb / n)
        m2 = (
            self.variance * (na - 1)
            + other.variance * (nb - 1)
            + delta * delta * (na * nb / n)
        )
        return MonteCarloEstimate(mean, m2 / (n - 1) if n > 1 else 0.0, n)


@dataclass(frozen=True)
class TailReport:
    """Empirical tail fraction of the coherence against its concentration bound."""

    epsilon: float
    center: float
    empirical_fraction: float
    levy_bound: float
    count: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.empirical_fraction <= 1.0:
            raise ValueError("the empirical fraction must lie in [0, 1]")


@dataclass(frozen=True)
class ConcentrationRow:
    """Coherence spread at square dimensions n = m for one m."""

    m: int
    mean: float
    stddev: float
    stderr: float
    count: int
    target: float


@dataclass(frozen=True)
class LipschitzReport:
    """Largest observed difference quotient over random pure-state pairs."""

    max_ratio: float
    evaluated: int
    skipped: int


def _check_dims(m: int, n: int) -> None:
    if m < 1:
        raise DomainError("system dimension must be positive")
    if m > n:
        raise DimensionOrder(f"need m <= n, got m={m}, n={n}")


def _chunk_sizes(samples: int, chunk: int) -> list[int]:
    if chunk < 1:
        raise DomainError("chunk size must be positive")
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    return sizes


def _run_ordered(fn, tasks, workers: int) -> list:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(task) for task in tasks]


def _merge(parts: list[MonteCarloEstimate]) -> MonteCarloEstimate:
    merged = parts[0]
    for part in parts[1:]:
        merged = merged.combine(part)
    return merged


def _induced_spectra(m: int, n: int, stream: RngStream, size: int):
    """Spectra and diagonals of `size` induced-measure states from one stream."""
    gen = stream.generator()
    g = complex_normals(gen, size * m * n).reshape(size, m, n)
    rho = g @ np.conjugate(np.swapaxes(g, 1, 2))
    trace = np.einsum("sii->s", rho).real[:, None, None]
    # componentwise: complex/scalar division would round twice
    rho.real /= trace
    rho.imag /= trace
    lams = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    diag = np.clip(np.einsum("sii->si", rho).real, 0.0, None)
    return lams, diag


def _functional_samples(which: str, lams: np.ndarray, diag: np.ndarray) -> np.ndarray:
    if which == "entropy":
        return entropy_values(lams)
    if which == "subentropy":
        return subentropy_values(lams)
    if which == "coherence":
        return np.maximum(entropy_values(diag) - entropy_values(lams), 0.0)
    raise DomainError(f"unknown functional {which!r}")


def _induced_chunk(task) -> MonteCarloEstimate:
    m, n, which, seed, index, size = task
    lams, diag = _induced_spectra(m, n, RngStream(seed, index), size)
    return MonteCarloEstimate.from_samples(_functional_samples(which, lams, diag))


def estimate_functional(
    m: int,
    n: int,
    which: str,
    samples: int,
    seed: int,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Average of one spectral functional over induced-measure random states."""
    _check_dims(m, n)
    if which not in FUNCTIONALS:
        raise DomainError(f"which must be one of {FUNCTIONALS}")
    if samples < 2:
        raise DomainError("need at least two samples")
    tasks = [
        (m, n, which, seed, index, size)
        for index, size in enumerate(_chunk_sizes(samples, chunk))
    ]
    return _merge(_run_ordered(_induced_chunk, tasks, workers))


def _isospectral_chunk(task) -> MonteCarloEstimate:
    values, seed, index, size = task
    lam = np.asarray(values, dtype=float)
    m = lam.size
    gen = RngStream(seed, index).generator()
    g = complex_normals(gen, size * m * m).reshape(size, m, m)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=1, axis2=2)
    if np.any(d == 0):
        raise SingularSample("QR met an exactly singular Ginibre draw")
    u = q * (d / np.abs(d))[:, None, :]
    diag = np.abs(u) ** 2 @ lam
    base = float(entropy_values(lam[None, :])[0])
    return MonteCarloEstimate.from_samples(np.maximum(entropy_values(diag) - base, 0.0))


def estimate_isospectral_coherence(
    spec: Spectrum,
    samples: int,
    seed: int,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Average coherence of U diag(spec) U^H over Haar-random U.

    The spectrum is held fixed, so each sample only needs the diagonal of
    the rotated state; the subtracted entropy is that of the spectrum itself.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    values = tuple(float(v) for v in spec.values)
    tasks = [
        (values, seed, index, size)
        for index, size in enumerate(_chunk_sizes(samples, chunk))
    ]
    return _merge(_run_ordered(_isospectral_chunk, tasks, workers))


def _tail_chunk(task) -> list[int]:
    m, n, epsilons, center, seed, index, size = task
    lams, diag = _induced_spectra(m, n, RngStream(seed, index), size)
    coherence = np.maximum(entropy_values(diag) - entropy_values(lams), 0.0)
    deviation = np.abs(coherence - center)
    return [int((deviation > eps).sum()) for eps in epsilons]


def tail_experiment(
    m: int,
    n: int,
    epsilons,
    samples: int,
    seed: int,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> list[TailReport]:
    """Empirical coherence tail fractions against the concentration bounds."""
    if m < 3:
        raise DomainError("the concentration bound needs m >= 3")
    _check_dims(m, n)
    if samples < 2:
        raise DomainError("need at least two samples")
    eps = tuple(float(e) for e in epsilons)
    if any(e <= 0 for e in eps):
        raise DomainError("epsilons must be positive")
    center = (m - 1) / (2 * n)
    tasks = [
        (m, n, eps, center, seed, index, size)
        for index, size in enumerate(_chunk_sizes(samples, chunk))
    ]
    totals = [0] * len(eps)
    for counts in _run_ordered(_tail_chunk, tasks, workers):
        totals = [a + b for a, b in zip(totals, counts)]
    return [
        TailReport(e, center, total / samples, levy_coherence_bound(m, n, e), samples)
        for e, total in zip(eps, totals)
    ]


def concentration_sweep(
    ms,
    samples: int,
    seed: int,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> list[ConcentrationRow]:
    """Sample spread of the coherence at n = m across a grid of dimensions."""
    rows = []
    for m in ms:
        if m < 2:
            raise DomainError("the sweep needs m >= 2")
        est = estimate_functional(m, m, "coherence", samples, seed, chunk, workers)
        rows.append(
            ConcentrationRow(m, est.mean, est.stddev, est.stderr, est.count, (m - 1) / (2 * m))
        )
    return rows


def _pure_pair_values(states: np.ndarray, m: int, n: int, which: str) -> np.ndarray:
    mats = states.reshape(-1, m, n)
    diag = np.square(np.abs(mats)).sum(axis=2)
    if which == "dephased_entropy":
        return entropy_values(diag)
    rho = mats @ np.conjugate(np.swapaxes(mats, 1, 2))
    lams = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    if which == "entropy":
        return entropy_values(lams)
    return entropy_values(diag) - entropy_values(lams)


def _lipschitz_ratios(psi, phi, m, n, which):
    distance = np.linalg.norm(psi - phi, axis=1)
    keep = distance >= _MIN_PAIR_DISTANCE
    skipped = int((~keep).sum())
    if not keep.any():
        return np.empty(0), skipped
    f = _pure_pair_values(psi[keep], m, n, which)
    g = _pure_pair_values(phi[keep], m, n, which)
    return np.abs(f - g) / distance[keep], skipped


def _lipschitz_chunk(task):
    m, n, which, seed, index, size = task
    dim = m * n
    gen = RngStream(seed, index).generator()
    raw = complex_normals(gen, 2 * size * dim).reshape(size, 2, dim)
    raw /= np.linalg.norm(raw, axis=2)[:, :, None]
    ratios, skipped = _lipschitz_ratios(raw[:, 0, :], raw[:, 1, :], m, n, which)
    peak = float(ratios.max()) if ratios.size else 0.0
    return peak, int(ratios.size), skipped


def lipschitz_check(
    m: int,
    n: int,
    pairs: int,
    seed: int,
    which: str = "coherence",
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> LipschitzReport:
    """Max |F(psi) - F(phi)| / ||psi - phi|| over random pure-state pairs.

    F maps a bipartite pure state to a functional of its m-dimensional
    marginal: its coherence, the entropy of its diagonal, or its entropy.
    Pairs closer than 1e-8 are skipped as ill-conditioned and counted.
    """
    if m < 3:
        raise DomainError("the Lipschitz bound is stated for m >= 3")
    _check_dims(m, n)
    if which not in LIPSCHITZ_FUNCTIONALS:
        raise DomainError(f"which must be one of {LIPSCHITZ_FUNCTIONALS}")
    if pairs < 1:
        raise DomainError("need at least one pair")
    tasks = [
        (m, n, which, seed, index, size)
        for index, size in enumerate(_chunk_sizes(pairs, chunk))
    ]
    peak, evaluated, skipped = 0.0, 0, 0
    for part_peak, part_evaluated, part_skipped in _run_ordered(_lipschitz_chunk, tasks, workers):
        peak = max(peak, part_peak)
        evaluated += part_evaluated
        skipped += part_skipped
    return LipschitzReport(peak, evaluated, skipped)
