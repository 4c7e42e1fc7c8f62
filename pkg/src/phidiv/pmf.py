"""Finite-support probability vectors, empirical pmfs, and seeded categorical sampling.

Every vector carries its support; vectors over the same support are compared
positionally, so two vectors whose labels match in a different order are
treated as a mismatch rather than silently realigned.
"""
from __future__ import annotations

import csv
import json
import math
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels

SUM_TOL = 1e-12
DEFAULT_SMOOTHING = 0.5

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SupportError(ValueError):
    """Labels do not form a valid support, or two supports disagree."""


class EmptySampleError(ValueError):
    pass


def _check_support(support: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(str(s) for s in support)
    if len(labels) < 2:
        raise SupportError(f"support must have at least 2 points, got {len(labels)}")
    if len(set(labels)) != len(labels):
        dup = [k for k, v in Counter(labels).items() if v > 1]
        raise SupportError(f"duplicate support labels: {dup}")
    return labels


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A probability mass function over an ordered finite support.

    Parameters
    ----------
    support
        Distinct labels, at least two. Order is significant.
    probs
        Nonnegative entries summing to one within ``1e-12``.
    """

    support: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        support = _check_support(self.support)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if probs.shape[0] != len(support):
            raise ValueError(f"{probs.shape[0]} probabilities for {len(support)} support points")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError(f"probabilities must lie in [0, 1], got {probs.tolist()}")
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, support: Sequence[str]) -> ProbabilityVector:
        r = len(support)
        return cls(tuple(support), np.full(r, 1.0 / r))

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.probs > 0))

    def __len__(self):
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return self.support == other.support and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.support, self.probs.tobytes()))

    def __repr__(self):
        body = ", ".join(f"{s}={p:.6g}" for s, p in zip(self.support, self.probs))
        return f"ProbabilityVector({body})"

    def to_dict(self) -> dict:
        return {"support": list(self.support), "probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class CountTable:
    """Category counts over an ordered support."""

    support: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        support = _check_support(self.support)
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if counts.shape[0] != len(support):
            raise ValueError(f"{counts.shape[0]} counts for {len(support)} support points")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if counts.sum() <= 0:
            raise EmptySampleError("empty sample")
        counts.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return self.support == other.support and np.array_equal(self.counts, other.counts)

    def to_pmf(self, smooth: float | None = None) -> ProbabilityVector:
        """Empirical pmf; ``smooth`` adds ``smooth`` pseudo-counts to every cell."""
        if smooth is None:
            return ProbabilityVector(self.support, self.counts / self.total)
        if smooth <= 0:
            raise ValueError(f"smoothing constant must be positive, got {smooth}")
        r = len(self.support)
        return ProbabilityVector(self.support, (self.counts + smooth) / (self.total + smooth * r))

    def reorder(self, support: Sequence[str]) -> CountTable:
        """Same counts over a permutation of this table's support."""
        support = tuple(support)
        if set(support) != set(self.support) or len(support) != len(self.support):
            raise SupportError(f"cannot reorder {list(self.support)} as {list(support)}")
        pos = {s: i for i, s in enumerate(self.support)}
        return CountTable(support, self.counts[[pos[s] for s in support]])


@dataclass(frozen=True)
class SampleBatch:
    """Observed labels, in draw order."""

    observations: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(str(o) for o in self.observations))

    @property
    def size(self) -> int:
        return len(self.observations)

    def __len__(self):
        return len(self.observations)


def empirical_pmf(samples: SampleBatch | Iterable[str], support: Sequence[str]):
    """Empirical pmf and count table of ``samples`` over ``support``.

    Returns
    -------
    (ProbabilityVector, CountTable)
    """
    support = _check_support(support)
    obs = samples.observations if isinstance(samples, SampleBatch) else tuple(samples)
    if not obs:
        raise EmptySampleError("empty sample")
    pos = {s: i for i, s in enumerate(support)}
    counts = np.zeros(len(support), dtype=np.int64)
    tally = Counter(obs)
    for label, c in tally.items():
        if label not in pos:
            raise SupportError(f"label {label!r} is not in the support")
        counts[pos[label]] = c
    table = CountTable(support, counts)
    return table.to_pmf(), table


def _same_support(a, b):
    if a.support != b.support:
        raise SupportError(f"support mismatch: {list(a.support)} vs {list(b.support)}")


def sup_deviation(estimate: ProbabilityVector, truth: ProbabilityVector) -> float:
    """``max_j |estimate_j - truth_j|``."""
    _same_support(estimate, truth)
    return float(np.max(np.abs(estimate.probs - truth.probs)))


def joint_sup_deviation(a_n: float, b_m: float) -> float:
    return max(a_n, b_m)


def validate_bd(p: ProbabilityVector, q: ProbabilityVector) -> bool:
    """True iff every entry of both ``p`` and ``q`` is strictly positive."""
    _same_support(p, q)
    return p.strictly_positive and q.strictly_positive


# -- seeding and sampling ----------------------------------------------------


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _key_int(key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    key = int(key)
    if key < 0:
        raise ValueError(f"seed keys must be nonnegative, got {key}")
    return key & _MASK


def derive_seed(master_seed: int, *keys) -> int:
    """Deterministic 64-bit stream seed for ``(master_seed, *keys)``.

    Keys may be nonnegative integers or strings. Distinct key tuples give
    statistically independent SplitMix64 streams.
    """
    h = _mix64(_key_int(master_seed) + _GAMMA)
    for key in keys:
        h = _mix64(h ^ _mix64(_key_int(key) + _GAMMA))
    return h


def sampling_cdf(probs) -> np.ndarray:
    """Inverse-CDF table: cumulative sums, with ``inf`` from the last positive cell on."""
    probs = np.asarray(probs, dtype=np.float64)
    cdf = np.cumsum(probs)
    last = int(np.flatnonzero(probs > 0)[-1])
    cdf[last:] = np.inf
    return cdf


def sample_categorical(p: ProbabilityVector, n: int, seed: int) -> SampleBatch:
    """``n`` i.i.d. draws from ``p``; identical for identical ``(p, n, seed)``."""
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    idx = kernels.categorical_draws(_key_int(seed), int(n), sampling_cdf(p.probs))
    labels = np.asarray(p.support, dtype=object)[idx]
    return SampleBatch(tuple(labels))


def sample_counts(p: ProbabilityVector, n: int, seeds) -> np.ndarray:
    """Counts for many seeded batches at once, shape ``(len(seeds), len(p))``.

    Row ``k`` equals the counts of ``sample_categorical(p, n, seeds[k])``.
    """
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    seeds = np.asarray([_key_int(s) for s in seeds], dtype=np.uint64)
    return kernels.categorical_counts(seeds, int(n), sampling_cdf(p.probs))


# -- file formats ------------------------------------------------------------


def read_distribution(path) -> ProbabilityVector:
    """Load ``{"support": [...], "probs": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        return ProbabilityVector(tuple(doc["support"]), doc["probs"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: expected keys 'support' and 'probs'") from exc


def write_distribution(p: ProbabilityVector, path) -> None:
    Path(path).write_text(json.dumps(p.to_dict()) + "\n", encoding="utf-8")


def read_count_table(path) -> CountTable:
    """Load a ``label,count`` CSV (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["label", "count"]:
            raise ValueError(f"{path}: header must be 'label,count'")
        labels, counts = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                counts.append(int(row["count"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad count {row['count']!r}") from exc
            labels.append(row["label"].strip())
    return CountTable(tuple(labels), counts)


def write_count_table(table: CountTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "count"])
        for label, c in zip(table.support, table.counts):
            w.writerow([label, int(c)])


def read_samples(path) -> SampleBatch:
    """Load one label per line; blank lines are ignored."""
    with open(path, encoding="utf-8") as fh:
        obs = [line.strip() for line in fh]
    return SampleBatch(tuple(o for o in obs if o))
