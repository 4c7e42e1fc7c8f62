"""Seeded Monte Carlo validation of consistency, asymptotic normality, coverage and a.s. bounds.

Every replication draws from its own stream, seeded by
``derive_seed(master_seed, measure_label, size, k, stream)`` with ``stream``
0 for the ``p`` sample and 1 for the ``q`` sample, so results do not depend
on evaluation order. Standardized draws use the variance at the *true*
``(p, q)``; intervals use the plug-in variance.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import framework as fw
from .inference import MODES, as_rate_certificate
from .measures import MeasureKind, divergence, parse_measure, phi_spec_for, variances
from .normal import norm_cdf, two_sided_quantile
from .pmf import ProbabilityVector, derive_seed, sample_counts

DEFAULT_SIZES = (100, 500, 2000, 10000, 30000)
DEFAULT_REPLICATIONS = 2000
AS_SLACK = 0.05

REFERENCE_P = (0.4, 0.25, 0.35)
REFERENCE_Q = (0.27, 0.32, 0.41)
REFERENCE_SUPPORT = ("c1", "c2", "c3")
REFERENCE_MEASURES = ("tsallis:0.99", "tsallis:0.99:sym", "renyi:0.99", "renyi:0.99:sym",
                  "renyi:0.5", "renyi:0.5:sym", "kl", "kl:sym")


class ConfigError(ValueError):
    pass


# -- Kolmogorov-Smirnov ------------------------------------------------------


def kolmogorov_sf(lam: float, tol: float = 1e-10) -> float:
    """``P(K > lam)`` for the limiting Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # Jacobi theta form, fast for small lam
        c = math.sqrt(2.0 * math.pi) / lam
        w = math.pi ** 2 / (8.0 * lam * lam)
        total, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * w)
            total += term
            if term < tol:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - c * total))
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_normality(values):
    """One-sample KS test against N(0, 1).

    Returns ``(statistic, p_value)``; the p-value uses the asymptotic
    Kolmogorov distribution at ``sqrt(N) * statistic``.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    N = x.shape[0]
    if N < 8:
        raise ValueError(f"need at least 8 values for a KS test, got {N}")
    if not np.all(np.isfinite(x)):
        raise ValueError("KS test values must be finite")
    F = np.array([norm_cdf(v) for v in x])
    i = np.arange(1, N + 1)
    d = max(np.max(i / N - F), np.max(F - (i - 1) / N))
    d = float(min(1.0, max(0.0, d)))
    return d, kolmogorov_sf(math.sqrt(N) * d)


# -- configuration and report ------------------------------------------------


@dataclass(frozen=True)
class SimulationConfig:
    p: ProbabilityVector
    q: ProbabilityVector
    measures: tuple
    mode: str = "two-sample"
    sizes: tuple = DEFAULT_SIZES
    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = 0
    ci_level: float = 0.95
    sym_mode: str = "exact"

    def __post_init__(self):
        ms = tuple(parse_measure(m) if isinstance(m, str) else m for m in self.measures)
        object.__setattr__(self, "measures", ms)
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not ms:
            raise ConfigError("at least one measure is required")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.replications) < 1:
            raise ConfigError(f"replications must be at least 1, got {self.replications}")
        if not self.sizes or self.sizes[0] < 1 or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError(f"sizes must be positive and strictly increasing, got {list(self.sizes)}")
        if self.p.support != self.q.support:
            raise ConfigError("p and q must share a support")
        if not (self.p.strictly_positive and self.q.strictly_positive):
            raise ConfigError("p and q must be strictly positive")
        if not 0 < self.ci_level < 1:
            raise ConfigError(f"ci_level must be in (0, 1), got {self.ci_level}")
        if self.sym_mode not in ("exact", "split"):
            raise ConfigError(f"sym_mode must be 'exact' or 'split', got {self.sym_mode!r}")
        if int(self.master_seed) < 0:
            raise ConfigError("master_seed must be nonnegative")

    @classmethod
    def paper_defaults(cls, **overrides) -> SimulationConfig:
        kw = dict(
            p=ProbabilityVector(REFERENCE_SUPPORT, REFERENCE_P),
            q=ProbabilityVector(REFERENCE_SUPPORT, REFERENCE_Q),
            measures=REFERENCE_MEASURES,
        )
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "support": list(self.p.support),
            "p": self.p.probs.tolist(),
            "q": self.q.probs.tolist(),
            "measures": [m.label for m in self.measures],
            "mode": self.mode,
            "sizes": list(self.sizes),
            "replications": int(self.replications),
            "master_seed": int(self.master_seed),
            "ci_level": self.ci_level,
            "sym_mode": self.sym_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SimulationConfig:
        sup = tuple(d["support"])
        return cls(ProbabilityVector(sup, d["p"]), ProbabilityVector(sup, d["q"]), tuple(d["measures"]),
                   d["mode"], tuple(d["sizes"]), d["replications"], d["master_seed"], d["ci_level"],
                   d.get("sym_mode", "exact"))


STAT_FIELDS = (
    "true_value", "true_variance_p", "true_variance_q", "mean", "sd", "bias", "mean_abs_error",
    "z_mean", "z_sd", "ks_statistic", "ks_p_value", "ci_coverage",
    "as_bound", "as_ratio_median", "as_ratio_max", "as_exceed_fraction",
    "n_valid", "n_bd_excluded", "n_ratio_excluded",
)


@dataclass
class CellSummary:
    """Aggregates for one ``(measure, size)`` cell.

    ``z_*`` and ``ks_*`` are ``None`` when the true variance is zero; ``ks_*``
    also when fewer than 8 standardized draws exist.
    """

    measure: str
    size: int
    true_value: float
    true_variance_p: float
    true_variance_q: float
    mean: float | None
    sd: float | None
    bias: float | None
    mean_abs_error: float | None
    z_mean: float | None
    z_sd: float | None
    ks_statistic: float | None
    ks_p_value: float | None
    ci_coverage: float | None
    as_bound: float
    as_ratio_median: float | None
    as_ratio_max: float | None
    as_exceed_fraction: float | None
    n_valid: int
    n_bd_excluded: int
    n_ratio_excluded: int


@dataclass
class SimulationReport:
    config: dict
    cells: list
    draws: dict = field(default_factory=dict)

    def cell(self, measure, size) -> CellSummary:
        label = measure.label if isinstance(measure, MeasureKind) else parse_measure(measure).label
        for c in self.cells:
            if c.measure == label and c.size == size:
                return c
        raise KeyError((label, size))

    def true_values(self) -> dict:
        out = {}
        for c in self.cells:
            out.setdefault(c.measure, c.true_value)
        return out

    def to_dict(self) -> dict:
        return {"config": self.config, "cells": [asdict(c) for c in self.cells], "draws": self.draws}

    @classmethod
    def from_dict(cls, d: dict) -> SimulationReport:
        return cls(d["config"], [CellSummary(**c) for c in d["cells"]], d.get("draws", {}))


# -- engine ------------------------------------------------------------------


def _f(x):
    """Plain float, with NaN mapped to None for JSON."""
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _stream_counts(config, kind, size, dist, stream):
    seeds = [derive_seed(config.master_seed, kind.label, size, k, stream)
             for k in range(config.replications)]
    return sample_counts(dist, size, seeds)


@dataclass
class _CellDraws:
    values: np.ndarray
    z: np.ndarray | None
    covered: np.ndarray
    ratios: np.ndarray
    n_bd_excluded: int
    n_ratio_excluded: int


def _simulate_cell(config: SimulationConfig, kind: MeasureKind, size: int, truth):
    j_true, vp_true, vq_true, cert = truth
    spec = phi_spec_for(kind)
    p, q = config.p.probs, config.q.probs
    R = config.replications
    if config.mode in ("one-sample-p", "two-sample"):
        P = _stream_counts(config, kind, size, config.p, 0) / size
    else:
        P = np.broadcast_to(p, (R, p.shape[0]))
    if config.mode in ("one-sample-q", "two-sample"):
        Q = _stream_counts(config, kind, size, config.q, 1) / size
    else:
        Q = np.broadcast_to(q, (R, q.shape[0]))

    ok = np.ones(R, dtype=bool)
    if spec.positive_domain:
        ok = np.all(P > 0, axis=1) & np.all(Q > 0, axis=1)
    P, Q = P[ok], Q[ok]

    if P.shape[0]:
        values = np.atleast_1d(divergence(kind, P, Q))
        vp_hat, vq_hat = (np.atleast_1d(v) for v in variances(kind, P, Q, config.sym_mode))
    else:
        values = vp_hat = vq_hat = np.empty(0)

    n = size if config.mode != "one-sample-q" else None
    m = size if config.mode != "one-sample-p" else None
    var_true = (vp_true / n if n else 0.0) + (vq_true / m if m else 0.0)
    var_hat = (vp_hat / n if n else 0.0) + (vq_hat / m if m else 0.0)
    rel_p = [vp_true] if n else []
    rel_q = [vq_true] if m else []
    z = None
    if max(rel_p + rel_q) >= fw.VARIANCE_FLOOR:
        z = (values - j_true) / math.sqrt(var_true)

    zq = two_sided_quantile(config.ci_level)
    covered = np.abs(values - j_true) <= zq * np.sqrt(var_hat)

    a_n = np.max(np.abs(P - p), axis=1)
    b_m = np.max(np.abs(Q - q), axis=1)
    denom = {"one-sample-p": a_n, "one-sample-q": b_m, "two-sample": np.maximum(a_n, b_m)}[config.mode]
    err = np.abs(values - j_true)
    zero = denom == 0
    ratio = np.where(zero, 0.0, err / np.where(zero, 1.0, denom))
    keep = ~zero | (err == 0)
    return _CellDraws(values, z, covered, ratio[keep], int(R - ok.sum()), int((~keep).sum()))


def _truth(config, kind):
    j = float(divergence(kind, config.p, config.q))
    vp, vq = variances(kind, config.p, config.q, config.sym_mode)
    cert = as_rate_certificate(config.p, config.q, kind)
    return j, float(vp), float(vq), cert


def _summarize(config, kind, size, truth, d: _CellDraws) -> CellSummary:
    j_true, vp, vq, cert = truth
    bound = cert.bound(config.mode)
    nv = d.values.shape[0]
    mean = sd = bias = mae = zm = zs = ks_s = ks_p = cov = None
    if nv:
        mean = float(np.mean(d.values))
        sd = float(np.std(d.values, ddof=1)) if nv > 1 else 0.0
        bias = mean - j_true
        mae = float(np.mean(np.abs(d.values - j_true)))
        cov = float(np.mean(d.covered))
        if d.z is not None:
            zm = float(np.mean(d.z))
            zs = float(np.std(d.z, ddof=1)) if nv > 1 else 0.0
            if nv >= 8:
                ks_s, ks_p = ks_normality(d.z)
    rmed = rmax = exceed = None
    if d.ratios.shape[0]:
        rmed = float(np.median(d.ratios))
        rmax = float(np.max(d.ratios))
        exceed = float(np.mean(d.ratios > (1.0 + AS_SLACK) * bound))
    return CellSummary(
        kind.label, size, j_true, vp, vq, _f(mean), _f(sd), _f(bias), _f(mae), _f(zm), _f(zs),
        _f(ks_s), _f(ks_p), _f(cov), float(bound), _f(rmed), _f(rmax), _f(exceed),
        nv, d.n_bd_excluded, d.n_ratio_excluded,
    )


def run(config: SimulationConfig, keep_draws: bool = True) -> SimulationReport:
    """Run every ``(measure, size)`` cell of ``config``.

    ``draws`` maps ``"<measure>@<size>"`` to the standardized statistics in
    replication order (omitted when the true variance is zero).
    """
    cells, draws = [], {}
    for kind in config.measures:
        truth = _truth(config, kind)
        for size in config.sizes:
            d = _simulate_cell(config, kind, size, truth)
            cells.append(_summarize(config, kind, size, truth, d))
            if keep_draws and d.z is not None:
                draws[f"{kind.label}@{size}"] = [float(v) for v in d.z]
    return SimulationReport(config.to_dict(), cells, draws)


@dataclass(frozen=True)
class AsRatioSummary:
    measure: str
    mode: str
    size: int
    bound: float
    slack: float
    exceed_fraction: float | None
    median_ratio: float | None
    max_ratio: float | None
    n_used: int
    n_excluded: int


def as_ratio_check(config: SimulationConfig, kind: MeasureKind | str) -> AsRatioSummary:
    """Fraction of replications at the largest size whose deviation ratio exceeds ``1.05 * bound``."""
    kind = parse_measure(kind) if isinstance(kind, str) else kind
    size = config.sizes[-1]
    truth = _truth(config, kind)
    d = _simulate_cell(config, kind, size, truth)
    s = _summarize(config, kind, size, truth, d)
    return AsRatioSummary(kind.label, config.mode, size, s.as_bound, AS_SLACK, s.as_exceed_fraction,
                          s.as_ratio_median, s.as_ratio_max, int(d.ratios.shape[0]), d.n_ratio_excluded)


# -- output ------------------------------------------------------------------


def report_json(report: SimulationReport, include_draws: bool = False) -> str:
    doc = report.to_dict()
    if not include_draws:
        doc["draws"] = {}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def report_csv(report: SimulationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", "mode", "size", "statistic", "value"])
    mode = report.config["mode"]
    for c in report.cells:
        for name in STAT_FIELDS:
            v = getattr(c, name)
            w.writerow([c.measure, mode, c.size, name, "" if v is None else repr(v)])
    return buf.getvalue()


def emit(report: SimulationReport, fmt: str = "json", destination=None, draws_dir=None,
         include_draws: bool = False) -> None:
    """Write the report as ``json`` or ``csv`` to a path, a text stream, or stdout.

    With ``draws_dir``, standardized draws are also written one float per line,
    one file per cell (``<measure>@<size>.txt`` with ``:`` replaced by ``_``).
    """
    if fmt == "json":
        text = report_json(report, include_draws)
    elif fmt == "csv":
        text = report_csv(report)
    else:
        raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")
    if draws_dir is not None:
        out = Path(draws_dir)
        out.mkdir(parents=True, exist_ok=True)
        for key, vals in report.draws.items():
            fname = key.replace(":", "_") + ".txt"
            (out / fname).write_text("".join(f"{v!r}\n" for v in vals), encoding="utf-8")
