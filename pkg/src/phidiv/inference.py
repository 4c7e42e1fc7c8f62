"""Plug-in estimates, Wald intervals and tests for one- and two-sample designs.

Modes
-----
``one-sample-p``
    ``p`` observed through counts, ``q`` known; estimates ``D(p_hat, q)``.
``one-sample-q``
    ``p`` known, ``q`` observed; estimates ``D(p, q_hat)``.
``two-sample``
    both observed, sizes ``n`` and ``m`` arbitrary; estimates ``D(p_hat, q_hat)``.

At ``p = q`` every gradient here is constant, the delta-method variance is
zero and the normal limit does not apply. Such estimates are flagged
``degenerate`` and tests report no statistic or p-value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import framework as fw
from .framework import DivergenceEstimate
from .measures import MeasureKind, divergence, parse_measure, phi_spec_for, variances
from .normal import norm_cdf, norm_sf, two_sided_quantile
from .pmf import CountTable, ProbabilityVector, SupportError

MODES = ("one-sample-p", "one-sample-q", "two-sample")
ALTERNATIVES = ("two-sided", "greater", "less")


@dataclass(frozen=True)
class EstimateRequest:
    """Inputs for :func:`estimate`.

    ``smooth=None`` is the strict policy: zero cells raise for measures that
    take logs or divide. A positive ``smooth`` adds that many pseudo-counts to
    every cell before forming the plug-in pmf.
    """

    mode: str
    measure: MeasureKind
    p_counts: CountTable | None = None
    q_counts: CountTable | None = None
    p_known: ProbabilityVector | None = None
    q_known: ProbabilityVector | None = None
    smooth: float | None = None
    sym_mode: str = "exact"

    def __post_init__(self):
        if isinstance(self.measure, str):
            object.__setattr__(self, "measure", parse_measure(self.measure))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        need = {
            "one-sample-p": ("p_counts", "q_known"),
            "one-sample-q": ("p_known", "q_counts"),
            "two-sample": ("p_counts", "q_counts"),
        }[self.mode]
        for name in ("p_counts", "q_counts", "p_known", "q_known"):
            present = getattr(self, name) is not None
            if present != (name in need):
                verb = "requires" if name in need else "does not take"
                raise ValueError(f"mode {self.mode} {verb} {name}")


def estimate(req: EstimateRequest) -> DivergenceEstimate:
    """Plug-in estimate with variances evaluated at the plug-in point."""
    if req.mode == "one-sample-p":
        p, q = req.p_counts.to_pmf(req.smooth), req.q_known
        n, m = req.p_counts.total, None
    elif req.mode == "one-sample-q":
        p, q = req.p_known, req.q_counts.to_pmf(req.smooth)
        n, m = None, req.q_counts.total
    else:
        p, q = req.p_counts.to_pmf(req.smooth), req.q_counts.to_pmf(req.smooth)
        n, m = req.p_counts.total, req.q_counts.total
    if p.support != q.support:
        raise SupportError(f"support mismatch: {list(p.support)} vs {list(q.support)}")
    value = divergence(req.measure, p, q)
    vp, vq = variances(req.measure, p, q, req.sym_mode)
    return DivergenceEstimate(
        value=float(value),
        variance_p=float(vp) if n is not None else 0.0,
        variance_q=float(vq) if m is not None else 0.0,
        n=n,
        m=m,
        measure=req.measure.label,
        mode=req.mode,
    )


def confidence_interval(est: DivergenceEstimate, level: float = 0.95):
    """``value -/+ z * stderr``; collapses to ``(value, value)`` when degenerate."""
    z = two_sided_quantile(level)
    if est.degenerate:
        return est.value, est.value
    half = z * est.stderr
    return est.value - half, est.value + half


@dataclass(frozen=True)
class TestResult:
    estimate: DivergenceEstimate
    z: float | None
    p_value: float | None
    ci_low: float
    ci_high: float
    level: float
    degenerate: bool
    null_value: float = 0.0
    alternative: str = "two-sided"

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return result_document(self.estimate, self.level, self)


def wald_test(est: DivergenceEstimate, null_value: float = 0.0,
              alternative: str = "two-sided", level: float = 0.95) -> TestResult:
    """Wald test of ``D = null_value`` using the plug-in standard error."""
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    lo, hi = confidence_interval(est, level)
    if est.degenerate:
        return TestResult(est, None, None, lo, hi, level, True, null_value, alternative)
    z = (est.value - null_value) / est.stderr
    if alternative == "greater":
        pv = norm_sf(z)
    elif alternative == "less":
        pv = norm_cdf(z)
    else:
        pv = math.erfc(abs(z) / math.sqrt(2.0))
    return TestResult(est, z, min(1.0, pv), lo, hi, level, False, null_value, alternative)


def result_document(est: DivergenceEstimate, level: float = 0.95, test: TestResult | None = None) -> dict:
    """The JSON result document shared by the ``estimate`` and ``test`` commands."""
    if test is None:
        lo, hi = confidence_interval(est, level)
        z = pv = None
    else:
        lo, hi, z, pv = test.ci_low, test.ci_high, test.z, test.p_value
    doc = {
        "measure": est.measure,
        "mode": est.mode,
        "value": est.value,
        "stderr": est.stderr,
        "variance_p": est.variance_p,
        "variance_q": est.variance_q,
        "n": est.n,
        "m": est.m,
        "z": z,
        "p_value": pv,
        "ci": [lo, hi],
        "level": level,
        "degenerate": est.degenerate,
    }
    if test is not None:
        doc["null_value"] = test.null_value
        doc["alternative"] = test.alternative
    return doc


@dataclass(frozen=True)
class RateCertificate:
    """Almost-sure bound constants for each design, transform factors applied.

    ``A`` are the four directional constants; the design bounds combine them
    (halved sums for symmetrized measures).
    """

    measure: str
    A: tuple
    one_sample_p: float
    one_sample_q: float
    two_sample: float

    def bound(self, mode: str) -> float:
        return {"one-sample-p": self.one_sample_p, "one-sample-q": self.one_sample_q,
                "two-sample": self.two_sample}[mode]

    def statements(self) -> dict:
        return {
            "one-sample-p": f"limsup |D(p_n,q) - D(p,q)| / a_n <= {self.one_sample_p!r}",
            "one-sample-q": f"limsup |D(p,q_m) - D(p,q)| / b_m <= {self.one_sample_q!r}",
            "two-sample": f"limsup |D(p_n,q_m) - D(p,q)| / max(a_n,b_m) <= {self.two_sample!r}",
        }

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "A": list(self.A),
            "bound_one_sample_p": self.one_sample_p,
            "bound_one_sample_q": self.one_sample_q,
            "bound_two_sample": self.two_sample,
            "statements": self.statements(),
        }


def as_rate_certificate(p, q, kind: MeasureKind | str) -> RateCertificate:
    """Bound constants for ``kind`` at ``(p, q)``.

    The raw kernel constants are scaled by ``|transform'(S)|`` of the matching
    direction, which turns them into the Tsallis and Renyi constants.
    """
    if isinstance(kind, str):
        kind = parse_measure(kind)
    spec = phi_spec_for(kind)
    raw = fw.as_bound_constants(p, q, spec)
    P, Q = fw._pair(p, q, spec)
    f_pq = abs(float(spec.transform_deriv(fw._raw_sum(P, Q, spec))))
    f_qp = abs(float(spec.transform_deriv(fw._raw_sum(Q, P, spec))))
    A = (raw.A1 * f_pq, raw.A2 * f_pq, raw.A3 * f_qp, raw.A4 * f_qp)
    if kind.symmetrized:
        bp, bq = (A[0] + A[3]) / 2, (A[1] + A[2]) / 2
    else:
        bp, bq = A[0], A[1]
    return RateCertificate(kind.label, A, bp, bq, bp + bq)
