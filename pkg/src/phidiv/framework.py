"""Generic phi-divergence functional, gradients, delta-method variances and bound constants.

All functions accept :class:`~phidiv.pmf.ProbabilityVector` arguments or plain
arrays. Arrays may carry leading batch dimensions; the support is always the
last axis, so ``p`` of shape ``(R, r)`` against ``q`` of shape ``(r,)`` gives
``R`` results at once.

The asymptotic variance of a linear statistic ``sum_j g_j p_hat_j`` is the
variance of ``g`` under ``p``::

    V = sum_j p_j g_j**2 - (sum_j p_j g_j)**2

which is the multinomial covariance ``diag(p) - p p^T`` sandwiched by ``g``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .pmf import ProbabilityVector, SupportError

FD_STEP = 1e-6
FD_RTOL = 1e-5
VARIANCE_FLOOR = 1e-12


class BDViolation(ValueError):
    """A zero probability where the kernel takes a log or divides.

    Attributes
    ----------
    index
        Position of the first offending entry.
    label
        Its support label, when known.
    argument
        ``"p"`` or ``"q"``.
    """

    def __init__(self, argument, index, label=None):
        self.argument = argument
        self.index = index
        self.label = label
        where = f"label {label!r}" if label is not None else f"index {index}"
        super().__init__(f"zero probability in {argument} at {where}: "
                         "all entries must be strictly positive for this measure")


def _identity(s):
    return s


def _one(s):
    return np.ones_like(np.asarray(s, dtype=np.float64))


@dataclass(frozen=True)
class PhiSpec:
    """A divergence kernel ``phi(s, t)`` with its first partials.

    ``transform`` maps the summed kernel to the reported value (identity for
    plain phi-divergences; Tsallis and Renyi are transforms of the same sum).
    All callables must broadcast over numpy arrays.
    """

    phi: Callable
    d1: Callable
    d2: Callable
    transform: Callable = _identity
    transform_deriv: Callable = _one
    name: str = "phi"
    positive_domain: bool = True

    def check_derivatives(self, s, t, h: float = FD_STEP, rtol: float = FD_RTOL, floor: float = 1e-3):
        """Compare ``d1``, ``d2`` with central differences of ``phi`` at ``(s, t)``.

        Returns the worst scaled error; below 1 means the check passed. The
        scale is ``rtol * max(|analytic|, floor)`` so points where a partial
        vanishes do not divide by zero.
        """
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        fd1 = (self.phi(s + h, t) - self.phi(s - h, t)) / (2 * h)
        fd2 = (self.phi(s, t + h) - self.phi(s, t - h)) / (2 * h)
        a1, a2 = self.d1(s, t), self.d2(s, t)
        e1 = np.abs(fd1 - a1) / (rtol * np.maximum(np.abs(a1), floor))
        e2 = np.abs(fd2 - a2) / (rtol * np.maximum(np.abs(a2), floor))
        return float(max(np.max(e1), np.max(e2)))

    def check_transform(self, x, h: float = FD_STEP, rtol: float = FD_RTOL, floor: float = 1e-3):
        x = np.asarray(x, dtype=np.float64)
        fd = (self.transform(x + h) - self.transform(x - h)) / (2 * h)
        a = self.transform_deriv(x)
        return float(np.max(np.abs(fd - a) / (rtol * np.maximum(np.abs(a), floor))))


def _probs(x):
    if isinstance(x, ProbabilityVector):
        return x.probs
    return np.asarray(x, dtype=np.float64)


def _labels(*xs):
    for x in xs:
        if isinstance(x, ProbabilityVector):
            return x.support
    return None


def _pair(p, q, spec: PhiSpec | None = None):
    if isinstance(p, ProbabilityVector) and isinstance(q, ProbabilityVector) and p.support != q.support:
        raise SupportError(f"support mismatch: {list(p.support)} vs {list(q.support)}")
    P, Q = _probs(p), _probs(q)
    if P.shape[-1] != Q.shape[-1]:
        raise ValueError(f"length mismatch: {P.shape[-1]} vs {Q.shape[-1]}")
    if spec is not None and spec.positive_domain:
        labels = _labels(p, q)
        for name, arr in (("p", P), ("q", Q)):
            bad = np.flatnonzero(np.any((arr <= 0).reshape(-1, arr.shape[-1]), axis=0))
            if bad.size:
                j = int(bad[0])
                raise BDViolation(name, j, labels[j] if labels else None)
    return P, Q


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _raw_sum(P, Q, spec):
    return np.sum(spec.phi(P, Q), axis=-1)


def j_functional(p, q, spec: PhiSpec):
    """``transform(sum_j phi(p_j, q_j))``."""
    P, Q = _pair(p, q, spec)
    return _scalar(spec.transform(_raw_sum(P, Q, spec)))


def gradient_weights(p, q, spec: PhiSpec, argument: str = "first"):
    """Partial derivatives of :func:`j_functional` with respect to each ``p_j`` or ``q_j``.

    ``argument="first"`` differentiates in ``p``, ``"second"`` in ``q``. The
    transform's chain-rule factor is included.
    """
    P, Q = _pair(p, q, spec)
    scale = spec.transform_deriv(_raw_sum(P, Q, spec))[..., None]
    if argument == "first":
        return scale * spec.d1(P, Q)
    if argument == "second":
        return scale * spec.d2(P, Q)
    raise ValueError(f"argument must be 'first' or 'second', got {argument!r}")


def asymptotic_variance(p, g):
    """Variance of ``g`` under ``p``: the delta-method variance of ``sqrt(n)(J(p_hat) - J(p))``.

    Computed in centred form, so it is nonnegative and unchanged when a
    constant is added to ``g``.
    """
    P = _probs(p)
    G = np.asarray(g, dtype=np.float64)
    if P.shape[-1] != G.shape[-1]:
        raise ValueError(f"length mismatch: {P.shape[-1]} probabilities, {G.shape[-1]} weights")
    mean = np.sum(P * G, axis=-1, keepdims=True)
    return _scalar(np.sum(P * (G - mean) ** 2, axis=-1))


class BoundConstants(NamedTuple):
    """Sums of absolute kernel partials; see :func:`as_bound_constants`."""

    A1: float
    A2: float
    A3: float
    A4: float


def as_bound_constants(p, q, spec: PhiSpec) -> BoundConstants:
    """Raw kernel bound constants (no transform factor).

    ``A1 = sum|d1(p, q)|``, ``A2 = sum|d2(p, q)|``, ``A3 = sum|d1(q, p)|``,
    ``A4 = sum|d2(q, p)|``.
    """
    P, Q = _pair(p, q, spec)
    return BoundConstants(
        _scalar(np.sum(np.abs(spec.d1(P, Q)), axis=-1)),
        _scalar(np.sum(np.abs(spec.d2(P, Q)), axis=-1)),
        _scalar(np.sum(np.abs(spec.d1(Q, P)), axis=-1)),
        _scalar(np.sum(np.abs(spec.d2(Q, P)), axis=-1)),
    )


def symmetrized_value(p, q, spec: PhiSpec):
    """``(J(p, q) + J(q, p)) / 2``."""
    P, Q = _pair(p, q, spec)
    fwd = spec.transform(_raw_sum(P, Q, spec))
    rev = spec.transform(_raw_sum(Q, P, spec))
    return _scalar(0.5 * (fwd + rev))


def gradient_families(p, q, spec: PhiSpec):
    """The four gradient families ``(g1, g2, g3, g4)``.

    ``g1``/``g2`` differentiate ``J(p, q)`` in ``p``/``q``; ``g3``/``g4``
    differentiate the reversed ``J(q, p)`` in ``q``/``p``.
    """
    P, Q = _pair(p, q, spec)
    return (
        gradient_weights(P, Q, spec, "first"),
        gradient_weights(P, Q, spec, "second"),
        gradient_weights(Q, P, spec, "first"),
        gradient_weights(Q, P, spec, "second"),
    )


def symmetrized_variance(p, q, spec: PhiSpec, mode: str = "exact"):
    """Asymptotic variances ``(Vp, Vq)`` of the symmetrized functional.

    ``mode="exact"`` takes the variance of the averaged gradient, which keeps
    the covariance between the two directions (both use the same sample).
    ``mode="split"`` returns ``(V1 + V4)/4`` and ``(V2 + V3)/4``, dropping
    that covariance.
    """
    P, Q = _pair(p, q, spec)
    g1, g2, g3, g4 = gradient_families(P, Q, spec)
    if mode == "exact":
        return (asymptotic_variance(P, 0.5 * (g1 + g4)), asymptotic_variance(Q, 0.5 * (g2 + g3)))
    if mode == "split":
        vp = 0.25 * (np.asarray(asymptotic_variance(P, g1)) + asymptotic_variance(P, g4))
        vq = 0.25 * (np.asarray(asymptotic_variance(Q, g2)) + asymptotic_variance(Q, g3))
        return _scalar(vp), _scalar(vq)
    raise ValueError(f"mode must be 'exact' or 'split', got {mode!r}")


def delta_variances(p, q, spec: PhiSpec, symmetrized: bool = False, sym_mode: str = "exact"):
    """``(Vp, Vq)``: variances attached to the ``p`` sample and the ``q`` sample."""
    if symmetrized:
        return symmetrized_variance(p, q, spec, sym_mode)
    P, Q = _pair(p, q, spec)
    return (
        asymptotic_variance(P, gradient_weights(P, Q, spec, "first")),
        asymptotic_variance(Q, gradient_weights(P, Q, spec, "second")),
    )


def multinomial_covariance(p) -> np.ndarray:
    """Limit covariance of ``sqrt(n/p_j) (p_hat_j - p_j)``.

    Diagonal ``1 - p_j``, off-diagonal ``-sqrt(p_i p_j)``.
    """
    P = _probs(p)
    if P.ndim != 1:
        raise ValueError("expected a single probability vector")
    if np.any(P <= 0):
        j = int(np.flatnonzero(P <= 0)[0])
        raise BDViolation("p", j, _labels(p)[j] if _labels(p) else None)
    root = np.sqrt(P)
    cov = -np.outer(root, root)
    np.fill_diagonal(cov, 1.0 - P)
    return cov


@dataclass(frozen=True)
class DivergenceEstimate:
    """A point estimate with its plug-in asymptotic variances.

    ``variance_p`` pairs with sample size ``n`` and ``variance_q`` with ``m``;
    a side without a sample has size ``None`` and contributes nothing to the
    standard error.
    """

    value: float
    variance_p: float
    variance_q: float
    n: int | None
    m: int | None
    measure: str
    mode: str = "two-sample"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.variance_p < 0 or self.variance_q < 0:
            raise ValueError("variances must be nonnegative")
        if self.n is None and self.m is None:
            raise ValueError("at least one sample size is required")

    @property
    def stderr(self) -> float:
        total = 0.0
        if self.n is not None:
            total += self.variance_p / self.n
        if self.m is not None:
            total += self.variance_q / self.m
        return float(np.sqrt(total))

    @property
    def degenerate(self) -> bool:
        relevant = []
        if self.n is not None:
            relevant.append(self.variance_p)
        if self.m is not None:
            relevant.append(self.variance_q)
        return max(relevant) < VARIANCE_FLOOR
