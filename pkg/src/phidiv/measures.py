"""Tsallis, Renyi, Kullback-Leibler and L2 divergences as phi-kernels.

Tsallis and Renyi share the kernel ``x**a * y**(1-a)`` and differ only in the
transform applied to its sum ``S_a``: ``(S - 1)/(a - 1)`` and ``log(S)/(a - 1)``.
Natural logarithms throughout.

Measure strings (CLI grammar): ``l2``, ``kl``, ``tsallis:<alpha>``,
``renyi:<alpha>``, each optionally suffixed with ``:sym``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import framework as fw
from .framework import PhiSpec

FAMILIES = ("l2", "kl", "tsallis", "renyi")
ALPHA_GAP = 1e-9


class InvalidMeasure(ValueError):
    pass


def check_alpha(alpha) -> float:
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise InvalidMeasure(f"alpha must be a number, got {alpha!r}") from None
    if not math.isfinite(a) or a <= 0:
        raise InvalidMeasure(f"alpha must be positive, got {a}")
    if abs(a - 1.0) < ALPHA_GAP:
        raise InvalidMeasure("alpha must differ from 1 (use 'kl' for the alpha -> 1 limit)")
    return a


@dataclass(frozen=True)
class MeasureKind:
    family: str
    alpha: float | None = None
    symmetrized: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidMeasure(f"unknown measure family {self.family!r}; expected one of {FAMILIES}")
        if self.family in ("tsallis", "renyi"):
            object.__setattr__(self, "alpha", check_alpha(self.alpha))
        elif self.alpha is not None:
            raise InvalidMeasure(f"{self.family} takes no alpha")

    @property
    def label(self) -> str:
        base = self.family if self.alpha is None else f"{self.family}:{self.alpha:g}"
        return base + (":sym" if self.symmetrized else "")

    def base(self) -> MeasureKind:
        return MeasureKind(self.family, self.alpha, False)

    def with_symmetrized(self, flag: bool = True) -> MeasureKind:
        return MeasureKind(self.family, self.alpha, flag)

    def __str__(self):
        return self.label


def parse_measure(text: str) -> MeasureKind:
    """Parse ``kl``, ``l2``, ``tsallis:0.99``, ``renyi:0.5:sym`` and so on."""
    parts = [s.strip() for s in str(text).strip().lower().split(":")]
    sym = False
    if len(parts) > 1 and parts[-1] in ("sym", "s"):
        sym = True
        parts = parts[:-1]
    family = parts[0]
    if family in ("tsallis", "renyi"):
        if len(parts) != 2:
            raise InvalidMeasure(f"{family} needs an alpha, e.g. '{family}:0.5'")
        return MeasureKind(family, check_alpha(parts[1]), sym)
    if len(parts) != 1:
        raise InvalidMeasure(f"cannot parse measure {text!r}")
    return MeasureKind(family, None, sym)


# -- kernels -----------------------------------------------------------------


def _kl_phi(x, y):
    return x * (np.log(x) - np.log(y))


def _kl_d1(x, y):
    return 1.0 + np.log(x) - np.log(y)


def _kl_d2(x, y):
    return -x / y


def _l2_phi(x, y):
    return (x - y) ** 2


def _l2_d1(x, y):
    return 2.0 * (x - y)


def _l2_d2(x, y):
    return -2.0 * (x - y)


@lru_cache(maxsize=64)
def _power_spec(family: str, alpha: float) -> PhiSpec:
    a = alpha

    def phi(x, y):
        return np.exp(a * np.log(x) + (1.0 - a) * np.log(y))

    def d1(x, y):
        return a * np.exp((a - 1.0) * (np.log(x) - np.log(y)))

    def d2(x, y):
        return (1.0 - a) * np.exp(a * (np.log(x) - np.log(y)))

    if family == "tsallis":
        def transform(s):
            return (s - 1.0) / (a - 1.0)

        def transform_deriv(s):
            return np.full_like(np.asarray(s, dtype=np.float64), 1.0 / (a - 1.0))
    else:
        def transform(s):
            return np.log(s) / (a - 1.0)

        def transform_deriv(s):
            return 1.0 / ((a - 1.0) * np.asarray(s, dtype=np.float64))

    return PhiSpec(phi, d1, d2, transform, transform_deriv, name=f"{family}:{a:g}")


_KL = PhiSpec(_kl_phi, _kl_d1, _kl_d2, name="kl")
_L2 = PhiSpec(_l2_phi, _l2_d1, _l2_d2, name="l2", positive_domain=False)


def phi_spec_for(kind: MeasureKind | str) -> PhiSpec:
    """Kernel and transform for the unsymmetrized measure of ``kind``."""
    if isinstance(kind, str):
        kind = parse_measure(kind)
    if kind.family == "kl":
        return _KL
    if kind.family == "l2":
        return _L2
    return _power_spec(kind.family, kind.alpha)


def s_alpha(p, q, alpha):
    """``sum_j p_j**alpha * q_j**(1-alpha)``, evaluated in exp-log form."""
    a = check_alpha(alpha)
    P, Q = fw._pair(p, q, _power_spec("tsallis", a))
    return fw._scalar(np.sum(np.exp(a * np.log(P) + (1.0 - a) * np.log(Q)), axis=-1))


def divergence(kind: MeasureKind | str, p, q):
    """Value of the measure at ``(p, q)``, averaged with ``(q, p)`` if symmetrized."""
    if isinstance(kind, str):
        kind = parse_measure(kind)
    spec = phi_spec_for(kind)
    if kind.symmetrized:
        return fw.symmetrized_value(p, q, spec)
    return fw.j_functional(p, q, spec)


def variances(kind: MeasureKind, p, q, sym_mode: str = "exact"):
    """``(Vp, Vq)`` for the measure, via the generic delta-method engine."""
    return fw.delta_variances(p, q, phi_spec_for(kind), kind.symmetrized, sym_mode)


def closed_form_gradients(kind: MeasureKind, p, q):
    """Hand-derived gradient families ``(g1, g2, g3, g4)`` for the base measure.

    Independent of the kernel callables; used to cross-check the generic engine.
    """
    P, Q = fw._pair(p, q, phi_spec_for(kind))
    if kind.family == "kl":
        return (1.0 + np.log(P / Q), -P / Q, 1.0 + np.log(Q / P), -Q / P)
    if kind.family == "l2":
        return (2.0 * (P - Q), -2.0 * (P - Q), 2.0 * (Q - P), -2.0 * (Q - P))
    a = kind.alpha
    g = (a / (a - 1.0) * (P / Q) ** (a - 1.0), -((P / Q) ** a),
         a / (a - 1.0) * (Q / P) ** (a - 1.0), -((Q / P) ** a))
    if kind.family == "tsallis":
        return g
    s_pq = np.asarray(s_alpha(P, Q, a))[..., None]
    s_qp = np.asarray(s_alpha(Q, P, a))[..., None]
    return (g[0] / s_pq, g[1] / s_pq, g[2] / s_qp, g[3] / s_qp)


_PREFIX = {"kl": "KL", "l2": "L2", "tsallis": "T_alpha", "renyi": "R_alpha"}


@dataclass(frozen=True)
class NamedConstants:
    """Almost-sure bound constants ``A1..A4`` and variances ``V1..V4`` of a measure.

    Index 1/2 refer to ``D(p, q)`` perturbed in ``p``/``q``; index 3/4 to the
    reversed ``D(q, p)`` perturbed in ``q``/``p``. For Renyi, ``tsallis``
    holds the matching Tsallis constants and ``s_pq``/``s_qp`` the two
    summations used to convert between them.
    """

    kind: MeasureKind
    A: tuple
    V: tuple
    s_pq: float | None = None
    s_qp: float | None = None
    tsallis: NamedConstants | None = None

    @property
    def A_sym(self):
        return ((self.A[0] + self.A[3]) / 2, (self.A[1] + self.A[2]) / 2)

    @property
    def V_sym(self):
        return (self.V[0] + self.V[3], self.V[1] + self.V[2])

    def to_dict(self) -> dict:
        pre = _PREFIX[self.kind.family]
        out = {"measure": self.kind.base().label}
        if self.kind.alpha is not None:
            out["alpha"] = self.kind.alpha
        for k in range(4):
            out[f"A_{pre}_{k + 1}"] = float(self.A[k])
        out[f"A_{pre}_1_s"] = float(self.A_sym[0])
        out[f"A_{pre}_2_s"] = float(self.A_sym[1])
        for k in range(4):
            out[f"V_{pre}_{k + 1}"] = float(self.V[k])
        out[f"V_{pre}_1_4"] = float(self.V_sym[0])
        out[f"V_{pre}_2_3"] = float(self.V_sym[1])
        if self.s_pq is not None:
            out["S_alpha_pq"] = float(self.s_pq)
            out["S_alpha_qp"] = float(self.s_qp)
        if self.tsallis is not None:
            out.update({k: v for k, v in self.tsallis.to_dict().items() if k not in ("measure", "alpha")})
            out["check_V_R_times_S2_minus_V_T"] = float(max(
                abs(self.V[k] * self._s(k) ** 2 - self.tsallis.V[k]) for k in range(4)))
            out["check_A_R_times_S_minus_A_T"] = float(max(
                abs(self.A[k] * self._s(k) - self.tsallis.A[k]) for k in range(4)))
        return out

    def _s(self, k):
        return self.s_pq if k < 2 else self.s_qp


def named_constants(kind: MeasureKind | str, p, q) -> NamedConstants:
    """Closed-form ``A`` and ``V`` constants of the base (unsymmetrized) measure.

    The symmetrized combinations are available as ``A_sym``/``V_sym``.
    Renyi constants are the Tsallis ones divided by the summation of the
    matching direction (``S_a(p, q)`` for 1/2, ``S_a(q, p)`` for 3/4), once
    for ``A`` and squared for ``V``.
    """
    if isinstance(kind, str):
        kind = parse_measure(kind)
    kind = kind.base()
    P, Q = fw._pair(p, q, phi_spec_for(kind))
    if kind.family == "renyi":
        t = named_constants(MeasureKind("tsallis", kind.alpha), P, Q)
        s_pq, s_qp = float(s_alpha(P, Q, kind.alpha)), float(s_alpha(Q, P, kind.alpha))
        s = (s_pq, s_pq, s_qp, s_qp)
        return NamedConstants(
            kind,
            tuple(t.A[k] / s[k] for k in range(4)),
            tuple(t.V[k] / s[k] ** 2 for k in range(4)),
            s_pq, s_qp, t,
        )
    g = closed_form_gradients(kind, P, Q)
    A = tuple(float(np.sum(np.abs(gk))) for gk in g)
    V = (
        float(fw.asymptotic_variance(P, g[0])),
        float(fw.asymptotic_variance(Q, g[1])),
        float(fw.asymptotic_variance(Q, g[2])),
        float(fw.asymptotic_variance(P, g[3])),
    )
    if kind.family == "tsallis":
        return NamedConstants(kind, A, V, float(s_alpha(P, Q, kind.alpha)), float(s_alpha(Q, P, kind.alpha)))
    return NamedConstants(kind, A, V)
