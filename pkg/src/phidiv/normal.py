"""Standard normal CDF, tail and quantile.

The CDF goes through ``math.erfc`` so tails keep full relative precision. The
quantile starts from Acklam's rational approximation (relative error about
1.15e-9) and takes one Halley step against the erfc-based CDF, which brings the
absolute error well below 1e-12 on ``[1e-300, 1 - 1e-16]``.
"""
import math

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_sf(x: float) -> float:
    """Upper tail ``P(Z > x)``."""
    return 0.5 * math.erfc(x / _SQRT2)


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _acklam(p: float) -> float:
    if p < _P_LOW:
        t = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5])
                / ((((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0))
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    s = p - 0.5
    t = s * s
    return ((((((_A[0] * t + _A[1]) * t + _A[2]) * t + _A[3]) * t + _A[4]) * t + _A[5]) * s
            / (((((_B[0] * t + _B[1]) * t + _B[2]) * t + _B[3]) * t + _B[4]) * t + 1.0))


def norm_ppf(p: float) -> float:
    """Inverse of :func:`norm_cdf`.

    Returns ``-inf``/``inf`` at 0/1 and raises ``ValueError`` outside ``[0, 1]``.
    """
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    x = _acklam(p)
    # Halley refinement; the residual is taken on the nearer tail to avoid cancellation
    if p < 0.5:
        e = norm_cdf(x) - p
    else:
        e = (1.0 - p) - norm_sf(x)
    u = e * _SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def two_sided_quantile(level: float) -> float:
    """``z`` with ``P(|Z| <= z) = level``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    return -norm_ppf(0.5 * (1.0 - level))
