"""Pure numpy implementation of the sampling kernels.

Bit-for-bit compatible with the compiled ``_kernels`` extension: both use the
SplitMix64 output function over a Weyl counter, so draw ``i`` of a stream with
seed ``s`` is ``mix(s + (i + 1) * GAMMA)``, mapped to ``[0, 1)`` with 53 bits.
"""
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0 ** -53

# upper bound on uint64 scratch elements held at once
_CHUNK = 1 << 21


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _uniforms(seeds, start, stop):
    """Uniforms for draws ``start..stop-1`` of each stream, shape (len(seeds), stop-start)."""
    ctr = np.arange(start + 1, stop + 1, dtype=np.uint64) * GAMMA
    z = _mix(seeds[:, None] + ctr[None, :])
    return (z >> _S11).astype(np.float64) * _TWO_M53


def categorical_draws(seed, n, cdf):
    """Return ``n`` category indices from one stream.

    ``cdf`` must be nondecreasing with its last relevant entry set to ``inf``.
    """
    seeds = np.array([seed], dtype=np.uint64)
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        u = _uniforms(seeds, start, stop)[0]
        out[start:stop] = np.searchsorted(cdf, u, side="right")
    return out


def categorical_counts(seeds, n, cdf):
    """Category counts for ``len(seeds)`` independent streams of ``n`` draws each.

    Returns an int64 array of shape ``(len(seeds), len(cdf))``.
    """
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    R, r = seeds.shape[0], cdf.shape[0]
    counts = np.zeros((R, r), dtype=np.int64)
    if R == 0:
        return counts
    rows = max(1, _CHUNK // max(n, 1))
    cols = min(n, _CHUNK)
    for r0 in range(0, R, rows):
        r1 = min(R, r0 + rows)
        block = seeds[r0:r1]
        offs = (np.arange(r1 - r0, dtype=np.int64) * r)[:, None]
        for start in range(0, n, cols):
            stop = min(n, start + cols)
            idx = np.searchsorted(cdf, _uniforms(block, start, stop), side="right")
            flat = np.bincount((idx + offs).ravel(), minlength=(r1 - r0) * r)
            counts[r0:r1] += flat.reshape(r1 - r0, r)
    return counts
