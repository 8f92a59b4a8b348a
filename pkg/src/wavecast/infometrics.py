"""k-nearest-neighbour mutual information and normalized mutual information.

The estimator is Kraskov-Stoegbauer-Grassberger variant 1: for every sample
the Chebyshev distance ``eps`` to its k-th neighbour in the joint space is
found, and the marginal neighbours *strictly* closer than ``eps`` are
counted,

    I = psi(k) + psi(n) - < psi(n_x + 1) + psi(n_y + 1) >.

Estimates are in nats.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .compression import compress, decompress
from .exceptions import ConfigurationError, DataError, InsufficientSamplesError

EULER_GAMMA = 0.57721566490153286061

# B_{2k} / (2k) for k = 1..7
_ASYMPTOTIC = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)


def digamma(x):
    """Digamma function for positive arguments (scalar or array).

    Small arguments are shifted above 6 with ``psi(x) = psi(x + 1) - 1/x``
    before the asymptotic series is applied.

    >>> round(digamma(1.0), 12)
    -0.577215664902
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~(arr > 0)):
        raise ValueError("digamma is only defined here for x > 0")
    z = arr.copy()
    acc = np.zeros_like(z)
    small = z < 6.0
    while np.any(small):
        acc[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = z < 6.0
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for coef in reversed(_ASYMPTOTIC):
        series = (series + coef) * inv2
    out = np.log(z) - 0.5 / z - series + acc
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class MIEstimate:
    """Clipped estimate ``value`` plus the raw (possibly negative) one."""

    value: float
    k: int
    n: int
    raw: float


@dataclass(frozen=True)
class NmiPoint:
    rate: float
    nmi: float


def _strict_counts(values, eps):
    # neighbours j != i with |v_j - v_i| < eps_i
    ordered = np.sort(values)
    lo = np.searchsorted(ordered, values - eps, side="right")
    hi = np.searchsorted(ordered, values + eps, side="left")
    return np.maximum(hi - lo - 1, 0)


def _jittered(values, amplitude, rng):
    span = float(np.ptp(values))
    if amplitude <= 0 or span == 0:
        return values
    return values + amplitude * span * rng.standard_normal(len(values))


def ksg_mi(x, y, k=10, jitter=0.0, random_state=None):
    """Estimate ``I(X; Y)`` for two scalar samples of equal length.

    Parameters
    ----------
    x, y : array-like of shape (n,)
    k : int
        Neighbour count.
    jitter : float
        If positive, Gaussian noise with standard deviation ``jitter`` times
        each variable's range is added first, which breaks ties from repeated
        values. Deterministic given ``random_state``.
    random_state : int, sequence of int or Generator, optional

    Returns
    -------
    MIEstimate
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(x) != len(y):
        raise DataError(f"x and y differ in length ({len(x)} vs {len(y)})")
    if np.isnan(x).any() or np.isnan(y).any():
        raise DataError("NaN in mutual information input")
    k = int(k)
    n = len(x)
    if k < 1:
        raise ConfigurationError(f"k must be positive, got {k}")
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got {n}")
    if jitter > 0:
        rng = np.random.default_rng(random_state)
        x = _jittered(x, jitter, rng)
        y = _jittered(y, jitter, rng)
    joint = np.column_stack([x, y])
    dist, _ = cKDTree(joint).query(joint, k=k + 1, p=np.inf)
    eps = dist[:, k]
    nx = _strict_counts(x, eps)
    ny = _strict_counts(y, eps)
    raw = digamma(k) + digamma(n) - float(np.mean(digamma(nx + 1.0) + digamma(ny + 1.0)))
    return MIEstimate(max(raw, 0.0), k, n, raw)


def _rate_seed(jitter_seed, rate):
    return [int(jitter_seed), int(round(rate * 1e12))]


def nmi_curve(original, wavelet, rates, k=10, jitter_seed=0, jitter=1e-10, levels="auto", mode="symmetric"):
    """Normalized mutual information between lossy reconstructions and ``original``.

    ``NMI(r) = I(Y_r; Y) / I(Y_0; Y)`` where ``Y_r`` is the reconstruction at
    rate ``r`` and ``Y_0`` the rate-0 (perfect) reconstruction. Ties are
    broken by seeded jitter derived from ``(jitter_seed, r)``; the original
    signal always receives the same jitter, so ``NMI(0)`` is exactly 1.
    Values are clipped to ``[0, 1]``.
    """
    rates = [float(r) for r in rates]
    if any(b < a for a, b in zip(rates, rates[1:])):
        raise ConfigurationError("rates must be sorted ascending")
    y = np.asarray(original, dtype=np.float64)
    y_jit = _jittered(y, jitter, np.random.default_rng([int(jitter_seed), 7919]))

    def mi_at(rate):
        recon = decompress(compress(y, wavelet, rate, levels, mode))
        recon = _jittered(recon, jitter, np.random.default_rng(_rate_seed(jitter_seed, rate)))
        return ksg_mi(recon, y_jit, k).value

    norm = mi_at(0.0)
    if norm <= 0:
        raise DataError("mutual information of the signal with itself came out non-positive")
    points = []
    for rate in rates:
        value = norm if rate == 0.0 else mi_at(rate)
        points.append(NmiPoint(rate, min(1.0, max(0.0, value / norm))))
    return points


def pooled_nmi(originals, wavelet, rate, k=10, jitter_seed=0, jitter=1e-10, levels="auto", mode="symmetric"):
    """NMI of several signals treated as one sample.

    Each signal is compressed on its own; the reconstructions and originals
    are then concatenated before estimating. Jitter seeding follows
    :func:`nmi_curve`.
    """
    originals = [np.asarray(y, dtype=np.float64) for y in originals]
    if not originals:
        raise InsufficientSamplesError("no signals to pool")
    rate = float(rate)
    y = np.concatenate(originals)
    y_jit = _jittered(y, jitter, np.random.default_rng([int(jitter_seed), 7919]))

    def mi_at(r):
        recon = np.concatenate([decompress(compress(s, wavelet, r, levels, mode)) for s in originals])
        recon = _jittered(recon, jitter, np.random.default_rng(_rate_seed(jitter_seed, r)))
        return ksg_mi(recon, y_jit, k).value

    norm = mi_at(0.0)
    if norm <= 0:
        raise DataError("mutual information of the signal with itself came out non-positive")
    if rate == 0.0:
        return 1.0
    return min(1.0, max(0.0, mi_at(rate) / norm))


def logit_rates(n=20, low=0.01, high=0.999):
    """``n`` rates evenly spaced on the logit scale between ``low`` and ``high``."""
    lo, hi = math.log(low / (1 - low)), math.log(high / (1 - high))
    grid = np.linspace(lo, hi, n)
    return (1.0 / (1.0 + np.exp(-grid))).tolist()
