"""NMI curve fitting with the regularized incomplete beta function, and elbow selection."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import ConfigurationError

_TINY = 1e-300
_EPS = 1e-16


def _beta_cf(x, a, b, max_iter=10000):
    # continued fraction for I_x(a, b), modified Lentz
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge for x={x}, a={a}, b={b}")


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function ``I_x(a, b)``.

    Evaluated by continued fraction, using ``I_x(a, b) = 1 - I_{1-x}(b, a)``
    when ``x > (a + 1) / (a + b + 2)`` so the fraction converges quickly.

    >>> reg_inc_beta(0.5, 2.0, 1.0)
    0.25
    """
    x, a, b = float(x), float(a), float(b)
    if not (0.0 <= x <= 1.0) or not (a > 0 and b > 0):
        raise ValueError(f"reg_inc_beta needs 0 <= x <= 1 and a, b > 0; got x={x}, a={a}, b={b}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(x, a, b) / a
    return 1.0 - front * _beta_cf(1.0 - x, b, a) / b


def nmi_model(rates, alpha, beta):
    """``1 - I_r(alpha, beta)`` evaluated at each rate."""
    return np.array([1.0 - reg_inc_beta(r, alpha, beta) for r in np.atleast_1d(rates)])


@dataclass(frozen=True)
class BetaFit:
    alpha: float
    beta: float
    sse: float
    converged: bool = True
    n_iter: int = 0

    def predict(self, rates):
        return nmi_model(rates, self.alpha, self.beta)

    def steepness_report(self):
        """Qualitative description of where the fitted curve drops fastest.

        Lower ``alpha`` means a steeper loss as the rate leaves 0; lower
        ``beta`` a steeper loss as it approaches 1.
        """
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "steep_near_zero": self.alpha < 1.0,
            "steep_near_one": self.beta < 1.0,
            "median_rate": _median_rate(self.alpha, self.beta),
        }


def _median_rate(alpha, beta):
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(mid, alpha, beta) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


LOG_BOUNDS = (math.log(1e-3), math.log(1e3))


def fit_beta_curve(points, max_iter=2000, tol=1e-8):
    """Least-squares fit of ``NMI(r) = 1 - I_r(alpha, beta)``.

    Nelder-Mead on ``(log alpha, log beta)`` from ``(1, 1)``, bounded to
    ``[1e-3, 1e3]``. Stops when every simplex vertex lies within ``tol`` of
    the best one, or after ``max_iter`` iterations; ``converged`` says which.

    Parameters
    ----------
    points : iterable of NmiPoint or (rate, nmi) pairs
        Points with rates outside ``(0, 1)`` are ignored since the model
        fixes them.
    """
    pairs = [(p.rate, p.nmi) if hasattr(p, "rate") else tuple(p) for p in points]
    pairs = [(float(r), float(v)) for r, v in pairs if 0.0 < r < 1.0]
    rates = np.array([r for r, _ in pairs])
    values = np.array([v for _, v in pairs])
    if len(np.unique(rates)) < 3:
        raise ConfigurationError("need at least 3 distinct rates in (0, 1) to fit a beta curve")

    def objective(theta):
        a, b = np.exp(np.clip(theta, *LOG_BOUNDS))
        return float(np.sum((values - nmi_model(rates, a, b)) ** 2))

    start = np.zeros(2)
    res = minimize(
        objective,
        start,
        method="Nelder-Mead",
        bounds=[LOG_BOUNDS, LOG_BOUNDS],
        options={"xatol": tol, "fatol": np.inf, "maxiter": max_iter, "maxfev": 50 * max_iter},
    )
    theta, sse = res.x, float(res.fun)
    if sse > objective(start):
        theta, sse = start, objective(start)
    a, b = np.exp(np.clip(theta, *LOG_BOUNDS))
    return BetaFit(float(a), float(b), sse, bool(res.success), int(res.nit))


@dataclass(frozen=True)
class ElbowResult:
    recommended_rate: float
    chord_distances: list = field(default_factory=list)
    flat: bool = False


def elbow(rates, rmse, flat_tol=1e-12):
    """Rate of maximal distance from the chord between the curve's end points.

    Both axes are min-max normalized first, which makes the choice invariant
    to affine rescaling of either axis. Ties go to the lower rate; a curve
    with no point off the chord returns the highest rate with ``flat=True``.

    >>> elbow([0.4, 0.8, 0.9, 0.99, 0.999], [1, 1, 1, 1, 10]).recommended_rate
    0.99
    """
    r = np.asarray(rates, dtype=np.float64)
    e = np.asarray(rmse, dtype=np.float64)
    if r.shape != e.shape or r.ndim != 1 or len(r) < 3:
        raise ConfigurationError("elbow needs at least 3 (rate, rmse) pairs of equal length")
    if np.any(np.diff(r) <= 0):
        raise ConfigurationError("rates must be strictly increasing")

    def unit(v):
        span = v.max() - v.min()
        return (v - v.min()) / span if span > 0 else np.zeros_like(v)

    x, y = unit(r), unit(e)
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    norm = math.hypot(dx, dy)
    dist = np.abs(dy * (x - x[0]) - dx * (y - y[0])) / norm
    if np.all(dist < flat_tol):
        return ElbowResult(float(r[-1]), dist.tolist(), True)
    best = int(np.argmax(dist))
    return ElbowResult(float(r[best]), dist.tolist(), False)
