"""Minkowski gauge of the analytic sequence norm on finite real vectors.

For a finite vector x = (x_1, ..., x_m), C(x) = sum_j x_j^(2j) and the gauge is the
unique mu > 0 with C(x / mu) = 1. The map mu -> C(x / mu) is strictly decreasing, is
>= 1 at mu = max|x_j| (the term of the largest entry is exactly 1 there) and <= 1 at
mu = 2 * max|x_j|, so the root is bracketed by [|x|_inf, 2 |x|_inf].
"""
import logging
import math

import numpy as np
import scipy.optimize

import impl.lipan.exc

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100
# Bracket width, relative to |x|_inf, at which bisection hands over to Newton.
BISECT_WIDTH = 1e-6
MAX_ENTRY = 1e8
ORACLE_ITER_COUNT = 200

LOG_FLOAT_MAX = math.log(np.finfo(float).max)
# exp() of anything below this is exactly 0.0 in double precision.
LOG_UNDERFLOW = -746.0

log = logging.getLogger(__name__)


class Gauge(object):
    def __init__(self, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if not tol > 0:
            raise ValueError('Gauge tolerance must be positive. tol="{}"'.format(tol))
        if max_iter < 1:
            raise ValueError('Gauge needs at least one iteration')
        self.tol = float(tol)
        self.max_iter = int(max_iter)

    def __call__(self, x):
        return gauge_lambda(self, x)

    def __repr__(self):
        return 'Gauge(tol={!r}, max_iter={!r})'.format(self.tol, self.max_iter)

    def as_dict(self):
        return {
            'tol': self.tol,
            'max_iter': self.max_iter,
            'bisect_width': BISECT_WIDTH,
            'max_entry': MAX_ENTRY,
        }


def series_C(x):
    """Return sum_j x_j^(2j) (1-based j), summed in descending order of the terms.

    Raises:
        GaugeOverflowError: A term exceeds the float range.
    """
    v = _as_vector(x)
    nz_idx = np.flatnonzero(v)
    if not nz_idx.size:
        return 0.0
    two_j = 2 * (nz_idx + 1)
    a = np.abs(v[nz_idx])
    log_term = two_j * np.log(a)
    i = int(np.argmax(log_term))
    if log_term[i] > LOG_FLOAT_MAX:
        raise impl.lipan.exc.GaugeOverflowError(
            'Series term exceeds the float range',
            index=int(nz_idx[i]) + 1,
            entry=float(v[nz_idx[i]]),
        )
    return _sum_descending(a ** two_j)


def gauge_lambda(g, x):
    """Return the gauge of ``x``, solving C(x / mu) = 1 to relative tolerance g.tol.

    Bisection on [|x|_inf, 2|x|_inf] narrows the bracket to BISECT_WIDTH, then Newton
    steps with the closed form derivative polish the root. A Newton step that leaves
    the current bracket hands over to Brent's method on that bracket.
    """
    v = _check_input(x)
    residual = _Residual(v)
    lo, hi = residual.scale, 2.0 * residual.scale
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        raise impl.lipan.exc.BracketError(
            'Gauge residual does not change sign on the bracket',
            lo=lo,
            hi=hi,
            f_lo=f_lo,
            f_hi=f_hi,
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi

    width = BISECT_WIDTH * residual.scale
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if residual(mid) >= 0.0:
            lo = mid
        else:
            hi = mid

    mu = 0.5 * (lo + hi)
    for _ in range(g.max_iter):
        f = residual(mu)
        if f == 0.0:
            return mu
        if f > 0.0:
            lo = mu
        else:
            hi = mu
        step = f / residual.derivative(mu)
        next_mu = mu - step
        if not lo <= next_mu <= hi:
            break
        if abs(step) <= g.tol * next_mu:
            return next_mu
        mu = next_mu

    log.debug(
        'Newton polish left the bracket. Falling back to brentq. lo={} hi={}'.format(
            lo, hi
        )
    )
    return scipy.optimize.brentq(
        residual,
        lo,
        hi,
        xtol=g.tol * lo,
        rtol=max(g.tol, 4 * np.finfo(float).eps),
        maxiter=g.max_iter,
    )


def lambda_oracle(x, iter_count=ORACLE_ITER_COUNT):
    """Independent gauge evaluation: plain bisection on C(x / mu) - 1 with a fixed
    number of halvings and no derivative information.
    """
    v = _check_input(x)
    lo = float(np.max(np.abs(v)))
    hi = 2.0 * lo
    for _ in range(iter_count):
        mid = 0.5 * (lo + hi)
        if series_C(v / mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sup_norm(x):
    v = _as_vector(x)
    return float(np.max(np.abs(v))) if v.size else 0.0


class _Residual(object):
    """mu -> C(x / mu) - 1 for a fixed nonzero vector, with its derivative in mu.

    Terms are formed in log space. Entries whose term already underflows at the left
    end of the bracket are dropped; they are zero on the whole bracket.
    """

    def __init__(self, v):
        a = np.abs(v)
        nz_idx = np.flatnonzero(a)
        self.scale = float(a[nz_idx].max())
        two_j = 2.0 * (nz_idx + 1)
        log_a = np.log(a[nz_idx])
        keep = two_j * (log_a - math.log(self.scale)) > LOG_UNDERFLOW
        self.two_j = two_j[keep]
        self.log_a = log_a[keep]

    def terms(self, mu):
        return np.exp(self.two_j * (self.log_a - math.log(mu)))

    def __call__(self, mu):
        return _sum_descending(self.terms(mu)) - 1.0

    def derivative(self, mu):
        return -_sum_descending(self.two_j * self.terms(mu)) / mu


def _sum_descending(terms):
    return math.fsum(np.sort(terms)[::-1])


def _as_vector(x):
    v = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise impl.lipan.exc.GaugeError('Gauge input has non-finite entries')
    return v


def _check_input(x):
    v = _as_vector(x)
    s = float(np.max(np.abs(v))) if v.size else 0.0
    if s == 0.0:
        raise impl.lipan.exc.GaugeError('Gauge is undefined for the zero vector')
    if s >= MAX_ENTRY:
        raise impl.lipan.exc.GaugeOverflowError(
            'Gauge input entry too large', sup_norm=s, max_entry=MAX_ENTRY
        )
    return v
