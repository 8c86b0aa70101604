"""Bump b, tensor bump b_n, the kappa schedule, and the Gaussian smoothed coordinate
functionals nu_n and phi_n.

nu_n(y) is the expectation of b_n(Y) for independent Y_j ~ Normal(y_j, sigma_j^2)
with sigma_j^2 = 2^(j-1) / kappa_n. Since b_n = min_j (1 - b(Y_j)), the layer cake
formula gives

    nu_n(y) = int_0^1 prod_j P(b(Y_j) <= 1 - t) dt,

and each factor is the Gaussian mass of an interval. Substituting t = S(u), with S
the quintic smoothstep of the bump, makes the interval endpoints explicit:
[2 g1 + u w1, M + 1 + (1 - u) w2].

Normalization constants are kept in log space throughout. kappa_n grows like 2^n, so
the constants themselves under- or overflow long before n reaches desk scale nets.
"""
import collections
import logging
import math

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special

import impl.lipan.exc

BACKEND_TUPLE = ('layercake', 'mc')
DEFAULT_BACKEND = 'layercake'
DEFAULT_MC_SAMPLES = 100000
MC_CHUNK = 20000
QUAD_TOL = 1e-8
LEVEL_XTOL = 1e-12
# A Gaussian factor with less than Phi_bar(Z_CUTOFF) of its mass outside the flat
# part of the bump is taken as exactly 1 (or exactly 0 for b_n).
Z_CUTOFF = 12.0
LOG_Z = math.log(Z_CUTOFF)
TAIL_TARGET = 0.45
# z_j grows by sqrt(2) per index below n, so terms older than this are exactly 1.
TAIL_WINDOW = 128
BATCH_SIZE = 256
DISAGREE_SE = 5.0
# Monte Carlo cannot resolve masses much below 1 / samples.
MC_RESOLUTION_FACTOR = 10.0

LN2 = math.log(2.0)
LOG_PI = math.log(math.pi)

log = logging.getLogger(__name__)

NuResult = collections.namedtuple(
    'NuResult', ['value', 'error', 'backend', 'active_count']
)
PhiSweep = collections.namedtuple('PhiSweep', ['phi', 'error', 'quad_count'])
CrossCheck = collections.namedtuple(
    'CrossCheck', ['layercake', 'montecarlo', 'std_error', 'deviation', 'tolerance']
)
Localization = collections.namedtuple(
    'Localization', ['j0', 'n0', 'radius', 'eta', 'y0']
)


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def smoothstep_deriv(u):
    u = np.clip(u, 0.0, 1.0)
    return 30.0 * u * u * (1.0 - u) * (1.0 - u)


class BumpSpec(object):
    """b = 1 outside (2 g1, M + 2), b = 0 on [3 g1, M + 1], quintic smoothstep on the
    two transitions. The smoothstep is C2 with max slope 15/8.
    """

    def __init__(self, gamma1, M):
        if not gamma1 > 0:
            raise impl.lipan.exc.ConfigError('gamma1 must be positive', gamma1=gamma1)
        if not 3.0 * gamma1 < M + 1.0:
            raise impl.lipan.exc.ConfigError(
                'Bump transitions overlap', gamma1=gamma1, M=M
            )
        self.gamma1 = float(gamma1)
        self.M = float(M)
        self.lower_lo = 2.0 * self.gamma1
        self.lower_hi = 3.0 * self.gamma1
        self.upper_lo = self.M + 1.0
        self.upper_hi = self.M + 2.0
        self.lower_width = self.lower_hi - self.lower_lo
        self.upper_width = self.upper_hi - self.upper_lo

    @property
    def L_b(self):
        return 15.0 / (8.0 * min(self.lower_width, self.upper_width))

    @property
    def support_width(self):
        return self.upper_hi - self.lower_lo

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        t = np.atleast_1d(t_arr)
        out = np.ones_like(t)
        lower = (t > self.lower_lo) & (t < self.lower_hi)
        out[lower] = 1.0 - smoothstep((t[lower] - self.lower_lo) / self.lower_width)
        out[(t >= self.lower_hi) & (t <= self.upper_lo)] = 0.0
        upper = (t > self.upper_lo) & (t < self.upper_hi)
        out[upper] = smoothstep((t[upper] - self.upper_lo) / self.upper_width)
        return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])

    def level_interval(self, s):
        """Return (l, r) with {t : b(t) <= s} = [l, r], or None for an empty set.

        Each endpoint is found by bisection on its monotone branch.
        """
        if s < 0.0:
            return None
        if s >= 1.0:
            return -np.inf, np.inf
        if s == 0.0:
            return self.lower_hi, self.upper_lo
        l = scipy.optimize.bisect(
            lambda t: self(t) - s, self.lower_lo, self.lower_hi, xtol=LEVEL_XTOL
        )
        r = scipy.optimize.bisect(
            lambda t: self(t) - s, self.upper_lo, self.upper_hi, xtol=LEVEL_XTOL
        )
        return l, r

    def layer_endpoints(self, u):
        """Interval endpoints for the level s = 1 - S(u)."""
        u = np.asarray(u, dtype=float)
        return (
            self.lower_lo + u * self.lower_width,
            self.upper_lo + (1.0 - u) * self.upper_width,
        )

    def as_dict(self):
        return {
            'gamma1': self.gamma1,
            'M': self.M,
            'profile': 'quintic_smoothstep',
            'lower': [self.lower_lo, self.lower_hi],
            'upper': [self.upper_lo, self.upper_hi],
            'L_b': self.L_b,
        }


def bump_b(spec, t):
    return spec(t)


def bump_bn(spec, y):
    """1 - max_j b(y_j)."""
    y = np.asarray(y, dtype=float)
    return 1.0 - np.max(spec(y), axis=-1)


def log_t_hat(n):
    return 0.5 * n * LOG_PI + 0.25 * n * (n + 1) * LN2


def log_vol(spec, n):
    return n * math.log(spec.support_width)


def log_factorial_bound(spec, n):
    """Smallest log kappa with kappa^(n/2) >= (n!)^2 T_hat_n / Vol(A_n)."""
    return (2.0 / n) * (
        2.0 * math.lgamma(n + 1) + log_t_hat(n) - log_vol(spec, n)
    )


def tail_mass(gamma2, log_kappa_n, n):
    """1 - prod_{j<=n} erf(gamma2 / (2 sqrt(2) sigma_j)), with the product taken as a
    sum of logs over the last TAIL_WINDOW indices.
    """
    j = np.arange(max(1, n - TAIL_WINDOW + 1), n + 1)
    log_sigma = 0.5 * ((j - 1) * LN2 - log_kappa_n)
    z = gamma2 / (2.0 * math.sqrt(2.0)) * np.exp(-log_sigma)
    return -math.expm1(float(np.sum(_log_erf(z))))


def kappa_schedule(spec, gamma2, N):
    """Return log kappa_1 .. log kappa_N.

    Each entry starts at the larger of the factorial bound and the previous entry and
    is raised by factors of 2 until the tail mass is at most TAIL_TARGET.
    """
    if N < 1:
        raise ValueError('Schedule length must be positive. N={}'.format(N))
    log_kappa = np.empty(N)
    prev = -np.inf
    for n in range(1, N + 1):
        lk = max(log_factorial_bound(spec, n), prev)
        while tail_mass(gamma2, lk, n) > TAIL_TARGET:
            lk += LN2
        log_kappa[n - 1] = prev = lk
    return log_kappa


class MollifierFamily(object):
    def __init__(
        self,
        spec,
        gamma2,
        N,
        backend=DEFAULT_BACKEND,
        mc_samples=DEFAULT_MC_SAMPLES,
        seed=0,
    ):
        if backend not in BACKEND_TUPLE:
            raise impl.lipan.exc.ConfigError(
                'Unknown backend', backend=backend, known=', '.join(BACKEND_TUPLE)
            )
        if mc_samples < 2:
            raise impl.lipan.exc.ConfigError(
                'Monte Carlo needs at least 2 samples', mc_samples=mc_samples
            )
        if seed < 0:
            raise impl.lipan.exc.ConfigError('Seed must be nonnegative', seed=seed)
        self.spec = spec
        self.gamma2 = float(gamma2)
        self.N = int(N)
        self.backend = backend
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)
        log.info('Building kappa schedule. N={}'.format(self.N))
        self.log_kappa = kappa_schedule(spec, self.gamma2, self.N)
        self.log_kappa.setflags(write=False)

    @property
    def L_b(self):
        return self.spec.L_b

    def W1(self, L_q, R):
        return self.L_b * L_q * R + 1.0

    def log_sigma(self, n):
        j = np.arange(1, n + 1)
        return 0.5 * ((j - 1) * LN2 - self.log_kappa[n - 1])

    def log_T(self, n):
        return -0.5 * n * self.log_kappa[n - 1] + log_t_hat(n)

    def log_vol(self, n):
        return log_vol(self.spec, n)

    def factorial_margin(self, n):
        """(n/2) log kappa_n - log((n!)^2 T_hat_n / Vol(A_n)). Nonnegative."""
        return 0.5 * n * self.log_kappa[n - 1] - (
            2.0 * math.lgamma(n + 1) + log_t_hat(n) - self.log_vol(n)
        )

    def tail(self, n):
        return tail_mass(self.gamma2, self.log_kappa[n - 1], n)

    def nu(self, y, backend=None, point_index=0):
        """nu_n(y) for n = len(y), with an error estimate.

        The error is the quadrature estimate for the layer cake backend and the
        standard error for Monte Carlo.
        """
        backend = backend or self.backend
        y = np.asarray(y, dtype=float).ravel()
        n = y.size
        if n == 0:
            return NuResult(1.0, 0.0, backend, 0)
        if n > self.N:
            raise ValueError('nu_n beyond the schedule. n={} N={}'.format(n, self.N))
        log_sigma = self.log_sigma(n)
        identity, dead = _factor_classes(self.spec, y, log_sigma)
        if np.any(dead):
            return NuResult(0.0, 0.0, backend, 0)
        active = ~identity
        k = int(np.count_nonzero(active))
        if not k:
            return NuResult(1.0, 0.0, backend, 0)
        if backend == 'layercake':
            value, err = _layercake(
                self.spec,
                y[active],
                log_sigma[active][None, :],
                np.ones((1, k), dtype=bool),
            )
            return NuResult(float(value[0]), err, backend, k)
        value, se = self._montecarlo(y[active], log_sigma[active], n, point_index)
        return NuResult(value, se, backend, k)

    def phi(self, q, net, x, n, backend=None, point_index=0):
        """phi_n(x) = nu_n(q(x - x_1), ..., q(x - x_n)); phi_0 = 1."""
        if not 0 <= n <= net.N:
            raise IndexError('phi index out of range. n={} N={}'.format(n, net.N))
        if n == 0:
            return NuResult(1.0, 0.0, backend or self.backend, 0)
        return self.nu(net.q_values(q, x, n), backend, point_index)

    def phi_sweep(self, y, backend=None, point_index=0):
        """phi_0 .. phi_N at one point, given y_j = q(x - x_j) for the whole net.

        A factor j is exactly 1 once kappa_n has grown past its identity threshold,
        and b_n is exactly 0 from the first n at which any factor is dead. Only the
        remaining (n, j) pairs are integrated, all n in one vector valued quadrature.
        """
        backend = backend or self.backend
        y = np.asarray(y, dtype=float).ravel()
        N = y.size
        phi = np.ones(N + 1)
        if N == 0:
            return PhiSweep(phi, 0.0, 0)
        lk = self.log_kappa[:N]
        j = np.arange(1, N + 1)
        base = (j - 1) * LN2
        spec = self.spec
        theta_id = _threshold(np.minimum(y - spec.lower_hi, spec.upper_lo - y), base)
        theta_dead = _threshold(
            np.maximum(spec.lower_lo - y, y - spec.upper_hi), base
        )
        first_id = np.maximum(j, np.searchsorted(lk, theta_id, side='left') + 1)
        first_dead = np.maximum(j, np.searchsorted(lk, theta_dead, side='left') + 1)
        n_dead = int(first_dead.min())
        if n_dead <= N:
            phi[n_dead:] = 0.0
        limit = min(n_dead, N + 1)

        cand = np.flatnonzero(first_id > j)
        starts = j[cand]
        stops = np.minimum(first_id[cand], limit)
        live = starts < stops
        cand, starts, stops = cand[live], starts[live], stops[live]
        if not cand.size:
            return PhiSweep(phi, 0.0, 0)
        n_arr = np.unique(
            np.concatenate([np.arange(s, e) for s, e in zip(starts, stops)])
        )
        y_c = y[cand]
        base_c = base[cand]
        err = 0.0
        for i in range(0, n_arr.size, BATCH_SIZE):
            chunk = n_arr[i : i + BATCH_SIZE]
            log_sigma = 0.5 * (base_c[None, :] - lk[chunk - 1][:, None])
            active = (starts[None, :] <= chunk[:, None]) & (
                chunk[:, None] < stops[None, :]
            )
            if backend == 'layercake':
                value, e = _layercake(spec, y_c, log_sigma, active)
                phi[chunk] = value
                err = max(err, e)
            else:
                for row, n in enumerate(chunk):
                    a = active[row]
                    value, se = self._montecarlo(
                        y_c[a], log_sigma[row, a], int(n), point_index
                    )
                    phi[n] = value
                    err = max(err, se)
        return PhiSweep(phi, err, int(n_arr.size))

    def cross_check(self, y, point_index=0):
        """Compare the two backends on nu_n(y).

        Raises:
            BackendDisagreement: The results differ by more than DISAGREE_SE standard
              errors plus the quadrature error and the Monte Carlo resolution.
        """
        lc = self.nu(y, 'layercake', point_index)
        mc = self.nu(y, 'mc', point_index)
        deviation = abs(lc.value - mc.value)
        tolerance = (
            DISAGREE_SE * mc.error + lc.error + MC_RESOLUTION_FACTOR / self.mc_samples
        )
        check = CrossCheck(lc.value, mc.value, mc.error, deviation, tolerance)
        if deviation > tolerance:
            raise impl.lipan.exc.BackendDisagreement(
                'Layer cake and Monte Carlo backends disagree',
                n=len(np.atleast_1d(y)),
                point_index=point_index,
                layercake=lc.value,
                montecarlo=mc.value,
                std_error=mc.error,
            )
        return check

    def localization(self, q, net, x0, eta):
        """Radius and index threshold for the decay of phi_n near x0.

        With j0 the first index with q(x0 - x_j0) = y0 < g1, every z with |z| < radius
        keeps q(x0 + z - x_j0) below y_max = (y0 + 2 g1) / 2. Then b_n(Y) = 0 whenever
        Y_j0 <= 2 g1, so phi_n(x0 + z) <= Phi_bar((2 g1 - y_max) / sigma_j0), which is
        below eta for every n >= n0. n0 is None when no n <= N qualifies.
        """
        if not 0.0 < eta < 1.0:
            raise ValueError('eta must lie in (0, 1). eta={}'.format(eta))
        y = net.q_values(q, x0)
        g1 = net.gammas.g1
        hit = np.flatnonzero(y < g1)
        if not hit.size:
            raise impl.lipan.exc.InvariantViolation(
                'Point is not covered by the net', x0=list(np.atleast_1d(x0))
            )
        j0 = int(hit[0]) + 1
        y0 = float(y[j0 - 1])
        y_max = 0.5 * (y0 + 2.0 * g1)
        radius = (y_max - y0) / q.L_q
        # Leave room for the quadrature error of the evaluated phi_n.
        z_eta = scipy.special.ndtri(1.0 - (eta - 10.0 * QUAD_TOL))
        theta = (j0 - 1) * LN2 - 2.0 * math.log((2.0 * g1 - y_max) / z_eta)
        n0 = max(j0 + 1, int(np.searchsorted(self.log_kappa, theta, side='right')) + 1)
        return Localization(j0, n0 if n0 <= self.N else None, radius, eta, y0)

    def as_dict(self, include_schedule=True):
        n_arr = np.arange(1, self.N + 1)
        factorial_margin = np.array([self.factorial_margin(n) for n in n_arr])
        tail = np.array([self.tail(n) for n in n_arr])
        d = {
            'bump': self.spec.as_dict(),
            'gamma2': self.gamma2,
            'N': self.N,
            'backend': self.backend,
            'mc_samples': self.mc_samples,
            'seed': self.seed,
            'quad_tol': QUAD_TOL,
            'z_cutoff': Z_CUTOFF,
            'tail_target': TAIL_TARGET,
            'min_factorial_margin': float(factorial_margin.min()),
            'max_tail_mass': float(tail.max()),
            'kappa_monotone': bool(np.all(np.diff(self.log_kappa) >= 0.0)),
        }
        if include_schedule:
            d['log_kappa'] = self.log_kappa.tolist()
        return d

    def _montecarlo(self, y, log_sigma, n, point_index):
        """Mean of b_n over Gaussian draws of the given coordinates, and its standard
        error. The stream is keyed on (seed, n, point_index) only, so results do not
        depend on evaluation order or worker assignment.
        """
        k = y.size
        if not k:
            return 1.0, 0.0
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([self.seed, n, point_index]))
        )
        sigma = np.exp(log_sigma)
        total = 0.0
        total_sq = 0.0
        remaining = self.mc_samples
        while remaining:
            count = min(MC_CHUNK, remaining)
            sample = y + sigma * rng.standard_normal((count, k))
            v = bump_bn(self.spec, sample)
            total += float(np.sum(v))
            total_sq += float(np.sum(v * v))
            remaining -= count
        s = self.mc_samples
        mean = total / s
        var = max(total_sq / s - mean * mean, 0.0) * s / (s - 1)
        return mean, math.sqrt(var / s)


def _log_erf(z):
    with np.errstate(divide='ignore'):
        return np.where(
            z < 1.0, np.log(scipy.special.erf(z)), np.log1p(-scipy.special.erfc(z))
        )


def _threshold(dist, base):
    """log kappa at and beyond which a distance ``dist`` is Z_CUTOFF sigmas wide.
    Infinite where the distance is not positive.
    """
    out = np.full(dist.shape, np.inf)
    pos = dist > 0.0
    out[pos] = base[pos] - 2.0 * (np.log(dist[pos]) - LOG_Z)
    return out


def _factor_classes(spec, y, log_sigma):
    """Masks of factors that are exactly 1 (identity) and exactly 0 (dead)."""
    d_id = np.minimum(y - spec.lower_hi, spec.upper_lo - y)
    d_dead = np.maximum(spec.lower_lo - y, y - spec.upper_hi)
    with np.errstate(divide='ignore', invalid='ignore'):
        identity = (d_id > 0.0) & (
            np.log(np.where(d_id > 0.0, d_id, 1.0)) - log_sigma >= LOG_Z
        )
        dead = (d_dead > 0.0) & (
            np.log(np.where(d_dead > 0.0, d_dead, 1.0)) - log_sigma >= LOG_Z
        )
    return identity, dead


def _scaled(diff, inv_sigma):
    with np.errstate(invalid='ignore', over='ignore'):
        z = diff * inv_sigma
    return np.where(diff == 0.0, 0.0, z)


def _layercake(spec, y, log_sigma, active):
    """Layer cake integral for a batch of rows sharing the coordinates ``y``.

    Args:
        y: (k,) coordinate values.
        log_sigma: (m, k) log standard deviations, one row per n.
        active: (m, k) mask; inactive factors are 1.

    Returns:
        (values (m,), absolute error estimate)
    """
    with np.errstate(over='ignore'):
        inv_sigma = np.exp(-log_sigma)

    def integrand(u):
        l, r = spec.layer_endpoints(u)
        p = scipy.special.ndtr(_scaled(r - y, inv_sigma)) - scipy.special.ndtr(
            _scaled(l - y, inv_sigma)
        )
        p = np.where(active, np.clip(p, 0.0, 1.0), 1.0)
        return np.prod(p, axis=1) * smoothstep_deriv(u)

    u_break = np.concatenate(
        [
            (y - spec.lower_lo) / spec.lower_width,
            1.0 - (y - spec.upper_lo) / spec.upper_width,
        ]
    )
    u_break = np.unique(u_break[(u_break > 0.0) & (u_break < 1.0)])
    value, err = scipy.integrate.quad_vec(
        integrand,
        0.0,
        1.0,
        epsabs=QUAD_TOL,
        epsrel=QUAD_TOL,
        norm='max',
        points=u_break.tolist() or None,
    )
    return np.clip(value, 0.0, 1.0), float(err)
