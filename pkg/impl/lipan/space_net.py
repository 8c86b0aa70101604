"""Bounded open domain G and the finite covering net {x_j}.

The domain is the open unit ball or the open unit box, centered at the origin and
contained in B_R(0). The net is the set of lattice points k / m inside the domain,
ordered lexicographically on k, with m chosen so that every domain point has a net
point x_j with q(x - x_j) < gamma_1.
"""
import collections
import json
import logging
import math

import numpy as np
import scipy.optimize
import scipy.spatial
import scipy.special
import scipy.stats.qmc

import impl.lipan.exc
import impl.lipan.util

SHAPE_TUPLE = ('ball', 'box')
SAMPLER_TUPLE = ('halton', 'sobol')
DEFAULT_NET_CAP = 200000
# Lattice candidates enumerated before the inside filter, as a multiple of the cap.
CANDIDATE_FACTOR = 20
# Relative undershoot of gamma_1 when solving for the covering radius.
COVER_UNDERSHOOT = 1e-9
LEVEL_TUPLE = (1, 2, 3)

log = logging.getLogger(__name__)

Gammas = collections.namedtuple('Gammas', ['g1', 'g2', 'g3'])


class Domain(collections.namedtuple('Domain', ['d', 'R', 'shape'])):
    __slots__ = ()

    def contains(self, x):
        """Vectorized membership. Returns a bool array with one entry per point."""
        p = impl.lipan.util.as_points(x, self.d)
        if self.shape == 'ball':
            return np.sum(p * p, axis=1) < 1.0
        return np.all(np.abs(p) < 1.0, axis=1)

    def sample(self, count, seed=0, sampler='halton'):
        """Return ``count`` scrambled quasi-random points strictly inside the domain.

        Points are drawn in power-of-two batches from the unit cube, mapped to
        (-1, 1)^d and filtered by membership, so the output is a deterministic function
        of (count, seed, sampler).
        """
        if sampler not in SAMPLER_TUPLE:
            raise impl.lipan.exc.ConfigError(
                'Unknown sampler', sampler=sampler, known=', '.join(SAMPLER_TUPLE)
            )
        if count <= 0:
            return np.zeros((0, self.d))
        if sampler == 'halton':
            engine = scipy.stats.qmc.Halton(self.d, scramble=True, seed=seed)
        else:
            engine = scipy.stats.qmc.Sobol(self.d, scramble=True, seed=seed)
        out_list = []
        have = 0
        drawn = 0
        m = max(6, int(math.ceil(math.log2(2 * count))))
        while have < count:
            if sampler == 'sobol':
                batch = engine.random_base2(m)
            else:
                batch = engine.random(2 ** m)
            drawn += 2 ** m
            # The next draw doubles the total, keeping the Sobol balance properties.
            m = int(math.log2(drawn))
            batch = 2.0 * batch - 1.0
            batch = batch[self.contains(batch)]
            out_list.append(batch)
            have += batch.shape[0]
        return np.concatenate(out_list)[:count]

    def grid(self, per_axis):
        """Regular grid with ``per_axis`` interior points per axis, inside the domain."""
        axis = np.linspace(-1.0, 1.0, per_axis + 2)[1:-1]
        mesh = np.meshgrid(*([axis] * self.d), indexing='ij')
        p = np.stack([m.ravel() for m in mesh], axis=1)
        return p[self.contains(p)]

    def as_dict(self):
        return {'d': self.d, 'R': self.R, 'shape': self.shape}


class Net(object):
    def __init__(self, points, covering_radius, spacing, gammas):
        self.points = np.array(points, dtype=float)
        self.points.setflags(write=False)
        self.covering_radius = float(covering_radius)
        self.spacing = float(spacing)
        self.gammas = Gammas(*[float(g) for g in gammas])

    @property
    def N(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def q_values(self, q, x, n=None):
        """Return y_j = q(x - x_j) for j = 1..n (all net points by default)."""
        x = impl.lipan.util.as_point(x)
        return q(x[None, :] - self.points[:n])

    def as_dict(self, include_points=True):
        d = {
            'N': self.N,
            'covering_radius': self.covering_radius,
            'spacing': self.spacing,
            'gammas': list(self.gammas),
        }
        if include_points:
            d['points'] = self.points.tolist()
        return d

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, json_str):
        d = json.loads(json_str)
        return cls(
            np.array(d['points'], dtype=float).reshape(d['N'], -1),
            d['covering_radius'],
            d['spacing'],
            d['gammas'],
        )

    def __repr__(self):
        return 'Net(N={}, spacing={!r}, covering_radius={!r}, gammas={!r})'.format(
            self.N, self.spacing, self.covering_radius, tuple(self.gammas)
        )


def build_domain(d, R, shape='ball'):
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
        raise impl.lipan.exc.DomainError('Dimension must be a positive integer', d=d)
    if shape not in SHAPE_TUPLE:
        raise impl.lipan.exc.DomainError(
            'Unknown domain shape', shape=shape, known=', '.join(SHAPE_TUPLE)
        )
    R = float(R)
    if not R > 1.0:
        raise impl.lipan.exc.DomainError('Radius must exceed 1', R=R)
    if shape == 'box' and not R > math.sqrt(d):
        raise impl.lipan.exc.DomainError(
            'Box domain needs R > sqrt(d)', R=R, d=d, min_R=math.sqrt(d)
        )
    return Domain(int(d), R, shape)


def default_gammas(delta, n):
    """gamma_3 = min(0.9, delta^(2n) / 2), gamma_2 = gamma_3 / 2, gamma_1 = gamma_2 / 12.

    An infinite delta (flat target) gives the largest admissible triple.
    """
    if not delta > 0:
        raise impl.lipan.exc.ConfigError('Modulus delta must be positive', delta=delta)
    if math.isinf(delta):
        g3 = 0.9
    else:
        g3 = min(0.9, 0.5 * math.exp(2 * n * math.log(delta)))
    g2 = g3 / 2.0
    g1 = g2 / 12.0
    return validate_gammas((g1, g2, g3))


def validate_gammas(gammas):
    try:
        g = Gammas(*[float(v) for v in gammas])
    except (TypeError, ValueError):
        raise impl.lipan.exc.ConfigError('Gammas must be a triple of reals', gammas=gammas)
    if not 0.0 < g.g1 < g.g2 < g.g3 < 1.0:
        raise impl.lipan.exc.ConfigError(
            'Gammas must satisfy 0 < g1 < g2 < g3 < 1', gammas=tuple(g)
        )
    if not 3.0 * g.g1 < g.g2 / 2.0:
        raise impl.lipan.exc.ConfigError(
            'Gammas must satisfy 3 * g1 < g2 / 2', gammas=tuple(g)
        )
    return g


def covering_radius_for(q, gamma1):
    """Largest r (up to the undershoot) with sum_i A_i r^(2i) < gamma1.

    Since q(y) <= sum_i A_i |y|^(2i), any y with |y| < r has q(y) < gamma1. The sum
    is at most K1 * max(r, r^(2n)), so this radius is never smaller than the one the
    K1 bound gives.
    """
    a = np.asarray(q.a_list, dtype=float)
    powers = 2.0 * np.arange(1, a.size + 1)
    target = gamma1 * (1.0 - COVER_UNDERSHOOT)

    def f(r):
        return float(np.sum(a * r ** powers)) - target

    if f(1.0) <= 0.0:
        raise impl.lipan.exc.InvariantViolation(
            'q is below gamma1 on the unit sphere', gamma1=gamma1, K1=q.K1
        )
    return scipy.optimize.brentq(f, 0.0, 1.0, xtol=1e-15, rtol=1e-14)


def estimate_net_size(dom, m):
    if dom.shape == 'box':
        return (2 * m - 1) ** dom.d
    unit_ball_volume = math.pi ** (dom.d / 2.0) / scipy.special.gamma(dom.d / 2.0 + 1.0)
    return int(math.ceil(unit_ball_volume * m ** dom.d))


def build_net(dom, q, gammas, cap=DEFAULT_NET_CAP):
    """Lattice net with spacing 1 / m, m = ceil(sqrt(d) / r1).

    Rounding each coordinate of a domain point x toward zero on the lattice gives a
    lattice point that is still in the domain and within 1 / m of x in every
    coordinate, so |x - x_j| < sqrt(d) / m <= r1 and q(x - x_j) < gamma_1.

    Raises:
        CapacityError: The net would hold more than ``cap`` points.
    """
    g = validate_gammas(gammas)
    r1 = covering_radius_for(q, g.g1)
    m = int(math.ceil(math.sqrt(dom.d) / r1))
    estimate = estimate_net_size(dom, m)
    candidate_count = (2 * m - 1) ** dom.d
    if estimate > cap or candidate_count > CANDIDATE_FACTOR * cap:
        raise impl.lipan.exc.CapacityError(
            'Net would exceed the configured cap',
            requested=estimate,
            cap=cap,
            spacing=1.0 / m,
            covering_radius=r1,
            d=dom.d,
        )
    k = np.indices((2 * m - 1,) * dom.d).reshape(dom.d, -1).T - (m - 1)
    if dom.shape == 'ball':
        # Exact integer test for |k / m| < 1.
        k = k[np.sum(k * k, axis=1) < m * m]
    if k.shape[0] > cap:
        raise impl.lipan.exc.CapacityError(
            'Net exceeds the configured cap', requested=k.shape[0], cap=cap
        )
    net = Net(k / float(m), r1, 1.0 / m, g)
    log.info(
        'Built net. N={} spacing={} covering_radius={}'.format(net.N, net.spacing, r1)
    )
    return net


def cover_membership(net, q, x, j, i):
    """True iff q(x - x_j) < gamma_i. ``j`` is 1-based, ``i`` is 1, 2 or 3."""
    if not 1 <= j <= net.N:
        raise IndexError('Net index out of range. j={} N={}'.format(j, net.N))
    if i not in LEVEL_TUPLE:
        raise IndexError('Cover level out of range. i={}'.format(i))
    x = impl.lipan.util.as_point(x)
    y = float(q(x - net.points[j - 1])[0])
    return y < net.gammas[i - 1]


def first_cover_index(y, gamma):
    """First 1-based j with y_j < gamma, or None."""
    hit = np.flatnonzero(np.asarray(y) < gamma)
    return int(hit[0]) + 1 if hit.size else None


def nearest_cover_values(net, q, points):
    """For each point, q(x - x_j) at the Euclidean nearest net point. A value below
    gamma_1 witnesses that the point is covered.
    """
    points = impl.lipan.util.as_points(points, net.d)
    tree = scipy.spatial.cKDTree(net.points)
    _, idx = tree.query(points)
    return q(points - net.points[idx])
