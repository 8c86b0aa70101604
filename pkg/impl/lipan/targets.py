"""Target functions F with declared bounds and modulus of continuity.

Builtins are assembled from module level functions so that a TargetFunction pickles
into worker processes.
"""
import collections
import functools
import logging
import math

import numpy as np
import scipy.interpolate

import impl.lipan.exc
import impl.lipan.util

BUILTIN_TUPLE = ('product_sine', 'linear', 'norm', 'sqrt_norm', 'constant')
SPOT_CHECK_COUNT = 1000
BOUND_SLACK = 1e-12
LIPSCHITZ_SLACK = 1e-9

log = logging.getLogger(__name__)

SpotCheck = collections.namedtuple(
    'SpotCheck', ['count', 'min_value', 'max_value', 'max_ratio']
)


class TargetFunction(object):
    """F: G -> R, bounded, with one of:

    - ``lipschitz``: |F(x) - F(y)| <= lipschitz * |x - y|
    - ``delta_table``: rows (eps, delta) with |F(x) - F(y)| < eps whenever
      |x - y| < delta
    - ``delta_fn``: eps -> delta with the same meaning

    A flat target (inf == sup) needs no modulus.
    """

    def __init__(
        self,
        fn,
        inf,
        sup,
        lipschitz=None,
        delta_table=None,
        delta_fn=None,
        exact_modulus=False,
        name='user',
    ):
        inf, sup = float(inf), float(sup)
        if not (math.isfinite(inf) and math.isfinite(sup)) or inf > sup:
            raise impl.lipan.exc.ModulusError(
                'Target bounds must be finite with inf <= sup', inf=inf, sup=sup
            )
        if lipschitz is not None and not lipschitz >= 0.0:
            raise impl.lipan.exc.ModulusError(
                'Lipschitz constant must be nonnegative', lipschitz=lipschitz
            )
        self.fn = fn
        self.inf = inf
        self.sup = sup
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        self.delta_table = _delta_table(delta_table)
        self.delta_fn = delta_fn
        self.exact_modulus = exact_modulus
        self.name = name
        if not self.is_flat and not self.has_modulus:
            raise impl.lipan.exc.ModulusError(
                'Target needs a Lipschitz constant or a delta table', name=name
            )

    @property
    def is_flat(self):
        return self.inf == self.sup

    @property
    def has_modulus(self):
        return (
            self.lipschitz is not None
            or self.delta_table is not None
            or self.delta_fn is not None
        )

    def __call__(self, x, d=None):
        p = impl.lipan.util.as_points(x, d)
        return np.asarray(self.fn(p), dtype=float).reshape(p.shape[0])

    def delta_for(self, eps):
        """Radius delta with |F(x) - F(y)| < eps for |x - y| < delta.

        Raises:
            ModulusError: No modulus data reaches ``eps``.
        """
        if self.is_flat:
            return math.inf
        if self.delta_fn is not None:
            return float(self.delta_fn(eps))
        if self.delta_table is not None:
            usable = self.delta_table[self.delta_table[:, 0] <= eps]
            if not usable.size:
                raise impl.lipan.exc.ModulusError(
                    'Delta table has no row for the requested eps',
                    eps=eps,
                    smallest=float(self.delta_table[:, 0].min()),
                )
            return float(usable[:, 1].max())
        if self.lipschitz == 0.0:
            return math.inf
        return eps / self.lipschitz

    def spot_check(self, dom, count=SPOT_CHECK_COUNT, seed=0):
        """Check the declared bounds and modulus on sampled points and pairs.

        Raises:
            ModulusError: A sample violates the declared data.
        """
        x = dom.sample(2 * count, seed)
        v = self(x, dom.d)
        if v.min() < self.inf - BOUND_SLACK or v.max() > self.sup + BOUND_SLACK:
            raise impl.lipan.exc.ModulusError(
                'Target leaves its declared bounds',
                name=self.name,
                inf=self.inf,
                sup=self.sup,
                sampled_min=float(v.min()),
                sampled_max=float(v.max()),
            )
        dist = np.linalg.norm(x[:count] - x[count:], axis=1)
        dv = np.abs(v[:count] - v[count:])
        max_ratio = float(np.max(dv / np.maximum(dist, 1e-300)))
        if self.lipschitz is not None and not self.is_flat:
            bound = self.lipschitz * dist * (1.0 + LIPSCHITZ_SLACK) + BOUND_SLACK
            if np.any(dv > bound):
                i = int(np.argmax(dv - bound))
                raise impl.lipan.exc.ModulusError(
                    'Target exceeds its declared Lipschitz constant',
                    name=self.name,
                    lipschitz=self.lipschitz,
                    ratio=float(dv[i] / dist[i]),
                    x=x[i].tolist(),
                )
        if self.delta_table is not None:
            self._check_table(dom, x[:count], v[:count], seed)
        log.debug(
            'Target spot check passed. name="{}" max_ratio={}'.format(self.name, max_ratio)
        )
        return SpotCheck(x.shape[0], float(v.min()), float(v.max()), max_ratio)

    def as_dict(self):
        return {
            'name': self.name,
            'inf': self.inf,
            'sup': self.sup,
            'lipschitz': self.lipschitz,
            'delta_table': None
            if self.delta_table is None
            else self.delta_table.tolist(),
            'delta_fn': self.delta_fn is not None,
            'exact_modulus': self.exact_modulus,
        }

    def _check_table(self, dom, x, v, seed):
        rng = np.random.default_rng(seed)
        for eps, delta in self.delta_table:
            step = rng.standard_normal(x.shape)
            step *= 0.999 * delta * rng.random((x.shape[0], 1)) / np.linalg.norm(
                step, axis=1
            )[:, None]
            y = x + step
            inside = dom.contains(y)
            if not np.any(inside):
                continue
            dv = np.abs(self(y[inside], dom.d) - v[inside])
            if np.any(dv >= eps):
                raise impl.lipan.exc.ModulusError(
                    'Target violates its delta table',
                    name=self.name,
                    eps=eps,
                    delta=delta,
                    observed=float(dv.max()),
                )


class TableTarget(object):
    """Piecewise linear interpolant of tabulated samples, with nearest neighbor values
    outside the convex hull. Interpolators are built on first use and not pickled.
    """

    def __init__(self, points, values):
        self.points = impl.lipan.util.as_points(points)
        self.values = np.asarray(values, dtype=float).ravel()
        if self.points.shape[0] != self.values.size:
            raise impl.lipan.exc.ConfigError(
                'Table points and values differ in count',
                points=self.points.shape[0],
                values=self.values.size,
            )
        if self.values.size < 2:
            raise impl.lipan.exc.ConfigError('Table needs at least 2 samples')
        self._interp = None

    def __getstate__(self):
        state = self.__dict__.copy()
        state['_interp'] = None
        return state

    def __call__(self, p):
        if self._interp is None:
            self._interp = self._build()
        return self._interp(p)

    def _build(self):
        if self.points.shape[1] == 1:
            order = np.argsort(self.points[:, 0])
            xs, vs = self.points[order, 0], self.values[order]
            return lambda p: np.interp(p[:, 0], xs, vs)
        linear = scipy.interpolate.LinearNDInterpolator(self.points, self.values)
        nearest = scipy.interpolate.NearestNDInterpolator(self.points, self.values)

        def interp(p):
            v = linear(p)
            miss = np.isnan(v)
            if np.any(miss):
                v[miss] = nearest(p[miss])
            return v

        return interp


def builtin_target(name, d, params=None):
    """Builtin targets on the unit ball or box (|x_i| < 1 for every coordinate).

    product_sine: x1 sin(2 x2). |grad F|^2 = sin^2(2 x2) + 4 x1^2 cos^2(2 x2) <= 4.
    linear: x1.
    norm: |x|, Lipschitz 1.
    sqrt_norm: sqrt(|x|), uniformly continuous but not Lipschitz. Since
      |sqrt(s) - sqrt(t)| <= sqrt(|s - t|), delta(eps) = eps^2.
    constant: params['value'].
    """
    params = params or {}
    sqrt_d = math.sqrt(d)
    if name == 'product_sine':
        if d < 2:
            raise impl.lipan.exc.ConfigError('product_sine needs d >= 2', d=d)
        return TargetFunction(_product_sine, -1.0, 1.0, lipschitz=2.0, name=name)
    if name == 'linear':
        return TargetFunction(_linear, -1.0, 1.0, lipschitz=1.0, name=name)
    if name == 'norm':
        return TargetFunction(_norm, 0.0, sqrt_d, lipschitz=1.0, name=name)
    if name == 'sqrt_norm':
        return TargetFunction(
            _sqrt_norm,
            0.0,
            math.sqrt(sqrt_d),
            delta_fn=_square,
            exact_modulus=True,
            name=name,
        )
    if name == 'constant':
        try:
            value = float(params['value'])
        except (KeyError, TypeError, ValueError):
            raise impl.lipan.exc.ConfigError('constant target needs a numeric value')
        return TargetFunction(
            functools.partial(_constant, value), value, value, lipschitz=0.0, name=name
        )
    raise impl.lipan.exc.ConfigError(
        'Unknown builtin target', name=name, known=', '.join(BUILTIN_TUPLE)
    )


def table_target(points, values, lipschitz=None, delta_table=None):
    fn = TableTarget(points, values)
    return TargetFunction(
        fn,
        float(fn.values.min()),
        float(fn.values.max()),
        lipschitz=lipschitz,
        delta_table=delta_table,
        name='table',
    )


def _delta_table(rows):
    if rows is None:
        return None
    a = np.asarray(rows, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2 or not a.size:
        raise impl.lipan.exc.ModulusError('Delta table must be a list of [eps, delta] rows')
    if np.any(a <= 0.0):
        raise impl.lipan.exc.ModulusError('Delta table entries must be positive')
    return a


def _product_sine(p):
    return p[:, 0] * np.sin(2.0 * p[:, 1])


def _linear(p):
    return p[:, 0].copy()


def _norm(p):
    return np.linalg.norm(p, axis=1)


def _sqrt_norm(p):
    return np.sqrt(np.linalg.norm(p, axis=1))


def _square(eps):
    return eps * eps


def _constant(value, p):
    return np.full(p.shape[0], value)
