"""Even polynomial q built from a separating polynomial p.

With p = p_1 + ... + p_n split into homogeneous components (p_i of degree i), q is
sum_i p_i^2 scaled so that q >= 1 on the unit sphere. For q < 1 this gives
|y|^(2n) <= q(y), and q(y) <= K1 * max(|y|, |y|^(2n)) everywhere.
"""
import collections
import logging

import numpy as np

import impl.lipan.exc

SAFETY_FACTOR = 1.05
SPHERE_SAMPLE_COUNT = 20000
SPHERE_SEED = 20200
# Sampled sphere infimum at or below this is treated as "not separating".
SEPARATION_TOL = 1e-9
LOWER_BOUND_SLACK = 1e-12

BUILTIN_TUPLE = ('euclidean', 'quartic')

log = logging.getLogger(__name__)

BoundCheck = collections.namedtuple(
    'BoundCheck',
    [
        'q_value',
        'norm_pow',
        'lower_applies',
        'lower_ok',
        'upper_bound',
        'upper_ok',
    ],
)


class HomogeneousPolynomial(object):
    """Polynomial in d variables given as an exponent matrix (one row per monomial)
    and a coefficient vector. All monomials must share one total degree.
    """

    def __init__(self, d, exponents, coefs):
        e = np.asarray(exponents, dtype=int).reshape(-1, d)
        c = np.asarray(coefs, dtype=float).ravel()
        if e.shape[0] != c.shape[0]:
            raise impl.lipan.exc.ConfigError(
                'Exponent and coefficient counts differ',
                exponent_count=e.shape[0],
                coef_count=c.shape[0],
            )
        if np.any(e < 0):
            raise impl.lipan.exc.ConfigError('Negative monomial exponent')
        keep = c != 0.0
        e, c = e[keep], c[keep]
        degree_set = set(e.sum(axis=1).tolist())
        if len(degree_set) > 1:
            raise impl.lipan.exc.ConfigError(
                'Polynomial is not homogeneous', degrees=sorted(degree_set)
            )
        self.d = d
        self.exponents = e
        self.coefs = c
        self.degree = degree_set.pop() if degree_set else 0

    @classmethod
    def from_terms(cls, d, term_list):
        """Create from a list of (exponent sequence, coefficient) pairs."""
        if not term_list:
            return cls(d, np.zeros((0, d), dtype=int), [])
        exponents, coefs = zip(*[(list(e), float(c)) for e, c in term_list])
        for e in exponents:
            if len(e) != d:
                raise impl.lipan.exc.ConfigError(
                    'Monomial exponent length does not match dimension',
                    d=d,
                    exponent=e,
                )
        return cls(d, exponents, coefs)

    @property
    def is_zero(self):
        return self.coefs.size == 0

    def __call__(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        if self.is_zero:
            return np.zeros(y.shape[0])
        return _monomials(y, self.exponents) @ self.coefs

    def gradient(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        g = np.zeros_like(y)
        for k in range(self.d):
            c_k = self.coefs * self.exponents[:, k]
            live = c_k != 0.0
            if not np.any(live):
                continue
            e_k = self.exponents[live].copy()
            e_k[:, k] -= 1
            g[:, k] = _monomials(y, e_k) @ c_k[live]
        return g

    def as_terms(self):
        return [[e.tolist(), float(c)] for e, c in zip(self.exponents, self.coefs)]


class SepPolyQ(object):
    """q = scale * sum_i p_i^2 with certified constants.

    ``component_dict`` maps degree i to the homogeneous component p_i. Constants that
    depend on the radius (M, L_q) are None until derive_constants() has run.
    """

    def __init__(
        self,
        d,
        component_dict,
        scale,
        eta_raw,
        a_list,
        g_list,
        name,
        is_closed_form,
        R=None,
        M=None,
        L_q=None,
    ):
        self.d = d
        self.component_dict = component_dict
        self.n = max(component_dict)
        self.scale = scale
        self.eta_raw = eta_raw
        self.a_list = a_list
        self.g_list = g_list
        self.name = name
        self.is_closed_form = is_closed_form
        self.R = R
        self.M = M
        self.L_q = L_q

    @property
    def eta(self):
        """Sphere infimum after scaling. >= 1 by construction."""
        return self.scale * self.eta_raw

    @property
    def K1(self):
        return float(sum(self.a_list))

    @property
    def has_constants(self):
        return self.M is not None

    def component_values(self, y):
        """Return an (n, k) array holding q_i(y) for i = 1..n."""
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        out = np.zeros((self.n, y.shape[0]))
        for i, p in self.component_dict.items():
            out[i - 1] = self.scale * p(y) ** 2
        return out

    def __call__(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        out = np.zeros(y.shape[0])
        for p in self.component_dict.values():
            out += p(y) ** 2
        return self.scale * out

    def evaluate(self, y):
        return self(y)

    def gradient(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        g = np.zeros_like(y)
        for p in self.component_dict.values():
            g += 2.0 * p(y)[:, None] * p.gradient(y)
        return self.scale * g

    def component_gradient_norms(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        out = np.zeros((self.n, y.shape[0]))
        for i, p in self.component_dict.items():
            g = 2.0 * self.scale * p(y)[:, None] * p.gradient(y)
            out[i - 1] = np.linalg.norm(g, axis=1)
        return out

    def norm_pow(self, y):
        """|y|^(2n), computed from the squared norm so that q = |y|^4 matches exactly."""
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        return np.sum(y * y, axis=1) ** self.n

    def upper_bound(self, y):
        y = np.asarray(y, dtype=float).reshape(-1, self.d)
        r = np.linalg.norm(y, axis=1)
        return self.K1 * np.maximum(r, r ** (2 * self.n))

    def as_dict(self):
        return {
            'name': self.name,
            'd': self.d,
            'n': self.n,
            'components': {
                str(i): p.as_terms() for i, p in sorted(self.component_dict.items())
            },
            'scale': self.scale,
            'eta_raw': self.eta_raw,
            'eta': self.eta,
            'A': list(self.a_list),
            'G': list(self.g_list),
            'K1': self.K1,
            'R': self.R,
            'M': self.M,
            'L_q': self.L_q,
            'closed_form': self.is_closed_form,
            'safety_factor': None if self.is_closed_form else SAFETY_FACTOR,
        }


def build_q(p_components, name='user', sample_count=SPHERE_SAMPLE_COUNT):
    """Assemble q from the homogeneous components of a separating polynomial.

    Args:
        p_components: dict mapping degree to HomogeneousPolynomial, or a list of
          HomogeneousPolynomial (each placed by its own degree).

    The sphere infimum of sum_i p_i^2 and the unit-ball suprema of |q_i| and
    |grad q_i| are estimated by sampling the unit sphere, then divided / multiplied by
    SAFETY_FACTOR.
    """
    component_dict = _component_dict(p_components)
    d = next(iter(component_dict.values())).d
    sphere = sample_sphere(d, sample_count, SPHERE_SEED)
    raw = np.zeros(sphere.shape[0])
    for p in component_dict.values():
        raw += p(sphere) ** 2
    eta_est = float(raw.min())
    if eta_est <= SEPARATION_TOL:
        raise impl.lipan.exc.SeparationError(
            'Polynomial is not separating on the sampled unit sphere',
            sampled_inf=eta_est,
            sample_count=sample_count,
        )
    eta_raw = eta_est / SAFETY_FACTOR
    scale = 1.0 / eta_raw
    q = SepPolyQ(d, component_dict, scale, eta_raw, [], [], name, False)
    # Homogeneity puts the unit-ball suprema on the sphere.
    q.a_list = [
        SAFETY_FACTOR * float(v.max()) for v in q.component_values(sphere)
    ]
    q.g_list = [
        SAFETY_FACTOR * float(v.max()) for v in q.component_gradient_norms(sphere)
    ]
    log.debug(
        'Built q. name="{}" n={} eta_est={} scale={}'.format(
            name, q.n, eta_est, scale
        )
    )
    return q


def builtin_q(name, d):
    """Closed form instances.

    euclidean: p = sum x_i^2, q = |y|^4, eta = 1, A_2 = 1, sup |grad q_2| = 4 on the
      unit ball.
    quartic: p = sum x_i^4 with sphere minimum 1/d, so q = d^2 (sum x_i^4)^2, A_4 = d^2
      and sup |grad q_4| = 8 d^2 on the unit ball.
    """
    if d < 1:
        raise impl.lipan.exc.DomainError('Dimension must be positive', d=d)
    eye = np.eye(d, dtype=int)
    if name == 'euclidean':
        p = HomogeneousPolynomial(d, 2 * eye, np.ones(d))
        return SepPolyQ(d, {2: p}, 1.0, 1.0, [0.0, 1.0], [0.0, 4.0], name, True)
    if name == 'quartic':
        p = HomogeneousPolynomial(d, 4 * eye, np.ones(d))
        scale = float(d * d)
        return SepPolyQ(
            d,
            {4: p},
            scale,
            1.0 / scale,
            [0.0, 0.0, 0.0, scale],
            [0.0, 0.0, 0.0, 8.0 * scale],
            name,
            True,
        )
    raise impl.lipan.exc.ConfigError(
        'Unknown builtin q', name=name, known=', '.join(BUILTIN_TUPLE)
    )


def derive_constants(q, R):
    """Return a copy of ``q`` with M and L_q filled for the radius-2R ball.

    M = max(1, K1 * max(2R, (2R)^(2n))) and L_q = sum_i G_i (2R)^(2i-1), where G_i
    bounds |grad q_i| on the unit ball and q_i is homogeneous of degree 2i.
    """
    if not R > 1:
        raise impl.lipan.exc.DomainError('Radius must exceed 1', R=R)
    two_r = 2.0 * R
    try:
        M = max(1.0, q.K1 * max(two_r, two_r ** (2 * q.n)))
        L_q = float(
            sum(
                g * two_r ** (2 * i - 1)
                for i, g in enumerate(q.g_list, start=1)
                if g
            )
        )
    except OverflowError as e:
        raise impl.lipan.exc.DomainError(
            'Overflow deriving q constants', R=R, n=q.n, error=str(e)
        )
    if not np.isfinite(M) or not np.isfinite(L_q):
        raise impl.lipan.exc.DomainError('Overflow deriving q constants', R=R, n=q.n)
    return SepPolyQ(
        q.d,
        q.component_dict,
        q.scale,
        q.eta_raw,
        list(q.a_list),
        list(q.g_list),
        q.name,
        q.is_closed_form,
        R=float(R),
        M=float(M),
        L_q=L_q,
    )


def check_bounds(q, y):
    """Check both polynomial bounds at one point y."""
    y = np.asarray(y, dtype=float).reshape(1, q.d)
    q_value = float(q(y)[0])
    norm_pow = float(q.norm_pow(y)[0])
    upper = float(q.upper_bound(y)[0])
    lower_applies = q_value < 1.0
    return BoundCheck(
        q_value=q_value,
        norm_pow=norm_pow,
        lower_applies=lower_applies,
        lower_ok=(not lower_applies) or norm_pow <= q_value + LOWER_BOUND_SLACK,
        upper_bound=upper,
        upper_ok=q_value <= upper * (1.0 + 1e-12),
    )


def sample_sphere(d, count, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, d))
    return z / np.linalg.norm(z, axis=1)[:, None]


def _monomials(y, exponents):
    """(k, d) points and (t, d) exponents -> (k, t) monomial values."""
    return np.prod(y[:, None, :] ** exponents[None, :, :], axis=2)


def _component_dict(p_components):
    if isinstance(p_components, dict):
        item_list = list(p_components.items())
    else:
        item_list = [(p.degree, p) for p in p_components]
    component_dict = {}
    for degree, p in item_list:
        if p.is_zero:
            continue
        if p.degree != degree:
            raise impl.lipan.exc.ConfigError(
                'Component degree does not match its monomials',
                declared=degree,
                actual=p.degree,
            )
        if degree < 1:
            raise impl.lipan.exc.ConfigError('Component degree must be at least 1')
        if degree in component_dict:
            raise impl.lipan.exc.ConfigError('Duplicate component degree', degree=degree)
        component_dict[degree] = p
    if not component_dict:
        raise impl.lipan.exc.ConfigError('Separating polynomial has no nonzero component')
    return component_dict
