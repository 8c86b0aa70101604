"""Certified analytic gate functions zeta1, zeta2, h, and the functions built from
them: f_j = zeta1(q(x - x_j)), g_j = zeta2(phi_(j-1)(x)), psi_j = f_j + g_j and
u_j = h(psi_j).

A gate is fitted to a GateSpec, a list of (interval, comparison, threshold)
constraints on a domain [lo, hi], and then certified on a grid fine enough that the
gate's derivative bound carries each node verdict to the whole cell.
"""
import collections
import logging
import math
import operator

import numpy as np
import numpy.polynomial

import impl.lipan.exc

MODE_TUPLE = ('sigmoid', 'polynomial')
DEFAULT_MODE = 'sigmoid'
DEFAULT_SHARPNESS = 2.0
DEFAULT_MAX_DEGREE = 256
START_DEGREE = 8
MARGIN_FRACTION = 0.1
ZETA1_HEADROOM = 1.01
ZETA2_HI = 1.05
PRECHECK_COUNT = 4096
CERT_MAX_NODES = 2000000

OP_DICT = {
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}

log = logging.getLogger(__name__)

ConstraintMargin = collections.namedtuple(
    'ConstraintMargin', ['constraint', 'margin', 'location']
)
CertFailure = collections.namedtuple(
    'CertFailure', ['constraint', 'location', 'margin', 'reason']
)
MarginReport = collections.namedtuple(
    'MarginReport',
    ['gate_name', 'ok', 'margin_list', 'failure', 'sup_abs', 'node_count'],
)
Plateau = collections.namedtuple('Plateau', ['level', 'lower', 'upper', 'margin'])
UVector = collections.namedtuple(
    'UVector', ['y', 'phi', 'f', 'g', 'psi', 'u', 'quad_error']
)
Stability = collections.namedtuple(
    'Stability', ['j_x', 'j_min', 'radius', 'eta', 'bound']
)


class Constraint(collections.namedtuple('Constraint', ['lo', 'hi', 'op', 'threshold'])):
    """gate(t) <op> threshold for every t in [lo, hi]."""

    __slots__ = ()

    @property
    def is_lower(self):
        """True if the constraint bounds the gate from below."""
        return self.op in ('>', '>=')

    def margin(self, v):
        v = np.asarray(v, dtype=float)
        return v - self.threshold if self.is_lower else self.threshold - v

    def holds(self, v):
        return OP_DICT[self.op](v, self.threshold)

    def as_list(self):
        return [self.lo, self.hi, self.op, self.threshold]

    def __str__(self):
        return 'g(t) {} {!r} on [{!r}, {!r}]'.format(
            self.op, self.threshold, self.lo, self.hi
        )


class GateSpec(object):
    def __init__(
        self,
        name,
        constraints,
        lo,
        hi,
        mode=DEFAULT_MODE,
        sharpness=DEFAULT_SHARPNESS,
        max_degree=DEFAULT_MAX_DEGREE,
    ):
        if mode not in MODE_TUPLE:
            raise impl.lipan.exc.ConfigError(
                'Unknown gate mode', mode=mode, known=', '.join(MODE_TUPLE)
            )
        if not lo < hi:
            raise impl.lipan.exc.GateUnsatisfiableError(
                'Empty gate domain', gate=name, lo=lo, hi=hi
            )
        if not sharpness >= 1.0:
            raise impl.lipan.exc.ConfigError(
                'Sharpness budget must be at least 1', sharpness=sharpness
            )
        self.name = name
        self.constraints = [Constraint(*c) for c in constraints]
        for c in self.constraints:
            if c.op not in OP_DICT:
                raise impl.lipan.exc.ConfigError('Unknown comparison', op=c.op)
            if not lo <= c.lo <= c.hi <= hi:
                raise impl.lipan.exc.GateUnsatisfiableError(
                    'Constraint interval outside the gate domain',
                    gate=name,
                    constraint=c,
                )
        self.lo = float(lo)
        self.hi = float(hi)
        self.mode = mode
        self.sharpness = float(sharpness)
        self.max_degree = int(max_degree)

    def split(self):
        """Return (left flat, right flat, global list).

        The left flat constraint starts at lo and stops short of hi, the right flat
        one ends at hi, and global constraints span the whole domain.
        """
        left_list, right_list, global_list = [], [], []
        for c in self.constraints:
            starts, ends = c.lo <= self.lo, c.hi >= self.hi
            if starts and ends:
                global_list.append(c)
            elif starts:
                left_list.append(c)
            elif ends:
                right_list.append(c)
            else:
                raise impl.lipan.exc.GateUnsatisfiableError(
                    'Interior constraints are not supported', gate=self.name, constraint=c
                )
        if len(left_list) != 1 or len(right_list) != 1:
            raise impl.lipan.exc.GateUnsatisfiableError(
                'Gate needs exactly one left and one right flat constraint',
                gate=self.name,
            )
        left, right = left_list[0], right_list[0]
        if not left.hi < right.lo:
            raise impl.lipan.exc.GateUnsatisfiableError(
                'Flat constraints leave no gap', gate=self.name, left=left, right=right
            )
        return left, right, global_list

    def with_constraint(self, index, constraint):
        """Copy with one constraint replaced."""
        c_list = list(self.constraints)
        c_list[index] = Constraint(*constraint)
        return GateSpec(
            self.name,
            c_list,
            self.lo,
            self.hi,
            self.mode,
            self.sharpness,
            self.max_degree,
        )

    def as_dict(self):
        return {
            'name': self.name,
            'domain': [self.lo, self.hi],
            'mode': self.mode,
            'sharpness': self.sharpness,
            'max_degree': self.max_degree,
            'constraints': [c.as_list() for c in self.constraints],
        }


class SigmoidGate(object):
    """p_left + (p_right - p_left) * (1 + tanh(k (t - c))) / 2."""

    kind = 'sigmoid'

    def __init__(self, p_left, p_right, center, sharpness):
        self.p_left = float(p_left)
        self.p_right = float(p_right)
        self.center = float(center)
        self.k = float(sharpness)

    @property
    def delta(self):
        return self.p_right - self.p_left

    @property
    def lipschitz(self):
        return abs(self.delta) * self.k / 2.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v = self.p_left + self.delta * 0.5 * (1.0 + np.tanh(self.k * (t - self.center)))
        return v if v.ndim else float(v)

    def derivative_bound(self, a, b):
        """Max of |gate'| on each cell [a, b]: |delta| k / 2 sech^2(k dist(c, cell))."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        dist = np.where(
            self.center < a, a - self.center, np.where(self.center > b, self.center - b, 0.0)
        )
        e = np.exp(-2.0 * self.k * dist)
        return self.lipschitz * 4.0 * e / (1.0 + e) ** 2

    def as_dict(self):
        return {
            'kind': self.kind,
            'p_left': self.p_left,
            'p_right': self.p_right,
            'center': self.center,
            'k': self.k,
            'lipschitz': self.lipschitz,
        }


class PolynomialGate(object):
    """Chebyshev series on [lo, hi]. The derivative bound is the l1 norm of the
    derivative's Chebyshev coefficients, valid on the whole domain.
    """

    kind = 'polynomial'

    def __init__(self, series):
        self.series = series
        self._d_bound = float(np.sum(np.abs(series.deriv().coef)))

    @property
    def degree(self):
        return self.series.degree()

    @property
    def lipschitz(self):
        return self._d_bound

    def __call__(self, t):
        v = self.series(np.asarray(t, dtype=float))
        return v if np.ndim(v) else float(v)

    def derivative_bound(self, a, b):
        return np.full(np.shape(a), self._d_bound)

    def as_dict(self):
        return {
            'kind': self.kind,
            'degree': self.degree,
            'domain': list(self.series.domain),
            'coef': self.series.coef.tolist(),
            'lipschitz': self.lipschitz,
        }


class CertifiedGate(object):
    def __init__(self, gate, spec, report):
        self.gate = gate
        self.spec = spec
        self.report = report

    def __call__(self, t):
        return self.gate(t)

    @property
    def name(self):
        return self.spec.name

    @property
    def lipschitz(self):
        return self.gate.lipschitz

    @property
    def sup(self):
        return self.report.sup_abs

    @property
    def lo(self):
        return self.spec.lo

    @property
    def hi(self):
        return self.spec.hi

    def as_dict(self):
        return {
            'spec': self.spec.as_dict(),
            'gate': self.gate.as_dict(),
            'certificate': report_as_dict(self.report),
        }


def fit_gate(spec):
    """Fit and certify a gate for ``spec``.

    Raises:
        GateUnsatisfiableError: The constraints leave no room for a gate.
        GateCertificationError: The fitted sigmoid failed certification.
        DegreeBudgetError: No polynomial up to spec.max_degree certified.
    """
    template = fit_sigmoid(spec)
    if spec.mode == 'sigmoid':
        report = certify_gate(template, spec)
        require_certified(report)
        log.debug(
            'Certified sigmoid gate. name="{}" k={} nodes={}'.format(
                spec.name, template.k, report.node_count
            )
        )
        return CertifiedGate(template, spec, report)
    return fit_polynomial(spec, template)


def fit_sigmoid(spec):
    """Single tanh ramp between two plateau levels.

    Each plateau level sits inside its side's band of allowed values, shrunk by
    MARGIN_FRACTION of the band width (or of the gap between the two flat thresholds
    for a band that is open on one side). The ramp is centered and sharpened so that
    at the inner ends of the flat intervals the gate is still inside the shrunk band,
    then the sharpness is multiplied by spec.sharpness.
    """
    left, right, global_list = spec.split()
    gap = abs(left.threshold - right.threshold)
    plateau_l = _plateau(left, global_list, gap, spec.name)
    plateau_r = _plateau(right, global_list, gap, spec.name)
    delta = plateau_r.level - plateau_l.level
    if delta == 0.0:
        return SigmoidGate(plateau_l.level, plateau_r.level, 0.5 * (left.hi + right.lo), 1.0)
    budget_l = _budget(plateau_l, delta > 0.0)
    budget_r = _budget(plateau_r, delta < 0.0)
    lam_a = _logit_budget(budget_l / abs(delta))
    lam_b = _logit_budget(budget_r / abs(delta))
    a, b = left.hi, right.lo
    k0 = (lam_a + lam_b) / (2.0 * (b - a))
    center = a + lam_a / (2.0 * k0)
    return SigmoidGate(plateau_l.level, plateau_r.level, center, spec.sharpness * k0)


def fit_polynomial(spec, template):
    """Least squares Chebyshev fit of ``template`` on Chebyshev nodes, doubling the
    degree from START_DEGREE until the fit certifies.
    """
    deg = START_DEGREE
    while deg <= spec.max_degree:
        node_count = 2 * (deg + 1)
        nodes = _chebyshev_nodes(spec.lo, spec.hi, node_count)
        series = numpy.polynomial.Chebyshev.fit(
            nodes, template(nodes), deg, domain=[spec.lo, spec.hi]
        )
        gate = PolynomialGate(series)
        if _precheck(gate, spec):
            report = certify_gate(gate, spec)
            if report.ok:
                log.debug(
                    'Certified polynomial gate. name="{}" degree={}'.format(
                        spec.name, deg
                    )
                )
                return CertifiedGate(gate, spec, report)
        log.debug('Polynomial gate rejected. name="{}" degree={}'.format(spec.name, deg))
        deg *= 2
    raise impl.lipan.exc.DegreeBudgetError(
        'No polynomial gate certified within the degree budget',
        gate=spec.name,
        max_degree=spec.max_degree,
    )


def certify_gate(gate, spec):
    """Grid certificate for every constraint of ``spec``.

    The domain is cut at every constraint endpoint. Each piece is bisected until every
    cell satisfies D * width < m / 2, with D the gate's derivative bound on the cell
    and m the smaller node margin at its ends. Then every point of the cell keeps more
    than half the node margin, so positive node margins certify the whole piece.

    Returns a MarginReport; failures are reported, not raised.
    """
    cut_set = {spec.lo, spec.hi}
    for c in spec.constraints:
        cut_set.update((c.lo, c.hi))
    cut_arr = np.array(sorted(cut_set))
    worst = {}
    sup_abs = 0.0
    node_count = 0
    for s0, s1 in zip(cut_arr[:-1], cut_arr[1:]):
        applicable = [
            c for c in spec.constraints if c.lo <= s0 and s1 <= c.hi
        ]
        result = _certify_piece(gate, applicable, s0, s1)
        node_count += result['node_count']
        sup_abs = max(sup_abs, result['sup_abs'])
        for c, (m, t) in result['worst'].items():
            if c not in worst or m < worst[c][0]:
                worst[c] = (m, t)
        if result['failure'] is not None:
            return MarginReport(
                spec.name,
                False,
                _margin_list(spec, worst),
                result['failure'],
                sup_abs,
                node_count,
            )
    # Constraints on a single point are checked at that node.
    for c in spec.constraints:
        if c not in worst:
            m = float(c.margin(gate(c.lo)))
            worst[c] = (m, c.lo)
            if not m > 0.0:
                return MarginReport(
                    spec.name,
                    False,
                    _margin_list(spec, worst),
                    CertFailure(c, c.lo, m, 'violated'),
                    sup_abs,
                    node_count,
                )
    return MarginReport(
        spec.name, True, _margin_list(spec, worst), None, sup_abs, node_count
    )


def require_certified(report):
    if not report.ok:
        f = report.failure
        raise impl.lipan.exc.GateCertificationError(
            'Gate certification failed: {}'.format(f.reason),
            report.gate_name,
            str(f.constraint),
            f.location,
            f.margin,
        )


def report_as_dict(report):
    return {
        'gate': report.gate_name,
        'ok': report.ok,
        'node_count': report.node_count,
        'sup_abs': report.sup_abs,
        'margins': [
            {
                'constraint': m.constraint.as_list(),
                'margin': m.margin,
                'location': m.location,
            }
            for m in report.margin_list
        ],
        'failure': None
        if report.failure is None
        else {
            'constraint': report.failure.constraint.as_list(),
            'location': report.failure.location,
            'margin': report.failure.margin,
            'reason': report.failure.reason,
        },
    }


def zeta1_spec(gamma2, gamma3, M, **kwargs):
    hi = ZETA1_HEADROOM * M
    return GateSpec(
        'zeta1',
        [(0.0, gamma2, '<', 0.25), (gamma3, hi, '>=', 1.0), (0.0, hi, '>=', 0.125)],
        0.0,
        hi,
        **kwargs
    )


def zeta2_spec(**kwargs):
    return GateSpec(
        'zeta2',
        [(0.0, 0.25, '>=', 2.0), (0.5, ZETA2_HI, '<', 0.25), (0.0, ZETA2_HI, '>=', 0.125)],
        0.0,
        ZETA2_HI,
        **kwargs
    )


def h_spec(eps, T, **kwargs):
    if not 0.0 < eps < 0.4:
        raise impl.lipan.exc.ConfigError('h needs eps / 4 < 1 / 10', eps=eps)
    if not T > 0.75:
        raise impl.lipan.exc.GateUnsatisfiableError('h domain too short', T=T)
    return GateSpec(
        'h',
        [
            (0.0, 0.5, '>=', 0.8),
            (0.75, T, '<', eps / 4.0),
            (0.0, T, '>', 0.0),
            (0.0, T, '<=', 1.0),
        ],
        0.0,
        T,
        **kwargs
    )


class GateSet(object):
    def __init__(self, zeta1, zeta2, h, eps):
        self.zeta1 = zeta1
        self.zeta2 = zeta2
        self.h = h
        self.eps = eps

    @property
    def L_zeta1(self):
        return self.zeta1.lipschitz

    @property
    def L2(self):
        return max(1.0, self.zeta2.lipschitz)

    @property
    def L_h(self):
        return max(1.0, self.h.lipschitz)

    @property
    def T(self):
        return self.h.hi

    def psi_constant(self, L_q, L_b):
        """Common Lipschitz constant of the psi_j family."""
        return self.L_zeta1 * L_q + self.L2 * L_b * L_q

    def u_constant(self, L_q, L_b):
        return self.L_h * self.psi_constant(L_q, L_b)

    def f(self, y):
        return self.zeta1(_check_domain(self.zeta1, y))

    def g(self, phi):
        return self.zeta2(_check_domain(self.zeta2, phi))

    def u_of(self, psi):
        return self.h(_check_domain(self.h, psi))

    def as_dict(self):
        return {
            'eps': self.eps,
            'T': self.T,
            'L_zeta1': self.L_zeta1,
            'L2': self.L2,
            'L_h': self.L_h,
            'zeta1': self.zeta1.as_dict(),
            'zeta2': self.zeta2.as_dict(),
            'h': self.h.as_dict(),
        }


def build_gate_set(
    gammas, M, eps, mode=DEFAULT_MODE, sharpness=DEFAULT_SHARPNESS, max_degree=DEFAULT_MAX_DEGREE
):
    """Fit and certify zeta1, zeta2 and then h on [0, T], T = sup|zeta1| + sup|zeta2|
    taken from the two certificates.
    """
    kwargs = {'mode': mode, 'sharpness': sharpness, 'max_degree': max_degree}
    log.info('Certifying gates. mode="{}"'.format(mode))
    zeta1 = fit_gate(zeta1_spec(gammas[1], gammas[2], M, **kwargs))
    zeta2 = fit_gate(zeta2_spec(**kwargs))
    T = zeta1.sup + zeta2.sup
    h = fit_gate(h_spec(eps, T, **kwargs))
    return GateSet(zeta1, zeta2, h, eps)


def u_vector(gs, q, net, fam, x, point_index=0, backend=None):
    """All of y_j, phi_(j-1), f_j, g_j, psi_j and u_j for j = 1..N at one point."""
    y = net.q_values(q, x)
    sweep = fam.phi_sweep(y, backend, point_index)
    phi_prev = sweep.phi[:-1]
    f = gs.f(y)
    g = gs.g(phi_prev)
    psi = f + g
    u = gs.u_of(psi)
    return UVector(y, sweep.phi, f, g, psi, u, sweep.error)


def psi_j(gs, q, net, fam, x, j, backend=None, point_index=0):
    """psi_j(x) = zeta1(q(x - x_j)) + zeta2(phi_(j-1)(x)), 1-based j."""
    if not 1 <= j <= net.N:
        raise IndexError('Net index out of range. j={} N={}'.format(j, net.N))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y_j = q(x - net.points[j - 1])
    phi_prev = fam.phi(q, net, x, j - 1, backend, point_index).value
    return float(gs.f(y_j)[0] + gs.g(phi_prev))


def u_j(gs, q, net, fam, x, j, backend=None, point_index=0):
    return float(gs.u_of(psi_j(gs, q, net, fam, x, j, backend, point_index)))


def stability_eta(gs):
    """Level below which phi_(j-1) moves the zeta2 term by less than 1 / (20 L_h)."""
    return 1.0 / (40.0 * gs.L2 * gs.L_h)


def stability_radius(gs, q, net, fam, x):
    """Radius and first index beyond which psi_j moves by less than 1 / (10 L_h).

    With eta = 1 / (40 L2 L_h), phi_(j-1) < eta near x once j - 1 reaches the
    localization threshold, so zeta2(phi_(j-1)(x)) >= 2 and psi_j(x) > 1. On the
    radius, the zeta1 term moves by less than 1 / (20 L_h) and the zeta2 term by less
    than L2 * 2 eta = 1 / (20 L_h).
    """
    eta = stability_eta(gs)
    loc = fam.localization(q, net, x, eta)
    radius = min(loc.radius, 1.0 / (20.0 * gs.L_h * gs.L_zeta1 * q.L_q))
    j_min = None if loc.n0 is None or loc.n0 + 1 > net.N else loc.n0 + 1
    return Stability(loc.j0, j_min, radius, eta, 1.0 / (10.0 * gs.L_h))


def _plateau(flat, global_list, gap, gate_name):
    lower, upper = -math.inf, math.inf
    for c in [flat] + global_list:
        if c.is_lower:
            lower = max(lower, c.threshold)
        else:
            upper = min(upper, c.threshold)
    if not lower < upper:
        raise impl.lipan.exc.GateUnsatisfiableError(
            'Empty band of allowed values', gate=gate_name, constraint=flat
        )
    width = upper - lower if math.isfinite(lower) and math.isfinite(upper) else gap
    m = MARGIN_FRACTION * width
    lower_s, upper_s = -math.inf, math.inf
    for c in [flat] + global_list:
        shrink = m if c is flat else 0.0
        if c.is_lower:
            lower_s = max(lower_s, c.threshold + shrink)
        else:
            upper_s = min(upper_s, c.threshold - shrink)
    if not lower_s < upper_s:
        raise impl.lipan.exc.GateUnsatisfiableError(
            'Band too narrow for the margin', gate=gate_name, constraint=flat
        )
    if math.isfinite(lower_s) and math.isfinite(upper_s):
        level = 0.5 * (lower_s + upper_s)
    elif math.isfinite(lower_s):
        level = lower_s + m
    else:
        level = upper_s - m
    return Plateau(level, lower_s, upper_s, m)


def _budget(plateau, toward_higher):
    """Allowed deviation of the gate from the plateau level toward the other side."""
    if toward_higher:
        return plateau.upper - plateau.level
    return plateau.level - plateau.lower


def _logit_budget(rho):
    """-logit(rho), floored at 1 for budgets of half the step or more."""
    if rho >= 0.5:
        return 1.0
    return math.log((1.0 - rho) / rho)


def _chebyshev_nodes(lo, hi, count):
    k = np.arange(count)
    x = np.cos(np.pi * (k + 0.5) / count)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def _precheck(gate, spec):
    """Cheap rejection of fits that visibly break a constraint or would need an
    excessive certification grid.
    """
    for c in spec.constraints:
        t = np.linspace(c.lo, c.hi, PRECHECK_COUNT)
        m = c.margin(gate(t))
        if not np.all(m > 0.0):
            return False
        d_bound = float(np.max(gate.derivative_bound(t[:1], t[-1:])))
        if d_bound * (c.hi - c.lo) / (0.5 * float(m.min())) > CERT_MAX_NODES:
            return False
    return True


def _certify_piece(gate, applicable, s0, s1):
    """Adaptive bisection certificate on [s0, s1] for the applicable constraints."""
    result = {'node_count': 0, 'sup_abs': 0.0, 'worst': {}, 'failure': None}
    if s1 <= s0:
        return result
    a, b = np.array([s0], dtype=float), np.array([s1], dtype=float)
    node_list = [a, b]
    split_count = 0
    while a.size:
        va, vb = gate(a), gate(b)
        ma = _node_margin(applicable, va)
        mb = _node_margin(applicable, vb)
        for t_arr, m_arr in ((a, ma), (b, mb)):
            bad = np.flatnonzero(~(m_arr > 0.0))
            if bad.size:
                result['failure'] = _failure(gate, applicable, t_arr[bad[0]], 'violated')
                break
        if result['failure'] is not None:
            break
        d = gate.derivative_bound(a, b)
        width = b - a
        ok = d * width < 0.5 * np.minimum(ma, mb)
        if np.any(ok):
            cell_sup = np.maximum(np.abs(va), np.abs(vb)) + d * width / 2.0
            result['sup_abs'] = max(result['sup_abs'], float(np.max(cell_sup[ok])))
        a, b = a[~ok], b[~ok]
        if not a.size:
            break
        mid = 0.5 * (a + b)
        stuck = (mid <= a) | (mid >= b)
        split_count += a.size
        if np.any(stuck) or split_count > CERT_MAX_NODES:
            i = int(np.flatnonzero(stuck)[0]) if np.any(stuck) else 0
            result['failure'] = _failure(gate, applicable, a[i], 'stalled')
            break
        node_list.append(mid)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    node_arr = np.unique(np.concatenate(node_list))
    result['node_count'] = int(node_arr.size)
    _record(result, applicable, gate, node_arr)
    return result


def _node_margin(applicable, v):
    if not applicable:
        return np.full(np.shape(v), np.inf)
    return np.min([c.margin(v) for c in applicable], axis=0)


def _binding(applicable, v):
    return min(applicable, key=lambda c: float(c.margin(v)))


def _failure(gate, applicable, t, reason):
    t = float(t)
    v = gate(t)
    c = _binding(applicable, v)
    return CertFailure(c, t, float(c.margin(v)), reason)


def _record(result, applicable, gate, node_arr):
    v = gate(node_arr)
    for c in applicable:
        m = c.margin(v)
        i = int(np.argmin(m))
        result['worst'][c] = (float(m[i]), float(node_arr[i]))


def _margin_list(spec, worst):
    return [
        ConstraintMargin(c, worst[c][0], worst[c][1])
        for c in spec.constraints
        if c in worst
    ]


def _check_domain(gate, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < gate.lo) or np.any(t > gate.hi):
        raise impl.lipan.exc.GateDomainError(
            'Gate argument outside the certified domain',
            gate=gate.name,
            lo=gate.lo,
            hi=gate.hi,
            min=float(np.min(t)),
            max=float(np.max(t)),
        )
    return t
