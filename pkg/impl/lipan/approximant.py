"""The Lipschitz analytic approximant

    K(x) = lambda({F(x_j) u_j(x)}) / lambda({u_j(x)})

of a bounded uniformly continuous target F on the domain G, built from the net, the
mollifier family and the gates, with the error and Lipschitz reports.

F is first mapped affinely onto [1/3, 1] and the internal eps scaled accordingly;
evaluation maps K back to the units of F.
"""
import collections
import concurrent.futures
import logging
import math

import numpy as np

import impl.lipan.exc
import impl.lipan.gates
import impl.lipan.gauge
import impl.lipan.ledger
import impl.lipan.mollifier
import impl.lipan.seppoly
import impl.lipan.space_net
import impl.lipan.util

EPS_CAP = 0.249
DENOMINATOR_FLOOR = 0.8
DENOMINATOR_SLACK = 1e-6
NORM_SLACK = 1e-12
# Relative slack for comparisons between gauge values.
GAUGE_SLACK = 1e-9
CLOSE_DISTANCE_TUPLE = (1e-2, 1e-3, 1e-4)
# Close pairs at the finest distance that are refined by bisection.
REFINE_PAIR_COUNT = 4
REFINE_MAX_STEPS = 16
SETTLE_RATIO = 1.2
SETTLE_STEPS = 2
SETTLE_SLACK = 1e-9

log = logging.getLogger(__name__)

BuildOptions = collections.namedtuple(
    'BuildOptions',
    [
        'gammas',
        'backend',
        'mc_samples',
        'seed',
        'gate_mode',
        'sharpness',
        'max_degree',
        'net_cap',
        'gauge_tol',
    ],
)
BuildOptions.__new__.__defaults__ = (
    None,
    impl.lipan.mollifier.DEFAULT_BACKEND,
    impl.lipan.mollifier.DEFAULT_MC_SAMPLES,
    0,
    impl.lipan.gates.DEFAULT_MODE,
    impl.lipan.gates.DEFAULT_SHARPNESS,
    impl.lipan.gates.DEFAULT_MAX_DEGREE,
    impl.lipan.space_net.DEFAULT_NET_CAP,
    impl.lipan.gauge.DEFAULT_TOL,
)

Evaluation = collections.namedtuple(
    'Evaluation', ['K', 'K_norm', 'numerator', 'denominator', 'uvec']
)
PointRow = collections.namedtuple(
    'PointRow',
    [
        'index',
        'x',
        'F',
        'K',
        'abs_err',
        'denominator',
        'off_support_max',
        'in_support_max',
        'margin_dict',
    ],
)
ErrorReport = collections.namedtuple(
    'ErrorReport', ['rows', 'sup_error', 'margin', 'eps_user', 'ledger']
)
LipschitzEstimate = collections.namedtuple(
    'LipschitzEstimate',
    [
        'estimate',
        'random_quotient',
        'close_dict',
        'chain_bound',
        'stable',
        'pair_count',
        'refinement_list',
    ],
)
Refinement = collections.namedtuple(
    'Refinement', ['point_index', 'h', 'quotient', 'quotient_list', 'settled']
)


class Approximant(object):
    def __init__(
        self, F, dom, q, net, fam, gates, gauge, a, b, eps_user, eps, delta, options
    ):
        self.F = F
        self.dom = dom
        self.q = q
        self.net = net
        self.fam = fam
        self.gates = gates
        self.gauge = gauge
        self.a = a
        self.b = b
        self.eps_user = eps_user
        self.eps = eps
        self.delta = delta
        self.options = options
        self.f_net = a * F(net.points, dom.d) + b
        self.f_net.setflags(write=False)

    @property
    def N(self):
        return self.net.N

    @property
    def is_flat(self):
        return self.F.is_flat

    def F_norm(self, x):
        return self.a * self.F(x, self.dom.d) + self.b

    def evaluate(self, x, point_index=0, strict=True):
        """K(x) with its intermediate values.

        Raises:
            InvariantViolation: The denominator is below 4/5 (``strict`` only).
        """
        x = impl.lipan.util.as_point(x)
        uvec = impl.lipan.gates.u_vector(
            self.gates, self.q, self.net, self.fam, x, point_index
        )
        denominator = self.gauge(uvec.u)
        numerator = self.gauge(self.f_net * uvec.u)
        if strict and denominator < DENOMINATOR_FLOOR - DENOMINATOR_SLACK:
            raise impl.lipan.exc.InvariantViolation(
                'Gauge denominator below 4/5',
                denominator=denominator,
                x=x.tolist(),
                point_index=point_index,
            )
        k_norm = numerator / denominator
        return Evaluation(
            (k_norm - self.b) / self.a, k_norm, numerator, denominator, uvec
        )

    def __call__(self, x, point_index=0):
        return self.evaluate(x, point_index).K

    def constants(self):
        return {
            'eps_user': self.eps_user,
            'eps': self.eps,
            'a': self.a,
            'b': self.b,
            'delta': self.delta,
            'flat': self.is_flat,
            'gammas': list(self.net.gammas),
            'N': self.N,
            'covering_radius': self.net.covering_radius,
            'spacing': self.net.spacing,
            'L_q': self.q.L_q,
            'M': self.q.M,
            'L_b': self.fam.L_b,
            'W1': self.fam.W1(self.q.L_q, self.dom.R),
            'psi_constant': self.gates.psi_constant(self.q.L_q, self.fam.L_b),
            'u_constant': self.gates.u_constant(self.q.L_q, self.fam.L_b),
            'chain_bound': chain_bound(self),
        }

    def as_dict(self):
        return impl.lipan.util.to_builtin(
            {
                'domain': self.dom.as_dict(),
                'target': self.F.as_dict(),
                'q': self.q.as_dict(),
                'constants': self.constants(),
                'net': self.net.as_dict(include_points=False),
                'mollifier': self.fam.as_dict(),
                'gates': self.gates.as_dict(),
                'gauge': self.gauge.as_dict(),
            }
        )


def build_approximant(F, dom, q, eps_user, options=None):
    """Normalize F onto [1/3, 1], choose the gammas from the modulus at level eps / 4,
    and build the net, mollifier family and gates.

    Raises:
        ConfigError: eps_user is not positive or an option is invalid.
        ModulusError: The modulus data does not reach the needed level, or F leaves
          its declared bounds at a net point.
        CapacityError: The net exceeds the cap.
    """
    options = options or BuildOptions()
    if not eps_user > 0.0:
        raise impl.lipan.exc.ConfigError('eps must be positive', eps=eps_user)
    if q.d != dom.d:
        raise impl.lipan.exc.DomainError(
            'q and domain differ in dimension', q_d=q.d, domain_d=dom.d
        )
    if not q.has_constants or q.R != dom.R:
        q = impl.lipan.seppoly.derive_constants(q, dom.R)
    if F.is_flat:
        a, b = 1.0, 1.0 - F.inf
        eps = min(eps_user, EPS_CAP)
        delta = math.inf
    else:
        a = (2.0 / 3.0) / (F.sup - F.inf)
        b = 1.0 / 3.0 - a * F.inf
        eps = min(a * eps_user, EPS_CAP)
        delta = F.delta_for(eps / (4.0 * a))
    log.info(
        'Normalized target. name="{}" a={} b={} eps={} delta={}'.format(
            F.name, a, b, eps, delta
        )
    )
    if options.gammas is None:
        gammas = impl.lipan.space_net.default_gammas(delta, q.n)
    else:
        gammas = impl.lipan.space_net.validate_gammas(options.gammas)
        if not math.isinf(delta) and gammas.g3 > 0.5 * delta ** (2 * q.n):
            log.warning(
                'Explicit gamma3 exceeds delta^(2n) / 2; the error bound is not '
                'guaranteed. gamma3={} delta={}'.format(gammas.g3, delta)
            )
    net = impl.lipan.space_net.build_net(dom, q, gammas, options.net_cap)
    spec = impl.lipan.mollifier.BumpSpec(gammas.g1, q.M)
    fam = impl.lipan.mollifier.MollifierFamily(
        spec, gammas.g2, net.N, options.backend, options.mc_samples, options.seed
    )
    gates = impl.lipan.gates.build_gate_set(
        gammas, q.M, eps, options.gate_mode, options.sharpness, options.max_degree
    )
    ap = Approximant(
        F,
        dom,
        q,
        net,
        fam,
        gates,
        impl.lipan.gauge.Gauge(options.gauge_tol),
        a,
        b,
        eps_user,
        eps,
        delta,
        options,
    )
    lo, hi = float(ap.f_net.min()), float(ap.f_net.max())
    if lo < 1.0 / 3.0 - NORM_SLACK or hi > 1.0 + NORM_SLACK:
        raise impl.lipan.exc.ModulusError(
            'Target leaves its declared bounds at a net point', min=lo, max=hi
        )
    log.info('Built approximant. N={}'.format(net.N))
    return ap


def eval_K(ap, x):
    return ap.evaluate(x).K


def evaluate_points(ap, points, workers=1, fn=None):
    """Map ``fn(ap, index, x)`` (default: K) over the points in point order, on
    ``workers`` processes.
    """
    fn = fn or _eval_K_indexed
    points = impl.lipan.util.as_points(points, ap.dom.d)
    task_list = [(fn, i, x) for i, x in enumerate(points)]
    if workers <= 1 or len(task_list) <= 1:
        return [fn(ap, i, x) for _, i, x in task_list]
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, initializer=_install, initargs=(ap,)
    ) as executor:
        return list(
            executor.map(
                _run_task, task_list, chunksize=_chunk_size(len(task_list), workers)
            )
        )


def point_row(ap, index, x):
    """Evaluate one point with the error split diagnostics and per check margins.

    With J = {j : q(x - x_j) < gamma3}: every j outside J must have u_j < eps / 4,
    and every j in J has |x - x_j| < delta, so |F_norm(x_j) - F_norm(x)| < eps / 2.
    """
    ev = ap.evaluate(x, index, strict=False)
    u = ev.uvec.u
    f_x = float(ap.F(x, ap.dom.d)[0])
    f_norm = ap.a * f_x + ap.b
    in_j = ev.uvec.y < ap.net.gammas.g3
    off_support_max = float(u[~in_j].max()) if np.any(~in_j) else 0.0
    diff = ap.f_net - f_norm
    in_support_max = float(np.abs(diff[in_j]).max()) if np.any(in_j) else 0.0
    lam_const = _lam(ap.gauge, f_norm * u)
    lam_diff = _lam(ap.gauge, diff * u)
    tol = GAUGE_SLACK * max(ev.numerator, ev.denominator)
    margin_dict = {
        'denominator_floor': ev.denominator - (DENOMINATOR_FLOOR - DENOMINATOR_SLACK),
        'off_support': ap.eps / 4.0 - off_support_max if np.any(~in_j) else math.inf,
        'in_support': ap.eps / 2.0 - in_support_max if np.any(in_j) else math.inf,
        'sandwich': min(
            _sandwich_margin(ev.denominator, u),
            _sandwich_margin(ev.numerator, ap.f_net * u),
            _sandwich_margin(lam_const, f_norm * u),
        )
        + tol,
        'gauge_lipschitz': lam_diff - abs(ev.numerator - lam_const) + tol,
        'range': min(
            ev.K - (ap.F.inf - ap.eps_user), (ap.F.sup + ap.eps_user) - ev.K
        ),
        'theorem': ap.eps_user - abs(ev.K - f_x),
    }
    return PointRow(
        index,
        impl.lipan.util.as_point(x).tolist(),
        f_x,
        ev.K,
        abs(ev.K - f_x),
        ev.denominator,
        off_support_max,
        in_support_max,
        margin_dict,
    )


def error_report(ap, eval_points, workers=1):
    """Evaluate K on the points and tally every per point check. Violations are
    recorded in the ledger, not raised.
    """
    log.info('Evaluating error report. points={}'.format(len(eval_points)))
    row_list = evaluate_points(ap, eval_points, workers, point_row)
    ledger = impl.lipan.ledger.Ledger('error_report')
    for prop in (
        'denominator_floor',
        'off_support',
        'in_support',
        'sandwich',
        'gauge_lipschitz',
        'range',
    ):
        ledger.check_margins(
            prop,
            [r.margin_dict[prop] for r in row_list],
            [r.index for r in row_list],
        )
    ledger.check_margins(
        'theorem',
        [r.margin_dict['theorem'] for r in row_list],
        [r.index for r in row_list],
        strict=True,
    )
    sup_error = max((r.abs_err for r in row_list), default=0.0)
    log.info(
        'Error report done. sup_error={} eps_user={}'.format(sup_error, ap.eps_user)
    )
    return ErrorReport(row_list, sup_error, ap.eps_user - sup_error, ap.eps_user, ledger)


def chain_bound(ap):
    """5 L_h (L_zeta1 L_q + L2 L_b L_q) / a.

    Numerator N and denominator D each move by at most lambda(du) <= 2 |du|_inf, with
    L_h (L_zeta1 L_q + L2 L_b L_q) the u family constant and |F_norm| <= 1. With
    D >= 4/5 and N <= D, |d(N / D)| <= (5/4) (|dN| + |dD|).
    """
    return (
        5.0
        * ap.gates.L_h
        * ap.gates.psi_constant(ap.q.L_q, ap.fam.L_b)
        / ap.a
    )


def lipschitz_estimate(ap, pair_count, seed=0, workers=1):
    """Empirical Lipschitz quotient of K on random pairs and on close pairs at each
    of CLOSE_DISTANCE_TUPLE, with the chain bound and a stabilization verdict.

    The REFINE_PAIR_COUNT worst pairs at the finest distance are refined by bisection
    (see refine_pair). K is stable when every refined pair settles.
    """
    if pair_count < 1:
        raise impl.lipan.exc.ConfigError(
            'pair_count must be positive', pair_count=pair_count
        )
    log.info('Estimating Lipschitz constant. pairs={}'.format(pair_count))
    d = ap.dom.d
    x = ap.dom.sample(2 * pair_count, seed)
    k = np.asarray(evaluate_points(ap, x, workers))
    dist = np.linalg.norm(x[:pair_count] - x[pair_count:], axis=1)
    random_quotient = _max_quotient(k[:pair_count], k[pair_count:], dist)
    rng = np.random.default_rng(seed)
    base_all = ap.dom.sample(pair_count, seed + 1)
    direction = rng.standard_normal((pair_count, d))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    close_dict = {}
    for r in CLOSE_DISTANCE_TUPLE:
        other = base_all + r * direction
        keep = ap.dom.contains(other)
        base, other = base_all[keep], other[keep]
        k_pair = np.asarray(evaluate_points(ap, np.concatenate([base, other]), workers))
        m = base.shape[0]
        quotient = _quotients(
            k_pair[:m], k_pair[m:], np.linalg.norm(other - base, axis=1)
        )
        close_dict[r] = float(quotient.max()) if m else 0.0
    # base, other and quotient hold the finest distance here.
    worst = np.argsort(-quotient, kind='stable')[:REFINE_PAIR_COUNT]
    pair_index = np.flatnonzero(keep)
    refinement_list = [
        refine_pair(ap, base[i], other[i], int(pair_index[i])) for i in worst
    ]
    stable = all(r.settled for r in refinement_list)
    estimate = max(
        [random_quotient]
        + list(close_dict.values())
        + [r.quotient for r in refinement_list]
    )
    bound = chain_bound(ap)
    log.info(
        'Lipschitz estimate. estimate={} chain_bound={} stable={}'.format(
            estimate, bound, stable
        )
    )
    return LipschitzEstimate(
        estimate,
        random_quotient,
        close_dict,
        bound,
        bool(stable),
        pair_count,
        refinement_list,
    )


def refine_pair(ap, p0, p1, point_index=0):
    """Bisect the segment [p0, p1], keeping the half with the larger quotient.

    The kept quotient never decreases. Across a jump of K it doubles with every
    halving. On a Lipschitz feature it converges to the local slope once the segment
    is shorter than the feature. The pair settles when the quotient grows by at most
    SETTLE_RATIO over SETTLE_STEPS consecutive halvings, within REFINE_MAX_STEPS.

    Every point of one refinement is evaluated with the same ``point_index``, so
    Monte Carlo draws are shared along the segment.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    k0 = ap.evaluate(p0, point_index, strict=False).K
    k1 = ap.evaluate(p1, point_index, strict=False).K
    h = float(np.linalg.norm(p1 - p0))
    quotient_list = [abs(k1 - k0) / h]
    calm = 0
    while calm < SETTLE_STEPS and len(quotient_list) <= REFINE_MAX_STEPS:
        mid = 0.5 * (p0 + p1)
        k_mid = ap.evaluate(mid, point_index, strict=False).K
        h *= 0.5
        left = abs(k_mid - k0) / h
        right = abs(k1 - k_mid) / h
        if left >= right:
            p1, k1 = mid, k_mid
        else:
            p0, k0 = mid, k_mid
        q = max(left, right)
        calm = calm + 1 if q <= SETTLE_RATIO * quotient_list[-1] + SETTLE_SLACK else 0
        quotient_list.append(q)
    settled = calm >= SETTLE_STEPS
    if not settled:
        log.warning(
            'Close pair quotient did not settle. point_index={} quotients={}'.format(
                point_index, quotient_list
            )
        )
    return Refinement(point_index, h, quotient_list[-1], quotient_list, settled)


def _lam(gauge, v):
    """Gauge with lambda(0) = 0."""
    if not np.any(v):
        return 0.0
    return gauge(v)


def _sandwich_margin(lam, v):
    """Margin of |v|_inf <= lam <= 2 |v|_inf."""
    sup = float(np.max(np.abs(v))) if np.size(v) else 0.0
    return min(lam - sup, 2.0 * sup - lam)


def _quotients(k1, k2, dist):
    return np.abs(np.asarray(k1) - np.asarray(k2)) / dist


def _max_quotient(k1, k2, dist):
    if not dist.size:
        return 0.0
    return float(np.max(_quotients(k1, k2, dist)))


def _eval_K_indexed(ap, index, x):
    return ap.evaluate(x, index).K


_worker_ap = None


def _install(ap):
    global _worker_ap
    _worker_ap = ap


def _run_task(task):
    fn, index, x = task
    return fn(_worker_ap, index, x)


def _chunk_size(count, workers):
    return max(1, count // (4 * workers))
