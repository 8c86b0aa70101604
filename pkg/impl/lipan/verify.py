"""Property batteries and the verification suite driver.

Every battery records into a Ledger under '<suite>.<property>' names and uses fixed
seeds derived from the config seed, so a ledger is reproducible from its config.
"""
import logging
import math

import numpy as np

import impl.lipan.approximant
import impl.lipan.exc
import impl.lipan.gates
import impl.lipan.gauge
import impl.lipan.ledger
import impl.lipan.mollifier
import impl.lipan.seppoly
import impl.lipan.space_net

SUITE_TUPLE = ('gauge', 'lemma2', 'lemma3', 'lemma4', 'theorem1', 'all')
GAUGE_TOL = 1e-8
GAUGE_MAX_LENGTH = 50
GAUGE_ENTRY_BOUND = 2.0
ORACLE_EVERY = 100
REFERENCE_VECTOR = (1.0, 1.0)
REFERENCE_VALUE = 1.2720196
REFERENCE_TOL = 1e-6
LEMMA2_D = 3
LEMMA2_SLACK = 1e-12
EMERGENCE_LEVEL = 0.5
CROSS_WITHIN_SE = 3.0
CROSS_MIN_FRACTION = 0.9
PERTURB_COUNT = 4
PERTURB_SHRINK = 0.99
LOCALIZATION_ETA = 0.01

log = logging.getLogger(__name__)


def verify_suite(cfg, suite, ap=None):
    """Run the named battery (or all of them) and return the ledger.

    The approximant is built from ``cfg`` when a battery needs one and ``ap`` is not
    given. Build errors propagate.
    """
    if suite not in SUITE_TUPLE:
        raise impl.lipan.exc.ConfigError(
            'Unknown suite', suite=suite, known=', '.join(SUITE_TUPLE)
        )
    v = cfg['verify']
    seed = cfg.seed
    ledger = impl.lipan.ledger.Ledger(suite)
    suite_list = SUITE_TUPLE[:-1] if suite == 'all' else (suite,)
    if 'gauge' in suite_list:
        battery_gauge(ledger, v['gauge_vectors'], seed, cfg['gauge']['tol'])
    if 'lemma2' in suite_list:
        q_list = [cfg.build_q()] + [
            impl.lipan.seppoly.builtin_q(name, LEMMA2_D)
            for name in impl.lipan.seppoly.BUILTIN_TUPLE
        ]
        battery_lemma2(ledger, q_list, cfg.build_domain().R, v['lemma2_vectors'], seed)
    if set(suite_list) & {'lemma3', 'lemma4', 'theorem1'}:
        if ap is None:
            dom = cfg.build_domain()
            F = cfg.build_target()
            F.spot_check(dom, seed=seed)
            ap = impl.lipan.approximant.build_approximant(
                F, dom, cfg.build_q(), cfg.epsilon, cfg.build_options()
            )
    if 'lemma3' in suite_list:
        battery_lemma3(
            ledger, ap, v['lemma3_points'], v['lemma3_pairs'], v['cross_checks'], seed
        )
    if 'lemma4' in suite_list:
        battery_gates(ledger, ap)
        battery_lemma4(ledger, ap, v['lemma4_points'], seed)
    if 'theorem1' in suite_list:
        ev = cfg['evaluation']
        battery_theorem1(
            ledger,
            ap,
            v['theorem1_points'],
            ev['lipschitz_pairs'],
            ev['sampler'],
            seed,
            cfg.workers,
        )
    ledger.log_summary()
    return ledger


def battery_gauge(ledger, vector_count, seed, tol=impl.lipan.gauge.DEFAULT_TOL):
    """Sandwich, homogeneity, subadditivity and 1-Lipschitz over random vectors of
    length 1..50 with entries in [-2, 2], oracle agreement on every ORACLE_EVERY-th
    vector, and the reference value at (1, 1).
    """
    log.info('Gauge battery. vectors={}'.format(vector_count))
    g = impl.lipan.gauge.Gauge(tol)
    rng = np.random.default_rng([seed, 1])
    margin_dict = {
        k: np.empty(vector_count)
        for k in ('sandwich', 'homogeneity', 'subadditivity', 'lipschitz')
    }
    oracle_list = []
    for i in range(vector_count):
        m = int(rng.integers(1, GAUGE_MAX_LENGTH + 1))
        x = _nonzero(rng, m)
        y = _nonzero(rng, m)
        c = rng.uniform(-GAUGE_ENTRY_BOUND, GAUGE_ENTRY_BOUND)
        lx, ly = g(x), g(y)
        sup = impl.lipan.gauge.sup_norm(x)
        scale = max(1.0, lx + ly)
        margin_dict['sandwich'][i] = min(lx - sup, 2.0 * sup - lx) + GAUGE_TOL * scale
        margin_dict['homogeneity'][i] = GAUGE_TOL * max(1.0, abs(c) * lx) - abs(
            _lam(g, c * x) - abs(c) * lx
        )
        margin_dict['subadditivity'][i] = lx + ly - _lam(g, x + y) + GAUGE_TOL * scale
        margin_dict['lipschitz'][i] = _lam(g, x - y) - abs(lx - ly) + GAUGE_TOL * scale
        if not i % ORACLE_EVERY:
            oracle_list.append(
                (i, GAUGE_TOL * max(1.0, lx) - abs(lx - impl.lipan.gauge.lambda_oracle(x)))
            )
    for k, margins in margin_dict.items():
        ledger.check_margins('gauge.' + k, margins)
    if oracle_list:
        idx, margins = zip(*oracle_list)
        ledger.check_margins('gauge.oracle', margins, idx)
    ref = g(np.array(REFERENCE_VECTOR))
    ledger.check(
        'gauge.reference_value',
        abs(ref - REFERENCE_VALUE) <= REFERENCE_TOL,
        REFERENCE_TOL - abs(ref - REFERENCE_VALUE),
        list(REFERENCE_VECTOR),
    )
    ledger.note('gauge.reference_value', ref)


def battery_lemma2(ledger, q_list, R, vector_count, seed):
    """Polynomial bounds |y|^(2n) <= q(y) where q(y) < 1, q(y) <= K1 max(|y|, |y|^(2n)),
    plus q <= M and |q(y) - q(y')| <= L_q |y - y'| on the radius 2R ball.
    """
    for q in q_list:
        q = impl.lipan.seppoly.derive_constants(q, R)
        tag = 'lemma2.{}_d{}'.format(q.name, q.d)
        log.info('Lemma 2 battery. q="{}" d={} vectors={}'.format(q.name, q.d, vector_count))
        rng = np.random.default_rng([seed, 2, q.d])
        y = _spread_points(rng, q.d, vector_count, 2.0 * R)
        q_val = q(y)
        norm_pow = q.norm_pow(y)
        lower = q_val < 1.0
        ledger.check_margins(
            tag + '.lower_bound',
            (q_val + LEMMA2_SLACK - norm_pow)[lower],
            y[lower],
        )
        upper = q.upper_bound(y)
        ledger.check_margins(
            tag + '.upper_bound', upper * (1.0 + LEMMA2_SLACK) - q_val, y
        )
        ball = np.linalg.norm(y, axis=1) < 2.0 * R
        ledger.check_margins(
            tag + '.sup_M', q.M * (1.0 + LEMMA2_SLACK) - q_val[ball], y[ball]
        )
        y2 = _spread_points(rng, q.d, vector_count, 2.0 * R)
        both = ball & (np.linalg.norm(y2, axis=1) < 2.0 * R)
        dist = np.linalg.norm(y - y2, axis=1)
        ledger.check_margins(
            tag + '.lipschitz',
            (q.L_q * dist * (1.0 + LEMMA2_SLACK) - np.abs(q_val - q(y2)))[both],
            y[both],
        )


def battery_lemma3(ledger, ap, point_count, pair_count, cross_count, seed):
    """Emergence, localization, the UL bound for the phi_n family and the backend
    cross-check.
    """
    log.info(
        'Lemma 3 battery. points={} pairs={} cross_checks={}'.format(
            point_count, pair_count, cross_count
        )
    )
    q, net, fam, gs = ap.q, ap.net, ap.fam, ap.gates
    rng = np.random.default_rng([seed, 3])
    points = ap.dom.sample(point_count, seed + 3)
    # The psi stability clause of the gates needs phi below 1 / (40 L2 L_h), which is
    # usually stricter than the nominal level.
    eta = min(LOCALIZATION_ETA, impl.lipan.gates.stability_eta(gs))
    ledger.note('lemma3.localization_eta', eta)
    ledger.note('lemma3.localization_eta_nominal', LOCALIZATION_ETA)
    emergence, local, reached = [], [], []
    for i, x in enumerate(points):
        y = net.q_values(q, x)
        sweep = fam.phi_sweep(y, point_index=i)
        j0 = impl.lipan.space_net.first_cover_index(y, net.gammas.g2)
        if j0 is None:
            emergence.append(-1.0)
        else:
            emergence.append(sweep.phi[j0 - 1] - EMERGENCE_LEVEL - sweep.error)
        loc = fam.localization(q, net, x, eta)
        reached.append(loc.n0 is not None)
        if loc.n0 is None:
            continue
        for z in _ball_steps(rng, ap.dom.d, PERTURB_COUNT, PERTURB_SHRINK * loc.radius):
            s = fam.phi_sweep(net.q_values(q, x + z), point_index=i)
            local.append(eta - float(s.phi[loc.n0 :].max()) - s.error)
    ledger.check_margins('lemma3.emergence', emergence, points, strict=True)
    ledger.check_margins('lemma3.localization', local, strict=True)
    ledger.check_margins(
        'lemma3.localization_reached', np.array(reached, dtype=float) - 0.5, points, hard=False
    )

    L_phi = fam.L_b * q.L_q
    base = ap.dom.sample(pair_count, seed + 30)
    steps = _ball_steps(rng, ap.dom.d, pair_count, 1.0, log_spread=True)
    ul_margin = []
    for i, (x, z) in enumerate(zip(base, steps)):
        s1 = fam.phi_sweep(net.q_values(q, x), point_index=i)
        s2 = fam.phi_sweep(net.q_values(q, x + z), point_index=i)
        diff = float(np.max(np.abs(s1.phi - s2.phi)))
        ul_margin.append(L_phi * np.linalg.norm(z) + s1.error + s2.error - diff)
    ledger.check_margins('lemma3.ul_bound', ul_margin, base)

    within_3se = []
    for i in range(cross_count):
        x = ap.dom.sample(1, seed + 300 + i)[0]
        y = net.q_values(q, x)
        n = _transition_index(fam, y, i)
        try:
            check = fam.cross_check(y[:n], point_index=i)
        except impl.lipan.exc.BackendDisagreement as e:
            ledger.check('lemma3.backend_5se', False, None, {'n': n, 'error': str(e)})
            continue
        ledger.check(
            'lemma3.backend_5se',
            True,
            check.tolerance - check.deviation,
            {'n': n, 'point': x.tolist()},
        )
        resolution = impl.lipan.mollifier.MC_RESOLUTION_FACTOR / fam.mc_samples
        within_3se.append(
            check.deviation <= CROSS_WITHIN_SE * check.std_error + resolution
        )
    if within_3se:
        fraction = float(np.mean(within_3se))
        ledger.note('lemma3.backend_3se_fraction', fraction)
        ledger.check(
            'lemma3.backend_3se',
            fraction >= CROSS_MIN_FRACTION,
            fraction - CROSS_MIN_FRACTION,
        )


def battery_gates(ledger, ap):
    """Certificate margins of the three gates and a negative control: zeta2 checked
    against a left threshold above its plateau must fail.
    """
    for gate in (ap.gates.zeta1, ap.gates.zeta2, ap.gates.h):
        report = impl.lipan.gates.certify_gate(gate.gate, gate.spec)
        ledger.check(
            'lemma4.gate_{}_certified'.format(gate.name),
            report.ok,
            min(m.margin for m in report.margin_list),
        )
    broken = ap.gates.zeta2.spec.with_constraint(0, (0.0, 0.25, '>=', 3.0))
    report = impl.lipan.gates.certify_gate(ap.gates.zeta2.gate, broken)
    ledger.check('lemma4.negative_control_fails', not report.ok)


def battery_lemma4(ledger, ap, point_count, seed):
    """psi and u clauses at every (point, j), the UL bound of the psi family, and the
    stability radius.
    """
    log.info('Lemma 4 battery. points={}'.format(point_count))
    q, net, fam, gs = ap.q, ap.net, ap.fam, ap.gates
    g2, g3 = net.gammas.g2, net.gammas.g3
    rng = np.random.default_rng([seed, 4])
    points = ap.dom.sample(point_count, seed + 4)
    psi_c = gs.psi_constant(q.L_q, fam.L_b)
    prop_dict = {
        k: []
        for k in (
            'psi_outside_c3',
            'psi_first_c2',
            'psi_floor',
            'u_outside_c3',
            'u_first_c2',
            'u_positive',
            'u_at_most_one',
            'u_max',
            'psi_ul',
            'stability_move',
            'stability_psi',
        )
    }
    for i, x in enumerate(points):
        uv = impl.lipan.gates.u_vector(gs, q, net, fam, x, i)
        outside = uv.y >= g3
        if np.any(outside):
            prop_dict['psi_outside_c3'].append(float((uv.psi[outside] - 1.0).min()))
            prop_dict['u_outside_c3'].append(
                float((ap.eps / 4.0 - uv.u[outside]).min())
            )
        j0 = impl.lipan.space_net.first_cover_index(uv.y, g2)
        if j0 is not None:
            prop_dict['psi_first_c2'].append(0.5 - uv.psi[j0 - 1])
            prop_dict['u_first_c2'].append(uv.u[j0 - 1] - 0.8)
        prop_dict['psi_floor'].append(float(uv.psi.min()) - 0.25)
        prop_dict['u_positive'].append(float(uv.u.min()))
        prop_dict['u_at_most_one'].append(1.0 - float(uv.u.max()))
        prop_dict['u_max'].append(float(uv.u.max()) - 0.8)

        z = _ball_steps(rng, ap.dom.d, 1, 1e-3, log_spread=True)[0]
        uv2 = impl.lipan.gates.u_vector(gs, q, net, fam, x + z, i)
        slack = gs.L2 * (uv.quad_error + uv2.quad_error) + 1e-12
        prop_dict['psi_ul'].append(
            psi_c * np.linalg.norm(z) + slack - float(np.abs(uv.psi - uv2.psi).max())
        )

        st = impl.lipan.gates.stability_radius(gs, q, net, fam, x)
        if st.j_min is None:
            continue
        tail = slice(st.j_min - 1, None)
        prop_dict['stability_psi'].append(float(uv.psi[tail].min()) - 1.0)
        for w in _ball_steps(rng, ap.dom.d, PERTURB_COUNT, PERTURB_SHRINK * st.radius):
            uv3 = impl.lipan.gates.u_vector(gs, q, net, fam, x + w, i)
            prop_dict['stability_move'].append(
                st.bound - float(np.abs(uv3.psi[tail] - uv.psi[tail]).max())
            )
    strict_set = {
        'psi_first_c2',
        'u_outside_c3',
        'u_positive',
        'stability_move',
        'stability_psi',
    }
    for k, margins in prop_dict.items():
        ledger.check_margins('lemma4.' + k, margins, strict=k in strict_set)


def battery_theorem1(ledger, ap, point_count, pair_count, sampler, seed, workers=1):
    """Error report checks on the evaluation points and the Lipschitz estimate."""
    log.info('Theorem 1 battery. points={}'.format(point_count))
    points = ap.dom.sample(point_count, seed, sampler)
    err = impl.lipan.approximant.error_report(ap, points, workers)
    ledger.merge(err.ledger, prefix='theorem1.')
    ledger.note('theorem1.sup_error', err.sup_error)
    ledger.note('theorem1.margin', err.margin)
    lip = impl.lipan.approximant.lipschitz_estimate(ap, pair_count, seed, workers)
    ledger.note('theorem1.lipschitz_estimate', lip.estimate)
    ledger.note('theorem1.chain_bound', lip.chain_bound)
    ledger.check(
        'theorem1.lipschitz_chain_bound',
        lip.estimate <= lip.chain_bound,
        lip.chain_bound - lip.estimate,
    )
    ledger.check('theorem1.lipschitz_stable', lip.stable)
    return err, lip


def _lam(g, v):
    if not np.any(v):
        return 0.0
    return g(v)


def _nonzero(rng, m):
    v = rng.uniform(-GAUGE_ENTRY_BOUND, GAUGE_ENTRY_BOUND, m)
    v[v == 0.0] = GAUGE_ENTRY_BOUND
    return v


def _spread_points(rng, d, count, r_max):
    """Random directions with log-uniform radii in [1e-3, r_max]."""
    z = rng.standard_normal((count, d))
    z /= np.linalg.norm(z, axis=1)[:, None]
    r = np.exp(rng.uniform(math.log(1e-3), math.log(r_max), count))
    return z * r[:, None]


def _ball_steps(rng, d, count, radius, log_spread=False):
    """Random steps of length below ``radius``; log-uniform lengths down to
    radius * 1e-3 if ``log_spread``.
    """
    z = rng.standard_normal((count, d))
    z /= np.linalg.norm(z, axis=1)[:, None]
    if log_spread:
        r = radius * np.exp(rng.uniform(math.log(1e-3), 0.0, count))
    else:
        r = radius * rng.random(count)
    return z * r[:, None]


def _transition_index(fam, y, point_index):
    """An n whose phi_n is strictly between 0 and 1 if the sweep has one, else the
    index just before the first C2 cell.
    """
    sweep = fam.phi_sweep(y, 'layercake', point_index)
    mid = np.flatnonzero((sweep.phi[1:] > 0.01) & (sweep.phi[1:] < 0.99))
    if mid.size:
        return int(mid[0]) + 1
    j0 = impl.lipan.space_net.first_cover_index(y, fam.gamma2)
    return max(1, (j0 or 1) - 1)
