"""Batch run: build the approximant from a RunConfig, evaluate it, and write the
report, point table and config echo.
"""
import collections
import logging

import impl.lipan.approximant
import impl.lipan.exc
import impl.lipan.ledger
import impl.lipan.report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_INVARIANT = 4

CONFIG_ERROR_TUPLE = (
    impl.lipan.exc.ConfigError,
    impl.lipan.exc.DomainError,
    impl.lipan.exc.SeparationError,
    impl.lipan.exc.ModulusError,
    impl.lipan.exc.GateUnsatisfiableError,
    impl.lipan.exc.DegreeBudgetError,
)

log = logging.getLogger(__name__)

RunResult = collections.namedtuple(
    'RunResult', ['exit_code', 'report', 'path_list', 'message']
)


def exit_code_for(e):
    """Exit code for a library error. Anything not a configuration or capacity
    problem is an invariant failure.
    """
    if isinstance(e, impl.lipan.exc.CapacityError):
        return EXIT_CAPACITY
    if isinstance(e, CONFIG_ERROR_TUPLE):
        return EXIT_CONFIG
    return EXIT_INVARIANT


def run_experiment(cfg):
    """Build, evaluate and report. The report is written for every outcome that gets
    past config loading; exit 0 iff the sup error is below eps and every hard check in
    the ledger passed.
    """
    ap = err = lip = None
    d = None
    try:
        dom = cfg.build_domain()
        d = dom.d
        q = cfg.build_q()
        F = cfg.build_target()
        F.spot_check(dom, seed=cfg.seed)
        ap = impl.lipan.approximant.build_approximant(
            F, dom, q, cfg.epsilon, cfg.build_options()
        )
        ev = cfg['evaluation']
        points = dom.sample(ev['points'], cfg.seed, ev['sampler'])
        err = impl.lipan.approximant.error_report(ap, points, cfg.workers)
        lip = impl.lipan.approximant.lipschitz_estimate(
            ap, ev['lipschitz_pairs'], cfg.seed, cfg.workers
        )
    except impl.lipan.exc.LipanError as e:
        code = exit_code_for(e)
        log.error('Run failed. exit_code={} error="{}"'.format(code, str(e)))
        status_dict = {
            'exit_code': code,
            'ok': False,
            'error': type(e).__name__,
            'message': str(e),
            'detail': e.detail_dict,
        }
        report = impl.lipan.report.build_report(
            cfg, status_dict, ap, err, lip, None if err is None else err.ledger
        )
        path_list = impl.lipan.report.write_run(
            cfg.out_dir, report, cfg, None if err is None else err.rows, d
        )
        return RunResult(code, report, path_list, str(e))

    ledger = impl.lipan.ledger.Ledger('run').merge(err.ledger)
    ledger.check(
        'lipschitz_chain_bound',
        lip.estimate <= lip.chain_bound,
        lip.chain_bound - lip.estimate,
    )
    ledger.check('lipschitz_stable', lip.stable)
    ledger.log_summary()
    code = EXIT_OK if ledger.ok else EXIT_INVARIANT
    message = 'sup_error={} eps={} margin={}'.format(
        err.sup_error, err.eps_user, err.margin
    )
    status_dict = {
        'exit_code': code,
        'ok': code == EXIT_OK,
        'error': None if ledger.ok else 'InvariantViolation',
        'message': message,
        'detail': {},
    }
    report = impl.lipan.report.build_report(cfg, status_dict, ap, err, lip, ledger)
    path_list = impl.lipan.report.write_run(cfg.out_dir, report, cfg, err.rows, d)
    log.info('Run completed. exit_code={} {}'.format(code, message))
    return RunResult(code, report, path_list, message)
