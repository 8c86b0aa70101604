"""Run outputs: report.json, points.csv, run-config.hjson and verification ledgers.

Floats in the point table are written with repr(), so identical runs produce
byte-identical tables.
"""
import csv
import datetime
import io
import json
import logging
import pathlib

import impl.lipan.filesystem
import impl.lipan.util

SCHEMA_VERSION = '1.0'
REPORT_NAME = 'report.json'
POINTS_NAME = 'points.csv'
CONFIG_NAME = 'run-config.hjson'
LEDGER_NAME_TEMPLATE = 'ledger-{}.json'

log = logging.getLogger(__name__)


def build_report(cfg, status_dict, ap=None, err=None, lip=None, ledger=None):
    """Assemble the report dict. Parts that were not reached are None."""
    d = {
        'schema_version': SCHEMA_VERSION,
        'created': _now_str(),
        'config': cfg.as_dict(),
        'status': status_dict,
        'approximant': None if ap is None else ap.as_dict(),
        'aggregates': None,
        'lipschitz': None,
        'ledger': None if ledger is None else ledger.as_dict(),
    }
    if err is not None:
        d['aggregates'] = {
            'point_count': len(err.rows),
            'sup_error': err.sup_error,
            'margin': err.margin,
            'eps_user': err.eps_user,
            'max_denominator_deficit': max(
                (-r.margin_dict['denominator_floor'] for r in err.rows), default=None
            ),
        }
    if lip is not None:
        d['lipschitz'] = {
            'estimate': lip.estimate,
            'random_quotient': lip.random_quotient,
            'close': {repr(k): v for k, v in sorted(lip.close_dict.items())},
            'chain_bound': lip.chain_bound,
            'stable': lip.stable,
            'pair_count': lip.pair_count,
            'refined': [
                {
                    'point_index': r.point_index,
                    'h': r.h,
                    'quotient': r.quotient,
                    'steps': len(r.quotient_list) - 1,
                    'settled': r.settled,
                }
                for r in lip.refinement_list
            ],
            'below_chain_bound': lip.estimate <= lip.chain_bound,
        }
    return impl.lipan.util.to_builtin(d)


def dumps_json(d):
    return json.dumps(impl.lipan.util.to_builtin(d), indent=2, sort_keys=True) + '\n'


def points_csv(rows, d):
    """Point table: index, x_1..x_d, F, K, abs_err, denominator."""
    f = io.StringIO()
    w = csv.writer(f, lineterminator='\n')
    w.writerow(
        ['index']
        + ['x{}'.format(i + 1) for i in range(d)]
        + ['F', 'K', 'abs_err', 'denominator']
    )
    for r in rows:
        w.writerow(
            [str(r.index)]
            + [repr(float(v)) for v in r.x]
            + [repr(float(v)) for v in (r.F, r.K, r.abs_err, r.denominator)]
        )
    return f.getvalue()


def write_run(out_dir, report_dict, cfg, rows=None, d=None):
    """Write the report, the config echo and, if given, the point table. Returns the
    list of written paths.
    """
    out_dir = pathlib.Path(out_dir)
    path_list = [
        impl.lipan.filesystem.write_text_atomic(
            out_dir / REPORT_NAME, dumps_json(report_dict)
        ),
        impl.lipan.filesystem.write_text_atomic(out_dir / CONFIG_NAME, cfg.as_hjson()),
    ]
    if rows is not None:
        path_list.append(
            impl.lipan.filesystem.write_text_atomic(
                out_dir / POINTS_NAME, points_csv(rows, d)
            )
        )
    for p in path_list:
        log.info('Wrote {}'.format(p.as_posix()))
    return path_list


def write_ledger(out_dir, suite, ledger_dict, cfg):
    path = pathlib.Path(out_dir) / LEDGER_NAME_TEMPLATE.format(
        impl.lipan.filesystem.get_safe_reversible_path_element(suite)
    )
    impl.lipan.filesystem.write_text_atomic(
        path,
        dumps_json(
            {
                'schema_version': SCHEMA_VERSION,
                'created': _now_str(),
                'suite': suite,
                'config': cfg.as_dict(),
                'ledger': ledger_dict,
            }
        ),
    )
    log.info('Wrote {}'.format(path.as_posix()))
    return path


def _now_str():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()
