"""Build the approximant for a run config, evaluate it, and write report.json,
points.csv and run-config.hjson to the output directory.

Exit codes: 0 when the sup error is below epsilon and every invariant holds, 2 for
config errors, 3 when the net would exceed its cap, 4 for invariant violations (the
report is still written).
"""
import argparse
import logging

import django.core.management

import impl.lipan.config
import impl.lipan.exc
import impl.lipan.experiment
import impl.lipan.mollifier
import impl.lipan.util

log = logging.getLogger(__name__)


class Command(django.core.management.BaseCommand):
    help = __doc__

    def __init__(self, *args, **kwargs):
        super(Command, self).__init__(*args, **kwargs)
        self.opt = None

    def add_arguments(self, parser):
        add_run_arguments(parser)

    def handle(self, *_, **opt):
        self.opt = opt = argparse.Namespace(**opt)
        impl.lipan.util.log_to_console(__name__, opt.debug)

        cfg = load_config_or_fail(opt)
        log.info('Running experiment. config="{}"'.format(opt.config_path))
        result = impl.lipan.experiment.run_experiment(cfg)
        for p in result.path_list:
            self.stdout.write(p.as_posix())
        if result.exit_code != impl.lipan.experiment.EXIT_OK:
            raise django.core.management.CommandError(
                'Run failed: {}'.format(result.message), returncode=result.exit_code
            )
        log.info('Run passed. {}'.format(result.message))


def add_run_arguments(parser):
    parser.add_argument(
        'config_path', metavar='config', help='Path to an Hjson run config file',
    )
    parser.add_argument('--seed', type=int, help='Seed for sampling and Monte Carlo')
    parser.add_argument(
        '--workers', type=int, help='Processes for point parallel evaluation'
    )
    parser.add_argument('--out-dir', dest='out_dir', help='Output directory')
    parser.add_argument(
        '--backend',
        choices=impl.lipan.mollifier.BACKEND_TUPLE,
        help='Mollifier evaluation backend',
    )
    parser.add_argument(
        '--mc-samples', dest='mc_samples', type=int, help='Monte Carlo sample count'
    )
    parser.add_argument(
        '--debug', action='store_true', help='Debug level logging',
    )


def load_config_or_fail(opt):
    override_dict = {
        k: getattr(opt, k) for k in impl.lipan.config.OVERRIDE_KEY_DICT
    }
    try:
        return impl.lipan.config.load_config(opt.config_path, override_dict)
    except impl.lipan.exc.LipanError as e:
        if opt.debug:
            raise
        raise django.core.management.CommandError(
            'Invalid config: {}'.format(str(e)),
            returncode=impl.lipan.experiment.exit_code_for(e),
        )
