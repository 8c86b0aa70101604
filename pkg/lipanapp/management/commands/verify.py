"""Run a verification suite for a run config and write ledger-<suite>.json to the
output directory.

Suites: gauge, lemma2, lemma3, lemma4, theorem1, all. Exit code 4 on any hard
violation, 2 for config errors, 3 when the net would exceed its cap.
"""
import argparse
import logging

import django.core.management

import impl.lipan.exc
import impl.lipan.experiment
import impl.lipan.report
import impl.lipan.util
import impl.lipan.verify
import lipanapp.management.commands.run

log = logging.getLogger(__name__)


class Command(django.core.management.BaseCommand):
    help = __doc__

    def __init__(self, *args, **kwargs):
        super(Command, self).__init__(*args, **kwargs)
        self.opt = None

    def add_arguments(self, parser):
        lipanapp.management.commands.run.add_run_arguments(parser)
        parser.add_argument(
            '--suite',
            choices=impl.lipan.verify.SUITE_TUPLE,
            default='all',
            help='Battery to run',
        )

    def handle(self, *_, **opt):
        self.opt = opt = argparse.Namespace(**opt)
        impl.lipan.util.log_to_console(__name__, opt.debug)

        cfg = lipanapp.management.commands.run.load_config_or_fail(opt)
        log.info('Verifying. suite="{}" config="{}"'.format(opt.suite, opt.config_path))
        try:
            ledger = impl.lipan.verify.verify_suite(cfg, opt.suite)
        except impl.lipan.exc.LipanError as e:
            if opt.debug:
                raise
            raise django.core.management.CommandError(
                'Verification aborted: {}'.format(str(e)),
                returncode=impl.lipan.experiment.exit_code_for(e),
            )
        path = impl.lipan.report.write_ledger(
            cfg.out_dir, opt.suite, ledger.as_dict(), cfg
        )
        self.stdout.write(path.as_posix())
        if not ledger.ok:
            raise django.core.management.CommandError(
                'Verification failed. violations={}'.format(ledger.violation_count),
                returncode=impl.lipan.experiment.EXIT_INVARIANT,
            )
        log.info('All checks passed!')
