"""Test the run management command
"""
import io
import logging

import django.core.management
import pytest

import impl.lipan.approximant
import tests.util.util

log = logging.getLogger(__name__)


def _run(*args):
    out = io.StringIO()
    django.core.management.call_command('run', *[str(a) for a in args], stdout=out)
    return out.getvalue().splitlines()


class TestRun:
    def test_1000(self, write_config, small_config, tmp_path):
        """A passing run writes the three outputs and a report with exit code 0."""
        line_list = _run(write_config(small_config))
        out_dir = tmp_path / 'out'
        assert sorted(p.rsplit('/', 1)[-1] for p in line_list) == [
            'points.csv',
            'report.json',
            'run-config.hjson',
        ]
        report = tests.util.util.load_report(out_dir)
        assert report['status']['exit_code'] == 0
        assert report['status']['ok']
        assert report['aggregates']['point_count'] == 20
        assert report['aggregates']['sup_error'] < 0.5
        assert report['ledger']['ok']
        assert report['config']['seed'] == 7
        assert len((out_dir / 'points.csv').read_text().splitlines()) == 21

    def test_1010(self, write_config, small_config, tmp_path):
        """Identical configs produce byte-identical point tables, also when the
        points are spread over worker processes.
        """
        path = write_config(small_config)
        table_list = []
        for i, extra in enumerate(([], ['--workers', 2])):
            out_dir = tmp_path / 'out{}'.format(i)
            _run(path, '--out-dir', out_dir, *extra)
            table_list.append((out_dir / 'points.csv').read_bytes())
        assert table_list[0] == table_list[1]

    def test_1020(self, write_config, small_config, tmp_path):
        """An invalid config exits with code 2 before anything is written."""
        path = write_config(dict(small_config, epsilon=-1.0))
        with pytest.raises(django.core.management.CommandError) as e:
            _run(path)
        assert e.value.returncode == 2
        assert not (tmp_path / 'out').exists()

    def test_1030(self, write_config, small_config, tmp_path):
        """A modulus that never reaches the needed level exits with code 2 and still
        writes the report.
        """
        d = dict(
            small_config,
            target={'builtin': 'linear', 'delta_table': [[0.5, 0.1]]},
        )
        with pytest.raises(django.core.management.CommandError) as e:
            _run(write_config(d))
        assert e.value.returncode == 2
        report = tests.util.util.load_report(tmp_path / 'out')
        assert report['status']['error'] == 'ModulusError'
        assert report['approximant'] is None

    def test_1040(self, write_config, small_config, tmp_path):
        """A net above the cap exits with code 3 and reports the requested size."""
        with pytest.raises(django.core.management.CommandError) as e:
            _run(write_config(dict(small_config, net={'cap': 2})))
        assert e.value.returncode == 3
        report = tests.util.util.load_report(tmp_path / 'out')
        assert report['status']['error'] == 'CapacityError'
        detail = report['status']['detail']
        assert detail['cap'] == 2
        assert detail['requested'] > 2
        assert not (tmp_path / 'out' / 'points.csv').exists()

    def test_1050(self, write_config, small_config, tmp_path, mocker):
        """An empirical Lipschitz quotient above the chain bound exits with code 4,
        with the full report written.
        """
        mocker.patch(
            'impl.lipan.approximant.lipschitz_estimate',
            return_value=impl.lipan.approximant.LipschitzEstimate(
                10.0, 10.0, {1e-2: 0.0, 1e-3: 0.0, 1e-4: 0.0}, 1.0, True, 10, []
            ),
        )
        with pytest.raises(django.core.management.CommandError) as e:
            _run(write_config(small_config))
        assert e.value.returncode == 4
        out_dir = tmp_path / 'out'
        report = tests.util.util.load_report(out_dir)
        assert report['status']['error'] == 'InvariantViolation'
        assert report['ledger']['properties']['lipschitz_chain_bound']['violations'] == 1
        assert (out_dir / 'points.csv').exists()

    def test_1060(self, write_config, small_config, tmp_path):
        """--seed and --mc-samples override the file."""
        _run(write_config(small_config), '--seed', 11, '--mc-samples', 5000)
        cfg = tests.util.util.load_report(tmp_path / 'out')['config']
        assert cfg['seed'] == 11
        assert cfg['mollifier']['mc_samples'] == 5000

    @pytest.mark.slow
    def test_1070(self, test_docs, tmp_path):
        """Desk scale run on the unit disk: the error stays inside eps and the close
        pair quotients settle below the chain bound.
        """
        out_dir = tmp_path / 'out'
        _run(test_docs / 'theorem1_disk.hjson', '--out-dir', out_dir, '--workers', 4)
        report = tests.util.util.load_report(out_dir)
        assert report['status']['exit_code'] == 0
        agg = report['aggregates']
        assert agg['point_count'] == 2000
        assert agg['sup_error'] < 0.2
        assert agg['margin'] > 0.0
        lip = report['lipschitz']
        assert lip['stable']
        assert lip['below_chain_bound']
        assert lip['refined'] and all(r['settled'] for r in lip['refined'])
        prop_dict = report['ledger']['properties']
        assert prop_dict['lipschitz_stable']['violations'] == 0
        assert prop_dict['lipschitz_chain_bound']['violations'] == 0
