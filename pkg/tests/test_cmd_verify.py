"""Test the verify management command
"""
import io
import logging

import django.core.management
import pytest

import tests.util.util

log = logging.getLogger(__name__)


def _verify(*args):
    out = io.StringIO()
    django.core.management.call_command(
        'verify', *[str(a) for a in args], stdout=out
    )
    return out.getvalue().splitlines()


class TestVerify:
    def test_1000(self, write_config, small_config, tmp_path):
        """The gauge suite passes and writes its ledger."""
        line_list = _verify(write_config(small_config), '--suite', 'gauge')
        assert line_list[-1].endswith('ledger-gauge.json')
        d = tests.util.util.load_ledger(tmp_path / 'out', 'gauge')
        assert d['suite'] == 'gauge'
        assert d['ledger']['ok']
        assert d['config']['verify']['gauge_vectors'] == 300

    def test_1010(self, write_config, small_config, tmp_path):
        """The default suite runs every battery."""
        _verify(write_config(small_config))
        d = tests.util.util.load_ledger(tmp_path / 'out', 'all')
        assert not tests.util.util.failed_props(d['ledger'])
        assert 'theorem1.theorem' in d['ledger']['properties']

    def test_1020(self, write_config, small_config):
        """An unknown suite is rejected by the argument parser."""
        with pytest.raises(django.core.management.CommandError):
            _verify(write_config(small_config), '--suite', 'lemma9')

    def test_1030(self, write_config, small_config, tmp_path):
        """A net above the cap aborts with code 3 and writes no ledger."""
        path = write_config(dict(small_config, net={'cap': 2}))
        with pytest.raises(django.core.management.CommandError) as e:
            _verify(path, '--suite', 'lemma4')
        assert e.value.returncode == 3
        assert not (tmp_path / 'out' / 'ledger-lemma4.json').exists()

    def test_1040(self, write_config, small_config, tmp_path, mocker):
        """A hard violation exits with code 4 after the ledger is written."""
        mocker.patch(
            'impl.lipan.verify.battery_gauge',
            side_effect=lambda ledger, *a, **kw: ledger.check('gauge.forced', False),
        )
        with pytest.raises(django.core.management.CommandError) as e:
            _verify(write_config(small_config), '--suite', 'gauge')
        assert e.value.returncode == 4
        d = tests.util.util.load_ledger(tmp_path / 'out', 'gauge')
        assert tests.util.util.failed_props(d['ledger']) == ['gauge.forced']
