import logging
import math

import pytest

import impl.lipan.ledger

log = logging.getLogger(__name__)


@pytest.fixture()
def ledger():
    return impl.lipan.ledger.Ledger('unit')


class TestLedger:
    def test_1000(self, ledger):
        """An empty ledger is ok."""
        assert ledger.ok
        assert ledger.violation_count == 0
        assert ledger.as_dict() == {
            'name': 'unit',
            'ok': True,
            'violation_count': 0,
            'properties': {},
        }

    def test_1010(self, ledger):
        """check() counts, tracks the worst margin and records violations."""
        ledger.check('p', True, 0.5, 'a')
        ledger.check('p', False, -0.25, 'b')
        ledger.check('p', True, 0.1, 'c')
        e = ledger['p']
        assert e['checked'] == 3
        assert e['violations'] == 1
        assert e['worst_margin'] == -0.25
        assert e['worst_location'] == 'b'
        assert e['violation_locations'] == ['b']
        assert not ledger.ok

    def test_1020(self, ledger):
        """check_margins: zero passes unless strict, NaN fails."""
        assert ledger.check_margins('loose', [0.0, 1.0])
        assert not ledger.check_margins('strict', [0.0, 1.0], strict=True)
        assert not ledger.check_margins('nan', [1.0, math.nan], ['x', 'y'])
        assert ledger['nan']['violation_locations'] == ['y']
        assert ledger['strict']['worst_location'] == 0
        assert ledger.check_margins('empty', [])
        assert ledger['empty']['checked'] == 0
        assert ledger.violation_count == 2

    def test_1030(self, ledger):
        """Soft properties and notes do not affect the verdict."""
        ledger.check('soft', False, hard=False)
        ledger.note('value', 1.5)
        assert ledger.ok
        assert ledger['_notes']['values'] == {'value': 1.5}

    def test_1040(self, ledger):
        """Violation locations are capped."""
        cap = impl.lipan.ledger.MAX_LOCATION_COUNT
        ledger.check_margins('p', [-1.0] * (cap + 5))
        assert ledger['p']['violations'] == cap + 5
        assert len(ledger['p']['violation_locations']) == cap

    def test_1050(self, ledger):
        """merge() adds counts under a prefix and keeps the worse margin."""
        other = impl.lipan.ledger.Ledger('other')
        other.check_margins('p', [0.3, -0.1], ['u', 'v'])
        other.note('k', 2)
        ledger.check_margins('sub.p', [0.2])
        ledger.merge(other, prefix='sub.')
        e = ledger['sub.p']
        assert e['checked'] == 3
        assert e['violations'] == 1
        assert e['worst_margin'] == pytest.approx(-0.1)
        assert e['worst_location'] == 'v'
        assert ledger['sub._notes']['values'] == {'k': 2}
        assert 'sub.p' in ledger

    def test_1060(self, ledger, caplog):
        """log_summary reports hard violations at error level."""
        ledger.check('p', False)
        with caplog.at_level(logging.INFO):
            ledger.log_summary()
        assert 'Hard violations: 1' in caplog.text
