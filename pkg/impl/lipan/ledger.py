"""Pass/fail tally of checked properties.

Each property keeps its check count, its violation count, the worst margin seen and
where it was seen, and the first few violation locations. A margin is positive when
the property holds.
"""
import collections
import logging

import numpy as np

import impl.lipan.util

MAX_LOCATION_COUNT = 10

log = logging.getLogger(__name__)


class Ledger(object):
    def __init__(self, name):
        self.name = name
        self._prop_dict = collections.OrderedDict()

    def check(self, prop, ok, margin=None, location=None, hard=True):
        entry = self._entry(prop, hard)
        entry['checked'] += 1
        if margin is not None and (
            entry['worst_margin'] is None or margin < entry['worst_margin']
        ):
            entry['worst_margin'] = float(margin)
            entry['worst_location'] = location
        if not ok:
            entry['violations'] += 1
            if len(entry['violation_locations']) < MAX_LOCATION_COUNT:
                entry['violation_locations'].append(location)
        return ok

    def check_margins(self, prop, margins, locations=None, hard=True, strict=False):
        """Record one check per margin. Margins >= 0 pass (> 0 if ``strict``). NaN
        margins fail.
        """
        margins = np.asarray(margins, dtype=float).ravel()
        entry = self._entry(prop, hard)
        if not margins.size:
            return True
        ok = margins > 0.0 if strict else margins >= 0.0
        entry['checked'] += int(margins.size)
        i = int(np.nanargmin(margins)) if not np.all(np.isnan(margins)) else 0
        if entry['worst_margin'] is None or margins[i] < entry['worst_margin']:
            entry['worst_margin'] = float(margins[i])
            entry['worst_location'] = _location(locations, i)
        bad = np.flatnonzero(~ok)
        entry['violations'] += int(bad.size)
        for b in bad[: MAX_LOCATION_COUNT - len(entry['violation_locations'])]:
            entry['violation_locations'].append(_location(locations, int(b)))
        return not bad.size

    def note(self, key, value):
        """Attach an informational value that is not a pass/fail property."""
        self._entry('_notes', False).setdefault('values', {})[key] = value

    def merge(self, other, prefix=''):
        for prop, e in other._prop_dict.items():
            entry = self._entry(prefix + prop, e['hard'])
            entry['checked'] += e['checked']
            entry['violations'] += e['violations']
            if e.get('values'):
                entry.setdefault('values', {}).update(e['values'])
            if e['worst_margin'] is not None and (
                entry['worst_margin'] is None or e['worst_margin'] < entry['worst_margin']
            ):
                entry['worst_margin'] = e['worst_margin']
                entry['worst_location'] = e['worst_location']
            room = MAX_LOCATION_COUNT - len(entry['violation_locations'])
            entry['violation_locations'].extend(e['violation_locations'][:room])
        return self

    @property
    def violation_count(self):
        return sum(e['violations'] for e in self._prop_dict.values() if e['hard'])

    @property
    def ok(self):
        return not self.violation_count

    def __contains__(self, prop):
        return prop in self._prop_dict

    def __getitem__(self, prop):
        return self._prop_dict[prop]

    def as_dict(self):
        return impl.lipan.util.to_builtin(
            {
                'name': self.name,
                'ok': self.ok,
                'violation_count': self.violation_count,
                'properties': self._prop_dict,
            }
        )

    def log_summary(self):
        log.info('-' * 50)
        log.info('Ledger: {}'.format(self.name))
        for prop, e in self._prop_dict.items():
            if prop == '_notes':
                continue
            log.info(
                '{:<28} checked={:<8} violations={:<6} worst_margin={}'.format(
                    prop, e['checked'], e['violations'], e['worst_margin']
                )
            )
        if self.ok:
            log.info('All checks passed!')
        else:
            log.error('Hard violations: {}'.format(self.violation_count))

    def _entry(self, prop, hard):
        return self._prop_dict.setdefault(
            prop,
            {
                'hard': hard,
                'checked': 0,
                'violations': 0,
                'worst_margin': None,
                'worst_location': None,
                'violation_locations': [],
            },
        )


def _location(locations, i):
    if locations is None:
        return i
    return impl.lipan.util.to_builtin(locations[i])
