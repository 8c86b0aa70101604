"""Run configuration.

Run files are Hjson. Missing keys are filled from DEFAULT_DICT and the LIPAN_*
Django settings, command line overrides are applied on top, and the merged result is
validated once. RunConfig.as_dict() holds every value used by the run, so the copy
echoed into a report reproduces the run.

Example:

    {
      # Open unit disk inside the radius 1.5 ball
      domain: {d: 2, R: 1.5, shape: ball}
      q: {builtin: euclidean}
      target: {builtin: product_sine}
      epsilon: 0.2
    }
"""
import copy
import logging
import math

import django.conf
import hjson

import impl.lipan.approximant
import impl.lipan.exc
import impl.lipan.gates
import impl.lipan.gauge
import impl.lipan.mollifier
import impl.lipan.seppoly
import impl.lipan.space_net
import impl.lipan.targets

DEFAULT_OUT_DIR = 'lipan-out'
DEFAULT_WORKERS = 1

DEFAULT_DICT = {
    'q': {'builtin': 'euclidean'},
    'gammas': None,
    'mollifier': {
        'backend': impl.lipan.mollifier.DEFAULT_BACKEND,
        'mc_samples': impl.lipan.mollifier.DEFAULT_MC_SAMPLES,
    },
    'gates': {
        'mode': impl.lipan.gates.DEFAULT_MODE,
        'sharpness': impl.lipan.gates.DEFAULT_SHARPNESS,
        'max_degree': impl.lipan.gates.DEFAULT_MAX_DEGREE,
    },
    'net': {'cap': impl.lipan.space_net.DEFAULT_NET_CAP},
    'gauge': {'tol': impl.lipan.gauge.DEFAULT_TOL},
    'evaluation': {'points': 2000, 'sampler': 'halton', 'lipschitz_pairs': 200},
    'verify': {
        'gauge_vectors': 100000,
        'lemma2_vectors': 100000,
        'lemma3_points': 200,
        'lemma3_pairs': 10000,
        'cross_checks': 100,
        'lemma4_points': 10000,
        'theorem1_points': 2000,
    },
    'seed': 0,
    'workers': DEFAULT_WORKERS,
    'out_dir': DEFAULT_OUT_DIR,
}

REQUIRED_TUPLE = ('domain', 'target', 'epsilon')

# Command line flag -> dotted config key.
OVERRIDE_KEY_DICT = {
    'seed': 'seed',
    'workers': 'workers',
    'out_dir': 'out_dir',
    'backend': 'mollifier.backend',
    'mc_samples': 'mollifier.mc_samples',
}

log = logging.getLogger(__name__)


class RunConfig(object):
    def __init__(self, config_dict):
        self._d = copy.deepcopy(config_dict)

    def __getitem__(self, key):
        return copy.deepcopy(self._d[key])

    @property
    def epsilon(self):
        return self._d['epsilon']

    @property
    def seed(self):
        return self._d['seed']

    @property
    def workers(self):
        return self._d['workers']

    @property
    def out_dir(self):
        return self._d['out_dir']

    def as_dict(self):
        return copy.deepcopy(self._d)

    def as_hjson(self):
        return hjson.dumps(self._d, indent=2, sort_keys=True)

    def build_domain(self):
        d = self._d['domain']
        return impl.lipan.space_net.build_domain(d['d'], d['R'], d.get('shape', 'ball'))

    def build_q(self):
        d = self._d['domain']['d']
        q_dict = self._d['q']
        if 'components' in q_dict:
            component_dict = {}
            for c in q_dict['components']:
                try:
                    component_dict[int(c['degree'])] = (
                        impl.lipan.seppoly.HomogeneousPolynomial.from_terms(
                            d, c['terms']
                        )
                    )
                except (KeyError, TypeError, ValueError) as e:
                    raise impl.lipan.exc.ConfigError(
                        'Invalid q component', component=c, error=str(e)
                    )
            return impl.lipan.seppoly.build_q(component_dict)
        return impl.lipan.seppoly.builtin_q(q_dict['builtin'], d)

    def build_target(self):
        d = self._d['domain']['d']
        t = self._d['target']
        delta_table = t.get('delta_table')
        if 'table' in t:
            table = t['table']
            try:
                return impl.lipan.targets.table_target(
                    table['points'],
                    table['values'],
                    lipschitz=table.get('lipschitz'),
                    delta_table=delta_table,
                )
            except KeyError as e:
                raise impl.lipan.exc.ConfigError(
                    'Table target is missing a key', key=str(e)
                )
        F = impl.lipan.targets.builtin_target(t['builtin'], d, t.get('params'))
        if delta_table is not None:
            F = impl.lipan.targets.TargetFunction(
                F.fn, F.inf, F.sup, delta_table=delta_table, name=F.name
            )
        return F

    def build_options(self):
        return impl.lipan.approximant.BuildOptions(
            gammas=self._d['gammas'],
            backend=self._d['mollifier']['backend'],
            mc_samples=self._d['mollifier']['mc_samples'],
            seed=self._d['seed'],
            gate_mode=self._d['gates']['mode'],
            sharpness=self._d['gates']['sharpness'],
            max_degree=self._d['gates']['max_degree'],
            net_cap=self._d['net']['cap'],
            gauge_tol=self._d['gauge']['tol'],
        )


def load_config(path, override_dict=None):
    """Read, merge and validate the Hjson run file at ``path``.

    Raises:
        ConfigError: The file is missing or unreadable, or a value is invalid.
    """
    try:
        with open(str(path), 'r') as f:
            file_dict = hjson.load(f)
    except (IOError, OSError) as e:
        raise impl.lipan.exc.ConfigError(
            'Unable to read config file', path=str(path), error=str(e)
        )
    except hjson.HjsonDecodeError as e:
        raise impl.lipan.exc.ConfigError(
            'Unable to parse config file', path=str(path), error=str(e)
        )
    return config_from_dict(file_dict, override_dict)


def config_from_dict(file_dict, override_dict=None):
    if not isinstance(file_dict, dict):
        raise impl.lipan.exc.ConfigError('Config must be a mapping')
    d = _merge(_defaults(), _plain(file_dict))
    for flag, value in (override_dict or {}).items():
        if value is None:
            continue
        if flag not in OVERRIDE_KEY_DICT:
            raise impl.lipan.exc.ConfigError('Unknown override', flag=flag)
        _set_dotted(d, OVERRIDE_KEY_DICT[flag], value)
    _validate(d)
    return RunConfig(d)


def _defaults():
    d = copy.deepcopy(DEFAULT_DICT)
    settings = django.conf.settings
    if settings.configured:
        d['out_dir'] = getattr(settings, 'LIPAN_OUT_DIR', d['out_dir'])
        d['workers'] = getattr(settings, 'LIPAN_WORKERS', d['workers'])
        d['net']['cap'] = getattr(settings, 'LIPAN_NET_CAP', d['net']['cap'])
        d['mollifier']['mc_samples'] = getattr(
            settings, 'LIPAN_MC_SAMPLES', d['mollifier']['mc_samples']
        )
    return d


def _plain(o):
    """Hjson mappings as plain dicts."""
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_plain(v) for v in o]
    return o


def _merge(base, top):
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _merge(base[k], v)
        else:
            base[k] = v
    return base


def _set_dotted(d, dotted_key, value):
    key_list = dotted_key.split('.')
    for k in key_list[:-1]:
        d = d.setdefault(k, {})
    d[key_list[-1]] = value


def _validate(d):
    for k in REQUIRED_TUPLE:
        if k not in d:
            raise impl.lipan.exc.ConfigError('Missing required config key', key=k)
    domain = d['domain']
    if not isinstance(domain, dict) or 'd' not in domain or 'R' not in domain:
        raise impl.lipan.exc.ConfigError('domain needs d and R')
    domain.setdefault('shape', 'ball')
    q = d['q']
    if 'components' not in q:
        if q.get('builtin') not in impl.lipan.seppoly.BUILTIN_TUPLE:
            raise impl.lipan.exc.ConfigError(
                'Unknown builtin q',
                name=q.get('builtin'),
                known=', '.join(impl.lipan.seppoly.BUILTIN_TUPLE),
            )
    t = d['target']
    if not isinstance(t, dict) or ('builtin' not in t and 'table' not in t):
        raise impl.lipan.exc.ConfigError('target needs builtin or table')
    if 'builtin' in t and t['builtin'] not in impl.lipan.targets.BUILTIN_TUPLE:
        raise impl.lipan.exc.ConfigError(
            'Unknown builtin target',
            name=t['builtin'],
            known=', '.join(impl.lipan.targets.BUILTIN_TUPLE),
        )
    _check_number(d, 'epsilon', d['epsilon'], lo=0.0)
    if d['gammas'] is not None:
        impl.lipan.space_net.validate_gammas(d['gammas'])
    if d['mollifier']['backend'] not in impl.lipan.mollifier.BACKEND_TUPLE:
        raise impl.lipan.exc.ConfigError(
            'Unknown backend', backend=d['mollifier']['backend']
        )
    _check_int(d, 'mollifier.mc_samples', d['mollifier']['mc_samples'], lo=2)
    if d['gates']['mode'] not in impl.lipan.gates.MODE_TUPLE:
        raise impl.lipan.exc.ConfigError('Unknown gate mode', mode=d['gates']['mode'])
    _check_number(d, 'gates.sharpness', d['gates']['sharpness'], lo=1.0, inclusive=True)
    _check_int(
        d, 'gates.max_degree', d['gates']['max_degree'], lo=impl.lipan.gates.START_DEGREE
    )
    _check_int(d, 'net.cap', d['net']['cap'], lo=1)
    _check_number(d, 'gauge.tol', d['gauge']['tol'], lo=0.0)
    ev = d['evaluation']
    _check_int(d, 'evaluation.points', ev['points'], lo=1)
    _check_int(d, 'evaluation.lipschitz_pairs', ev['lipschitz_pairs'], lo=1)
    if ev['sampler'] not in impl.lipan.space_net.SAMPLER_TUPLE:
        raise impl.lipan.exc.ConfigError('Unknown sampler', sampler=ev['sampler'])
    for k, v in d['verify'].items():
        _check_int(d, 'verify.' + k, v, lo=1)
    _check_int(d, 'seed', d['seed'], lo=0)
    _check_int(d, 'workers', d['workers'], lo=1)
    d['out_dir'] = str(d['out_dir'])


def _check_number(d, key, v, lo, inclusive=False):
    ok = (
        isinstance(v, (int, float))
        and not isinstance(v, bool)
        and math.isfinite(v)
        and (v >= lo if inclusive else v > lo)
    )
    if not ok:
        raise impl.lipan.exc.ConfigError(
            'Config value out of range', key=key, value=v, lower_bound=lo
        )


def _check_int(d, key, v, lo):
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise impl.lipan.exc.ConfigError(
            'Config value must be an integer', key=key, value=v, lower_bound=lo
        )
