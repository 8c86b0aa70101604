import logging
import pathlib
import sys

import hjson
import pytest

import impl.lipan.approximant
import impl.lipan.filesystem
import impl.lipan.seppoly
import impl.lipan.space_net
import impl.lipan.targets
import tests.util.sample

log = logging.getLogger(__name__)


# Hooks


def pytest_addoption(parser):
    parser.addoption(
        '--sample-update',
        action='store_true',
        default=False,
        help='Overwrite mismatched samples with the current values instead of failing',
    )


def pytest_configure(config):
    """Allow plugins and conftest files to perform initial configuration.

    This hook is called for every plugin and initial conftest file after command line
    options have been parsed.

    After that, the hook is called for other conftest files as they are imported.
    """
    sys.is_running_under_pytest = True

    tests.util.sample.options = {
        "update": config.getoption("--sample-update"),
    }


# Autouse fixtures


@pytest.fixture(autouse=True)
def disable_log_to_console(mocker):
    """Prevent management commands from reconfiguring the logging that has been set up
    by pytest."""
    mocker.patch('impl.lipan.util.log_to_console')


# Fixtures


@pytest.fixture(scope='session')
def interval():
    """The open interval (-1, 1) inside the radius 1.5 ball."""
    return impl.lipan.space_net.build_domain(1, 1.5)


@pytest.fixture(scope='session')
def disk():
    """The open unit disk inside the radius 1.5 ball."""
    return impl.lipan.space_net.build_domain(2, 1.5)


@pytest.fixture(scope='session')
def euclid_1d():
    return impl.lipan.seppoly.derive_constants(
        impl.lipan.seppoly.builtin_q('euclidean', 1), 1.5
    )


@pytest.fixture(scope='session')
def euclid_2d():
    return impl.lipan.seppoly.derive_constants(
        impl.lipan.seppoly.builtin_q('euclidean', 2), 1.5
    )


@pytest.fixture(scope='session')
def flat_ap(interval, euclid_1d):
    """Approximant of the constant 5 on the interval. The net is {-2/3, ..., 2/3}."""
    F = impl.lipan.targets.builtin_target('constant', 1, {'value': 5.0})
    return impl.lipan.approximant.build_approximant(
        F, interval, euclid_1d, 0.5, impl.lipan.approximant.BuildOptions(mc_samples=20000)
    )


@pytest.fixture(scope='session')
def linear_ap(interval, euclid_1d):
    """Approximant of F(x) = x on the interval with the gammas derived from the
    modulus.
    """
    F = impl.lipan.targets.builtin_target('linear', 1)
    return impl.lipan.approximant.build_approximant(
        F, interval, euclid_1d, 0.5, impl.lipan.approximant.BuildOptions(mc_samples=20000)
    )


@pytest.fixture(scope='session')
def disk_ap(disk, euclid_2d):
    """Approximant of F(x) = x1 on the unit disk with explicit, coarse gammas. The
    net has 109 points.
    """
    F = impl.lipan.targets.builtin_target('linear', 2)
    return impl.lipan.approximant.build_approximant(
        F,
        disk,
        euclid_2d,
        0.5,
        impl.lipan.approximant.BuildOptions(
            gammas=(0.004, 0.05, 0.1), mc_samples=20000
        ),
    )


@pytest.fixture()
def test_docs():
    """pathlib.Path rooted in the test_docs dir."""
    return pathlib.Path(impl.lipan.filesystem.abs_path('./test_docs'))


@pytest.fixture()
def write_config(tmp_path):
    """Write a run config dict as Hjson below tmp_path, with out_dir pointing to
    tmp_path / 'out'. Returns the path of the config file.
    """

    def write_(config_dict, name='run.hjson'):
        config_dict = dict(config_dict)
        config_dict.setdefault('out_dir', (tmp_path / 'out').as_posix())
        path = tmp_path / name
        path.write_text(hjson.dumps(config_dict, indent=2))
        log.debug('Wrote test config. path="{}"'.format(path.as_posix()))
        return path

    return write_


@pytest.fixture()
def small_config():
    """Run config for the constant target on the interval, small enough for every
    battery to run in seconds.
    """
    return {
        'domain': {'d': 1, 'R': 1.5, 'shape': 'ball'},
        'q': {'builtin': 'euclidean'},
        'target': {'builtin': 'constant', 'params': {'value': 2.0}},
        'epsilon': 0.5,
        'mollifier': {'mc_samples': 20000},
        'evaluation': {'points': 20, 'lipschitz_pairs': 10},
        'verify': {
            'gauge_vectors': 300,
            'lemma2_vectors': 500,
            'lemma3_points': 5,
            'lemma3_pairs': 10,
            'cross_checks': 5,
            'lemma4_points': 10,
            'theorem1_points': 20,
        },
        'workers': 1,
        'seed': 7,
    }

