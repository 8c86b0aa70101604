import logging
import sys

import numpy as np

LOG_TAG_LIST = (
    'impl.lipan.approximant',
    'impl.lipan.experiment',
    'impl.lipan.verify',
)


def log_to_console(module_name, is_debug):
    """Add a logging handler that writes to the console and configure logging levels.

    Args:
        is_debug: Enable debug level logging.
        module_name: __name_ from caller.

        If debug level logging IS enabled, the root logger is set to DEBUG and the rest
        of the tree is left as configured in the Django settings.

        If debug level logging is NOT enabled, the root logger is set to INFO and all
        existing loggers are bumped to ERROR, except the library loggers that report
        run progress.
    """
    root_logger = logging.getLogger()
    # Remove any existing handlers that write to the console (stdout or stderr).
    while True:
        for h in root_logger.handlers:
            if isinstance(h, logging.StreamHandler):
                if h.stream in (sys.stdout, sys.stderr):
                    root_logger.removeHandler(h)
                    break
        else:
            break

    if not is_debug:
        for logger_name in list(logging.root.manager.loggerDict):
            logging.getLogger(logger_name).setLevel(logging.ERROR)
    for n in LOG_TAG_LIST:
        logging.getLogger(n).setLevel(logging.DEBUG if is_debug else logging.INFO)

    formatter = logging.Formatter('%(levelname)-8s %(module)s - %(message)s')
    base_level = logging.DEBUG if is_debug else logging.INFO
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(base_level)
    handler.setFormatter(formatter)
    root_logger.addHandler(handler)

    root_logger.setLevel(base_level)

    # Ensure that log records from the logger at __name__ will propagate to the root.
    mod_path = []
    for mod_str in module_name.split('.'):
        mod_path.append(mod_str)
        logging.getLogger('.'.join(mod_path)).setLevel(base_level)

    if is_debug:
        log = logging.getLogger(__name__)
        log.debug('logging: DEBUG level logging enabled')


def as_points(x, d=None):
    """Return ``x`` as a 2-d float array with one point per row.

    A single point may be passed as a flat sequence.
    """
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1) if d is None or a.shape[0] == d else a.reshape(-1, 1)
    if d is not None and a.shape[1] != d:
        raise ValueError(
            'Point dimension mismatch. expected={} received={}'.format(d, a.shape[1])
        )
    return a


def as_point(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def to_builtin(o):
    """Convert numpy scalars and arrays nested in ``o`` to plain Python values, for
    JSON and Hjson serialization.
    """
    if isinstance(o, dict):
        return {str(k): to_builtin(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [to_builtin(v) for v in o]
    if isinstance(o, np.ndarray):
        return to_builtin(o.tolist())
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        o = float(o)
    if isinstance(o, float) and not np.isfinite(o):
        return repr(o)
    return o
