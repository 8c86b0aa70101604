import json
import pathlib

import numpy as np

import impl.lipan.report


def load_json(path):
    return load_json_str(pathlib.Path(path).read_text(encoding='utf-8'))


def load_json_str(s):
    return json.loads(s)


def load_report(out_dir):
    return load_json(pathlib.Path(out_dir) / impl.lipan.report.REPORT_NAME)


def load_ledger(out_dir, suite):
    return load_json(
        pathlib.Path(out_dir) / impl.lipan.report.LEDGER_NAME_TEMPLATE.format(suite)
    )


def ledger_props(ledger_dict):
    """Return {property: entry} for the pass/fail properties of a ledger dict."""
    return {
        k: v for k, v in ledger_dict['properties'].items() if not k.startswith('_')
    }


def failed_props(ledger_dict):
    return sorted(
        k for k, v in ledger_props(ledger_dict).items() if v['hard'] and v['violations']
    )


def lipschitz_quotients(fn, x, y):
    """|fn(x) - fn(y)| / |x - y| for paired rows of x and y."""
    fx = np.array([fn(p) for p in x])
    fy = np.array([fn(p) for p in y])
    return np.abs(fx - fy) / np.linalg.norm(np.asarray(x) - np.asarray(y), axis=1)
