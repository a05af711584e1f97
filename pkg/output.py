"""CSV, JSON and SVG writers shared by the commands.

Every CSV and JSON file carries the resolved run configuration and the schema version.
"""
import csv
import json
import logging
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config import Config  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.17g}"
SVG_HASH_SALT = "nanospin"


def resolve_path(path):
    """Relative paths land under the configured output directory"""
    if os.path.isabs(path) or os.path.dirname(path):
        target = path
    else:
        target = os.path.join(Config.OUTPUT_DIR, path)
    directory = os.path.dirname(target)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return target


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def json_document(payload, run_config):
    document = dict(_plain(payload))
    document['schema_version'] = run_config.schema_version
    document['config'] = run_config.to_dict()
    return json.dumps(document, sort_keys=True, indent=2)


def write_json(path, payload, run_config):
    target = resolve_path(path)
    with open(target, 'w', encoding='utf-8') as f:
        f.write(json_document(payload, run_config))
        f.write('\n')
    logger.info(f"Wrote {target}")
    return target


def write_csv(path, columns, run_config):
    """columns: ordered mapping name -> equal-length 1-D sequence"""
    names = list(columns)
    data = [np.asarray(columns[name], dtype=float) for name in names]
    target = resolve_path(path)
    with open(target, 'w', newline='', encoding='utf-8') as f:
        f.write(f"# schema_version={run_config.schema_version}\n")
        f.write(f"# config={json.dumps(run_config.to_dict(), sort_keys=True)}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([FLOAT_FORMAT.format(x) for x in row])
    logger.info(f"Wrote {target} ({len(data[0]) if data else 0} rows)")
    return target


def write_svg(path, x, series, title, xlabel, ylabel, errors=None):
    """Line plot of one or more named series against x"""
    target = resolve_path(path)
    plt.rcParams['svg.hashsalt'] = SVG_HASH_SALT
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for label, y in series.items():
        ax.plot(x, y, label=label, linewidth=1.0)
        if errors and label in errors:
            ax.fill_between(x, np.asarray(y) - errors[label], np.asarray(y) + errors[label], alpha=0.25)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(target, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info(f"Wrote {target}")
    return target
