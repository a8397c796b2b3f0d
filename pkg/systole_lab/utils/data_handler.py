"""
Result persistence for systole-lab runs.

Writes JSON with sorted keys and rounded floats, and CSV rows through the
csv module. Every writer returns True on success and logs failures.
"""

import csv
import json
import logging
import math
import os

import numpy as np


def round_significant(value, digits):
    """Round a float to `digits` significant digits, leaving 0, inf and nan alone."""
    if value == 0 or not math.isfinite(value):
        return value
    return float(f'{value:.{digits}g}')


def rounded(data, digits):
    """Copy of nested data with floats rounded and numpy scalars unwrapped."""
    if isinstance(data, dict):
        return {str(k): rounded(v, digits) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [rounded(v, digits) for v in data]
    if isinstance(data, np.ndarray):
        return [rounded(v, digits) for v in data.tolist()]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = round_significant(float(data), digits)
        # JSON has no inf or nan
        return value if math.isfinite(value) else str(value)
    return data


class ResultWriter:
    """
    Writes run artifacts into one output directory.
    """

    def __init__(self, out_dir, digits=12):
        """
        Args:
            out_dir (str): output directory, created when missing
            digits (int): significant digits kept in JSON and CSV
        """
        self.out_dir = out_dir
        self.digits = int(digits)
        self.logger = logging.getLogger(__name__)
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def dumps(self, data):
        return json.dumps(rounded(data, self.digits), indent=2, sort_keys=True) + '\n'

    def write_json(self, name, data):
        """
        Returns:
            bool: True if saved successfully, False otherwise
        """
        try:
            with open(self.path(name), 'w', encoding='utf-8', newline='\n') as f:
                f.write(self.dumps(data))
            self.logger.debug(f"ResultWriter: wrote {name}")
            return True
        except Exception as e:
            self.logger.error(f"ResultWriter: failed to write {name}: {e}")
            return False

    def write_csv(self, name, rows, fieldnames=None):
        """
        Write dict rows; the header is the first row's keys unless given.

        Returns:
            bool: True if saved successfully, False otherwise
        """
        rows = [rounded(r, self.digits) for r in rows]
        if fieldnames is None:
            fieldnames = list(rows[0].keys()) if rows else []
        try:
            with open(self.path(name), 'w', encoding='utf-8', newline='') as f:
                writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator='\n')
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: row.get(k) for k in fieldnames})
            self.logger.debug(f"ResultWriter: wrote {len(rows)} rows to {name}")
            return True
        except Exception as e:
            self.logger.error(f"ResultWriter: failed to write {name}: {e}")
            return False

    def read_json(self, name):
        """
        Returns:
            dict or None: parsed content, None if missing or unreadable
        """
        try:
            with open(self.path(name), 'r', encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError:
            return None
        except Exception as e:
            self.logger.error(f"ResultWriter: failed to read {name}: {e}")
            return None
