"""Persistent table of Bessel zeros keyed by exact rational order.

Values are stored as ``float.hex`` strings so a warm run reproduces a cold
run bit for bit. Readers never lock; a writer merges under a file lock and
replaces the table atomically.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from filelock import FileLock

from . import special_functions as sf
from .model_spectra import nu_key

CACHE_ENV = "EDGE_ETA_CACHE"
TABLE_NAME = "bessel_zeros.json"
FORMAT_VERSION = 1


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "edgeeta"


class ZeroCache:
    """Zeros j_{nu,1} < j_{nu,2} < ... per order, plus a completeness bound.

    ``complete_below`` records an x up to which every zero is stored, so
    :meth:`zeros_below` can answer from the table without recomputing.
    """

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.directory / TABLE_NAME
        self._table = self._read()
        self._dirty = False

    def _read(self) -> dict:
        try:
            data = json.loads(self.path.read_text())
        except FileNotFoundError:
            return {}
        except json.JSONDecodeError:
            # a corrupt table is rebuilt, never trusted
            return {}
        if data.get("version") != FORMAT_VERSION:
            return {}
        return {
            k: {"zeros": [float.fromhex(z) for z in v["zeros"]],
                "complete_below": float.fromhex(v["complete_below"])}
            for k, v in data.get("orders", {}).items()
        }

    def _entry(self, nu):
        return self._table.setdefault(nu_key(nu), {"zeros": [], "complete_below": 0.0})

    def get_or_compute(self, nu, k) -> float:
        entry = self._entry(nu)
        zeros = entry["zeros"]
        while len(zeros) < k:
            zeros.append(sf.bessel_j_zero(float(nu), len(zeros) + 1).value)
            entry["complete_below"] = max(entry["complete_below"], zeros[-1])
            self._dirty = True
        return zeros[k - 1]

    def zeros_below(self, nu, x_max) -> list:
        entry = self._entry(nu)
        if entry["complete_below"] < x_max:
            fresh = sf.bessel_j_zeros_below(float(nu), x_max)
            if len(fresh) >= len(entry["zeros"]):
                entry["zeros"] = list(fresh)
            entry["complete_below"] = float(x_max)
            self._dirty = True
        return [z for z in entry["zeros"] if z <= x_max]

    def __len__(self):
        return sum(len(v["zeros"]) for v in self._table.values())

    def flush(self):
        """Merge this table into the on-disk one and replace it atomically."""
        if not self._dirty:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        with FileLock(str(self.path) + ".lock"):
            on_disk = self._read()
            for key, entry in self._table.items():
                old = on_disk.get(key)
                if old is None or len(entry["zeros"]) >= len(old["zeros"]):
                    merged = dict(entry)
                    if old is not None:
                        merged["complete_below"] = max(entry["complete_below"], old["complete_below"])
                    on_disk[key] = merged
            payload = {
                "version": FORMAT_VERSION,
                "orders": {
                    k: {"zeros": [float(z).hex() for z in v["zeros"]],
                        "complete_below": float(v["complete_below"]).hex()}
                    for k, v in sorted(on_disk.items())
                },
            }
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".zeros-", suffix=".json")
            with os.fdopen(fd, "w") as fh:
                json.dump(payload, fh, sort_keys=True)
            os.replace(tmp, self.path)
            self._table = on_disk
        self._dirty = False
