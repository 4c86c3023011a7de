"""Deterministic CSV/JSON writers and readers."""

import json
import math
import os

import numpy as np

from .errors import ArtifactIOError

FLOAT_FORMAT = "%.15e"


def tagged(value, units="1", origin="measured"):
    """A report entry with units and where the number comes from (measured, derived or published)."""
    return {"value": value, "units": units, "origin": origin}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 0:
            return _clean(obj.item())
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return float("%.15e" % v)
    return obj


def ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError("cannot create output directory %s: %s" % (path, exc)) from exc
    return path


def write_json(path, data):
    try:
        with open(path, "w") as fh:
            json.dump(_clean(data), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ArtifactIOError("cannot write %s: %s" % (path, exc)) from exc


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactIOError("cannot read %s: %s" % (path, exc)) from exc


def write_csv(path, columns, header):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    try:
        np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt=FLOAT_FORMAT)
    except OSError as exc:
        raise ArtifactIOError("cannot write %s: %s" % (path, exc)) from exc


def read_csv(path):
    """Returns (header, data) for a CSV written by write_csv."""
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ArtifactIOError("cannot read %s: %s" % (path, exc)) from exc
    return header, data
