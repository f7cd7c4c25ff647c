"""JSON (de)serialization of channels and strategies; complex numbers as ``{"re", "im"}``."""

import json

import numpy as np

from .signal_model import SignalStrategy, SisoIcInstance, _cplx as complex_to_json


def complex_from_json(d):
    if isinstance(d, dict):
        return complex(float(d["re"]), float(d["im"]))
    if isinstance(d, (int, float)):
        return complex(d)
    raise ValueError(f"expected a {{'re', 'im'}} object, got {d!r}")


def instance_to_dict(inst):
    return {
        "h": [[complex_to_json(inst.h[k, j]) for j in range(2)] for k in range(2)],
        "sigma2": float(inst.sigma2),
        "P": [float(p) for p in inst.P],
    }


def instance_from_dict(d):
    try:
        h = np.array([[complex_from_json(x) for x in row] for row in d["h"]], dtype=complex)
        return SisoIcInstance(h, float(d.get("sigma2", 1.0)), tuple(float(p) for p in d.get("P", (1.0, 1.0))))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel record: {exc}") from exc


def save_channels(path, instances, header=None):
    doc = dict(header or {})
    doc["channels"] = [instance_to_dict(i) for i in instances]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def load_channels(path):
    """Channels from a JSON file holding one record or ``{"channels": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "channels" in doc:
        return [instance_from_dict(d) for d in doc["channels"]]
    return [instance_from_dict(doc)]


def load_strategy(path):
    with open(path, encoding="utf-8") as fh:
        return SignalStrategy.from_dict(json.load(fh))
