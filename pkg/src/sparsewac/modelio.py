"""Model files: plant, cost, network and gain sections in one JSON document.

Matrices are stored row-major as nested arrays of decimal literals, one
matrix row per line, so files diff cleanly.  Floats are written with
``repr`` and therefore round-trip exactly.  The schema is strict; unknown
keys are rejected.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .grid_model import CoherencyPartition, CostSpec, LinearPlant, PowerNetwork, StateLabels

__all__ = [
    "ModelFormatError",
    "ModelFile",
    "GainRecord",
    "dumps_model",
    "loads_model",
    "save_model",
    "load_model",
    "load_plant",
    "load_cost",
    "load_gain",
    "atomic_write_text",
]

_SECTIONS = {
    "plant": {"n", "q", "p", "A", "B1", "B2", "labels"},
    "cost": {"Q", "R", "provenance"},
    "network": {"generators", "Y", "actuated", "areas"},
    "gain": {"K", "pattern", "weights", "gamma"},
}
_LABEL_KEYS = {"angle", "frequency", "remaining", "generator_of_state", "generator_of_input"}
_GEN_KEYS = {"name", "bus", "M", "D", "E", "P", "theta"}
_REQUIRED = {
    "plant": {"n", "q", "p", "A", "B1", "B2", "labels"},
    "cost": {"Q", "R"},
    "network": {"generators", "Y"},
    "gain": {"K"},
}


class ModelFormatError(ValueError):
    """Schema or content violation in a model file."""

    def __init__(self, where, msg):
        self.where = where
        super().__init__(f"{where}: {msg}")


@dataclass
class GainRecord:
    K: np.ndarray
    pattern: np.ndarray = None
    weights: np.ndarray = None
    gamma: float = None


@dataclass
class ModelFile:
    plant: LinearPlant = None
    cost: CostSpec = None
    network: PowerNetwork = None
    actuated: list = None
    partition: CoherencyPartition = None
    gain: GainRecord = None


# --- writing -----------------------------------------------------------------

def _num(x):
    return repr(float(x))


def _matrix_text(M, indent):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    pad = " " * indent
    if M.shape[0] == 0:
        return "[]"
    rows = ["[" + ", ".join(_num(v) for v in row) + "]" for row in M]
    return "[\n" + ",\n".join(pad + "  " + r for r in rows) + "\n" + pad + "]"


def _obj_text(items, indent):
    pad = " " * indent
    parts = [f'{pad}  {json.dumps(k)}: {v}' for k, v in items]
    return "{\n" + ",\n".join(parts) + "\n" + pad + "}"


def _ints(v):
    return "[" + ", ".join(str(int(i)) for i in v) + "]"


def dumps_model(plant=None, cost=None, network=None, actuated=None, partition=None,
                gain=None):
    """Serialize the given sections to text."""
    sections = []
    if plant is not None:
        lab = plant.labels
        lab_items = [(k, _ints(getattr(lab, k))) for k in
                     ("angle", "frequency", "remaining", "generator_of_state",
                      "generator_of_input")]
        sections.append(("plant", _obj_text([
            ("n", str(plant.n)), ("q", str(plant.q)), ("p", str(plant.p)),
            ("A", _matrix_text(plant.A, 4)),
            ("B1", _matrix_text(plant.B1, 4)),
            ("B2", _matrix_text(plant.B2, 4)),
            ("labels", _obj_text(lab_items, 4)),
        ], 2)))
    if cost is not None:
        sections.append(("cost", _obj_text([
            ("Q", _matrix_text(cost.Q, 4)),
            ("R", _matrix_text(cost.R, 4)),
            ("provenance", json.dumps(cost.provenance, sort_keys=True)),
        ], 2)))
    if network is not None:
        gens = []
        for i in range(network.n_gen):
            gens.append("      " + json.dumps({
                "name": network.names[i], "bus": network.generator_buses[i],
                "M": float(network.M[i]), "D": float(network.D[i]), "E": float(network.E[i]),
                "P": float(network.P[i]), "theta": float(network.theta[i])}))
        items = [
            ("generators", "[\n" + ",\n".join(gens) + "\n    ]"),
            ("Y", _obj_text([("real", _matrix_text(network.Y.real, 6)),
                             ("imag", _matrix_text(network.Y.imag, 6))], 4)),
        ]
        if actuated is not None:
            items.append(("actuated", _ints(actuated)))
        if partition is not None:
            items.append(("areas", "[" + ", ".join(_ints(a) for a in partition.areas) + "]"))
        sections.append(("network", _obj_text(items, 2)))
    if gain is not None:
        items = [("K", _matrix_text(gain.K, 4))]
        if gain.pattern is not None:
            items.append(("pattern", _matrix_text(np.asarray(gain.pattern, dtype=float), 4)))
        if gain.weights is not None:
            items.append(("weights", _matrix_text(gain.weights, 4)))
        if gain.gamma is not None:
            items.append(("gamma", _num(gain.gamma)))
        sections.append(("gain", _obj_text(items, 2)))
    return _obj_text(sections, 0) + "\n"


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(path, **sections):
    atomic_write_text(path, dumps_model(**sections))


# --- reading -----------------------------------------------------------------

def _reject_constant(name):
    raise ValueError(f"non-finite literal {name}")


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ModelFormatError(where, "expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ModelFormatError(where, f"unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ModelFormatError(where, f"missing field(s) {sorted(missing)}")


def _matrix(obj, where, rows=None, cols=None):
    if not isinstance(obj, list):
        raise ModelFormatError(where, "expected an array of rows")
    if rows is not None and len(obj) != rows:
        raise ModelFormatError(where, f"has {len(obj)} rows, expected {rows}")
    out = []
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise ModelFormatError(f"{where}[{r}]", "expected an array")
        if cols is not None and len(row) != cols:
            raise ModelFormatError(f"{where}[{r}]", f"has {len(row)} entries, expected {cols}")
        for c, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ModelFormatError(f"{where}[{r}][{c}]", f"not a number: {v!r}")
            if not np.isfinite(v):
                raise ModelFormatError(f"{where}[{r}][{c}]", "non-finite entry")
        out.append([float(v) for v in row])
    if not out:
        return np.zeros((0, cols or 0))
    if len({len(r) for r in out}) != 1:
        raise ModelFormatError(where, "ragged rows")
    return np.array(out)


def _int_list(obj, where):
    if not isinstance(obj, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in obj):
        raise ModelFormatError(where, "expected an array of integers")
    return list(obj)


def _pos_int(obj, where):
    if isinstance(obj, bool) or not isinstance(obj, int) or obj < 0:
        raise ModelFormatError(where, "expected a nonnegative integer")
    return obj


def _parse_plant(sec):
    _check_keys(sec, _SECTIONS["plant"], _REQUIRED["plant"], "plant")
    n = _pos_int(sec["n"], "plant.n")
    q = _pos_int(sec["q"], "plant.q")
    p = _pos_int(sec["p"], "plant.p")
    A = _matrix(sec["A"], "plant.A", n, n)
    B1 = _matrix(sec["B1"], "plant.B1", n, q)
    B2 = _matrix(sec["B2"], "plant.B2", n, p)
    lab = sec["labels"]
    _check_keys(lab, _LABEL_KEYS, _LABEL_KEYS, "plant.labels")
    labels = StateLabels(**{k: _int_list(lab[k], f"plant.labels.{k}") for k in _LABEL_KEYS})
    try:
        return LinearPlant(A, B1, B2, labels)
    except ValueError as exc:
        raise ModelFormatError("plant", str(exc)) from None


def _parse_cost(sec, n=None, p=None):
    _check_keys(sec, _SECTIONS["cost"], _REQUIRED["cost"], "cost")
    Q = _matrix(sec["Q"], "cost.Q", n, n)
    R = _matrix(sec["R"], "cost.R", p, p)
    prov = sec.get("provenance", {"builder": "external"})
    if not isinstance(prov, dict):
        raise ModelFormatError("cost.provenance", "expected an object")
    try:
        return CostSpec(Q, R, prov)
    except ValueError as exc:
        raise ModelFormatError("cost", str(exc)) from None


def _parse_network(sec):
    _check_keys(sec, _SECTIONS["network"], _REQUIRED["network"], "network")
    gens = sec["generators"]
    if not isinstance(gens, list):
        raise ModelFormatError("network.generators", "expected an array")
    cols = {k: [] for k in ("M", "D", "E", "P", "theta")}
    names, buses = [], []
    for i, g in enumerate(gens):
        where = f"network.generators[{i}]"
        _check_keys(g, _GEN_KEYS, {"M", "D", "E", "P", "theta", "bus"}, where)
        for k in cols:
            v = g[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
                raise ModelFormatError(f"{where}.{k}", f"not a finite number: {v!r}")
            cols[k].append(float(v))
        names.append(str(g.get("name", i + 1)))
        buses.append(_pos_int(g["bus"], f"{where}.bus"))
    Ysec = sec["Y"]
    _check_keys(Ysec, {"real", "imag"}, {"real", "imag"}, "network.Y")
    Yr = _matrix(Ysec["real"], "network.Y.real")
    Yi = _matrix(Ysec["imag"], "network.Y.imag", *Yr.shape)
    try:
        net = PowerNetwork(Y=Yr + 1j * Yi, generator_buses=buses, names=names, **cols)
    except ValueError as exc:
        raise ModelFormatError("network", str(exc)) from None
    actuated = None
    if "actuated" in sec:
        actuated = _int_list(sec["actuated"], "network.actuated")
    partition = None
    if "areas" in sec:
        if not isinstance(sec["areas"], list):
            raise ModelFormatError("network.areas", "expected an array of arrays")
        areas = [_int_list(a, f"network.areas[{k}]") for k, a in enumerate(sec["areas"])]
        try:
            partition = CoherencyPartition(areas)
            partition.check_covers(net.n_gen)
        except ValueError as exc:
            raise ModelFormatError("network.areas", str(exc)) from None
    return net, actuated, partition


def _parse_gain(sec, p=None, n=None):
    _check_keys(sec, _SECTIONS["gain"], _REQUIRED["gain"], "gain")
    K = _matrix(sec["K"], "gain.K", p, n)
    pattern = weights = gamma = None
    if "pattern" in sec:
        pattern = _matrix(sec["pattern"], "gain.pattern", *K.shape) != 0
    if "weights" in sec:
        weights = _matrix(sec["weights"], "gain.weights", *K.shape)
    if "gamma" in sec:
        g = sec["gamma"]
        if isinstance(g, bool) or not isinstance(g, (int, float)):
            raise ModelFormatError("gain.gamma", "not a number")
        gamma = float(g)
    return GainRecord(K, pattern, weights, gamma)


def loads_model(text):
    """Parse model text; raises :class:`ModelFormatError` with context."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    except ValueError as exc:
        raise ModelFormatError("document", str(exc)) from None
    _check_keys(doc, set(_SECTIONS), set(), "document")
    out = ModelFile()
    if "plant" in doc:
        out.plant = _parse_plant(doc["plant"])
    n = out.plant.n if out.plant else None
    p = out.plant.p if out.plant else None
    if "cost" in doc:
        out.cost = _parse_cost(doc["cost"], n, p)
    if "network" in doc:
        out.network, out.actuated, out.partition = _parse_network(doc["network"])
    if "gain" in doc:
        out.gain = _parse_gain(doc["gain"], p, n)
    return out


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def load_plant(path):
    mf = load_model(path)
    if mf.plant is None:
        raise ModelFormatError(os.fspath(path), "no plant section")
    return mf.plant


def load_cost(path):
    mf = load_model(path)
    if mf.cost is None:
        raise ModelFormatError(os.fspath(path), "no cost section")
    return mf.cost


def load_gain(path):
    mf = load_model(path)
    if mf.gain is None:
        raise ModelFormatError(os.fspath(path), "no gain section")
    return mf.gain
