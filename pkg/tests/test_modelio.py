import json

import numpy as np
import pytest

from helpers import random_plant
from sparsewac.cases import bundled_network_path, two_area_four_machine
from sparsewac.grid_model import build_cost_average, linearize_swing
from sparsewac.modelio import (
    GainRecord,
    ModelFormatError,
    dumps_model,
    load_cost,
    load_gain,
    load_model,
    load_plant,
    loads_model,
    save_model,
)


@pytest.fixture
def swing():
    net, act, part = two_area_four_machine()
    pl = linearize_swing(net, act)
    return net, act, part, pl, build_cost_average(pl, 2, 2, 0.1)


def test_round_trip_is_text_identical(swing, tmp_path):
    net, act, part, pl, cost = swing
    K = np.random.default_rng(0).normal(size=(pl.p, pl.n))
    text = dumps_model(plant=pl, cost=cost, network=net, actuated=act, partition=part,
                       gain=GainRecord(K, K > 0, np.abs(K) + 1, 0.25))
    mf = loads_model(text)
    again = dumps_model(plant=mf.plant, cost=mf.cost, network=mf.network, actuated=mf.actuated,
                        partition=mf.partition, gain=mf.gain)
    assert again == text
    np.testing.assert_array_equal(mf.plant.A, pl.A)
    np.testing.assert_array_equal(mf.gain.K, K)
    assert mf.cost.provenance == cost.provenance
    path = tmp_path / "m.json"
    save_model(path, plant=pl, cost=cost)
    np.testing.assert_array_equal(load_plant(path).B2, pl.B2)
    np.testing.assert_array_equal(load_cost(path).Q, cost.Q)


def test_random_plant_round_trip(rng):
    pl, cost = random_plant(rng, 6, 2, 3)
    mf = loads_model(dumps_model(plant=pl, cost=cost))
    for name in ("A", "B1", "B2"):
        np.testing.assert_array_equal(getattr(mf.plant, name), getattr(pl, name))


def _doc(swing):
    _, _, _, pl, cost = swing
    return json.loads(dumps_model(plant=pl, cost=cost))


def test_b2_row_mismatch(swing):
    doc = _doc(swing)
    doc["plant"]["B2"] = doc["plant"]["B2"][:-1]
    with pytest.raises(ModelFormatError, match="plant.B2"):
        loads_model(json.dumps(doc))


def test_unknown_key(swing):
    doc = _doc(swing)
    doc["plant"]["C"] = [[1.0]]
    with pytest.raises(ModelFormatError, match="plant.*C"):
        loads_model(json.dumps(doc))


def test_non_finite(swing):
    text = dumps_model(plant=swing[3]).replace("1.0", "NaN", 1)
    with pytest.raises(ModelFormatError):
        loads_model(text)


def test_syntax_error_has_position():
    with pytest.raises(ModelFormatError, match="line 2 column"):
        loads_model('{\n "plant": [,]}')


def test_negative_inertia_names_generator():
    text = open(bundled_network_path()).read().replace('"M": 0.3275939245308179', '"M": -1.0', 1)
    with pytest.raises(ModelFormatError, match="generator G3"):
        loads_model(text)


def test_missing_sections(tmp_path):
    path = tmp_path / "g.json"
    save_model(path, gain=GainRecord(np.eye(2)))
    assert load_gain(path).gamma is None
    with pytest.raises(ModelFormatError, match="no plant"):
        load_plant(path)


def test_bundled_network_loads():
    mf = load_model(bundled_network_path())
    net, act, part = two_area_four_machine()
    np.testing.assert_array_equal(mf.network.M, net.M)
    np.testing.assert_array_equal(mf.network.P, net.P)
    assert mf.actuated == act
    assert mf.partition.areas == part.areas
