import numpy as np
import pytest

from treeq import CONTINUOUS, DISCRETE, ActionSchema, VariableSpec


@pytest.fixture
def office_space():
    return (
        VariableSpec("x", 0.0, 5.0, CONTINUOUS),
        VariableSpec("y", 0.0, 5.0, CONTINUOUS),
        VariableSpec("c", 0, 2, DISCRETE),
        VariableSpec("m", 0, 2, DISCRETE),
    )


@pytest.fixture
def office_actions():
    d = VariableSpec("d", 0.0, 0.5, CONTINUOUS)
    return tuple(ActionSchema(lbl, (d,)) for lbl in ("up", "down", "left", "right"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def office_test_layout(noise_sigma=0.0, walls=(), station_radius=0.3, **kw):
    """Small open office layout for unit tests; stations far from the
    default motion paths unless placed deliberately."""
    doc = {
        "format": "treeq-layout",
        "version": 1,
        "env": "office",
        "name": "office_test",
        "bounds": [[0.0, 5.0], [0.0, 5.0]],
        "start": [1.0, 1.0],
        "walls": [list(w) for w in walls],
        "stations": {"coffee": [0.5, 4.5], "mail": [2.5, 4.5], "office": [4.5, 4.5]},
        "station_radius": station_radius,
        "noise_sigma": noise_sigma,
    }
    doc.update(kw)
    return doc
