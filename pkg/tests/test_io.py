import json

import numpy as np
import pytest

from mfmaps.errors import ValidationError
from mfmaps.holder import CornerGrid, SampledFunction
from mfmaps.io import load, save
from mfmaps.manifolds import get_manifold
from mfmaps.mapping import SampledMap, SampledSection
from mfmaps.sampling import random_map, random_section

GRID = CornerGrid([0, 0], [1, 2], [4, 3])


def test_round_trips(tmp_path, rng):
    f = SampledFunction(GRID, rng.normal(size=(GRID.size, 2)))
    gamma = random_map(get_manifold("so3"), GRID, rng)
    sigma = random_section(gamma, rng)
    for obj, kind in ((f, SampledFunction), (gamma, SampledMap), (sigma, SampledSection)):
        path = tmp_path / "obj.json"
        save(obj, path)
        back = load(path)
        assert type(back) is kind
    assert np.array_equal(load(tmp_path / "obj.json").vectors, sigma.vectors)
    save(gamma, tmp_path / "g.json")
    assert np.array_equal(load(tmp_path / "g.json").points, gamma.points)


def write(tmp_path, data):
    path = tmp_path / "bad.json"
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


@pytest.mark.parametrize("data", [
    "{not json",
    [1, 2],
    {"grid": {"lo": [0], "hi": [1]}, "codim": 1, "values": [[0.0], [1.0]]},
    {"grid": {"lo": [0], "hi": [1], "shape": [2]}, "codim": 0, "values": [[0.0], [1.0]]},
    {"grid": {"lo": [0], "hi": [1], "shape": [2]}, "codim": 1, "values": [[0.0]]},
    {"grid": {"lo": [1], "hi": [0], "shape": [2]}, "codim": 1, "values": [[0.0], [1.0]]},
    {"grid": {"lo": [0], "hi": [1], "shape": [2]}, "manifold": "klein", "points": [[0.0], [1.0]]},
    {"grid": {"lo": [0], "hi": [1], "shape": [2]}, "manifold": 3, "points": [[0.0], [1.0]]},
])
def test_malformed_files(tmp_path, data):
    with pytest.raises(ValidationError):
        load(write(tmp_path, data))


def test_errors_name_the_node(tmp_path):
    base = {"grid": {"lo": [0], "hi": [1], "shape": [3]}, "codim": 1}
    for rows in ([[0.0], [1.0, 2.0], [0.0]], [[0.0], ["x"], [0.0]], [[0.0], [True], [0.0]]):
        with pytest.raises(ValidationError) as info:
            load(write(tmp_path, dict(base, values=rows)))
        assert info.value.node == 1
    sphere = {"grid": {"lo": [0], "hi": [1], "shape": [3]}, "manifold": "sphere2",
              "points": [[0, 0, 1], [0, 0, 1], [0, 1, 1]]}
    with pytest.raises(ValidationError) as info:
        load(write(tmp_path, sphere))
    assert info.value.node == 2
    section = dict(sphere, points=[[0, 0, 1]] * 3, vectors=[[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    with pytest.raises(ValidationError) as info:
        load(write(tmp_path, section))
    assert info.value.node == 1
