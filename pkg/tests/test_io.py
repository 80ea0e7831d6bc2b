import json

import numpy as np

from photonwf.io import load_field, save_field, write_csv, write_json
from photonwf.kgrid import Field, build_grid
from photonwf.wavefunction import TwoComponentWavefunction, VectorWavefunction, embed, random_smooth_state

from conftest import X


def test_two_component_round_trip(tmp_path, grid21, rng):
    ft = random_smooth_state(grid21, rng, gauge=X)
    ft = ft.replace(time=1.25)
    save_field(tmp_path / "state", ft)
    back = load_field(tmp_path / "state")
    assert isinstance(back, TwoComponentWavefunction)
    assert back.gauge == X and back.time == 1.25
    np.testing.assert_array_equal(back.values, ft.values)
    np.testing.assert_array_equal(back.mask, ft.mask)
    header = json.loads((tmp_path / "state.json").read_text())
    assert header["grid"]["n"] == [21, 21, 21]
    assert header["state_gauge"] == [1.0, 0.0, 0.0]


def test_masked_points_are_not_written(tmp_path):
    g = build_grid((0, 0, 0), 1.0, 5, (0, 0, 1))
    f = Field(g, np.arange(125, dtype=float).reshape(g.shape))
    save_field(tmp_path / "s", f)
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "i,j,k,re0,im0"
    assert len(rows) - 1 == g.mask.sum()
    back = load_field(tmp_path / "s")
    assert back.values.shape == g.shape
    np.testing.assert_array_equal(back.values[g.mask], f.values[g.mask])
    assert np.all(back.values[~g.mask] == 0)


def test_vector_round_trip(tmp_path, grid21, rng):
    f = embed(random_smooth_state(grid21, rng))
    save_field(tmp_path / "v", f, extra={"note": "x"})
    back = load_field(tmp_path / "v")
    assert isinstance(back, VectorWavefunction)
    np.testing.assert_array_equal(back.values, f.values)


def test_writers_are_atomic_and_deterministic(tmp_path):
    write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(2)})
    assert (tmp_path / "a.json").read_text() == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 1.5\n}\n'
    write_csv(tmp_path / "t.csv", ["x", "y"], [[0.1, 2], [3, 4]])
    assert (tmp_path / "t.csv").read_text() == "x,y\n0.1,2.0\n3.0,4.0\n"
    assert not list(tmp_path.glob(".*tmp"))
