"""
Shared fixtures: a small free experiment that runs every stage in seconds.
"""
import pytest
import yaml


@pytest.fixture
def tiny_experiment():
    return {
        "name": "tiny",
        "potential": {"kind": "zero"},
        "theta": 0.1,
        "phases": {"mode": "equidistributed", "count": 2, "seed": 0},
        "ids_window": 256,
        "transport_window": 128,
        "dual_window": 65,
        "chain_sites": 4,
        "t_grid": {"start": 2.0, "stop": 16.0, "points": 8},
        "e_grid": {"start": -2.5, "stop": 2.5, "points": 501},
        "kotani_grid": {"start": -1.0, "stop": 1.0, "points": 3},
        "delta_n": 0.01,
        "epsilon": 0.01,
        "kotani_phases": 100,
        "cocycle_length": 1000,
        "orbit_k": 2,
        "chain_times": [0.5, 1.0],
    }


@pytest.fixture
def tiny_config(tmp_path, tiny_experiment):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(tiny_experiment))
    return path
