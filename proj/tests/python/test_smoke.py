import json
import math

import numpy as np
import pytest

import sflab


def test_untwisted_gap():
    spec = sflab.untwisted_spectrum(2)
    assert len(spec) == 16
    assert all(abs(abs(x) - math.pi * math.sqrt(3)) < 1e-12 for x in spec)


def test_circle_oracle():
    for w in range(-3, 4):
        assert sflab.circle_oracle_flow(w, 16) == w
    with pytest.raises(sflab.PreconditionError):
        sflab.circle_oracle_flow(3, 8)


def test_topology():
    assert abs(sflab.degree(1, 32) - 1) < 1e-4
    assert abs(sflab.winding_number(-1, 16) + 1) < 1e-2
    assert abs(sflab.mapping_torus_index(0, 8)) < 1e-12


def test_dirac_matrix_is_hermitian():
    a = sflab.dirac_matrix(1, 6, t=0.5)
    assert a.shape == (864, 864)
    assert np.abs(a - a.conj().T).max() < 1e-10


def test_matrix_flow():
    a0 = np.diag([-1.0, -0.5, 1.0]).astype(complex)
    x = np.diag([2.0, 0.0, 0.0]).astype(complex)
    r = sflab.matrix_spectral_flow(a0, x)
    assert r["flow"] == 1
    assert r["schema_version"] == 1


def test_dirac_flow_and_plot():
    r = sflab.spectral_flow(1, 6)
    assert r["flow"] == 1
    svg = sflab.plot_svg(json.dumps(r))
    assert svg.startswith("<svg")


def test_verify_and_validation(tmp_path):
    report = sflab.verify("[suite]\nk = 0\ngrid = 4\ntopology_grid = 8\n[output]\ncache = false\n", tmp_path)
    assert report["passed"]
    assert report["records"][0]["spectral_flow"] == 0
    assert (tmp_path / "report.json").exists()
    with pytest.raises(sflab.ConfigError):
        sflab.verify("[suite]\nrank = 1\n", tmp_path)
