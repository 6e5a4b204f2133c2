import json
import math
from pathlib import Path

import numpy as np
import pytest

import singhom

ROOT = Path(__file__).resolve().parents[2]


def test_interval_mesh_layout():
    mesh = singhom.interval_mesh(1.0, 11)
    assert mesh.dim == 1
    assert mesh.num_nodes == 11
    assert mesh.num_elements == 10
    assert np.allclose(mesh.nodes[:, 0], np.linspace(0.0, 1.0, 11))
    assert not mesh.free[0] and not mesh.free[-1] and mesh.free[1:-1].all()


def test_rectangle_mesh_layout():
    mesh = singhom.rectangle_mesh(2.0, 1.0, 5, 3)
    assert mesh.num_nodes == 15
    assert mesh.num_elements == 2 * 4 * 2
    # Row-major from the lower-left corner.
    assert tuple(mesh.nodes[6]) == pytest.approx((0.5, 0.5))
    assert mesh.free.sum() == 3


def test_linear_source_matches_parabola():
    # -u'' = 1 on (0, 1): u = x (1 - x) / 2, reproduced exactly at the nodes.
    mesh = singhom.interval_mesh(1.0, 41)
    rep = singhom.solve(mesh, f=0.0, l=1.0)
    x = mesh.nodes[:, 0]
    assert rep["converged"]
    assert np.max(np.abs(rep["u"] - x * (1.0 - x) / 2.0)) < 1e-8


def test_zero_data_gives_zero():
    mesh = singhom.rectangle_mesh(1.0, 1.0, 9, 9)
    rep = singhom.solve(mesh, f=0.0, l=0.0)
    assert np.all(rep["u"] == 0.0)


def test_singular_solution_is_positive_and_symmetric():
    mesh = singhom.interval_mesh(1.0, 65)
    rep = singhom.solve(mesh, gamma=0.5, f=1.0)
    u = rep["u"]
    assert rep["converged"]
    assert np.all(u[1:-1] > 0.0)
    assert np.allclose(u, u[::-1], atol=1e-8)
    assert rep["energy_identity_residual"] < 1e-6


def test_nodal_array_length_checked():
    mesh = singhom.interval_mesh(1.0, 9)
    with pytest.raises(ValueError):
        singhom.solve(mesh, f=np.ones(5))


def test_first_eigenvalue_of_unit_square():
    mesh = singhom.rectangle_mesh(1.0, 1.0, 33, 33)
    lam, phi = singhom.dirichlet_eigenpair(mesh)
    assert lam == pytest.approx(2.0 * math.pi**2, rel=0.02)
    assert lam > 2.0 * math.pi**2  # conforming P1 overestimates
    assert np.all(phi >= -1e-12)


def test_power_map_has_zero_monotonicity_constant():
    mesh = singhom.interval_mesh(1.0, 5)
    assert singhom.estimate_lambda_mono(mesh, gamma=0.5) == 0.0
    assert math.isinf(singhom.estimate_lambda_mono(mesh, g="oscillating", gamma=0.5))


def test_annulus_capacity():
    c = singhom.discrete_capacity(1.0, 0.1, 0.01)
    assert c["capacity"] == pytest.approx(2.0 * math.pi / math.log(10.0), rel=0.02)


def test_radius_and_strange_term():
    mu = 50.0
    c0 = singhom.c0_for_mu(mu)
    assert c0 == pytest.approx(math.pi / (2.0 * mu))
    assert singhom.prescribed_mu_radius(0.125, c0) == pytest.approx(0.125 * math.exp(-c0 / 0.125**2))
    assert singhom.radius_law(0.125, 2, c0) == pytest.approx(math.exp(-c0 / 0.125**2))
    assert singhom.strange_term_mu(2, c0) == pytest.approx(mu)


@pytest.mark.parametrize("s", [-3.0, -0.5, 0.0, 0.7, 2.5])
def test_truncation_splits_identity(s):
    k = 1.0
    assert singhom.tk(s, k) + singhom.gk(s, k) == pytest.approx(s)
    assert abs(singhom.tk(s, k)) <= k


def test_config_round_trip_and_errors():
    text = (ROOT / "configs/examples/linear_1d.ini").read_text()
    canon = singhom.normalize_config(text)
    assert singhom.normalize_config(canon) == canon
    with pytest.raises(singhom.ConfigError, match="gamma"):
        singhom.normalize_config("[experiment]\nkind = solve\n[nonlinearity]\ngamma = -0.5\n")


def test_run_writes_artifacts(tmp_path):
    res = singhom.run(str(ROOT / "configs/examples/linear_1d.ini"), out_dir=str(tmp_path))
    assert res["exit_code"] == 0, res["stderr"]
    lines = (tmp_path / "results.jsonl").read_text().splitlines()
    rec = json.loads(lines[-1])
    assert rec["pass"] is True


def test_run_rejects_bad_config(tmp_path):
    res = singhom.run(str(ROOT / "tests/data/negative_gamma.ini"), out_dir=str(tmp_path))
    assert res["exit_code"] == 2
    assert "gamma" in res["stderr"]
