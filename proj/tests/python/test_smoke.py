import os
import subprocess

import numpy as np
import pytest

import nsksp

SOLVERS = ["gmres", "bicgstab", "tfqmr", "qmrcgstab"]


def poisson(n):
    return nsksp.generate("fd2d", n, c=[0.0, 0.0])


def test_triplets_and_matvec():
    a = nsksp.CsrMatrix.from_triplets([0, 0, 1, 1], [0, 1, 1, 0], [2.0, -1.0, 3.0, 1.0], 2, 2)
    assert a.shape == (2, 2)
    assert a.nnz == 4
    np.testing.assert_array_equal(a @ np.array([1.0, 1.0]), [1.0, 4.0])
    np.testing.assert_array_equal(a.to_dense(), [[2.0, -1.0], [1.0, 3.0]])


def test_generated_problem_is_consistent():
    p = poisson(12)
    a = p["a"]
    assert a.shape == (144, 144)
    assert a.nnz == 5 * 144 - 4 * 12
    np.testing.assert_array_equal(a @ p["x_exact"], p["b"])


@pytest.mark.parametrize("solver", SOLVERS)
@pytest.mark.parametrize("precond", ["none", "jacobi", "gs", "ilu0", "sa-amg", "c-amg"])
def test_solve_matches_manufactured_solution(solver, precond):
    p = poisson(16)
    x, report = nsksp.solve(p["a"], p["b"], solver=solver, precond=precond)
    assert report["status"] == "Converged"
    per_iter = 1 if solver == "gmres" else 2
    assert report["counters"]["matvecs"] == per_iter * report["iterations"]
    assert report["true_relres"] <= 1e-9
    np.testing.assert_allclose(x, p["x_exact"], rtol=0, atol=1e-7)


def test_solve_agrees_with_dense_solve():
    p = nsksp.generate("fd2d", 10, c=[5.0, -3.0])
    x, _ = nsksp.solve(p["a"], p["b"], solver="bicgstab", precond="ilu0")
    ref = np.linalg.solve(p["a"].to_dense(), p["b"])
    np.testing.assert_allclose(x, ref, atol=1e-8)


def test_flop_model():
    assert nsksp.flop_model("gmres", 100, 5, 3) == 2 * 100 * (5 + 6 + 2)
    assert nsksp.flop_model("bicgstab", 100, 5, 1) == 4 * 100 * 10
    assert nsksp.flop_model("tfqmr", 100, 5, 1) == 4 * 100 * 12


def test_errors_carry_codes():
    p = poisson(4)
    with pytest.raises(nsksp.NskspError) as e:
        nsksp.solve(p["a"], p["b"], solver="cg")
    assert e.value.code == "UnknownSolver"
    with pytest.raises(nsksp.NskspError):
        nsksp.generate("fd2d", 0)


def test_matrix_market_round_trip(tmp_path):
    p = nsksp.generate("helmholtz2d", 8)
    path = tmp_path / "a.mtx"
    nsksp.write_matrix_market(p["a"], path)
    assert nsksp.read_matrix_market(path) == p["a"]
    nsksp.write_vector_market(p["b"], tmp_path / "b.mtx")
    np.testing.assert_array_equal(nsksp.read_vector_market(tmp_path / "b.mtx"), p["b"])


def test_preconditioner_apply():
    p = poisson(6)
    v = np.arange(36, dtype=float)
    np.testing.assert_array_equal(nsksp.apply_preconditioner(p["a"], v, "none"), v)
    w = nsksp.apply_preconditioner(p["a"], v, "jacobi")
    np.testing.assert_allclose(w, v / p["a"].diagonal())


def test_run_suite_csv():
    cfg = '{"cases": [{"id": "p", "solver": "gmres", "precond": "ilu0",' \
          ' "problem": {"family": "fd2d", "n": 8}}]}'
    lines = nsksp.run_suite(cfg).strip().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("p,")


@pytest.mark.skipif("NSKSP_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_gen_then_solve(tmp_path):
    cli = os.environ["NSKSP_CLI"]
    mtx = tmp_path / "a.mtx"
    subprocess.run([cli, "gen", "--problem", "fd2d", "--n", "8", "--out", str(mtx)], check=True)
    out = subprocess.run([cli, "solve", "--matrix", str(mtx), "--precond", "ilu0"],
                         check=True, capture_output=True, text=True).stdout
    assert "Converged" in out
    assert nsksp.read_matrix_market(mtx).shape == (64, 64)
