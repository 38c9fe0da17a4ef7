import numpy as np
import pytest

from cutrom.assembly import assemble_system
from cutrom.fom import FomError, residual, solve_fom
from cutrom.geometry import ParameterPoint, build_cut_geometry


def test_patch_solution_matches_interpolant(default_mesh, patch_phys):
    for mu in (ParameterPoint(1.0, 1.0), ParameterPoint(1.15, 1.05)):
        geom = build_cut_geometry(default_mesh, mu)
        sys_ = assemble_system(geom, patch_phys)
        sol = solve_fom(sys_)
        verts = default_mesh.vertices
        exact = 1.0 + 2.0 * verts[:, 0] + 3.0 * verts[:, 1]
        act = sys_.active_dofs
        assert np.abs(sol.u[act] - exact[act]).max() <= 1e-10


def test_solve_deterministic(default_mesh, default_phys):
    geom = build_cut_geometry(default_mesh, ParameterPoint(1.045, 1.16))
    sys_ = assemble_system(geom, default_phys)
    u1 = solve_fom(sys_).u
    u2 = solve_fom(sys_).u
    assert np.array_equal(u1, u2)


def test_active_residual_contract(default_mesh, default_phys):
    geom = build_cut_geometry(default_mesh, ParameterPoint(1.19, 1.02))
    sys_ = assemble_system(geom, default_phys)
    sol = solve_fom(sys_)
    r = residual(sys_, sol.u)
    assert np.linalg.norm(r[sys_.active_dofs]) <= 1e-10 * np.linalg.norm(sys_.f)
    inact = np.setdiff1d(np.arange(default_mesh.n_vertices), sys_.active_dofs)
    assert np.abs(sol.u[inact]).max(initial=0.0) == 0.0


def test_residual_of_zero_is_load(default_mesh, default_phys):
    geom = build_cut_geometry(default_mesh, ParameterPoint(1.0, 1.0))
    sys_ = assemble_system(geom, default_phys)
    assert np.array_equal(residual(sys_, np.zeros_like(sys_.f)), sys_.f)


def test_residual_vanishes_outside_active_for_any_vector(default_mesh, default_phys, rng):
    geom = build_cut_geometry(default_mesh, ParameterPoint(1.11, 1.07))
    sys_ = assemble_system(geom, default_phys)
    u = rng.standard_normal(sys_.f.shape[0])
    r = residual(sys_, u)
    inact = np.setdiff1d(np.arange(default_mesh.n_vertices), sys_.active_dofs)
    assert np.abs(r[inact]).max(initial=0.0) == 0.0


def test_dimension_mismatch(default_mesh, default_phys):
    geom = build_cut_geometry(default_mesh, ParameterPoint(1.0, 1.0))
    sys_ = assemble_system(geom, default_phys)
    with pytest.raises(FomError):
        residual(sys_, np.zeros(3))
