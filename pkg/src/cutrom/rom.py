"""Reduced operators precomputed offline and the sampled online solve."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import deim as deim_mod
from .assembly import PhysicsParams, evaluate_entries
from .deim import DeimOperator, UnionPattern
from .geometry import BackgroundMesh, CutGeometry, ParameterPoint, build_cut_geometry
from .pod import PodBasis


class RomError(RuntimeError):
    pass


@dataclass
class RomOffline:
    """Everything the online stage needs: reduced blocks per interpolation
    basis element, the sampling plan, and the assembly context."""

    pod: PodBasis
    deim_a: DeimOperator
    deim_f: DeimOperator
    pattern: UnionPattern
    blocks_a: np.ndarray  # (l_A, n_max, n_max)
    blocks_f: np.ndarray  # (l_f, n_max)
    matrix_sample_entries: np.ndarray  # (l_A, 2) dof pairs
    vector_sample_entries: np.ndarray  # (l_f,) dof indices
    mesh: BackgroundMesh
    phys: PhysicsParams


@dataclass
class RomSolution:
    """Reduced coefficients, the lifted full-order vector, and online time
    covering sampling, coefficients, reduced solve and lift only."""

    u_hat: np.ndarray
    u_lifted: np.ndarray
    n: int
    online_time: float


def build_rom_offline(pod: PodBasis, deim_a: DeimOperator, deim_f: DeimOperator,
                      mesh: BackgroundMesh, phys: PhysicsParams) -> RomOffline:
    """Project every interpolation basis matrix/vector onto the mode basis.

    Matrix basis elements are symmetrized before projection, matching the
    symmetrization applied by ``deim.reconstruct``.
    """
    if deim_a.pattern is None:
        raise RomError("matrix operator must carry the union pattern")
    pattern = deim_a.pattern
    v = pod.V
    n_max = pod.n_max
    l_a = deim_a.l
    l_f = deim_f.l
    blocks_a = np.empty((l_a, n_max, n_max))
    for j in range(l_a):
        basis_mat = pattern.matrix_from_values(deim_a.U[:, j])
        basis_mat = ((basis_mat + basis_mat.T) * 0.5).tocsr()
        blocks_a[j] = v.T @ (basis_mat @ v)
    blocks_f = np.empty((l_f, n_max))
    for j in range(l_f):
        blocks_f[j] = v.T @ deim_f.U[:, j]
    assert blocks_a.shape[0] == l_a and blocks_f.shape[0] == l_f
    matrix_entries = np.column_stack(
        [pattern.rows[deim_a.indices], pattern.cols[deim_a.indices]]
    )
    return RomOffline(
        pod=pod,
        deim_a=deim_a,
        deim_f=deim_f,
        pattern=pattern,
        blocks_a=blocks_a,
        blocks_f=blocks_f,
        matrix_sample_entries=matrix_entries,
        vector_sample_entries=deim_f.indices.copy(),
        mesh=mesh,
        phys=phys,
    )


def sample_entries(offline: RomOffline, geom: CutGeometry):
    """Evaluate the planned stiffness/load entries for one parameter."""
    return evaluate_entries(
        geom, offline.phys, offline.matrix_sample_entries, offline.vector_sample_entries
    )


def rom_online_solve(offline: RomOffline, mu: ParameterPoint, n: int,
                     geom: CutGeometry | None = None) -> RomSolution:
    """Timed online stage: (i) sample entries, (ii) interpolation
    coefficients, (iii) dense n x n solve, (iv) lift.

    The reduced operator for n modes is the leading sub-block of the
    precomputed n_max blocks, valid because mode order is fixed.
    """
    if not (1 <= n <= offline.pod.n_max):
        raise RomError(f"mode count {n} outside [1, {offline.pod.n_max}]")
    if geom is None:
        geom = build_cut_geometry(offline.mesh, mu)
    t0 = time.perf_counter()
    a_samp, f_samp = sample_entries(offline, geom)
    c_a = deim_mod.deim_coefficients(offline.deim_a, a_samp)
    c_f = deim_mod.deim_coefficients(offline.deim_f, f_samp)
    a_hat = np.tensordot(c_a, offline.blocks_a[:, :n, :n], axes=(0, 0))
    f_hat = c_f @ offline.blocks_f[:, :n]
    try:
        u_hat = np.linalg.solve(a_hat, f_hat)
    except np.linalg.LinAlgError as exc:
        raise RomError(f"singular reduced system at mu={mu}, n={n}: {exc}") from exc
    u_lifted = offline.pod.V[:, :n] @ u_hat
    dt = time.perf_counter() - t0
    return RomSolution(u_hat=u_hat, u_lifted=u_lifted, n=n, online_time=dt)
