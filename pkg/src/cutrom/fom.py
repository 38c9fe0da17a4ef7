"""Full-order solves on the active dof block and algebraic residuals."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .assembly import SystemPair
from .geometry import ParameterPoint


class FomError(RuntimeError):
    pass


@dataclass
class FomSolution:
    """Full-order solution vector (zero at inactive dofs) and its solve time."""

    u: np.ndarray
    mu: ParameterPoint
    solve_time: float


def solve_fom(sys: SystemPair) -> FomSolution:
    """Dense Cholesky solve of A restricted to the active dofs.

    One step of iterative refinement keeps the active residual at the
    round-off level required by the solver contract.  Inactive dofs are
    zero-filled.
    """
    act = sys.active_dofs
    if act.size == 0:
        raise FomError("empty active dof set")
    t0 = time.perf_counter()
    a_act = sys.A[act][:, act].toarray()
    f_act = sys.f[act]
    try:
        factor = sla.cho_factor(a_act, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FomError(f"non-positive pivot in Cholesky at mu={sys.geom.mu}: {exc}") from exc
    x = sla.cho_solve(factor, f_act, check_finite=False)
    x = x + sla.cho_solve(factor, f_act - a_act @ x, check_finite=False)
    dt = time.perf_counter() - t0
    u = np.zeros(sys.f.shape[0])
    u[act] = x
    return FomSolution(u=u, mu=sys.geom.mu, solve_time=dt)


def residual(sys: SystemPair, u: np.ndarray) -> np.ndarray:
    """Algebraic residual f - A u over all background dofs."""
    if u.shape[0] != sys.f.shape[0]:
        raise FomError("dimension mismatch between system and vector")
    return sys.f - sys.A @ u
