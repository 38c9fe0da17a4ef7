#!/usr/bin/env python3
"""Benchmark the jit kernels against the pure-numpy fallback.

Runs both variants of every hot kernel on identical inputs, checks that they
agree, and reports per-call times.  The jit path needs numba; without it only
the numpy path is timed.

Usage: python benchmarks/benchmark_kernels.py [--reps 200]
"""

import argparse
import time

import numpy as np

from cutrom import _kernels as k
from cutrom.assembly import PhysicsParams, assemble_system, evaluate_entries
from cutrom.geometry import ParameterPoint, build_background_mesh, build_cut_geometry, level_set

BOX = ((-1.2, 1.2), (-1.2, 1.2))


def timeit(fn, reps):
    fn()  # warm (jit compile, caches)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=200)
    args = parser.parse_args()

    mesh = build_background_mesh(BOX, 0.125)
    mu = ParameterPoint(1.07, 1.13)
    phys = PhysicsParams()
    geom = build_cut_geometry(mesh, mu)

    phi_v = level_set(mu, mesh.vertices[:, 0], mesh.vertices[:, 1])
    tri_phi = phi_v[mesh.triangles]
    cut = geom.cut_elements
    cut_args = (
        np.ascontiguousarray(mesh.vertices[mesh.triangles[cut]]),
        np.ascontiguousarray(tri_phi[cut]),
        np.ascontiguousarray(mesh.bvec[cut]),
        1e-14 * mesh.h, k.REF_XI, k.REF_ETA, k.GAUSS_T,
    )
    act = geom.active_elements
    vol_args = (geom.vol_pts, geom.vol_wts, mesh.v0[act], mesh.inv_j[act],
                mesh.bvec[act], 20.0)
    bnd_args = (geom.seg_pts, geom.seg_wts, geom.seg_normal, mesh.v0[cut],
                mesh.inv_j[cut], mesh.bvec[cut], 10.0 / mesh.h, 0.5, 0.0, 0.0, 1.0)

    rows = []
    kernels = [
        ("cut_rules", k._cut_rules_np, getattr(k, "_cut_rules_nb", None), cut_args),
        ("volume_contribs", k._volume_contribs_np, getattr(k, "_volume_contribs_nb", None), vol_args),
        ("boundary_contribs", k._boundary_contribs_np, getattr(k, "_boundary_contribs_nb", None), bnd_args),
    ]
    for name, np_fn, nb_fn, kargs in kernels:
        t_np = timeit(lambda: np_fn(*kargs), args.reps)
        if nb_fn is not None:
            t_nb = timeit(lambda: nb_fn(*kargs), args.reps)
            ok = agree(np_fn(*kargs), nb_fn(*kargs))
            rows.append((name, t_np, t_nb, t_np / t_nb, ok))
        else:
            rows.append((name, t_np, None, None, True))

    print(f"{'kernel':24s} {'numpy [us]':>12s} {'numba [us]':>12s} {'speedup':>9s} {'equal':>6s}")
    for name, t_np, t_nb, sp, ok in rows:
        nb_txt = f"{1e6 * t_nb:12.1f}" if t_nb is not None else f"{'n/a':>12s}"
        sp_txt = f"{sp:9.1f}" if sp is not None else f"{'n/a':>9s}"
        print(f"{name:24s} {1e6 * t_np:12.1f} {nb_txt} {sp_txt} {str(ok):>6s}")

    # end-to-end under the active backend
    t_asm = timeit(lambda: assemble_system(geom, phys), args.reps)
    coo = assemble_system(geom, phys).A.tocoo()
    ent = np.column_stack([coo.row[:200], coo.col[:200]]).astype(np.int64)
    vent = np.empty(0, dtype=np.int64)
    t_eval = timeit(lambda: evaluate_entries(geom, phys, ent, vent), args.reps)
    print(f"\nactive backend: {k.BACKEND}")
    print(f"assemble_system         {1e6 * t_asm:12.1f} us")
    print(f"evaluate_entries (200)  {1e6 * t_eval:12.1f} us   ({t_asm / t_eval:.1f}x faster)")


if __name__ == "__main__":
    main()
