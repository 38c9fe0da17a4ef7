"""Background mesh, parametric level set, element classification and cut quadrature.

The computational setup is a fixed square background mesh that never changes
with the parameter.  For each parameter the ellipse level set classifies every
triangle as inside / cut / outside, and the cut triangles receive sub-triangle
volume rules for the region where the linear interpolant of the level set is
non-positive, plus a 2-point Gauss rule on the straight interface segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

INSIDE = 0
CUT = 1
OUTSIDE = 2

# interface segments shorter than DEGEN_FACTOR * h are skipped (zero weights)
DEGEN_FACTOR = 1e-14


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterPoint:
    """Ellipse shape parameter: semi-axes are sqrt(r) and sqrt(theta)."""

    r: float
    theta: float

    def __post_init__(self):
        if not (self.r > 0.0 and self.theta > 0.0):
            raise GeometryError(f"parameter components must be positive, got {(self.r, self.theta)}")

    def as_array(self):
        return np.array([self.r, self.theta])


def level_set(mu: ParameterPoint, x, y):
    """Signed level-set value x^2/r + y^2/theta - 1 (negative inside the ellipse)."""
    return np.asarray(x) ** 2 / mu.r + np.asarray(y) ** 2 / mu.theta - 1.0


class BackgroundMesh:
    """Uniform criss triangulation of a square box.

    Each grid square is split along its bottom-left to top-right diagonal.
    ``h`` is the grid spacing (the mesh-size parameter entering the lambda/h
    Nitsche weight), all triangles are counter-clockwise.
    """

    def __init__(self, vertices, triangles, nx, box):
        self.vertices = vertices
        self.triangles = triangles
        self.nx = nx
        self.box = box
        self.h = (box[1] - box[0]) / nx
        self.n_vertices = vertices.shape[0]
        self.n_triangles = triangles.shape[0]
        self._build_precomputed()
        self._build_facets()
        self._vertex_tri = None
        self._vertex_facet = None

    def _build_precomputed(self):
        verts = self.vertices
        tris = self.triangles
        p0 = verts[tris[:, 0]]
        p1 = verts[tris[:, 1]]
        p2 = verts[tris[:, 2]]
        e1 = p1 - p0
        e2 = p2 - p0
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(det <= 0):
            raise GeometryError("triangle orientation must be counter-clockwise")
        self.tri_area = 0.5 * det
        inv_j = np.empty((self.n_triangles, 2, 2))
        inv_j[:, 0, 0] = e2[:, 1] / det
        inv_j[:, 0, 1] = -e2[:, 0] / det
        inv_j[:, 1, 0] = -e1[:, 1] / det
        inv_j[:, 1, 1] = e1[:, 0] / det
        self.inv_j = inv_j
        bvec = np.empty((self.n_triangles, 3, 2))
        bvec[:, 1, :] = inv_j[:, 0, :]
        bvec[:, 2, :] = inv_j[:, 1, :]
        bvec[:, 0, :] = -(bvec[:, 1, :] + bvec[:, 2, :])
        self.bvec = bvec
        self.v0 = p0.copy()

    def _build_facets(self):
        tris = self.triangles
        nv = self.n_vertices
        edges = np.concatenate(
            [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=0
        )
        owner = np.tile(np.arange(self.n_triangles), 3)
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        code = lo.astype(np.int64) * nv + hi
        order = np.argsort(code, kind="stable")
        code_s = code[order]
        owner_s = owner[order]
        uniq, start = np.unique(code_s, return_index=True)
        n_f = uniq.shape[0]
        facets = np.empty((n_f, 2), dtype=np.int64)
        facets[:, 0] = uniq // nv
        facets[:, 1] = uniq % nv
        facet_tris = np.full((n_f, 2), -1, dtype=np.int64)
        counts = np.diff(np.append(start, code_s.shape[0]))
        if np.any(counts > 2):
            raise GeometryError("facet shared by more than two triangles")
        facet_tris[:, 0] = owner_s[start]
        two = counts == 2
        facet_tris[two, 1] = owner_s[start[two] + 1]
        # adjacent triangles in ascending index order
        swap = two & (facet_tris[:, 0] > facet_tris[:, 1])
        facet_tris[swap] = facet_tris[swap][:, ::-1]
        self.facets = facets
        self.facet_tris = facet_tris
        verts = self.vertices
        tangent = verts[facets[:, 1]] - verts[facets[:, 0]]
        length = np.sqrt(tangent[:, 0] ** 2 + tangent[:, 1] ** 2)
        normal = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / length[:, None]
        self.facet_len = length
        self.facet_normal = normal
        self._build_facet_patches()

    def _build_facet_patches(self):
        """Per interior facet: the 4 patch dofs and the normal-derivative jump
        of each patch hat function (both sides are P1, so the jump vector is
        parameter-independent)."""
        facets = self.facets
        ftris = self.facet_tris
        interior = ftris[:, 1] >= 0
        n_f = facets.shape[0]
        patch = np.full((n_f, 4), -1, dtype=np.int64)
        jump = np.zeros((n_f, 4))
        patch[:, 0] = facets[:, 0]
        patch[:, 1] = facets[:, 1]
        idx = np.flatnonzero(interior)
        for f in idx:
            ta, tb = ftris[f]
            fa, fb = facets[f]
            opp_a = [v for v in self.triangles[ta] if v != fa and v != fb][0]
            opp_b = [v for v in self.triangles[tb] if v != fa and v != fb][0]
            patch[f, 2] = opp_a
            patch[f, 3] = opp_b
            n = self.facet_normal[f]
            for slot, dof in enumerate(patch[f]):
                da = 0.0
                db = 0.0
                loc = np.flatnonzero(self.triangles[ta] == dof)
                if loc.size:
                    da = self.bvec[ta, loc[0], 0] * n[0] + self.bvec[ta, loc[0], 1] * n[1]
                loc = np.flatnonzero(self.triangles[tb] == dof)
                if loc.size:
                    db = self.bvec[tb, loc[0], 0] * n[0] + self.bvec[tb, loc[0], 1] * n[1]
                jump[f, slot] = da - db
        self.facet_patch = patch
        self.facet_jump = jump

    def vertex_tri_adjacency(self):
        """CSR-style vertex -> triangle adjacency, triangle ids ascending."""
        if self._vertex_tri is None:
            tris = self.triangles
            flat = tris.ravel()
            tri_of = np.repeat(np.arange(self.n_triangles), 3)
            order = np.lexsort((tri_of, flat))
            sorted_v = flat[order]
            indices = tri_of[order]
            indptr = np.searchsorted(sorted_v, np.arange(self.n_vertices + 1))
            self._vertex_tri = (indptr, indices)
        return self._vertex_tri

    def vertex_facet_adjacency(self):
        """Vertex -> interior facets whose 4-dof patch contains the vertex."""
        if self._vertex_facet is None:
            interior = np.flatnonzero(self.facet_tris[:, 1] >= 0)
            dofs = self.facet_patch[interior].ravel()
            fac_of = np.repeat(interior, 4)
            order = np.lexsort((fac_of, dofs))
            sorted_v = dofs[order]
            indices = fac_of[order]
            indptr = np.searchsorted(sorted_v, np.arange(self.n_vertices + 1))
            self._vertex_facet = (indptr, indices)
        return self._vertex_facet


def build_background_mesh(box, h_target: float) -> BackgroundMesh:
    """Uniform square grid with nx = ceil(width / h_target) cells per side,
    each cell split along the bottom-left to top-right diagonal."""
    (x0, x1), (y0, y1) = box
    if not (x1 > x0 and y1 > y0):
        raise GeometryError("box must be non-degenerate")
    width = x1 - x0
    if abs((y1 - y0) - width) > 1e-14 * width or abs(y0 - x0) > 1e-14 * max(1.0, abs(x0)):
        raise GeometryError("only square boxes [a1,a2]^2 are supported")
    if not h_target > 0:
        raise GeometryError("h_target must be positive")
    nx = int(np.ceil(width / h_target - 1e-12))
    xs = np.linspace(x0, x1, nx + 1)
    xg, yg = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def vid(ix, iy):
        return iy * (nx + 1) + ix

    tris = np.empty((2 * nx * nx, 3), dtype=np.int64)
    t = 0
    for iy in range(nx):
        for ix in range(nx):
            bl = vid(ix, iy)
            br = vid(ix + 1, iy)
            tr = vid(ix + 1, iy + 1)
            tl = vid(ix, iy + 1)
            tris[t] = (bl, br, tr)
            tris[t + 1] = (bl, tr, tl)
            t += 2
    return BackgroundMesh(vertices, tris, nx, (x0, x1))


@dataclass
class CutGeometry:
    """Per-parameter classification and quadrature on the background mesh.

    Volume rule arrays are aligned with ``active_elements`` (6 padded slots,
    zero-weight padding); boundary rule arrays with ``cut_elements``.
    """

    mu: ParameterPoint
    mesh: BackgroundMesh
    elem_class: np.ndarray
    active_elements: np.ndarray
    cut_elements: np.ndarray
    ghost_facets: np.ndarray
    active_dofs: np.ndarray
    vol_pts: np.ndarray
    vol_wts: np.ndarray
    seg_pts: np.ndarray
    seg_wts: np.ndarray
    seg_normal: np.ndarray
    cut_pos: np.ndarray  # triangle id -> position in cut_elements, -1 elsewhere
    active_pos: np.ndarray  # triangle id -> position in active_elements, -1 elsewhere
    ghost_mask: np.ndarray  # facet id -> ghost facet flag
    degenerate_elements: list = field(default_factory=list)

    def volume_weight_sum(self) -> float:
        return float(self.vol_wts.sum())

    def boundary_weight_sum(self) -> float:
        return float(self.seg_wts.sum())


def build_cut_geometry(mesh: BackgroundMesh, mu: ParameterPoint) -> CutGeometry:
    """Classify elements by vertex signs of the level set and build quadrature.

    A vertex with phi <= 0 counts as inside; all-inside elements carry the
    plain 3-point rule, mixed elements are cut, all-outside elements carry no
    quadrature and are excluded from the active set.
    """
    phi_v = level_set(mu, mesh.vertices[:, 0], mesh.vertices[:, 1])
    tri_phi = phi_v[mesh.triangles]
    n_neg = (tri_phi <= 0.0).sum(axis=1)
    elem_class = np.full(mesh.n_triangles, CUT, dtype=np.uint8)
    elem_class[n_neg == 3] = INSIDE
    elem_class[n_neg == 0] = OUTSIDE

    active = np.flatnonzero(elem_class != OUTSIDE)
    cut = np.flatnonzero(elem_class == CUT)

    active_pos = np.full(mesh.n_triangles, -1, dtype=np.int64)
    active_pos[active] = np.arange(active.size)
    cut_pos = np.full(mesh.n_triangles, -1, dtype=np.int64)
    cut_pos[cut] = np.arange(cut.size)

    # ghost facets: interior facets of cut elements with both neighbours active
    ft = mesh.facet_tris
    interior = ft[:, 1] >= 0
    cls0 = np.where(interior, elem_class[ft[:, 0]], OUTSIDE)
    cls1 = np.where(interior, elem_class[np.where(interior, ft[:, 1], 0)], OUTSIDE)
    ghost_mask = (
        interior
        & ((cls0 == CUT) | (cls1 == CUT))
        & (cls0 != OUTSIDE)
        & (cls1 != OUTSIDE)
    )
    ghost_facets = np.flatnonzero(ghost_mask)

    # volume rule, inside part: the mapped 3-point rule on the full triangle
    n_act = active.size
    vol_pts = np.zeros((n_act, 6, 2))
    vol_wts = np.zeros((n_act, 6))
    ins_sel = np.flatnonzero(elem_class[active] == INSIDE)
    if ins_sel.size:
        tri_ids = active[ins_sel]
        p0 = mesh.vertices[mesh.triangles[tri_ids, 0]]
        p1 = mesh.vertices[mesh.triangles[tri_ids, 1]]
        p2 = mesh.vertices[mesh.triangles[tri_ids, 2]]
        area = mesh.tri_area[tri_ids]
        for q in range(3):
            vol_pts[ins_sel, q, 0] = (
                p0[:, 0]
                + _kernels.REF_XI[q] * (p1[:, 0] - p0[:, 0])
                + _kernels.REF_ETA[q] * (p2[:, 0] - p0[:, 0])
            )
            vol_pts[ins_sel, q, 1] = (
                p0[:, 1]
                + _kernels.REF_XI[q] * (p1[:, 1] - p0[:, 1])
                + _kernels.REF_ETA[q] * (p2[:, 1] - p0[:, 1])
            )
            vol_wts[ins_sel, q] = area / 3.0
        for q in range(3, 6):
            vol_pts[ins_sel, q, 0] = p0[:, 0]
            vol_pts[ins_sel, q, 1] = p0[:, 1]

    # cut part via the backend kernel
    tri_pts_cut = mesh.vertices[mesh.triangles[cut]]
    phi_cut = tri_phi[cut]
    b_cut = mesh.bvec[cut]
    c_vol_pts, c_vol_wts, seg_pts, seg_wts, seg_nrm, degen = _kernels.cut_rules(
        np.ascontiguousarray(tri_pts_cut),
        np.ascontiguousarray(phi_cut),
        np.ascontiguousarray(b_cut),
        DEGEN_FACTOR * mesh.h,
    )
    cut_sel = active_pos[cut]
    vol_pts[cut_sel] = c_vol_pts
    vol_wts[cut_sel] = c_vol_wts

    active_dofs = np.unique(mesh.triangles[active].ravel())
    degenerate = [int(cut[i]) for i in np.flatnonzero(degen)]

    return CutGeometry(
        mu=mu,
        mesh=mesh,
        elem_class=elem_class,
        active_elements=active,
        cut_elements=cut,
        ghost_facets=ghost_facets,
        active_dofs=active_dofs,
        vol_pts=vol_pts,
        vol_wts=vol_wts,
        seg_pts=seg_pts,
        seg_wts=seg_wts,
        seg_normal=seg_nrm,
        cut_pos=cut_pos,
        active_pos=active_pos,
        ghost_mask=ghost_mask,
        degenerate_elements=degenerate,
    )
