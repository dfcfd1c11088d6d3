"""Curvilinear hexahedral meshes for extruded fiber and box geometries.

The fiber cross-section is an O-grid: a center square of half-width
r_core / 2, four transfinite patches filling the rest of the core disk, and
four polar patches for the cladding annulus.  Patches are analytic maps from
[0, 1]^2; each is optionally subdivided into transverse cells and then
extruded along z, giving 9 * s^2 elements per layer.  Element geometry is a
tensor-product Lagrange map of order ``geom_order`` sampled from the analytic
maps, so circle nodes are exact.

Topology is derived from corner-vertex matching: interior faces carry one of
the 8 quad orientation codes (see :func:`dpgfiber.basis.orient_map_2d`)
relating each element's face frame to the owner's, and element edges carry a
flip flag against the global low-to-high vertex direction.

The construction descriptor (patch maps plus z grid) is stored on the mesh so
``refine_z`` and ``refine_uniform`` resample the exact geometry instead of
subdividing the polynomial one.
"""

from dataclasses import dataclass, field

import numpy as np

# local face id f: frozen axis f // 2, side f % 2; face axes = the other two
# axes in increasing order (matches basis.FACE_AXES).
_FACE_CORNERS = {}
for _f in range(6):
    _ax, _sd = _f // 2, _f % 2
    _a1, _a2 = [d for d in range(3) if d != _ax]
    _lst = []
    for _a, _b in ((0, 0), (1, 0), (0, 1), (1, 1)):
        _idx = [0, 0, 0]
        _idx[_ax] = _sd
        _idx[_a1] = _a
        _idx[_a2] = _b
        _lst.append(((_idx[0] * 2) + _idx[1]) * 2 + _idx[2])
    _FACE_CORNERS[_f] = _lst

# local edge id 4*axis + 2*s1 + s2, running along `axis`, at sides (s1, s2)
# of the other two axes in increasing order.
_EDGE_CORNERS = {}
for _d in range(3):
    _o1, _o2 = [k for k in range(3) if k != _d]
    for _s1 in (0, 1):
        for _s2 in (0, 1):
            _i0 = [0, 0, 0]
            _i0[_o1], _i0[_o2] = _s1, _s2
            _i1 = list(_i0)
            _i0[_d], _i1[_d] = 0, 1
            _EDGE_CORNERS[4 * _d + 2 * _s1 + _s2] = (
                ((_i0[0] * 2) + _i0[1]) * 2 + _i0[2],
                ((_i1[0] * 2) + _i1[1]) * 2 + _i1[2],
            )


def edge_local_id(axis: int, s1: int, s2: int) -> int:
    return 4 * axis + 2 * s1 + s2


def lagrange_tab(nodes: np.ndarray, x: np.ndarray):
    """Values and derivatives of the Lagrange basis on ``nodes`` at ``x``."""
    n = len(nodes)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.vander(nodes, n, increasing=True)
    C = np.linalg.solve(V, np.eye(n))  # C[k, i]: monomial coeffs of L_i
    Vx = np.vander(xa, n, increasing=True)
    Dx = np.zeros((len(xa), n))
    for k in range(1, n):
        Dx[:, k] = k * xa ** (k - 1)
    return (Vx @ C).T, (Dx @ C).T


@dataclass
class GeometryMap:
    """Tensor Lagrange map of one element from its (g+1)^3 node grid."""

    nodes: np.ndarray  # (g+1, g+1, g+1, 3), x slowest ordering

    @property
    def order(self) -> int:
        return self.nodes.shape[0] - 1

    def eval(self, pts1d):
        """Map and Jacobian on a tensor grid of reference points.

        Returns (X, J, detJ) with X (n0, n1, n2, 3), J (n0, n1, n2, 3, 3)
        where J[..., i, d] = d x_i / d xi_d, and detJ (n0, n1, n2).
        """
        params = np.linspace(0.0, 1.0, self.order + 1)
        tabs = [lagrange_tab(params, np.asarray(p, dtype=float)) for p in pts1d]
        V = [t[0] for t in tabs]
        D = [t[1] for t in tabs]
        X = np.einsum("abci,ax,by,cz->xyzi", self.nodes, V[0], V[1], V[2])
        J = np.empty(X.shape[:3] + (3, 3))
        J[..., 0] = np.einsum("abci,ax,by,cz->xyzi", self.nodes, D[0], V[1], V[2])
        J[..., 1] = np.einsum("abci,ax,by,cz->xyzi", self.nodes, V[0], D[1], V[2])
        J[..., 2] = np.einsum("abci,ax,by,cz->xyzi", self.nodes, V[0], V[1], D[2])
        return X, J, np.linalg.det(J)

    def eval_points(self, xi: np.ndarray):
        """Map and Jacobian at arbitrary reference points (n, 3)."""
        xi = np.atleast_2d(xi)
        params = np.linspace(0.0, 1.0, self.order + 1)
        V, D = [], []
        for d in range(3):
            v, der = lagrange_tab(params, xi[:, d])
            V.append(v)
            D.append(der)
        X = np.einsum("abci,ag,bg,cg->gi", self.nodes, V[0], V[1], V[2])
        J = np.empty((len(xi), 3, 3))
        J[:, :, 0] = np.einsum("abci,ag,bg,cg->gi", self.nodes, D[0], V[1], V[2])
        J[:, :, 1] = np.einsum("abci,ag,bg,cg->gi", self.nodes, V[0], D[1], V[2])
        J[:, :, 2] = np.einsum("abci,ag,bg,cg->gi", self.nodes, V[0], V[1], D[2])
        return X, J

    def invert(self, x: np.ndarray, xi0=None, tol=1e-12, maxit=50):
        """Newton inversion; returns (xi, converged)."""
        xi = np.full(3, 0.5) if xi0 is None else np.array(xi0, dtype=float)
        for _ in range(maxit):
            X, J = self.eval_points(xi[None, :])
            r = X[0] - x
            if np.max(np.abs(r)) < tol:
                return xi, True
            try:
                dxi = np.linalg.solve(J[0], r)
            except np.linalg.LinAlgError:
                return xi, False
            xi = np.clip(xi - dxi, -0.25, 1.25)
        X, _ = self.eval_points(xi[None, :])
        return xi, bool(np.max(np.abs(X[0] - x)) < 1e-9)


@dataclass
class CellMap:
    """Analytic map of one hex cell: a 2D patch window extruded in z."""

    patch: callable  # (u, v) -> (x, y) arrays
    u0: float
    u1: float
    v0: float
    v1: float
    z0: float
    z1: float

    def __call__(self, xi, eta, zeta):
        u = self.u0 + (self.u1 - self.u0) * np.asarray(xi, dtype=float)
        v = self.v0 + (self.v1 - self.v0) * np.asarray(eta, dtype=float)
        x, y = self.patch(u, v)
        z = self.z0 + (self.z1 - self.z0) * np.asarray(zeta, dtype=float)
        return x, y, z


@dataclass
class HexMesh:
    vertices: np.ndarray            # (nv, 3)
    elements: np.ndarray            # (ne, 8) corner ids, ((ix*2)+iy)*2+iz
    geom_nodes: np.ndarray          # (ne, g+1, g+1, g+1, 3)
    zone: list                      # per element: "core" | "clad"
    layer: np.ndarray               # (ne,) z-layer index
    elem_faces: np.ndarray          # (ne, 6, 2): global face id, orient code
    elem_edges: np.ndarray          # (ne, 12, 2): global edge id, flip flag
    face_elems: list                # per face: [(elem, local_face), ...]
    z_grid: np.ndarray              # layer interface coordinates
    descriptor: dict = field(default_factory=dict)

    @property
    def n_elems(self) -> int:
        return len(self.elements)

    @property
    def n_faces(self) -> int:
        return len(self.face_elems)

    @property
    def n_edges(self) -> int:
        return int(self.elem_edges[:, :, 0].max()) + 1

    @property
    def geom_order(self) -> int:
        return self.geom_nodes.shape[1] - 1

    def geometry(self, e: int) -> GeometryMap:
        return GeometryMap(self.geom_nodes[e])

    def boundary_faces(self):
        return [f for f, els in enumerate(self.face_elems) if len(els) == 1]

    def face_is_boundary(self, f: int) -> bool:
        return len(self.face_elems[f]) == 1

    def face_center(self, f: int) -> np.ndarray:
        e, lf = self.face_elems[f][0]
        a, b = 0.5, 0.5
        from .basis import face_points_3d

        pts = face_points_3d(lf, [a], [b])
        X, _ = self.geometry(e).eval_points(pts)
        return X[0]

    def element_containing(self, x: np.ndarray, tol=1e-9):
        """Locate a physical point: returns (elem, xi) or (None, None)."""
        x = np.asarray(x, dtype=float)
        for e in range(self.n_elems):
            nodes = self.geom_nodes[e].reshape(-1, 3)
            span = nodes.max(axis=0) - nodes.min(axis=0) + 1e-12
            lo = nodes.min(axis=0) - 0.35 * span
            hi = nodes.max(axis=0) + 0.35 * span
            if np.any(x < lo) or np.any(x > hi):
                continue
            xi, ok = self.geometry(e).invert(x)
            if ok and np.all(xi > -tol) and np.all(xi < 1 + tol):
                return e, np.clip(xi, 0.0, 1.0)
        return None, None

    def write_text(self, path):
        with open(path, "w") as fh:
            fh.write(f"hexmesh {self.n_elems} elements {len(self.vertices)} "
                     f"vertices geom_order {self.geom_order}\n")
            for v in self.vertices:
                fh.write("v {:.15g} {:.15g} {:.15g}\n".format(*v))
            for e in range(self.n_elems):
                ids = " ".join(str(i) for i in self.elements[e])
                fh.write(f"e {ids} zone {self.zone[e]} layer {self.layer[e]}\n")


def _orient_code_from_corners(owner_pos, corners_by_ab):
    """Orientation code of a face given owner-frame positions of its corners.

    owner_pos: dict vertex -> (a_g, b_g); corners_by_ab: dict (a_l, b_l) ->
    vertex.  Returns the code of the local -> owner map.
    """
    g00 = owner_pos[corners_by_ab[(0, 0)]]
    g10 = owner_pos[corners_by_ab[(1, 0)]]
    if g10[0] != g00[0]:
        swap = False
        fa = g00[0] == 1
        fb = g00[1] == 1
    else:
        swap = True
        fa = g00[1] == 1
        fb = g00[0] == 1
    return 4 * int(swap) + 2 * int(fb) + int(fa)


def _build_from_cells(cell_maps, zones, layers, geom_order, z_grid, descriptor):
    ne = len(cell_maps)
    g1 = geom_order + 1
    params = np.linspace(0.0, 1.0, g1)
    PU, PV, PW = np.meshgrid(params, params, params, indexing="ij")

    corner_xyz = np.empty((ne, 8, 3))
    geom_nodes = np.empty((ne, g1, g1, g1, 3))
    c01 = np.array([0.0, 1.0])
    CU, CV, CW = np.meshgrid(c01, c01, c01, indexing="ij")
    for e, cm in enumerate(cell_maps):
        x, y, z = cm(PU, PV, PW)
        geom_nodes[e, ..., 0] = x
        geom_nodes[e, ..., 1] = y
        geom_nodes[e, ..., 2] = z
        cx, cy, cz = cm(CU, CV, CW)
        corner_xyz[e] = np.stack([cx.ravel(), cy.ravel(), cz.ravel()], axis=1)

    # deduplicate corner vertices with a rounding key
    scale = max(np.abs(corner_xyz).max(), 1.0)
    vid = {}
    verts = []
    elements = np.empty((ne, 8), dtype=np.int64)
    for e in range(ne):
        for c in range(8):
            key = tuple(np.round(corner_xyz[e, c] / (1e-9 * scale)).astype(
                np.int64))
            if key not in vid:
                vid[key] = len(verts)
                verts.append(corner_xyz[e, c])
            elements[e, c] = vid[key]

    elem_faces = np.empty((ne, 6, 2), dtype=np.int64)
    face_elems = []
    face_owner_pos = []
    face_key = {}
    for e in range(ne):
        for lf in range(6):
            vs = [elements[e, c] for c in _FACE_CORNERS[lf]]
            ab = [(0, 0), (1, 0), (0, 1), (1, 1)]
            key = frozenset(vs)
            if key not in face_key:
                fid = len(face_elems)
                face_key[key] = fid
                face_elems.append([(e, lf)])
                face_owner_pos.append({v: p for v, p in zip(vs, ab)})
                elem_faces[e, lf] = (fid, 0)
            else:
                fid = face_key[key]
                face_elems[fid].append((e, lf))
                code = _orient_code_from_corners(
                    face_owner_pos[fid], {p: v for v, p in zip(vs, ab)})
                elem_faces[e, lf] = (fid, code)

    elem_edges = np.empty((ne, 12, 2), dtype=np.int64)
    edge_key = {}
    for e in range(ne):
        for le in range(12):
            c0, c1 = _EDGE_CORNERS[le]
            v0, v1 = elements[e, c0], elements[e, c1]
            key = (min(v0, v1), max(v0, v1))
            if key not in edge_key:
                edge_key[key] = len(edge_key)
            elem_edges[e, le] = (edge_key[key], int(v0 > v1))

    return HexMesh(
        vertices=np.asarray(verts),
        elements=elements,
        geom_nodes=geom_nodes,
        zone=list(zones),
        layer=np.asarray(layers, dtype=np.int64),
        elem_faces=elem_faces,
        elem_edges=elem_edges,
        face_elems=face_elems,
        z_grid=np.asarray(z_grid, dtype=float),
        descriptor=descriptor,
    )


# ---------------------------------------------------------------------------
# Fiber cross-section patches
# ---------------------------------------------------------------------------

def _fiber_patches(r_core: float, r_clad: float):
    s = 0.5 * r_core
    patches = []

    def square(u, v):
        return -s + 2 * s * u, -s + 2 * s * v

    patches.append(("core", square))

    th0 = (-0.25 * np.pi, 0.25 * np.pi, 0.75 * np.pi, 1.25 * np.pi)
    inner_start = ((s, -s), (s, s), (-s, s), (-s, -s))
    inner_step = ((0.0, 2 * s), (-2 * s, 0.0), (0.0, -2 * s), (2 * s, 0.0))
    for t0, (x0, y0), (dx, dy) in zip(th0, inner_start, inner_step):
        def ring(u, v, t0=t0, x0=x0, y0=y0, dx=dx, dy=dy):
            th = t0 + 0.5 * np.pi * v
            px = x0 + dx * v
            py = y0 + dy * v
            qx = r_core * np.cos(th)
            qy = r_core * np.sin(th)
            return (1 - u) * px + u * qx, (1 - u) * py + u * qy

        patches.append(("core", ring))

    for t0 in th0:
        def annulus(u, v, t0=t0):
            th = t0 + 0.5 * np.pi * v
            r = r_core + (r_clad - r_core) * np.asarray(u, dtype=float)
            return r * np.cos(th), r * np.sin(th)

        patches.append(("clad", annulus))
    return patches


def _graded_breakpoints(n: int, a: float) -> np.ndarray:
    """n+1 breakpoints on [0, 1], packed toward 0 for a > 0."""
    u = np.linspace(0.0, 1.0, n + 1)
    if a > 0.0:
        u = np.expm1(a * u) / np.expm1(a)
    return u


def build_fiber_mesh(r_core: float, r_clad: float, z_grid, geom_order: int = 2,
                     transverse_subdiv: int = 1,
                     radial_grading: float = 0.0,
                     clad_radial_cells: int = None) -> HexMesh:
    """Extruded O-grid fiber mesh.

    z_grid is the sequence of layer interface coordinates.  The cladding
    annulus is split into clad_radial_cells radial cells (default: the
    transverse subdivision count); a positive radial_grading packs their
    breakpoints exponentially toward the core, which helps when the guided
    mode decays fast in the cladding.  Each cell keeps a radially linear
    map, so grading never bends the element geometry.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    nlay = len(z_grid) - 1
    sdiv = transverse_subdiv
    nr_clad = clad_radial_cells if clad_radial_cells is not None else sdiv
    cell_maps, zones, layers = [], [], []
    for zone, patch in _fiber_patches(r_core, r_clad):
        if zone == "clad":
            ubk = _graded_breakpoints(nr_clad, radial_grading)
        else:
            ubk = np.linspace(0.0, 1.0, sdiv + 1)
        vbk = np.linspace(0.0, 1.0, sdiv + 1)
        for i in range(len(ubk) - 1):
            for j in range(sdiv):
                for k in range(nlay):
                    cell_maps.append(CellMap(
                        patch, ubk[i], ubk[i + 1],
                        vbk[j], vbk[j + 1], z_grid[k], z_grid[k + 1]))
                    zones.append(zone)
                    layers.append(k)
    desc = {"kind": "fiber", "r_core": r_core, "r_clad": r_clad,
            "z_grid": z_grid, "geom_order": geom_order,
            "transverse_subdiv": sdiv, "radial_grading": radial_grading,
            "clad_radial_cells": nr_clad}
    return _build_from_cells(cell_maps, zones, layers, geom_order, z_grid, desc)


def build_box_mesh(lengths, shape, geom_order: int = 1, origin=(0.0, 0.0, 0.0),
                   z_grid=None) -> HexMesh:
    """Structured box mesh on origin + [0,Lx]x[0,Ly]x[0,Lz]."""
    Lx, Ly, Lz = lengths
    nx, ny, nz = shape
    ox, oy, oz = origin
    xg = ox + Lx * np.arange(nx + 1) / nx
    yg = oy + Ly * np.arange(ny + 1) / ny
    zg = np.asarray(z_grid, dtype=float) if z_grid is not None \
        else oz + Lz * np.arange(nz + 1) / nz
    nz = len(zg) - 1
    cell_maps, zones, layers = [], [], []
    for i in range(nx):
        for j in range(ny):
            def rect(u, v, i=i, j=j):
                return (xg[i] + (xg[i + 1] - xg[i]) * u,
                        yg[j] + (yg[j + 1] - yg[j]) * v)

            for k in range(nz):
                cell_maps.append(CellMap(rect, 0, 1, 0, 1, zg[k], zg[k + 1]))
                zones.append("core")
                layers.append(k)
    desc = {"kind": "box", "lengths": (Lx, Ly, Lz), "shape": (nx, ny, nz),
            "origin": origin, "geom_order": geom_order, "z_grid": zg}
    return _build_from_cells(cell_maps, zones, layers, geom_order, zg, desc)


def _bisect(zg):
    zg = np.asarray(zg, dtype=float)
    out = np.empty(2 * len(zg) - 1)
    out[0::2] = zg
    out[1::2] = 0.5 * (zg[:-1] + zg[1:])
    return out


def refine_z(mesh: HexMesh) -> HexMesh:
    """Split every z layer in two, resampling the exact geometry."""
    d = mesh.descriptor
    zg = _bisect(d["z_grid"])
    if d["kind"] == "fiber":
        return build_fiber_mesh(d["r_core"], d["r_clad"], zg,
                                d["geom_order"], d["transverse_subdiv"],
                                d.get("radial_grading", 0.0),
                                d.get("clad_radial_cells"))
    nx, ny, _ = d["shape"]
    return build_box_mesh(d["lengths"], (nx, ny, len(zg) - 1),
                          d["geom_order"], d["origin"], z_grid=zg)


def refine_uniform(mesh: HexMesh) -> HexMesh:
    """Halve the mesh size in all three directions."""
    d = mesh.descriptor
    zg = _bisect(d["z_grid"])
    if d["kind"] == "fiber":
        nr = d.get("clad_radial_cells", d["transverse_subdiv"])
        return build_fiber_mesh(d["r_core"], d["r_clad"], zg,
                                d["geom_order"], 2 * d["transverse_subdiv"],
                                d.get("radial_grading", 0.0), 2 * nr)
    nx, ny, _ = d["shape"]
    return build_box_mesh(d["lengths"], (2 * nx, 2 * ny, len(zg) - 1),
                          d["geom_order"], d["origin"], z_grid=zg)
