"""Triangle meshes, facet clustering, contact sampling and collision queries."""

from __future__ import annotations

import logging
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .rotation import tangent_basis, to_matrix

log = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-14
_WELD_DECIMALS = 12


class MeshError(ValueError):
    pass


class EmptyMeshError(MeshError):
    pass


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray
    facet_normals: np.ndarray
    dropped_faces: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_arrays(cls, vertices, faces) -> "TriMesh":
        """Build a mesh from vertex and face arrays, dropping zero-area triangles.

        Normals follow counter-clockwise winding.
        """
        v = np.ascontiguousarray(vertices, dtype=float).reshape(-1, 3)
        f = np.ascontiguousarray(faces, dtype=np.int64).reshape(-1, 3)
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise MeshError("face index out of range")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinates")
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        area2 = np.linalg.norm(cross, axis=1)
        keep = area2 > 2.0 * DEGENERATE_AREA
        dropped = int(np.count_nonzero(~keep))
        if dropped:
            log.warning("dropped %d degenerate triangle(s)", dropped)
        f = f[keep]
        if len(f) == 0:
            raise EmptyMeshError("mesh has no valid triangles")
        normals = cross[keep] / area2[keep, None]
        return cls(v, f, normals, dropped)

    @classmethod
    def from_triangles(cls, tris) -> "TriMesh":
        """Weld a ``(T, 3, 3)`` triangle soup into an indexed mesh."""
        tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
        if len(tris) == 0:
            raise EmptyMeshError("mesh has no triangles")
        pts = tris.reshape(-1, 3)
        key = np.round(pts, _WELD_DECIMALS) + 0.0
        uniq, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
        # keep vertices in first-appearance order so output is stable w.r.t. input
        order = np.argsort(first, kind="stable")
        remap = np.empty_like(order)
        remap[order] = np.arange(len(order))
        verts = pts[first[order]]
        faces = remap[inverse.reshape(-1)].reshape(-1, 3)
        return cls.from_arrays(verts, faces)

    def __len__(self) -> int:
        return len(self.faces)

    @property
    def triangles(self) -> np.ndarray:
        return self.vertices[self.faces]

    @property
    def areas(self) -> np.ndarray:
        t = self.triangles
        return 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    def bounds(self):
        pts = self.vertices[np.unique(self.faces)]
        return pts.min(axis=0), pts.max(axis=0)

    def transformed(self, rotation_matrix, translation) -> "TriMesh":
        r = np.asarray(rotation_matrix, dtype=float)
        v = self.vertices @ r.T + np.asarray(translation, dtype=float)
        return TriMesh(v, self.faces.copy(), self.facet_normals @ r.T, self.dropped_faces)

    def adjacency(self) -> List[List[int]]:
        """Faces sharing an edge, per face, in ascending order."""
        if "adjacency" not in self._cache:
            edge_faces = {}
            for fi, (a, b, c) in enumerate(self.faces.tolist()):
                for e in ((a, b), (b, c), (c, a)):
                    edge_faces.setdefault((min(e), max(e)), []).append(fi)
            nbrs = [set() for _ in range(len(self.faces))]
            for fs in edge_faces.values():
                for i in fs:
                    nbrs[i].update(j for j in fs if j != i)
            self._cache["adjacency"] = [sorted(s) for s in nbrs]
            self._cache["edge_faces"] = edge_faces
        return self._cache["adjacency"]


# ---------------------------------------------------------------------------
# file IO
# ---------------------------------------------------------------------------

def load_mesh(path) -> TriMesh:
    """Read an STL (ASCII or binary) or OBJ file."""
    path = Path(path)
    data = path.read_bytes()
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _parse_obj(data.decode("utf-8", errors="replace"))
    if suffix == ".stl":
        return TriMesh.from_triangles(_parse_stl(data))
    raise MeshError(f"unsupported mesh format: {path.suffix}")


def _parse_stl(data: bytes) -> np.ndarray:
    if len(data) >= 84:
        (n,) = struct.unpack_from("<I", data, 80)
        if 84 + 50 * n == len(data):
            rec = np.frombuffer(data, dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("a", "<u2")]),
                                count=n, offset=84)
            return rec["v"].astype(float)
    text = data.decode("ascii", errors="replace")
    if not text.lstrip().startswith("solid"):
        raise MeshError("not a valid STL file")
    verts = [list(map(float, line.split()[1:4])) for line in text.splitlines()
             if line.strip().startswith("vertex")]
    if len(verts) % 3:
        raise MeshError("ASCII STL vertex count is not a multiple of 3")
    return np.array(verts, dtype=float).reshape(-1, 3, 3)


def _parse_obj(text: str) -> TriMesh:
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                faces.append([idx[0], idx[k], idx[k + 1]])
    if not faces:
        raise EmptyMeshError("OBJ file has no faces")
    return TriMesh.from_arrays(np.array(verts, dtype=float), np.array(faces))


def save_stl(mesh: TriMesh, path, binary: bool = True) -> None:
    path = Path(path)
    tris = mesh.triangles
    if binary:
        rec = np.zeros(len(tris), dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("a", "<u2")]))
        rec["n"] = mesh.facet_normals
        rec["v"] = tris
        path.write_bytes(b"binary stl".ljust(80, b"\0") + struct.pack("<I", len(tris)) + rec.tobytes())
        return
    lines = ["solid mesh"]
    for n, t in zip(mesh.facet_normals, tris):
        lines.append("  facet normal {:.17g} {:.17g} {:.17g}".format(*n))
        lines.append("    outer loop")
        lines.extend("      vertex {:.17g} {:.17g} {:.17g}".format(*p) for p in t)
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append("endsolid mesh")
    path.write_text("\n".join(lines) + "\n")


def save_obj(mesh: TriMesh, path) -> None:
    lines = ["v {:.17g} {:.17g} {:.17g}".format(*p) for p in mesh.vertices]
    lines += ["f {} {} {}".format(*(f + 1)) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# primitive builders
# ---------------------------------------------------------------------------

def box_mesh(extents, center=(0.0, 0.0, 0.0)) -> TriMesh:
    hx, hy, hz = 0.5 * np.asarray(extents, dtype=float)
    v = np.array([[-hx, -hy, -hz], [hx, -hy, -hz], [hx, hy, -hz], [-hx, hy, -hz],
                  [-hx, -hy, hz], [hx, -hy, hz], [hx, hy, hz], [-hx, hy, hz]]) + np.asarray(center, dtype=float)
    f = [[0, 2, 1], [0, 3, 2],  # -z
         [4, 5, 6], [4, 6, 7],  # +z
         [0, 1, 5], [0, 5, 4],  # -y
         [2, 3, 7], [2, 7, 6],  # +y
         [0, 4, 7], [0, 7, 3],  # -x
         [1, 2, 6], [1, 6, 5]]  # +x
    return TriMesh.from_arrays(v, f)


def icosphere(radius: float = 1.0, subdivisions: int = 1, center=(0.0, 0.0, 0.0)) -> TriMesh:
    t = (1.0 + 5 ** 0.5) / 2.0
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    v = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    for _ in range(subdivisions):
        mid = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                p = v[a] + v[b]
                v.append(p / np.linalg.norm(p))
                mid[key] = len(v) - 1
            return mid[key]

        nf = []
        for a, b, c in f:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            nf += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        f = nf
    return TriMesh.from_arrays(np.array(v) * radius + np.asarray(center, dtype=float), f)


def extrude_polygon(polygon, z0: float, z1: float) -> TriMesh:
    """Closed prism from a simple counter-clockwise 2D polygon swept along z."""
    poly = np.asarray(polygon, dtype=float)
    n = len(poly)
    caps = _ear_clip(poly)
    v = np.vstack([np.c_[poly, np.full(n, z0)], np.c_[poly, np.full(n, z1)]])
    faces = [[a, c, b] for a, b, c in caps] + [[a + n, b + n, c + n] for a, b, c in caps]
    for i in range(n):
        j = (i + 1) % n
        faces += [[i, j, j + n], [i, j + n, i + n]]
    return TriMesh.from_arrays(v, faces)


def _ear_clip(poly) -> List[List[int]]:
    idx = list(range(len(poly)))
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    while len(idx) > 3:
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if cross(a, b, c) <= 1e-15:
                continue
            if any(cross(a, b, poly[m]) >= 0 and cross(b, c, poly[m]) >= 0 and cross(c, a, poly[m]) >= 0
                   for m in idx if m not in (i0, i1, i2)):
                continue
            tris.append([i0, i1, i2])
            idx.pop(k)
            break
        else:
            raise MeshError("polygon is not simple or not counter-clockwise")
    tris.append(idx)
    return tris


def merge_meshes(meshes: Sequence[TriMesh]) -> TriMesh:
    verts, faces, off = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + off)
        off += len(m.vertices)
    return TriMesh.from_arrays(np.vstack(verts), np.vstack(faces))


# ---------------------------------------------------------------------------
# clustering and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FacetCluster:
    face_indices: tuple
    mean_normal: np.ndarray
    total_area: float


@dataclass(frozen=True)
class ContactPoint:
    position: np.ndarray
    normal: np.ndarray
    face_id: int
    boundary_distance: float


def cluster_facets(mesh: TriMesh, angle_tol: float) -> List[FacetCluster]:
    """Region-grow facets over shared edges.

    Adjacent faces join when their normals are within ``angle_tol``. Seeds are
    taken in face order, so the result only depends on the face ordering.
    """
    if not 0.0 < angle_tol < np.pi / 2:
        raise ValueError("angle_tol must lie in (0, pi/2)")
    cos_tol = np.cos(angle_tol)
    adj = mesh.adjacency()
    n = mesh.facet_normals
    areas = mesh.areas
    label = np.full(len(mesh.faces), -1)
    clusters = []
    for seed in range(len(mesh.faces)):
        if label[seed] >= 0:
            continue
        label[seed] = len(clusters)
        members = [seed]
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            for g in adj[f]:
                if label[g] < 0 and np.dot(n[f], n[g]) >= cos_tol:
                    label[g] = label[seed]
                    members.append(g)
                    queue.append(g)
        members.sort()
        weighted = (n[members] * areas[members, None]).sum(axis=0)
        norm = np.linalg.norm(weighted)
        mean = weighted / norm if norm > 1e-9 * areas[members].sum() else n[seed].copy()
        clusters.append(FacetCluster(tuple(members), mean, float(areas[members].sum())))
    return clusters


def _cluster_labels(mesh: TriMesh, angle_tol: float):
    key = ("clusters", angle_tol)
    if key not in mesh._cache:
        cl = cluster_facets(mesh, angle_tol)
        labels = np.empty(len(mesh.faces), dtype=int)
        for i, c in enumerate(cl):
            labels[list(c.face_indices)] = i
        mesh._cache[key] = (cl, labels)
    return mesh._cache[key]


def cluster_boundary_edges(mesh: TriMesh, cluster: FacetCluster) -> np.ndarray:
    """Edges used by exactly one member face, as ``(E, 2, 3)`` segments."""
    counts = {}
    for fi in cluster.face_indices:
        a, b, c = mesh.faces[fi].tolist()
        for e in ((a, b), (b, c), (c, a)):
            key = (min(e), max(e))
            counts[key] = counts.get(key, 0) + 1
    edges = [k for k, c in counts.items() if c == 1]
    if not edges:
        return np.zeros((0, 2, 3))
    return mesh.vertices[np.array(edges)]


def _segment_distance(p, seg) -> np.ndarray:
    a, b = seg[:, 0], seg[:, 1]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * ab - p, axis=1)


def _barycentric_2d(p, tri):
    a, b, c = tri
    v0, v1, v2 = b - a, c - a, p - a
    d = v0[0] * v1[1] - v1[0] * v0[1]
    l1 = (v2[0] * v1[1] - v1[0] * v2[1]) / d
    l2 = (v0[0] * v2[1] - v2[0] * v0[1]) / d
    return np.array([1.0 - l1 - l2, l1, l2])


def sample_contact_points(mesh: TriMesh, cluster: FacetCluster, spacing: float,
                          min_boundary_dist: float) -> List[ContactPoint]:
    """Grid-sample a cluster in its mean-normal plane.

    The grid is centred on the cluster's projected bounding box with pitch
    ``spacing``; points closer than ``min_boundary_dist`` to the cluster
    boundary are rejected.
    """
    if spacing <= 0 or min_boundary_dist < 0:
        raise ValueError("spacing must be > 0 and min_boundary_dist >= 0")
    n = cluster.mean_normal
    u, v = tangent_basis(n)
    basis = np.stack([u, v], axis=1)
    members = [f for f in cluster.face_indices if np.dot(mesh.facet_normals[f], n) > 0]
    if not members:
        return []
    tris2 = mesh.triangles[members] @ basis
    edges2 = cluster_boundary_edges(mesh, cluster) @ basis
    pts2 = tris2.reshape(-1, 2)
    lo, hi = pts2.min(axis=0), pts2.max(axis=0)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    ni, nj = (np.floor(half / spacing + 1e-9)).astype(int)
    out = []
    for i in range(-ni, ni + 1):
        for j in range(-nj, nj + 1):
            p = mid + np.array([i * spacing, j * spacing])
            dist = float(_segment_distance(p, edges2).min()) if len(edges2) else np.inf
            if dist < min_boundary_dist - 1e-12:
                continue
            for k, fi in enumerate(members):
                lam = _barycentric_2d(p, tris2[k])
                if lam.min() >= -1e-12:
                    lam = np.clip(lam, 0.0, None)
                    lam /= lam.sum()
                    pos = lam @ mesh.triangles[fi]
                    out.append(ContactPoint(pos, mesh.facet_normals[fi].copy(), int(fi), dist))
                    break
    return out


# ---------------------------------------------------------------------------
# ray casting
# ---------------------------------------------------------------------------

def ray_mesh_hits(mesh: TriMesh, origin, direction, eps: float = 1e-9):
    """Möller–Trumbore against every face; returns ``(t, valid)`` arrays."""
    tri = mesh.triangles
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    d = np.asarray(direction, dtype=float)
    pvec = _cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > 1e-15
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = np.asarray(origin, dtype=float) - tri[:, 0]
    uu = np.einsum("ij,ij->i", tvec, pvec) * inv
    qvec = _cross(tvec, e1)
    vv = (qvec @ d) * inv
    t = np.einsum("ij,ij->i", e2, qvec) * inv
    tol = 1e-12
    valid = ok & (uu >= -tol) & (vv >= -tol) & (uu + vv <= 1 + tol) & (t > eps)
    return t, valid


def ray_opposite_contact(mesh: TriMesh, point: ContactPoint, antipodal_tol: float = np.radians(10.0),
                         cluster_tol: float = 0.05) -> Optional[ContactPoint]:
    """Cast from ``point`` along its inward normal and return the exit contact.

    The first face hit (ties broken by face index) must face away from the
    start normal to within ``antipodal_tol``; otherwise there is no partner.
    """
    d = -np.asarray(point.normal, dtype=float)
    t, valid = ray_mesh_hits(mesh, point.position, d)
    valid[point.face_id] = False
    if not valid.any():
        return None
    tmin = t[valid].min()
    hit = int(np.flatnonzero(valid & (t <= tmin + 1e-12))[0])
    n_hit = mesh.facet_normals[hit]
    if np.dot(n_hit, d) < np.cos(antipodal_tol):
        return None
    pos = np.asarray(point.position, dtype=float) + t[hit] * d
    clusters, labels = _cluster_labels(mesh, cluster_tol)
    edges = cluster_boundary_edges(mesh, clusters[labels[hit]])
    bd = float(_segment_distance(pos, edges).min()) if len(edges) else np.inf
    return ContactPoint(pos, n_hit.copy(), hit, bd)


# ---------------------------------------------------------------------------
# collision
# ---------------------------------------------------------------------------

class OrientedBox(NamedTuple):
    center: np.ndarray
    axes: np.ndarray  # columns are the box axes in world coordinates
    half: np.ndarray


def gripper_boxes(center, rotation_matrix, jaw_width: float, gripper) -> List[OrientedBox]:
    """Swept volume of a parallel-jaw gripper as two finger boxes and a palm box.

    Gripper frame columns: closing axis, approach axis, binormal. The palm face
    sits ``finger_length`` behind the grasp centre along the approach axis and
    each finger sweeps from the closed jaw position out to full opening.
    """
    c = np.asarray(center, dtype=float)
    r = np.asarray(rotation_matrix, dtype=float)
    close, approach = r[:, 0], r[:, 1]
    fb = np.asarray(gripper.finger_box, dtype=float)
    pb = np.asarray(gripper.palm_box, dtype=float)
    L = gripper.finger_length
    inner = 0.5 * jaw_width
    outer = 0.5 * gripper.max_opening + fb[0]
    f_half = np.array([0.5 * (outer - inner), 0.5 * fb[1], 0.5 * fb[2]])
    f_off = 0.5 * (outer + inner)
    along = -L + 0.5 * fb[1]
    boxes = [OrientedBox(c + s * f_off * close + along * approach, r, f_half) for s in (1.0, -1.0)]
    boxes.append(OrientedBox(c - (L + 0.5 * pb[1]) * approach, r, 0.5 * pb))
    return boxes


def box_aabb(box: OrientedBox):
    ext = np.abs(box.axes) @ box.half
    return box.center - ext, box.center + ext


def _sat_pairs(tris, centers, axes, halves, tol: float) -> np.ndarray:
    """Separating-axis test for paired triangles ``(P, 3, 3)`` and boxes."""
    local = np.einsum("pvd,pde->pve", tris - centers[:, None, :], axes)
    edges = np.stack([local[:, 1] - local[:, 0], local[:, 2] - local[:, 1], local[:, 0] - local[:, 2]], axis=1)
    A = np.zeros((len(tris), 13, 3))
    A[:, 0, 0] = A[:, 1, 1] = A[:, 2, 2] = 1.0
    A[:, 3] = _cross(edges[:, 0], edges[:, 1])
    ex, ey, ez = edges[..., 0], edges[..., 1], edges[..., 2]
    # unit box axis crossed with each triangle edge
    A[:, 4:7, 1], A[:, 4:7, 2] = -ez, ey
    A[:, 7:10, 0], A[:, 7:10, 2] = ez, -ex
    A[:, 10:13, 0], A[:, 10:13, 1] = -ey, ex
    norm = np.linalg.norm(A, axis=2)
    usable = norm > 1e-12
    A = A / np.where(usable, norm, 1.0)[..., None]
    proj = np.einsum("pkd,pvd->pkv", A, local)
    radius = np.einsum("pkd,pd->pk", np.abs(A), halves)
    separated = (proj.max(axis=2) <= -radius + tol) | (proj.min(axis=2) >= radius - tol)
    return ~np.any(separated & usable, axis=1)


def triangles_intersect_box(tris: np.ndarray, box: OrientedBox, tol: float = 1e-9) -> np.ndarray:
    """Per-triangle penetration test against one oriented box.

    Contact without penetration deeper than ``tol`` is not an intersection.
    """
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
    n = len(tris)
    return _sat_pairs(tris, np.broadcast_to(box.center, (n, 3)), np.broadcast_to(box.axes, (n, 3, 3)),
                      np.broadcast_to(box.half, (n, 3)), tol)


def _cross(a, b) -> np.ndarray:
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _triangle_aabbs(mesh: TriMesh):
    if "tri_aabb" not in mesh._cache:
        t = mesh.triangles
        mesh._cache["tri_aabb"] = (t, t.min(axis=1), t.max(axis=1))
    return mesh._cache["tri_aabb"]


def boxes_hit_mesh(mesh: TriMesh, boxes: Sequence[OrientedBox], tol: float = 1e-9) -> np.ndarray:
    """Which boxes penetrate the mesh: AABB broad phase, then exact SAT on survivors."""
    tris, tlo, thi = _triangle_aabbs(mesh)
    centers = np.array([b.center for b in boxes])
    axes = np.array([b.axes for b in boxes])
    halves = np.array([b.half for b in boxes])
    ext = np.einsum("bij,bj->bi", np.abs(axes), halves)
    blo, bhi = centers - ext, centers + ext
    overlap = np.all((tlo[None] <= bhi[:, None] + tol) & (thi[None] >= blo[:, None] - tol), axis=2)
    bi, ti = np.nonzero(overlap)
    hit = np.zeros(len(boxes), dtype=bool)
    if len(bi):
        inter = _sat_pairs(tris[ti], centers[bi], axes[bi], halves[bi], tol)
        hit[bi[inter]] = True
    return hit


def gripper_collision_mask(obstacles: Sequence[TriMesh], grasps, gripper_spec, tol: float = 1e-9) -> np.ndarray:
    """Vectorised :func:`check_gripper_collision` over many grasps."""
    grasps = list(grasps)
    if not grasps:
        return np.zeros(0, dtype=bool)
    boxes = [b for g in grasps for b in gripper_boxes(g.center, to_matrix(g.orientation), g.jaw_width, gripper_spec)]
    hit = np.zeros(len(boxes), dtype=bool)
    for mesh in obstacles:
        hit |= boxes_hit_mesh(mesh, boxes, tol)
    return hit.reshape(len(grasps), -1).any(axis=1)


def check_gripper_collision(obstacles: Sequence[TriMesh], grasp, gripper_spec, tol: float = 1e-9) -> bool:
    """True when the gripper swept volume at ``grasp`` penetrates any obstacle triangle."""
    return bool(gripper_collision_mask(obstacles, [grasp], gripper_spec, tol)[0])
