"""Conforming triangulations of model-coordinate domains and uniform refinement.

The initial mesh comes from a Delaunay triangulation of boundary-chord
endpoints plus a hexagonal interior lattice. Chord endpoints sit exactly on
their arcs, interior points keep a clearance just above half a chord length
from the boundary, so every chord has an empty diametral disc and is
guaranteed to appear as a Delaunay edge; triangles are then kept or dropped
by a point-in-polygon test on their centroids. Refinement is red (4-way)
subdivision with boundary midpoints snapped back onto their arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .geometry import (
    Arc,
    CircleArc,
    Domain,
    GeometryError,
    LineSegment,
)

_MIN_ANGLE_DEG = 20.0
_CHORD_FACTOR = 0.75  # boundary chord target relative to target_h
_CLEARANCE_FACTOR = 0.55  # interior clearance relative to the chord length
_ON_ARC_TOL = 1e-10


class MeshError(GeometryError):
    """Triangulation failed structurally."""


class MeshQualityError(MeshError):
    """The requested quality bound could not be met."""

    def __init__(self, msg: str, min_angle_deg: float):
        super().__init__(msg)
        self.min_angle_deg = min_angle_deg


@dataclass
class Mesh:
    """Triangulation in model coordinates.

    `boundary_edges` rows are (v0, v1, arc_id); `arcs` holds the referenced
    boundary arcs so refinement can snap midpoints without the Domain.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    arcs: tuple[Arc, ...]
    level: int = 0

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def boundary_bc(self) -> np.ndarray:
        """Per-boundary-edge condition, from the referenced arcs."""
        return np.array([self.arcs[a].bc for a in self.boundary_edges[:, 2]])

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def min_angle_deg(self) -> float:
        return float(np.degrees(_triangle_angles(self.vertices, self.triangles).min()))

    def max_edge_length(self) -> float:
        p = self.vertices[self.triangles]
        lengths = [
            np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1) for i in range(3)
        ]
        return float(np.max(lengths))


def _triangle_angles(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    angles = np.empty((len(triangles), 3))
    for i in range(3):
        a = p[:, (i + 1) % 3] - p[:, i]
        b = p[:, (i + 2) % 3] - p[:, i]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        cosang = np.clip(np.einsum("ij,ij->i", a, b) / (na * nb), -1.0, 1.0)
        angles[:, i] = np.arccos(cosang)
    return angles


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


# ---------------------------------------------------------------------------
# Boundary discretization


def _discretize_boundary(domain: Domain, chord: float):
    """Chord endpoints on every arc plus the chord->arc map.

    Returns (points list, chords list of (i, j, arc_id), loop polygons).
    """
    points: list[np.ndarray] = []
    chords: list[tuple[int, int, int]] = []
    polys: list[np.ndarray] = []
    arc_id = 0
    for loop in domain.loops():
        loop_start = len(points)
        for arc in loop:
            span = arc.chord_length()
            n_seg = max(1, int(math.ceil(span / chord)))
            if isinstance(arc, CircleArc) and abs(arc.span) > 1.9 * math.pi:
                n_seg = max(n_seg, 8)
            first = len(points)
            ts = np.arange(n_seg) / n_seg
            for p in np.asarray(arc.point(ts)):
                points.append(p)
            for s in range(n_seg):
                i = first + s
                j = first + s + 1 if s < n_seg - 1 else len(points)
                chords.append((i, j, arc_id))
            arc_id += 1
        # close the loop: the final chord wraps to the loop's first vertex
        i, j, a = chords[-1]
        chords[-1] = (i, loop_start, a)
        polys.append(np.asarray(points[loop_start:]))
    return points, chords, polys


def _points_in_polys(outer: np.ndarray, holes: list[np.ndarray], pts: np.ndarray):
    def inside(poly, q):
        x, y = q[:, 0], q[:, 1]
        px, py = poly[:, 0], poly[:, 1]
        qx, qy = np.roll(px, -1), np.roll(py, -1)
        res = np.zeros(len(q), dtype=bool)
        for k in range(len(poly)):
            cond = (py[k] > y) != (qy[k] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = px[k] + (y - py[k]) * (qx[k] - px[k]) / (qy[k] - py[k])
            res ^= cond & (x < xint)
        return res

    mask = inside(outer, pts)
    for h in holes:
        mask &= ~inside(h, pts)
    return mask


def _dist_to_segments(pts: np.ndarray, segs_a: np.ndarray, segs_b: np.ndarray):
    # min distance from each point to any segment (a_k, b_k)
    d = segs_b - segs_a
    seg_len2 = np.einsum("ij,ij->i", d, d)
    out = np.full(len(pts), np.inf)
    for k in range(len(segs_a)):
        rel = pts - segs_a[k]
        t = np.clip(rel @ d[k] / seg_len2[k], 0.0, 1.0)
        proj = segs_a[k] + np.outer(t, d[k])
        out = np.minimum(out, np.linalg.norm(pts - proj, axis=1))
    return out


def _hex_lattice(bbox, pitch: float) -> np.ndarray:
    x0, y0, x1, y1 = bbox
    rows = []
    row_h = pitch * math.sqrt(3.0) / 2.0
    # fixed fractional offsets avoid lattice points landing on symmetric loci
    y = y0 + 0.2137 * pitch
    odd = False
    while y < y1:
        x_start = x0 + (0.3391 + (0.5 if odd else 0.0)) * pitch
        xs = np.arange(x_start, x1, pitch)
        if len(xs):
            rows.append(np.column_stack([xs, np.full(len(xs), y)]))
        y += row_h
        odd = not odd
    if not rows:
        return np.empty((0, 2))
    return np.concatenate(rows, axis=0)


def _canonical_triangles(tris: np.ndarray) -> np.ndarray:
    rolled = np.empty_like(tris)
    argmin = np.argmin(tris, axis=1)
    for r in range(3):
        sel = argmin == r
        rolled[sel] = np.roll(tris[sel], -r, axis=1)
    order = np.lexsort((rolled[:, 2], rolled[:, 1], rolled[:, 0]))
    return rolled[order]


def triangulate(domain: Domain, target_h: float | None = None) -> Mesh:
    """Conforming triangulation with max edge <= target_h and min angle >= 20 degrees.

    Curved arcs are approximated by chords between on-arc vertices; holes are
    respected. Raises MeshQualityError (with the achieved minimum angle) if
    the quality bound cannot be met.
    """
    if target_h is None:
        target_h = 0.2 * domain.model_diameter()
    if not target_h > 0.0:
        raise MeshError(f"target_h must be positive, got {target_h}")

    h = float(target_h)
    last_angle = 0.0
    for attempt in range(4):
        mesh = _triangulate_once(domain, h)
        if mesh is not None:
            if mesh.min_angle_deg() >= _MIN_ANGLE_DEG - 1e-9 and (
                mesh.max_edge_length() <= target_h * (1.0 + 1e-9)
            ):
                return mesh
            last_angle = mesh.min_angle_deg()
        h /= 1.4
    raise MeshQualityError(
        f"could not reach min angle {_MIN_ANGLE_DEG} deg / max edge {target_h}"
        f" (achieved min angle {last_angle:.2f} deg)",
        min_angle_deg=last_angle,
    )


def _triangulate_once(domain: Domain, target_h: float) -> Mesh | None:
    chord = _CHORD_FACTOR * target_h
    b_points, chords, polys = _discretize_boundary(domain, chord)
    boundary = np.asarray(b_points)
    outer_poly, hole_polys = polys[0], polys[1:]

    segs_a = np.array([boundary[i] for i, _, _ in chords])
    segs_b = np.array([boundary[j] for _, j, _ in chords])
    max_chord = float(np.max(np.linalg.norm(segs_b - segs_a, axis=1)))
    clearance = _CLEARANCE_FACTOR * max_chord

    lattice = _hex_lattice(domain.bbox(), _CHORD_FACTOR * target_h)
    if len(lattice):
        keep = _points_in_polys(outer_poly, hole_polys, lattice)
        lattice = lattice[keep]
    if len(lattice):
        keep = _dist_to_segments(lattice, segs_a, segs_b) > clearance
        lattice = lattice[keep]

    points = np.concatenate([boundary, lattice], axis=0) if len(lattice) else boundary
    n_boundary = len(boundary)

    chord_set = {_edge_key(i, j) for i, j, _ in chords}
    arc_of_chord = {_edge_key(i, j): a for i, j, a in chords}

    for _ in range(4):  # smoothing attempts
        tri = Delaunay(points)
        simplices = tri.simplices
        cent = points[simplices].mean(axis=1)
        keep = _points_in_polys(outer_poly, hole_polys, cent)
        kept = simplices[keep]
        if len(kept) == 0:
            return None
        # boundary of the kept triangulation must be exactly the chord set
        edges: dict[tuple[int, int], int] = {}
        for t in kept:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                k = _edge_key(int(a), int(b))
                edges[k] = edges.get(k, 0) + 1
        mesh_boundary = {k for k, cnt in edges.items() if cnt == 1}
        if mesh_boundary != chord_set or max(edges.values()) > 2:
            return None
        angles = np.degrees(_triangle_angles(points, kept).min())
        if angles >= _MIN_ANGLE_DEG - 1e-9 or len(points) == n_boundary:
            break
        # Laplacian smoothing of the interior points over the kept triangulation
        neigh_sum = np.zeros_like(points)
        neigh_cnt = np.zeros(len(points))
        for t in kept:
            for a in range(3):
                i, j = t[a], t[(a + 1) % 3]
                neigh_sum[i] += points[j]
                neigh_cnt[i] += 1
                neigh_sum[j] += points[i]
                neigh_cnt[j] += 1
        movable = np.arange(len(points)) >= n_boundary
        movable &= neigh_cnt > 0
        points = points.copy()
        points[movable] = neigh_sum[movable] / neigh_cnt[movable, None]

    # drop unused vertices (lattice points that ended up outside every kept triangle)
    used = np.zeros(len(points), dtype=bool)
    used[: n_boundary] = True
    used[kept.ravel()] = True
    remap = -np.ones(len(points), dtype=np.int64)
    remap[used] = np.arange(int(used.sum()))
    points = points[used]
    kept = remap[kept]

    # orient counterclockwise and order canonically
    p = points[kept]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    flip = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    kept[flip] = kept[flip][:, [0, 2, 1]]
    kept = _canonical_triangles(kept)

    boundary_edges = np.array(
        sorted((min(i, j), max(i, j), arc_of_chord[_edge_key(i, j)]) for i, j, _ in chords),
        dtype=np.int64,
    )
    return Mesh(
        vertices=points,
        triangles=kept,
        boundary_edges=boundary_edges,
        arcs=tuple(domain.arcs()),
        level=0,
    )


# ---------------------------------------------------------------------------
# Refinement


def _snap_to_arc(arc: Arc, p: np.ndarray) -> np.ndarray:
    if isinstance(arc, LineSegment):
        return p  # midpoint of a segment chord is already on the line
    c = np.asarray(arc.center, dtype=float)
    d = p - c
    return c + arc.radius * d / np.linalg.norm(d)


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: each triangle splits into four via edge midpoints.

    Boundary-edge midpoints are projected onto their arcs (radially for circle
    arcs, exact for segments). New vertices are appended in the canonical
    order of their parent edges, so the output is schedule-independent.
    """
    v = mesh.vertices
    t = mesh.triangles

    edge_keys: set[tuple[int, int]] = set()
    for tri in t:
        for a in range(3):
            edge_keys.add(_edge_key(int(tri[a]), int(tri[(a + 1) % 3])))
    ordered = sorted(edge_keys)
    midpoint_index = {e: len(v) + n for n, e in enumerate(ordered)}

    boundary_arc = {
        _edge_key(int(i), int(j)): int(a) for i, j, a in mesh.boundary_edges
    }
    mids = np.empty((len(ordered), 2))
    for n, (i, j) in enumerate(ordered):
        m = 0.5 * (v[i] + v[j])
        arc_id = boundary_arc.get((i, j))
        if arc_id is not None:
            m = _snap_to_arc(mesh.arcs[arc_id], m)
        mids[n] = m
    new_vertices = np.concatenate([v, mids], axis=0)

    new_tris = np.empty((4 * len(t), 3), dtype=np.int64)
    for n, tri in enumerate(t):
        i0, i1, i2 = (int(x) for x in tri)
        m01 = midpoint_index[_edge_key(i0, i1)]
        m12 = midpoint_index[_edge_key(i1, i2)]
        m20 = midpoint_index[_edge_key(i2, i0)]
        new_tris[4 * n] = (i0, m01, m20)
        new_tris[4 * n + 1] = (i1, m12, m01)
        new_tris[4 * n + 2] = (i2, m20, m12)
        new_tris[4 * n + 3] = (m01, m12, m20)

    new_boundary = []
    for i, j, a in mesh.boundary_edges:
        m = midpoint_index[_edge_key(int(i), int(j))]
        new_boundary.append((min(int(i), m), max(int(i), m), int(a)))
        new_boundary.append((min(int(j), m), max(int(j), m), int(a)))
    new_boundary = np.array(sorted(new_boundary), dtype=np.int64)

    out = Mesh(
        vertices=new_vertices,
        triangles=_canonical_triangles(new_tris),
        boundary_edges=new_boundary,
        arcs=mesh.arcs,
        level=mesh.level + 1,
    )
    bad = out.signed_areas() <= 0.0
    if np.any(bad):
        raise MeshError(f"refinement produced {int(bad.sum())} inverted triangles")
    return out


# ---------------------------------------------------------------------------
# Validation and bookkeeping


def euler_characteristic(mesh: Mesh) -> int:
    edges = set()
    for tri in mesh.triangles:
        for a in range(3):
            edges.add(_edge_key(int(tri[a]), int(tri[(a + 1) % 3])))
    return mesh.num_vertices - len(edges) + mesh.num_triangles


def _arc_distance(arc: Arc, p: np.ndarray) -> float:
    if isinstance(arc, CircleArc):
        c = np.asarray(arc.center)
        return abs(np.linalg.norm(p - c) - arc.radius)
    a = np.asarray(arc.p0)
    b = np.asarray(arc.p1)
    d = b - a
    t = float(np.clip((p - a) @ d / (d @ d), 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * d)))


def validate_mesh(mesh: Mesh) -> None:
    """Check the structural mesh invariants; raise MeshError on violation."""
    if np.any(mesh.signed_areas() <= 0.0):
        raise MeshError("mesh has nonpositively oriented triangles")
    counts: dict[tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for a in range(3):
            k = _edge_key(int(tri[a]), int(tri[(a + 1) % 3]))
            counts[k] = counts.get(k, 0) + 1
    if counts and max(counts.values()) > 2:
        raise MeshError("mesh is not edge-manifold")
    boundary = {k for k, c in counts.items() if c == 1}
    declared = {_edge_key(int(i), int(j)) for i, j, _ in mesh.boundary_edges}
    if boundary != declared:
        raise MeshError("declared boundary edges do not tile the mesh boundary")
    scale = 1.0 + float(np.abs(mesh.vertices).max())
    incident: dict[int, int] = {}
    for i, j, a in mesh.boundary_edges:
        for vtx in (int(i), int(j)):
            incident[vtx] = incident.get(vtx, 0) + 1
            dist = _arc_distance(mesh.arcs[int(a)], mesh.vertices[vtx])
            if dist > _ON_ARC_TOL * scale:
                raise MeshError(
                    f"boundary vertex {vtx} lies {dist:.3e} away from arc {int(a)}"
                )
    if incident and set(incident.values()) != {2}:
        raise MeshError("boundary edges do not form closed loops")


# ---------------------------------------------------------------------------
# Mesh file I/O (round-trips bit-identically)


def save_mesh(mesh: Mesh, path) -> None:
    """Plain-text mesh: vertex, triangle, boundary-edge and arc tables."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"mesh level {mesh.level}\n")
        fh.write(f"vertices {mesh.num_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"triangles {mesh.num_triangles}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        fh.write(f"boundary_edges {len(mesh.boundary_edges)}\n")
        for i, j, a in mesh.boundary_edges:
            fh.write(f"{i} {j} {a}\n")
        fh.write(f"arcs {len(mesh.arcs)}\n")
        for arc in mesh.arcs:
            if isinstance(arc, LineSegment):
                fh.write(
                    f"segment {arc.p0[0]:.17g} {arc.p0[1]:.17g} "
                    f"{arc.p1[0]:.17g} {arc.p1[1]:.17g} {arc.bc}\n"
                )
            else:
                fh.write(
                    f"arc {arc.center[0]:.17g} {arc.center[1]:.17g} {arc.radius:.17g} "
                    f"{arc.phi0:.17g} {arc.phi1:.17g} {arc.bc}\n"
                )


def load_mesh(path) -> Mesh:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    pos = 0

    def expect(tag: str) -> list[str]:
        nonlocal pos
        if pos >= len(lines):
            raise MeshError(f"{path}: truncated before {tag!r} section")
        parts = lines[pos].split()
        if not parts or parts[0] != tag:
            raise MeshError(f"{path}:{pos + 1}: expected {tag!r} section header")
        pos += 1
        return parts

    head = expect("mesh")
    level = int(head[2])
    n_v = int(expect("vertices")[1])
    vertices = np.array(
        [[float(x) for x in lines[pos + r].split()] for r in range(n_v)]
    ).reshape(n_v, 2)
    pos += n_v
    n_t = int(expect("triangles")[1])
    triangles = np.array(
        [[int(x) for x in lines[pos + r].split()] for r in range(n_t)], dtype=np.int64
    ).reshape(n_t, 3)
    pos += n_t
    n_b = int(expect("boundary_edges")[1])
    boundary = np.array(
        [[int(x) for x in lines[pos + r].split()] for r in range(n_b)], dtype=np.int64
    ).reshape(n_b, 3)
    pos += n_b
    n_a = int(expect("arcs")[1])
    arcs: list[Arc] = []
    for r in range(n_a):
        parts = lines[pos + r].split()
        if parts[0] == "segment":
            arcs.append(
                LineSegment(
                    (float(parts[1]), float(parts[2])),
                    (float(parts[3]), float(parts[4])),
                    parts[5],
                )
            )
        elif parts[0] == "arc":
            arcs.append(
                CircleArc(
                    (float(parts[1]), float(parts[2])),
                    float(parts[3]),
                    float(parts[4]),
                    float(parts[5]),
                    parts[6],
                )
            )
        else:
            raise MeshError(f"{path}:{pos + r + 1}: unknown arc kind {parts[0]!r}")
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=boundary,
        arcs=tuple(arcs),
        level=level,
    )
