"""Structured test surfaces with known topology and conformal modules.

Flat tori and flat tubes carry intrinsic edge lengths (the flat metric of
the L x H rectangle) because they have no isometric embedding in R^3; their
cylinder modules are then known analytically, which makes them the main
oracle family for the pipeline.
"""

import numpy as np

from .errors import BadParameter
from .mesh import TriMesh

__all__ = [
    "flat_torus",
    "flat_tube",
    "square_disk",
    "icosphere",
    "holed_sphere",
    "genus2",
    "doubled",
    "module_family",
    "generate_surface",
]


def _grid_triangles(res_x, res_y, wrap_x, wrap_y, index):
    tris = []
    nx = res_x if wrap_x else res_x - 1
    ny = res_y if wrap_y else res_y - 1
    for j in range(ny):
        for i in range(nx):
            i1 = (i + 1) % res_x
            j1 = (j + 1) % res_y
            v00, v10 = index(i, j), index(i1, j)
            v11, v01 = index(i1, j1), index(i, j1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return np.asarray(tris, dtype=np.int64)


def _flat_grid_lengths(mesh, res_x, res_y, a, b, wrap_x, wrap_y):
    diag = float(np.hypot(a, b))
    lengths = np.empty(mesh.n_edges)
    for e, (u, v) in enumerate(mesh.edges):
        iu, ju = int(u) % res_x, int(u) // res_x
        iv, jv = int(v) % res_x, int(v) // res_x
        di = min((iv - iu) % res_x, (iu - iv) % res_x) if wrap_x else abs(iv - iu)
        dj = min((jv - ju) % res_y, (ju - jv) % res_y) if wrap_y else abs(jv - ju)
        if (di, dj) == (1, 0):
            lengths[e] = a
        elif (di, dj) == (0, 1):
            lengths[e] = b
        elif (di, dj) == (1, 1):
            lengths[e] = diag
        else:  # pragma: no cover
            raise BadParameter("unexpected grid edge (%d, %d)" % (u, v))
    return lengths


def flat_torus(L, H, res):
    """Flat torus of size L x H on a res x res grid, plus its meridian.

    Returns ``(mesh, curves)`` where the single closed curve is the length-L
    loop at y = 0.  Cutting along it gives a cylinder of conformal module
    L/H, so a prescribed height ``h`` yields circumference ``h * L / H``.
    """
    if L <= 0 or H <= 0:
        raise BadParameter("torus sides must be positive")
    if res < 3:
        raise BadParameter("flat torus needs res >= 3")
    res = int(res)
    a, b = L / res, H / res
    xs = np.arange(res) * a
    ys = np.arange(res) * b
    verts = np.zeros((res * res, 3))
    verts[:, 0] = np.tile(xs, res)
    verts[:, 1] = np.repeat(ys, res)
    tris = _grid_triangles(res, res, True, True, lambda i, j: j * res + i)
    mesh = TriMesh(verts, tris)
    mesh = TriMesh(verts, tris, edge_lengths=_flat_grid_lengths(mesh, res, res, a, b, True, True))
    meridian = list(range(res))  # (i, 0) for all i: the length-L loop
    return mesh, [(meridian, True)]


def flat_tube(C, Hlen, res):
    """Flat open cylinder: circumference C, height Hlen, res x res cells.

    Embedded as a round tube but carrying the exact flat metric.
    """
    if C <= 0 or Hlen <= 0:
        raise BadParameter("tube dimensions must be positive")
    if res < 3:
        raise BadParameter("flat tube needs res >= 3")
    res = int(res)
    a, b = C / res, Hlen / res
    r = C / (2.0 * np.pi)
    theta = 2.0 * np.pi * np.arange(res) / res
    verts = np.zeros((res * (res + 1), 3))
    for j in range(res + 1):
        sl = slice(j * res, (j + 1) * res)
        verts[sl, 0] = r * np.cos(theta)
        verts[sl, 1] = r * np.sin(theta)
        verts[sl, 2] = j * b
    tris = _grid_triangles(res, res + 1, True, False, lambda i, j: j * res + i)
    mesh = TriMesh(verts, tris)
    return TriMesh(verts, tris, edge_lengths=_flat_grid_lengths(mesh, res, res + 1, a, b, True, False))


def square_disk(res):
    """Unit square patch (genus 0, one boundary loop).

    Corner-cell diagonals are flipped so no interior edge joins two boundary
    vertices, keeping the patch double-coverable.
    """
    if res < 2:
        raise BadParameter("disk needs res >= 2")
    res = int(res)
    n = res + 1
    xs = np.linspace(0.0, 1.0, n)
    verts = np.zeros((n * n, 3))
    verts[:, 0] = np.tile(xs, n)
    verts[:, 1] = np.repeat(xs, n)

    def vid(i, j):
        return j * n + i

    def on_bnd(i, j):
        return i in (0, res) or j in (0, res)

    tris = []
    for j in range(res):
        for i in range(res):
            v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if on_bnd(i, j) and on_bnd(i + 1, j + 1) and not (on_bnd(i + 1, j) and on_bnd(i, j + 1)):
                tris += [(v00, v10, v01), (v10, v11, v01)]
            else:
                tris += [(v00, v10, v11), (v00, v11, v01)]
    return TriMesh(verts, np.asarray(tris, dtype=np.int64))


_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        (-1, _ICO_T, 0), (1, _ICO_T, 0), (-1, -_ICO_T, 0), (1, -_ICO_T, 0),
        (0, -1, _ICO_T), (0, 1, _ICO_T), (0, -1, -_ICO_T), (0, 1, -_ICO_T),
        (_ICO_T, 0, -1), (_ICO_T, 0, 1), (-_ICO_T, 0, -1), (-_ICO_T, 0, 1),
    ],
    dtype=np.float64,
)
_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def icosphere(subdiv, radius=1.0):
    """Subdivided icosahedron projected to the sphere of given radius."""
    if subdiv < 0:
        raise BadParameter("subdiv must be >= 0")
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(int(subdiv)):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    V = np.asarray(verts) * radius
    return TriMesh(V, np.asarray(faces, dtype=np.int64))


def holed_sphere(holes, res, radius=1.0):
    """Icosphere with ``holes`` vertex stars punched out (genus 0, b = holes).

    The holes are the stars of the first original icosahedron vertices, which
    are pairwise disjoint for res >= 2.
    """
    if not 1 <= holes <= 12:
        raise BadParameter("holes must be in 1..12")
    if res < 2:
        raise BadParameter("holed sphere needs res >= 2 so hole boundaries stay disjoint")
    sphere = icosphere(res, radius)
    doomed = set(range(int(holes)))
    keep = [t for t in range(sphere.n_triangles) if not set(map(int, sphere.triangles[t])) & doomed]
    tris = sphere.triangles[keep]
    used = np.unique(tris)
    remap = np.full(sphere.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriMesh(sphere.vertices[used], remap[tris])


def doubled(mesh):
    """Double cover plus its seam curves (one closed curve per boundary loop).

    Returns ``(closed mesh, curves, involution)``; curve order follows the
    deterministic boundary-loop order of the input mesh.
    """
    loops = mesh.boundary_loops()
    cover, involution = mesh.double_cover()
    curves = [(list(lp), True) for lp in loops]
    return cover, curves, involution


def genus2(res):
    """Genus-2 surface as the double of a 3-holed sphere, with its 3 seams.

    Cutting along the seams gives two 3-holed-sphere components, so the
    decomposition graph has 2 nodes joined by 3 parallel edges.
    """
    pants = holed_sphere(3, res)
    cover, curves, _inv = doubled(pants)
    return cover, curves


def module_family(n_subjects, mean, sd, seed, res=24):
    """Unit-area flat tori with aspect ratios drawn from N(mean, sd).

    Returns a list of ``(mesh, curves, aspect)``; every torus has surface
    area exactly 1 so single-feature area baselines carry no signal.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(int(n_subjects)):
        m = max(0.2, float(rng.normal(mean, sd)))
        L, H = np.sqrt(m), 1.0 / np.sqrt(m)
        mesh, curves = flat_torus(L, H, res)
        out.append((mesh, curves, m))
    return out


def generate_surface(kind, **params):
    """CLI dispatcher; returns ``(mesh, curves, info)``.

    Kinds: flat_torus(L, H, res), genus2(res), holed_sphere(holes, res),
    disk(res), tube(C, H, res).
    """
    try:
        if kind == "flat_torus":
            L, H, res = float(params["L"]), float(params["H"]), int(params["res"])
            mesh, curves = flat_torus(L, H, res)
            return mesh, curves, {"kind": kind, "L": L, "H": H, "res": res, "module": L / H}
        if kind == "genus2":
            res = int(params["res"])
            mesh, curves = genus2(res)
            return mesh, curves, {"kind": kind, "res": res}
        if kind == "holed_sphere":
            holes, res = int(params["holes"]), int(params["res"])
            return holed_sphere(holes, res), [], {"kind": kind, "holes": holes, "res": res}
        if kind == "disk":
            res = int(params["res"])
            return square_disk(res), [], {"kind": kind, "res": res}
        if kind == "tube":
            C, H, res = float(params.get("C", 1.0)), float(params["H"]), int(params["res"])
            return flat_tube(C, H, res), [], {"kind": kind, "C": C, "H": H, "res": res}
    except KeyError as exc:
        raise BadParameter("missing parameter %s for kind %r" % (exc, kind)) from None
    raise BadParameter("unknown surface kind %r" % kind)
