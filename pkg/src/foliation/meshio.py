"""ASCII mesh and curve file I/O.

Supported mesh formats are ASCII OFF, OBJ and PLY (binary PLY is rejected:
test fixtures must be bit-exact).  PLY files may carry an ``edge`` element
with per-edge lengths, which round-trips intrinsic metrics such as flat
tori that cannot be embedded in R^3.

Curve files hold one curve per line::

    closed 12 13 14 15
    open 3 9 21
    closed xyz 0.1 0.2 0.3  0.4 0.5 0.6  ...

The ``xyz`` variant gives a position polyline that is snapped to the mesh
(nearest vertices joined by shortest edge paths).
"""

import os

import numpy as np

from .errors import ParseError
from .mesh import TriMesh

__all__ = [
    "load_mesh",
    "save_mesh",
    "read_curves",
    "write_curves",
]


def _clean_lines(text):
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def _fmt(x):
    return repr(float(x))


# -- OFF -----------------------------------------------------------------


def _read_off(text):
    lines = _clean_lines(text)
    if not lines or lines[0] != "OFF":
        raise ParseError("missing OFF header")
    try:
        nv, nf, _ne = (int(tok) for tok in lines[1].split()[:3])
    except (ValueError, IndexError):
        raise ParseError("bad OFF counts line") from None
    if len(lines) < 2 + nv + nf:
        raise ParseError("truncated OFF file")
    verts = _parse_vertices(lines[2 : 2 + nv])
    tris = _parse_counted_faces(lines[2 + nv : 2 + nv + nf])
    return verts, tris, None


def _write_off(mesh):
    out = ["OFF", "%d %d 0" % (mesh.n_vertices, mesh.n_triangles)]
    for p in mesh.vertices:
        out.append("%s %s %s" % (_fmt(p[0]), _fmt(p[1]), _fmt(p[2])))
    for t in mesh.triangles:
        out.append("3 %d %d %d" % (t[0], t[1], t[2]))
    return "\n".join(out) + "\n"


# -- OBJ -----------------------------------------------------------------


def _read_obj(text):
    verts, tris = [], []
    for line in _clean_lines(text):
        tok = line.split()
        if tok[0] == "v":
            if len(tok) < 4:
                raise ParseError("OBJ vertex with fewer than 3 coordinates")
            verts.append([float(x) for x in tok[1:4]])
        elif tok[0] == "f":
            if len(tok) != 4:
                raise ParseError("OBJ face is not a triangle")
            try:
                tris.append([int(t.split("/")[0]) - 1 for t in tok[1:4]])
            except ValueError:
                raise ParseError("bad OBJ face indices: %r" % line) from None
    if not verts:
        raise ParseError("OBJ file has no vertices")
    return np.asarray(verts), np.asarray(tris, dtype=np.int64), None


def _write_obj(mesh):
    out = []
    for p in mesh.vertices:
        out.append("v %s %s %s" % (_fmt(p[0]), _fmt(p[1]), _fmt(p[2])))
    for t in mesh.triangles:
        out.append("f %d %d %d" % (t[0] + 1, t[1] + 1, t[2] + 1))
    return "\n".join(out) + "\n"


# -- PLY -----------------------------------------------------------------


def _read_ply(text):
    lines = _clean_lines(text)
    if not lines or lines[0] != "ply":
        raise ParseError("missing ply header")
    elements = []  # (name, count, [property names])
    i = 1
    saw_format = False
    while i < len(lines):
        tok = lines[i].split()
        i += 1
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise ParseError("binary PLY is not supported")
            saw_format = True
        elif tok[0] == "comment":
            continue
        elif tok[0] == "element":
            elements.append([tok[1], int(tok[2]), []])
        elif tok[0] == "property":
            if not elements:
                raise ParseError("PLY property before any element")
            elements[-1][2].append(tok[-1])
        elif tok[0] == "end_header":
            break
        else:
            raise ParseError("unexpected PLY header line: %r" % " ".join(tok))
    else:
        raise ParseError("PLY header never ends")
    if not saw_format:
        raise ParseError("PLY file lacks a format line")

    verts = tris = None
    edge_rows = None
    body = lines
    start = i
    for name, count, props in elements:
        rows = body[start : start + count]
        if len(rows) < count:
            raise ParseError("truncated PLY element %r" % name)
        start += count
        if name == "vertex":
            if props[:3] != ["x", "y", "z"]:
                raise ParseError("PLY vertex element must start with x y z")
            verts = _parse_vertices(rows)
        elif name == "face":
            tris = _parse_counted_faces(rows)
        elif name == "edge":
            if props[:3] != ["vertex1", "vertex2", "length"]:
                raise ParseError("PLY edge element must be: vertex1 vertex2 length")
            edge_rows = []
            for r in rows:
                tok = r.split()
                edge_rows.append((int(tok[0]), int(tok[1]), float(tok[2])))
    if verts is None or tris is None:
        raise ParseError("PLY file lacks vertex or face element")
    return verts, tris, edge_rows


def _write_ply(mesh):
    out = [
        "ply",
        "format ascii 1.0",
        "element vertex %d" % mesh.n_vertices,
        "property float64 x",
        "property float64 y",
        "property float64 z",
        "element face %d" % mesh.n_triangles,
        "property list uint8 int32 vertex_indices",
    ]
    if mesh.is_intrinsic:
        out += [
            "element edge %d" % mesh.n_edges,
            "property int32 vertex1",
            "property int32 vertex2",
            "property float64 length",
        ]
    out.append("end_header")
    for p in mesh.vertices:
        out.append("%s %s %s" % (_fmt(p[0]), _fmt(p[1]), _fmt(p[2])))
    for t in mesh.triangles:
        out.append("3 %d %d %d" % (t[0], t[1], t[2]))
    if mesh.is_intrinsic:
        for (a, b), l in zip(mesh.edges, mesh.edge_lengths):
            out.append("%d %d %s" % (a, b, _fmt(l)))
    return "\n".join(out) + "\n"


# -- shared row parsers ------------------------------------------------------


def _parse_vertices(rows):
    verts = []
    for r in rows:
        tok = r.split()
        if len(tok) < 3:
            raise ParseError("vertex row with fewer than 3 coordinates: %r" % r)
        try:
            verts.append([float(tok[0]), float(tok[1]), float(tok[2])])
        except ValueError:
            raise ParseError("bad vertex row: %r" % r) from None
    return np.asarray(verts)


def _parse_counted_faces(rows):
    tris = []
    for r in rows:
        tok = r.split()
        try:
            n = int(tok[0])
        except (ValueError, IndexError):
            raise ParseError("bad face row: %r" % r) from None
        if n != 3 or len(tok) < 4:
            raise ParseError("only triangle faces are supported: %r" % r)
        tris.append([int(tok[1]), int(tok[2]), int(tok[3])])
    return np.asarray(tris, dtype=np.int64)


# -- public API --------------------------------------------------------------

_READERS = {"off": _read_off, "obj": _read_obj, "ply": _read_ply}
_WRITERS = {"off": _write_off, "obj": _write_obj, "ply": _write_ply}


def _format_for(path, fmt):
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    fmt = fmt.lower()
    if fmt not in _READERS:
        raise ParseError("unsupported mesh format %r (use OFF, OBJ or PLY)" % fmt)
    return fmt


def load_mesh(path, fmt=None):
    """Read and validate a mesh from an ASCII OFF/OBJ/PLY file.

    The format is inferred from the extension unless ``fmt`` is given.
    All TriMesh invariants (manifoldness, orientability) are checked.
    """
    fmt = _format_for(path, fmt)
    try:
        with open(path, "r", encoding="ascii") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError("cannot read %s: %s" % (path, exc)) from None
    verts, tris, edge_rows = _READERS[fmt](text)
    if edge_rows is None:
        return TriMesh(verts, tris)
    mesh = TriMesh(verts, tris)
    lengths = np.empty(mesh.n_edges)
    lengths.fill(np.nan)
    for a, b, l in edge_rows:
        e = mesh.edge_id(a, b)
        if e < 0:
            raise ParseError("PLY edge (%d, %d) is not a mesh edge" % (a, b))
        lengths[e] = l
    if np.any(np.isnan(lengths)):
        raise ParseError("PLY edge element does not cover every mesh edge")
    return TriMesh(verts, tris, edge_lengths=lengths)


def save_mesh(mesh, path, fmt=None):
    """Write a mesh; PLY carries intrinsic edge lengths when present."""
    fmt = _format_for(path, fmt)
    if mesh.is_intrinsic and fmt != "ply":
        raise ParseError("intrinsic-metric meshes can only be saved as PLY")
    with open(path, "w", encoding="ascii") as f:
        f.write(_WRITERS[fmt](mesh))


def read_curves(path, mesh=None):
    """Read a curve file; returns a list of (vertex list, closed) pairs.

    ``xyz`` polyline rows need ``mesh`` so they can be snapped to vertices
    and joined by shortest edge paths.
    """
    with open(path, "r", encoding="ascii") as f:
        lines = _clean_lines(f.read())
    curves = []
    for line in lines:
        tok = line.split()
        if tok[0] not in ("closed", "open"):
            raise ParseError("curve line must start with 'closed' or 'open': %r" % line)
        closed = tok[0] == "closed"
        if len(tok) > 1 and tok[1] == "xyz":
            coords = [float(x) for x in tok[2:]]
            if len(coords) % 3 != 0 or not coords:
                raise ParseError("xyz polyline needs 3N coordinates: %r" % line)
            if mesh is None:
                raise ParseError("xyz polyline requires the mesh for snapping")
            from .curves import snap_polyline

            pts = np.asarray(coords).reshape(-1, 3)
            curves.append((snap_polyline(mesh, pts, closed), closed))
        else:
            try:
                idx = [int(x) for x in tok[1:]]
            except ValueError:
                raise ParseError("bad curve vertex index in %r" % line) from None
            if not idx:
                raise ParseError("empty curve line")
            curves.append((idx, closed))
    return curves


def write_curves(curves, path):
    with open(path, "w", encoding="ascii") as f:
        for verts, closed in curves:
            f.write(("closed " if closed else "open ") + " ".join(str(int(v)) for v in verts) + "\n")
