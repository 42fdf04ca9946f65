"""Grid sampling of immersions into quad meshes, with OBJ and CSV writers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enneper import Immersion
from .errors import PathLeavesDomain


@dataclass(frozen=True)
class MeshBuffer:
    """Vertices of an ``nu x nv`` parameter grid with masked points removed.

    ``index[i, j]`` is the 0-based vertex number of grid node ``(i, j)`` or -1
    when the node was masked.  ``faces`` holds 0-based quads over cells whose
    four corners survive and which stay clear of every exclusion.
    """

    u: np.ndarray
    v: np.ndarray
    vertices: np.ndarray
    index: np.ndarray
    faces: np.ndarray
    dims: tuple[int, int]

    @property
    def holes(self) -> np.ndarray:
        return self.index < 0


def sample_mesh(psi: Immersion, nu: int, nv: int) -> MeshBuffer:
    if nu < 2 or nv < 2:
        raise ValueError("grid must be at least 2x2")
    dom = psi.domain
    alg = psi.data.algebra
    a0, a1, b0, b1 = dom.chart_box()
    ga, gb = np.meshgrid(np.linspace(a0, a1, nu), np.linspace(b0, b1, nv), indexing="ij")
    gu, gv = dom.chart_to_uv(ga, gb)
    valid = dom.contains(gu, gv, alg)

    pts = np.full(gu.shape + (3,), np.nan)
    if psi.backend == "closed":
        pts[valid] = psi.evaluate(gu[valid], gv[valid])
    else:
        for i, j in zip(*np.nonzero(valid)):
            try:
                pts[i, j] = psi.evaluate(gu[i, j], gv[i, j])
            except PathLeavesDomain:
                valid[i, j] = False
    valid &= np.all(np.isfinite(pts), axis=-1)

    index = np.full(gu.shape, -1, dtype=np.int64)
    index[valid] = np.arange(int(valid.sum()))

    # a cell is kept only if its corners survive and no exclusion passes through it
    cu = 0.25 * (gu[:-1, :-1] + gu[1:, :-1] + gu[1:, 1:] + gu[:-1, 1:])
    cv = 0.25 * (gv[:-1, :-1] + gv[1:, :-1] + gv[1:, 1:] + gv[:-1, 1:])
    radius = np.zeros(cu.shape)
    for du, dv in ((gu[:-1, :-1], gv[:-1, :-1]), (gu[1:, :-1], gv[1:, :-1]),
                   (gu[1:, 1:], gv[1:, 1:]), (gu[:-1, 1:], gv[:-1, 1:])):
        radius = np.maximum(radius, np.hypot(du - cu, dv - cv))
    clear = dom.exclusion_distance(cu, cv, alg) > radius
    corners = (index[:-1, :-1], index[1:, :-1], index[1:, 1:], index[:-1, 1:])
    keep = clear & np.all(np.stack(corners) >= 0, axis=0)
    faces = np.stack([c[keep] for c in corners], axis=-1)
    return MeshBuffer(gu[valid], gv[valid], pts[valid], index, faces, (nu, nv))


def _fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0, so zeros always print as "0"
    return "%.12g" % (x + 0.0)


def to_obj(mesh: MeshBuffer, name: str = "") -> str:
    lines = []
    if name:
        lines.append(f"# {name}")
    lines.append(f"# grid {mesh.dims[0]}x{mesh.dims[1]}, {len(mesh.vertices)} vertices, "
                 f"{len(mesh.faces)} faces")
    lines += ["v " + " ".join(_fmt(c) for c in p) for p in mesh.vertices]
    lines += ["f " + " ".join(str(int(k) + 1) for k in f) for f in mesh.faces]
    return "\n".join(lines) + "\n"


def to_csv(mesh: MeshBuffer) -> str:
    lines = ["u,v,x1,x2,x3"]
    for uu, vv, p in zip(mesh.u, mesh.v, mesh.vertices):
        lines.append(",".join(_fmt(c) for c in (uu, vv, *p)))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"grid must look like NxM, got {text!r}")
    nu, nv = (int(p) for p in parts)
    if nu < 2 or nv < 2:
        raise ValueError("grid must be at least 2x2")
    return nu, nv


__all__ = ["MeshBuffer", "parse_grid", "sample_mesh", "to_csv", "to_obj"]
