"""Named Enneper data for the classical catenoids, helicoids and their relatives.

Entries live as text records in ``data/*.surf``, ordered by file name.  Extra
records can be added from a directory passed as ``catalog_dir`` or named by
the ``SURF_CATALOG_DIR`` environment variable; a user entry with the same name
as a shipped one replaces it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .. import expr as ex
from ..enneper import EnneperData, _floats, from_record, to_record
from ..errors import NoPregeodesic, UnknownSurface
from ..expr import Expr
from ..verify import ImplicitEquation, eval_real_array

ENV_VAR = "SURF_CATALOG_DIR"


@dataclass(frozen=True)
class Pregeodesic:
    """A planar curve on the surface with its parameter correspondence.

    ``curve(t)`` gives the point in space and ``param(t)`` the domain point
    ``(u, v)`` whose image is that point.
    """

    curve: tuple[Expr, Expr, Expr]
    param: tuple[Expr, Expr]
    t_range: tuple[float, float]
    plane: str

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        env = {"t": t}
        return np.stack([eval_real_array(c, env) + np.zeros_like(t) for c in self.curve], axis=-1)

    def parameter(self, t):
        t = np.asarray(t, dtype=float)
        env = {"t": t}
        u, v = (eval_real_array(c, env) + np.zeros_like(t) for c in self.param)
        return u, v

    def to_fields(self) -> list[tuple[str, str]]:
        return [
            ("pregeodesic.curve", ", ".join(ex.to_source(c) for c in self.curve)),
            ("pregeodesic.param", ", ".join(ex.to_source(c) for c in self.param)),
            ("pregeodesic.range", f"{self.t_range[0]!r} {self.t_range[1]!r}"),
            ("pregeodesic.plane", self.plane),
        ]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    data: EnneperData
    implicit: ImplicitEquation | None = None
    source: str = ""
    notes: str = ""
    pregeodesic: Pregeodesic | None = None

    def to_record(self) -> str:
        extra = []
        if self.implicit is not None:
            extra.append(("implicit", self.implicit.to_text()))
        if self.pregeodesic is not None:
            extra += self.pregeodesic.to_fields()
        if self.source:
            extra.append(("source", self.source))
        if self.notes:
            extra.append(("notes", self.notes))
        return to_record(self.data, extra)


def _split_exprs(text: str, n: int, key: str) -> tuple[Expr, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ValueError(f"{key}: expected {n} comma-separated expressions")
    return tuple(ex.parse_real(p, ("t",)) for p in parts)


def parse_entry(text: str) -> CatalogEntry:
    data, extra = from_record(text)
    implicit = ImplicitEquation.parse(extra.pop("implicit")) if "implicit" in extra else None
    pregeo = None
    if "pregeodesic.curve" in extra:
        lo, hi = _floats(extra.pop("pregeodesic.range"), 2, "pregeodesic.range")
        pregeo = Pregeodesic(
            _split_exprs(extra.pop("pregeodesic.curve"), 3, "pregeodesic.curve"),
            _split_exprs(extra.pop("pregeodesic.param"), 2, "pregeodesic.param"),
            (lo, hi),
            extra.pop("pregeodesic.plane", ""),
        )
    source = extra.pop("source", "")
    notes = extra.pop("notes", "")
    if extra:
        raise ValueError(f"unknown record keys: {', '.join(sorted(extra))}")
    return CatalogEntry(data.name, data, implicit, source, notes, pregeo)


def load_entry(path) -> CatalogEntry:
    return parse_entry(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def _builtin() -> tuple[CatalogEntry, ...]:
    root = resources.files(__name__).joinpath("data")
    files = sorted((f for f in root.iterdir() if f.name.endswith(".surf")), key=lambda f: f.name)
    return tuple(parse_entry(f.read_text(encoding="utf-8")) for f in files)


def _user_dir(catalog_dir=None):
    if catalog_dir is not None:
        return Path(catalog_dir)
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else None


def entries(catalog_dir=None) -> tuple[CatalogEntry, ...]:
    """All entries in deterministic order: shipped first, then user files by name."""
    out = {e.name: e for e in _builtin()}
    d = _user_dir(catalog_dir)
    if d is not None and d.is_dir():
        for path in sorted(d.glob("*.surf")):
            e = load_entry(path)
            out[e.name] = e
    return tuple(out.values())


def names(catalog_dir=None) -> list[str]:
    return [e.name for e in entries(catalog_dir)]


def get(name: str, catalog_dir=None) -> CatalogEntry:
    for e in entries(catalog_dir):
        if e.name == name:
            return e
    raise UnknownSurface(name)


def pregeodesic_curve(name: str, catalog_dir=None) -> Pregeodesic:
    entry = get(name, catalog_dir)
    if entry.pregeodesic is None:
        raise NoPregeodesic(f"{name} has no recorded planar pregeodesic")
    return entry.pregeodesic


list = names  # noqa: A001  -- the public name of the listing operation



def immersion_of(entry: CatalogEntry):
    """Closed-form immersion when the entry has one, else the path integral."""
    from ..enneper import immerse_closed, immerse_path

    if entry.data.has_closed_form:
        return immerse_closed(entry.data)
    return immerse_path(entry.data)


def verify_entry(entry: CatalogEntry, grid: int = 20, n_random: int = 100, seed: int = 0):
    from ..verify import verify_immersion

    return verify_immersion(immersion_of(entry), entry.implicit, entry.name, grid, n_random, seed)


__all__ = ["CatalogEntry", "Pregeodesic", "entries", "get", "immersion_of", "list",
           "load_entry", "names", "parse_entry", "pregeodesic_curve", "verify_entry"]
