"""``surfaces`` command-line tool.

Exit codes: 0 success, 2 usage error or unknown name, 3 validation or
verification failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import catalog
from . import expr as ex
from .catalog import CatalogEntry
from .enneper import (
    CausalCharacter,
    DomainSpec,
    EnneperData,
    epicycloid_family,
    immerse_closed,
    immerse_path,
    scale_transform,
    to_record,
    validate,
)
from .errors import (
    BadFamilyIndex,
    EmptyDomain,
    ParseError,
    ScalarDegenerate,
    UnknownSurface,
)
from .mesh import parse_grid, sample_mesh, to_csv, to_obj

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILED = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    # binary mode keeps "\n" line endings on every platform
    with open(out, "wb") as fh:
        fh.write(text.encode("utf-8"))


def _fmt_domain(dom: DomainSpec) -> list[str]:
    lines = ["rect = [%g, %g] x [%g, %g]" % dom.rect,
             "basepoint = (%g, %g)" % dom.basepoint,
             f"margin = {dom.margin:g}"]
    for e in dom.exclusions:
        lines.append(f"exclude = {e.to_text()}")
    if dom.chart is not None:
        c = dom.chart
        lines.append(f"chart = polar, ln r in [{c.rho_min:g}, {c.rho_max:g}], "
                     f"theta in [{c.theta_min:g}, {c.theta_max:g}]")
    return lines


def data_sheet(entry: CatalogEntry) -> str:
    d = entry.data
    src = d.sources()
    lines = [
        f"name: {entry.name}",
        f"character: {d.character.value} (epsilon = {d.character.epsilon:+d})",
        f"L_z = {src['Lz']}",
        f"P_z = {src['Pz']}",
        f"h_z = {src['hz']}",
    ]
    if d.has_closed_form:
        part = "Re" if d.h_part == "re" else "Im"
        lines += [f"L = {src['L']}", f"P = {src['P']}", f"h = {part}({ex.to_source(d.H)})"]
    lines += ["domain:"] + ["  " + x for x in _fmt_domain(d.domain)]
    if entry.implicit is not None:
        lines.append(f"implicit equation: {entry.implicit.to_text()}")
    if entry.pregeodesic is not None:
        pg = entry.pregeodesic
        lines.append("pregeodesic: (" + ", ".join(ex.to_source(c) for c in pg.curve) + ")"
                     + f" at (u, v) = (" + ", ".join(ex.to_source(c) for c in pg.param) + ")"
                     + f", t in [{pg.t_range[0]:g}, {pg.t_range[1]:g}], plane {pg.plane}")
    if entry.source:
        lines.append(f"provenance: {entry.source}")
    if entry.notes:
        lines.append(f"notes: {entry.notes}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_list(args) -> int:
    for name in catalog.names(args.catalog_dir):
        print(name)
    return EXIT_OK


def cmd_show(args) -> int:
    sys.stdout.write(data_sheet(catalog.get(args.name, args.catalog_dir)))
    return EXIT_OK


def _floats(text: str, n: int, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        vals = ()
    if len(vals) != n:
        raise UsageError(f"{flag} needs {n} numbers")
    return vals


def _data_from_flags(args) -> EnneperData:
    missing = [f for f in ("Lz", "Pz", "hz", "character", "domain") if getattr(args, f) is None]
    if missing:
        raise UsageError("inline data needs " + ", ".join("--" + m for m in missing))
    rect = _floats(args.domain, 4, "--domain")
    base = _floats(args.basepoint, 2, "--basepoint") if args.basepoint else None
    try:
        domain = DomainSpec(rect, basepoint=base)
    except EmptyDomain as err:
        raise UsageError(str(err)) from None
    return EnneperData("inline", CausalCharacter(args.character),
                       args.Lz, args.Pz, args.hz, domain)


def cmd_sample(args) -> int:
    nu, nv = parse_grid(args.grid)
    if args.name is not None:
        data = catalog.get(args.name, args.catalog_dir).data
    else:
        data = _data_from_flags(args)
    report = validate(data)
    if not report.passed:
        sys.stderr.write(report.to_text())
        return EXIT_FAILED
    psi = immerse_closed(data) if data.has_closed_form else immerse_path(data)
    mesh = sample_mesh(psi, nu, nv)
    text = to_obj(mesh, data.name) if args.format == "obj" else to_csv(mesh)
    _write(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.all == (args.name is not None):
        raise UsageError("give exactly one of NAME or --all")
    entries = catalog.entries(args.catalog_dir) if args.all else [catalog.get(args.name, args.catalog_dir)]
    ok = True
    chunks = []
    for entry in entries:
        rep = validate(entry.data)
        text = rep.to_text()
        if rep.passed:
            ver = catalog.verify_entry(entry, grid=args.samples)
            text += "\n" + ver.to_text()
            ok &= ver.passed
        else:
            ok = False
        chunks.append(text)
    summary = f"[summary]\nentries = {len(entries)}\nstatus = {'pass' if ok else 'fail'}\n"
    _write("\n".join(chunks) + "\n" + summary, args.out)
    return EXIT_OK if ok else EXIT_FAILED


def _target_dir(args) -> Path:
    if args.dest:
        return Path(args.dest)
    d = args.catalog_dir or os.environ.get(catalog.ENV_VAR)
    return Path(d) if d else Path.cwd()


def cmd_transform(args) -> int:
    entry = catalog.get(args.name, args.catalog_dir)
    f = ex.parse(args.scale_expr, entry.data.algebra)
    new_name = args.out or f"{entry.name}-scaled"
    data = scale_transform(entry.data, f, name=new_name)
    record = to_record(data, [("source", f"{entry.name} data multiplied by f = {ex.to_source(f)}")])
    target = _target_dir(args)
    target.mkdir(parents=True, exist_ok=True)
    path = target / f"{new_name}.surf"
    _write(record, str(path))
    report = validate(data)
    sys.stdout.write(f"wrote {path}\n" + report.to_text())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_family(args) -> int:
    fam = epicycloid_family(args.n)
    rec = to_record(fam.data, [("notes", f"rolling radius r = {fam.r}, fixed radius R = {fam.R}")])
    _write(rec, args.out)
    if args.out not in (None, "-"):
        print(f"wrote {args.out}")
    print(f"# R = {fam.R}, r = {fam.r}, R/r = {fam.R / fam.r}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfaces",
                                description="Minimal surfaces in Lorentz-Minkowski space from Enneper data.")
    p.add_argument("--catalog-dir", default=None,
                   help=f"extra directory of .surf entries (default: ${catalog.ENV_VAR})")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list catalog entries").set_defaults(func=cmd_list)

    s = sub.add_parser("show", help="print the data sheet of an entry")
    s.add_argument("name")
    s.set_defaults(func=cmd_show)

    s = sub.add_parser("sample", help="sample a surface to an OBJ or CSV file")
    s.add_argument("name", nargs="?")
    s.add_argument("--Lz")
    s.add_argument("--Pz")
    s.add_argument("--hz")
    s.add_argument("--character", choices=[c.value for c in CausalCharacter])
    s.add_argument("--domain", help="umin umax vmin vmax")
    s.add_argument("--basepoint", help="u0 v0 (default: rectangle centre)")
    s.add_argument("--grid", default="32x32", help="NxM grid nodes (default 32x32)")
    s.add_argument("--format", choices=("obj", "csv"), default="obj")
    s.add_argument("--out", help="output file (default: stdout)")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", help="run the verification suite")
    s.add_argument("name", nargs="?")
    s.add_argument("--all", action="store_true")
    s.add_argument("--samples", type=int, default=20, help="stratified grid size per axis")
    s.add_argument("--out", help="report file (default: stdout)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("transform", help="multiply an entry's data by f(z)")
    s.add_argument("name")
    s.add_argument("--scale-expr", required=True)
    s.add_argument("--out", help="name of the new entry")
    s.add_argument("--dest", help="directory for the new .surf file")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("family", help="Enneper data of the epicycloid family member n")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", help="output .surf file (default: stdout)")
    s.set_defaults(func=cmd_family)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ScalarDegenerate, EmptyDomain, ArithmeticError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAILED
    except (UnknownSurface, BadFamilyIndex, ParseError, UsageError, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
