import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from minsurf import catalog
from minsurf.cli import main
from minsurf.enneper import from_record
from minsurf.mesh import parse_grid, sample_mesh, to_csv, to_obj


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    names = out.split()
    assert len(names) >= 20 and names == catalog.names()


def test_show(capsys):
    code, out, _ = run(capsys, "show", "elliptic-catenoid")
    assert code == 0
    assert "h_z = -1/(2*z)" in out
    assert "character: spacelike" in out
    assert "implicit equation: x1^2+x2^2 = sinh(x3)^2" in out
    assert "provenance:" in out


def test_show_unknown(capsys):
    code, _, err = run(capsys, "show", "nope")
    assert code == 2
    assert "UnknownSurface" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "sample", "elliptic-catenoid", "--grid", "1x5")[0] == 2
    assert run(capsys, "sample", "--Lz", "1")[0] == 2
    assert run(capsys, "verify")[0] == 2


def test_sample_obj_counts(capsys, tmp_path):
    out = tmp_path / "cat.obj"
    code, _, _ = run(capsys, "sample", "elliptic-catenoid", "--grid", "64x64", "--format", "obj",
                     "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    verts = [ln for ln in lines if ln.startswith("v ")]
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(verts) == 4096  # the polar chart keeps every node
    assert len(faces) == 63 * 63
    idx = np.array([[int(k) for k in f.split()[1:]] for f in faces])
    assert idx.min() >= 1 and idx.max() <= len(verts)


def test_sample_vertex_at_r_e(capsys):
    # ln r = 1 and theta = 0 are grid nodes of an 11 x 11 grid over [0.2, 1.2] x [-0.6, 0.6]
    code, out, _ = run(capsys, "sample", "spacelike-catenoid-1st-kind", "--grid", "11x11",
                       "--format", "csv")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[1:]]
    pts = {(float(r[0]), float(r[1])): tuple(float(x) for x in r[2:]) for r in rows}
    key = min(pts, key=lambda k: abs(k[0] - math.e) + abs(k[1]))
    assert key == pytest.approx((math.e, 0.0), abs=1e-10)
    np.testing.assert_allclose(pts[key], [math.sinh(1), 0, 1], atol=1e-10)


def test_elliptic_catenoid_vertex_has_opposite_height(capsys):
    code, out, _ = run(capsys, "sample", "elliptic-catenoid", "--grid", "11x11", "--format", "csv")
    assert code == 0
    row = next(r.split(",") for r in out.splitlines()[1:] if r.startswith("2.71828182846,0,"))
    np.testing.assert_allclose([float(x) for x in row[2:]], [math.sinh(1), 0, -1], atol=1e-10)


def test_sample_csv_header(capsys):
    code, out, _ = run(capsys, "sample", "enneper-1st-kind", "--grid", "4x3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "u,v,x1,x2,x3"
    assert len(lines) == 1 + 12


def test_sample_degenerate_inline_data(capsys):
    code, _, err = run(capsys, "sample", "--Lz", "1/2", "--Pz", "1/2", "--hz", "1/2",
                       "--character", "spacelike", "--domain", "-1 1 -1 1")
    assert code == 3
    assert "condition B" in err


def test_sample_inline_data(capsys):
    # values starting with '-' need the --flag=value form
    code, out, _ = run(capsys, "sample", "--Lz", "z^2", "--Pz", "1", "--hz=-z",
                       "--character", "spacelike", "--domain=-0.5 0.5 -0.5 0.5",
                       "--grid", "3x3", "--format", "csv")
    assert code == 0
    rows = np.array([[float(x) for x in ln.split(",")] for ln in out.splitlines()[1:]])
    assert rows.shape == (9, 5)
    u, v = rows[:, 0], rows[:, 1]
    want = np.stack([u + u**3 / 3 - u * v * v, -v - v**3 / 3 + v * u * u, v * v - u * u], axis=-1)
    np.testing.assert_allclose(rows[:, 2:], want, atol=1e-9)


def test_sample_inline_parse_error(capsys):
    code, _, err = run(capsys, "sample", "--Lz", "z^", "--Pz", "1", "--hz", "1",
                       "--character", "spacelike", "--domain", "0 1 0 1")
    assert code == 2
    assert "ParseError" in err


def test_sample_is_byte_deterministic(capsys, tmp_path):
    for fmt in ("obj", "csv"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        for path in (a, b):
            assert run(capsys, "sample", "timelike-catalan-1st", "--grid", "16x12",
                       "--format", fmt, "--out", str(path))[0] == 0
        assert a.read_bytes() == b.read_bytes()


def test_sample_io_error(capsys, tmp_path):
    code, _, _ = run(capsys, "sample", "enneper-1st-kind", "--out", str(tmp_path / "no" / "such" / "f.obj"))
    assert code == 4


def test_verify_single(capsys):
    code, out, _ = run(capsys, "verify", "elliptic-catenoid")
    assert code == 0
    block = out.split("[mean_curvature]")[1].split("\n\n")[0]
    max_h = float(next(ln for ln in block.splitlines() if ln.startswith("max_abs_H")).split("=")[1])
    assert max_h < 1e-6
    assert out.rstrip().endswith("status = pass")


def test_verify_all(capsys, tmp_path):
    report = tmp_path / "report.txt"
    code, _, _ = run(capsys, "verify", "--all", "--out", str(report))
    assert code == 0
    text = report.read_text()
    assert f"entries = {len(catalog.names())}" in text
    assert "status = fail" not in text


def test_verify_unknown(capsys):
    assert run(capsys, "verify", "nope")[0] == 2


def test_verify_failing_user_entry(capsys, tmp_path):
    (tmp_path / "bad.surf").write_text(
        "name = bad\ncharacter = spacelike\nLz = z\nPz = 1\nhz = 1\nrect = 0.5 1 0.5 1\n")
    code, out, _ = run(capsys, "--catalog-dir", str(tmp_path), "verify", "bad")
    assert code == 3
    assert "verdict = fail" in out


def test_transform_helicoid_to_catalan(capsys, tmp_path):
    code, out, _ = run(capsys, "transform", "timelike-helicoid-1st", "--scale-expr", "2*sin(z)",
                       "--out", "my-catalan", "--dest", str(tmp_path))
    assert code == 0
    assert "verdict = pass" in out
    data, extra = from_record((tmp_path / "my-catalan.surf").read_text())
    assert "2*sin(z)" in extra["source"]
    ref = catalog.get("timelike-catalan-1st").data
    u, v = ref.domain.sample_points(ref.algebra, grid=4, n_random=5)
    for a, b in zip(data.evaluate_data(u, v), ref.evaluate_data(u, v)):
        assert np.max(np.abs(a - b)) < 1e-12
    # the new file is itself a catalog entry
    assert "my-catalan" in catalog.names(tmp_path)


def test_transform_catenoid_to_helicoid(capsys, tmp_path):
    code, _, _ = run(capsys, "--catalog-dir", str(tmp_path), "transform", "elliptic-catenoid",
                     "--scale-expr", "i", "--out", "conj")
    assert code == 0
    data = catalog.get("conj", tmp_path).data
    ref = catalog.get("spacelike-helicoid-1st").data
    u, v = ref.domain.sample_points(ref.algebra, grid=4, n_random=5)
    for a, b in zip(data.evaluate_data(u, v), ref.evaluate_data(u, v)):
        assert np.max(np.abs(a - b)) < 1e-12


def test_transform_degenerate(capsys, tmp_path):
    code, _, err = run(capsys, "transform", "elliptic-catenoid", "--scale-expr", "z-z",
                       "--dest", str(tmp_path))
    assert code == 3
    assert "ScalarDegenerate" in err
    assert list(tmp_path.iterdir()) == []


def test_transform_unknown_and_bad_expression(capsys, tmp_path):
    assert run(capsys, "transform", "x", "--scale-expr", "z-z", "--dest", str(tmp_path))[0] == 2
    code, _, err = run(capsys, "transform", "elliptic-catenoid", "--scale-expr", "tau", "--dest", str(tmp_path))
    assert code == 2 and "ParseError" in err


def test_family(capsys, tmp_path):
    code, out, err = run(capsys, "family", "--n", "2")
    assert code == 0
    data, extra = from_record(out)
    assert data.name == "epicycloid-2"
    assert "R/r = 2" in err
    path = tmp_path / "e3.surf"
    assert run(capsys, "family", "--n", "3", "--out", str(path))[0] == 0
    assert from_record(path.read_text())[0].name == "epicycloid-3"
    assert run(capsys, "family", "--n", "1")[0] == 2


def test_console_script_is_installed():
    exe = shutil.which("surfaces")
    cmd = [exe] if exe else [sys.executable, "-m", "minsurf.cli"]
    res = subprocess.run(cmd + ["show", "nope"], capture_output=True, text=True)
    assert res.returncode == 2
    res = subprocess.run(cmd + ["list"], capture_output=True, text=True)
    assert res.returncode == 0 and "elliptic-catenoid" in res.stdout


# -- mesh ---------------------------------------------------------------------------------


def test_parse_grid():
    assert parse_grid("64x32") == (64, 32)
    assert parse_grid("3X3") == (3, 3)
    for bad in ("64", "1x4", "ax3", "2x2x2"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_mesh_masks_cells_across_exclusions():
    e = catalog.get("lorentzian-helicoid")
    from minsurf.enneper import DomainSpec, EnneperData, Exclusion, immerse_closed

    d = e.data
    wide = DomainSpec((-1.0, 1.0, -1.0, 1.0), (Exclusion("axis-u"),), basepoint=(0.5, 0.0))
    data = EnneperData(d.name, d.character, d.Lz, d.Pz, d.hz, wide, d.L, d.P, d.H, d.h_part)
    mesh = sample_mesh(immerse_closed(data), 9, 5)
    # the middle column u = 0 lies on the exclusion and is dropped
    assert mesh.holes[4].all() and not mesh.holes[3].any()
    assert len(mesh.faces) == 2 * 3 * 4
    assert mesh.faces.max() < len(mesh.vertices)
    # no quad straddles u = 0
    for f in mesh.faces:
        assert len(set(np.sign(mesh.u[f]))) == 1


def test_obj_and_csv_writers():
    e = catalog.get("enneper-1st-kind")
    from minsurf.enneper import immerse_closed

    mesh = sample_mesh(immerse_closed(e.data), 3, 2)
    obj = to_obj(mesh, "enneper")
    assert obj.startswith("# enneper\n# grid 3x2, 6 vertices, 2 faces\n")
    assert obj.count("\nv ") == 6 and obj.count("\nf ") == 2
    assert "-0 " not in obj and not obj.endswith("\n\n")
    csv = to_csv(mesh).splitlines()
    assert csv[0] == "u,v,x1,x2,x3" and len(csv) == 7
