"""Smoke test for the Python bindings.

Build first with `cargo build -p superlie-py --release` (or install with
maturin). Without an installed module the script loads the shared library
straight from target/, newest build first.
"""

import importlib.util
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import superlie_py

        return superlie_py
    except ImportError:
        pass
    libs = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libsuperlie_py.so", "libsuperlie_py.dylib", "superlie_py.dll")
    ]
    libs = sorted((p for p in libs if p.exists()), key=lambda p: p.stat().st_mtime)
    if libs:
        lib = libs[-1]
        ext = ".pyd" if lib.suffix == ".dll" else ".so"
        dst = pathlib.Path(tempfile.mkdtemp()) / ("superlie_py" + ext)
        shutil.copy(lib, dst)
        spec = importlib.util.spec_from_file_location("superlie_py", dst)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
        return mod
    sys.exit("superlie_py not found; run `cargo build -p superlie-py --release` first")


def main():
    sl = load()
    assert "svect" in sl.families()

    g = sl.Algebra("svect", "3")
    assert g.sdim == (8, 9), g.sdim
    assert len(g) == 17
    assert g.check_axioms()
    assert g.cohomology(2) == (0, 1)
    d = g.deform("tau")
    assert d.check_axioms()

    assert sl.Algebra("spe", "3").is_isomorphic(g)
    assert sl.Algebra("psq", "3").cohomology(2) == (0, 0)
    assert sl.Algebra("osp_alpha", param="2").is_isomorphic(sl.Algebra("osp_alpha", param="-3"))

    table = sl.Algebra("osp", "1|2").to_dict()
    assert isinstance(table, dict)

    assert sl.line_bundle(-4) == (0, 3)
    assert sl.line_bundle(2) == (3, 0)
    ok, _ = sl.split(-2, ["tau:x^0"])
    assert ok
    ok, msg = sl.split(-4, ["tau:x^-1"])
    assert not ok and "non-split" in msg

    tower = sl.clifford_tower(4)
    assert tower[-1][1] == (6, 8), tower

    report = sl.run_suite("bott")
    assert report["pass"], report

    for bad in (lambda: sl.Algebra("nope", "3"), lambda: sl.run_suite("nope")):
        try:
            bad()
        except KeyError:
            pass
        else:
            raise AssertionError("expected KeyError")
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
