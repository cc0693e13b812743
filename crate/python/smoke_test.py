"""Smoke test for the sepcert_py extension.

Uses an installed module if there is one, otherwise the library built by
`cargo build --release -p sepcert-py --features extension-module`.
"""

import importlib
import math
import shutil
import sys
import tempfile
from pathlib import Path


def load():
    try:
        return importlib.import_module("sepcert_py")
    except ImportError:
        pass
    root = Path(__file__).resolve().parent.parent
    for name in ("libsepcert_py.so", "libsepcert_py.dylib", "sepcert_py.dll"):
        lib = root / "target" / "release" / name
        if lib.exists():
            tmp = Path(tempfile.mkdtemp())
            suffix = ".pyd" if name.endswith(".dll") else ".abi3.so"
            shutil.copy(lib, tmp / ("sepcert_py" + suffix))
            sys.path.insert(0, str(tmp))
            return importlib.import_module("sepcert_py")
    sys.exit("sepcert_py not found; build it with cargo build --release -p sepcert-py --features extension-module")


def main():
    s = load()

    assert s.bank_ids() == ["ghz4-trisep", "cluster4-fullsep", "cluster4-trisep"]
    assert abs(s.gm([1, 1, 1, 1]) - math.sqrt(2)) < 1e-12

    expected = {"ghz4-trisep": ("ghz4", "1/5"), "cluster4-fullsep": ("cluster4", "1/9"), "cluster4-trisep": ("cluster4", "5/21")}
    for wid, (state, frac) in expected.items():
        p, exact = s.Witness.from_bank(wid).threshold(state, starts=16)
        assert exact == frac, (wid, exact)
        num, den = map(int, frac.split("/"))
        assert abs(p - num / den) < 1e-6, (wid, p)

    w = s.Witness(2, [("XX", 1.0), ("ZZ", 1.0)])
    assert abs(w.bound("full") - 1.0) < 1e-9
    bell = [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]
    assert abs(w.inner(bell) - 2.0) < 1e-12

    assert s.XState.noisy_ghz3(0.15).is_separable()
    assert s.XState.noisy_ghz3(0.15).decomposition_residual() < 1e-9
    assert not s.XState.noisy_ghz3(0.25).is_separable()

    entries = dict(s.char_function(s.named_state("ghz3")))
    assert entries["XXX"] == 1.0 and entries["III"] == 1.0
    mixed = dict(s.char_function(s.named_state("ghz3", p=0.0)))
    assert list(mixed) == ["III"]

    for bid in s.bank_ids():
        ok, error = s.verify_builtin(bid)
        assert ok and error < 1e-12, bid

    try:
        s.Witness.from_bank("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown id accepted")

    print("sepcert_py smoke test passed")


if __name__ == "__main__":
    main()
