"""Builds the extension with cargo, imports it and checks a few known values."""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build() -> Path:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "ca-decoders-py"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libca_decoders_py.so"
    out = Path(tempfile.mkdtemp()) / "ca_decoders.so"
    shutil.copy(lib, out)
    return out.parent


def main() -> None:
    sys.path.insert(0, str(build()))
    import ca_decoders as cd

    assert abs(cd.ml_pl_repetition(0.1, 3) - 0.028) < 1e-12
    assert abs(cd.lifetime_level1(3, 0.1) * cd.p_maj(0.1) - 1.0) < 1e-12
    upper, lower = cd.chernoff_bounds(10, 0.9, 0.9)
    assert upper == 1.0 and lower < upper

    s = cd.RepetitionState(7, 0b0010110)
    fin, n_sigs = cd.Scala1D.run_code_capacity(s)
    assert fin.bits == 0 and n_sigs == 12, (fin, n_sigs)

    ca = cd.Scala1D(5)
    st = cd.RepetitionState(5)
    st.flip(2)
    while st.syndrome():
        ca.step(st)
    assert st.bits == 0

    pairs, weight = cd.MatchingOracle(5).match_defects([(0, 0), (0, 4), (2, 2), (3, 3)])
    assert weight == 3 and len(pairs) == 2

    a = cd.simulate("scala1d", 5, "code-capacity", 0.3, seed=7, shots=20000)
    b = cd.simulate("scala1d", 5, "code-capacity", 0.3, seed=7, shots=20000)
    a.pop("wall_ms")
    b.pop("wall_ms")
    assert a == b and a["schema_version"] == 1
    assert abs(a["estimate"] - cd.ml_pl_repetition(0.3, 5)) < 4 * a["se"]

    try:
        cd.simulate("har1d", 5, "code-capacity", 0.1, seed=1)
    except ValueError as e:
        assert "power of 3" in str(e)
    else:
        raise AssertionError("har1d accepted d = 5")

    print(json.dumps(a))
    print("smoke test passed")


if __name__ == "__main__":
    main()
