"""Smoke test of the Python extension.

Build it first with `cargo build --release -p omthermo-py`; the script loads
the shared library from target/ (or the path in OMTHERMO_PY_LIB).
"""

import json
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("OMTHERMO_PY_LIB")
    candidates = [Path(lib)] if lib else [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libomthermo_py.so", "libomthermo_py.dylib", "omthermo_py.dll")
    ]
    for c in candidates:
        if c.exists():
            d = tempfile.mkdtemp()
            suffix = ".pyd" if c.suffix == ".dll" else ".so"
            shutil.copy(c, Path(d) / f"omthermo_py{suffix}")
            sys.path.insert(0, d)
            import omthermo_py

            return omthermo_py
    sys.exit("extension not built; run cargo build --release -p omthermo-py")


def main():
    om = load()
    dev = om.DeviceParams()
    probe = om.ProbeParams(nbar=dev.nbar_for_cooperativity(0.01), t_bath=294.0)
    assert abs(dev.cooperativity(probe.nbar) - 0.01) < 1e-12

    w = [dev.omega_m + k * dev.gamma_m / 10 for k in range(-50, 51)]
    q_re, q_im = om.quantum_correlation_spectrum(w, dev, probe)
    t_re, t_im = om.thermal_correlation_spectrum(w, dev, probe)
    assert len(q_re) == len(w)
    for k in (0, 50, 100):
        c = om.coth_ratio(w[k], 294.0)
        assert abs(t_re[k] / t_im[k] - c) < 1e-9 * c
    quantum, thermal = om.peaks(dev, probe)
    print(f"quantum/thermal peak at 294 K, C=0.01: {quantum / thermal:.3e}")
    assert 1e-4 < quantum / thermal < 4e-4

    t, st = om.temperature_from_coth_ratio(om.coth_ratio(dev.omega_m, 22.0), 0.01, dev.omega_m)
    assert abs(t - 22.0) < 1e-6 and st > 0

    try:
        om.ProbeParams(t_bath=-1.0)
    except ValueError as e:
        print(f"rejected: {e}")
    else:
        raise AssertionError("negative temperature accepted")

    config = "probe.temperature: 294 K\nprobe.cooperativity: 1\nsynth.duration: 0.1 s\n"
    assert "probe.temperature" in om.canonical_config(config)
    with tempfile.TemporaryDirectory() as out:
        out = Path(out)
        files = om.simulate(config, out)
        assert sum(f.endswith(".omr") for f in files) == 4
        om.analyze(config, out / "records", out)
        report = json.loads(om.thermometry(config, out / "spectra", out))
        ratio = next(s for s in report["summary"] if s["method"] == "ratio")
        print(f"T = {ratio['t']:.1f} ± {ratio['sigma_t']:.1f} K (bath 294 K)")
        assert abs(ratio["t"] - 294.0) < 4 * ratio["sigma_t"]
        assert math.isfinite(ratio["sigma_t"])
    print("ok")


if __name__ == "__main__":
    main()
