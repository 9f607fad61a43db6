"""
The fermicorr command line
==========================

The same pipeline from the shell. Each command writes its result with a
provenance block (config hash, seed, tool version); re-running with the
same inputs reproduces the output byte for byte.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())
base = {"omega0_rad_per_s": 3e15, "coherence_time_s": 1e-14,
        "group_speed_m_per_s": 1e6, "intensity_per_m2_s": 4e13}
(work / "base.json").write_text(json.dumps(base))
(work / "det.json").write_text(json.dumps({"eta": 1.0, "area_m2": 1.0, "bin_width_s": 1.25e-15}))


def fermicorr(*args):
    cmd = [sys.executable, "-m", "fermicorr.cli", *map(str, args)]
    done = subprocess.run(cmd, capture_output=True, text=True)
    print("$ fermicorr", " ".join(map(str, args)), "->", done.returncode)
    return done


# a model whose coherence time comes from a 0.2 eV spread
fermicorr("coherence-time", "0.2eV", "--model", work / "base.json", "--out", work / "model.json")
fermicorr("curve", "--model", work / "model.json", "--out", work / "curve.csv")
print("".join((work / "curve.csv").read_text().splitlines(True)[:4]))

fermicorr("sample", "--model", work / "base.json", "--detector", work / "det.json",
          "--grid", "n=32", "--n-samples", "5000", "--seed", "7", "--out", work / "g2.json")
g2 = json.loads((work / "g2.json").read_text())
print("g2 at lags 1..4:", [round(x, 3) for x in g2["g2"][:4]])

bad = fermicorr("sample", "--model", work / "base.json", "--detector", work / "det.json",
                "--grid", "n=32", "--n-samples", "0", "--out", work / "x.json")
print(bad.stderr.strip())
