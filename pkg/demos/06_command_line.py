"""The same workflows through the command line driver.

Each call below is equivalent to a shell command such as
``gbflow verify --initial "sine 0.2 1" --alpha0 1 --n 64 --t-end 0.02``.
Run directories land in a temporary folder.
"""

import tempfile
from pathlib import Path

from gbflow.cli import main

out = Path(tempfile.mkdtemp(prefix="gbflow-demo-"))

print("-- explicit solution, saved and re-verified from disk")
main(["run", "--initial", "constant 0", "--alpha0", "1", "--t-end", "1", "--n", "32",
      "--out", str(out / "explicit")])
main(["verify", str(out / "explicit")])

print("\n-- a deliberately oversized step breaks the energy balance (exit 1)")
code = main(["verify", "--initial", "sine 0.2 1", "--alpha0", "1", "--n", "64",
             "--t-end", "0.05", "--force-dt", "5e-3", "--out", str(out / "big")])
print(f"exit code {code}")

print("\n-- refinement ladder")
main(["convergence"])

print("\n-- figures")
main(["plot", str(out / "explicit")])

print("\n-- a small parallel sweep")
main(["sweep", "--n", "32", "--t-end", "0.01", "--param", "alpha0=0,1,2", "--workers", "2",
      "--out", str(out / "sweep")])
print((out / "sweep" / "sweep.csv").read_text())
