"""
Command line runs and plot data
===============================

The ``indevo`` command writes deterministic reports plus tab-separated plot
data. This script drives it in-process and reads the table back.
"""

import io
import tempfile
from pathlib import Path

from indevo.cli import run
from indevo.dataio import load_plot_data, write_fixtures

out = Path(tempfile.mkdtemp())
gdp, capital, life = write_fixtures(out / "fixtures")

for argv in (["eval", "--t0", "1900", "--t1", "2200"],
             ["fit", gdp],
             ["shift", gdp, capital, "--normalization", "amplitude"],
             ["equilibrium"]):
    stream = io.StringIO()
    code = run(argv + ["--out", str(out)], stream)
    print(f"$ indevo {' '.join(argv[:1])} -> exit {code}")
    print("\n".join(stream.getvalue().splitlines()[-4:]), "\n")

table = load_plot_data(out / "eval.tsv")
print("eval.tsv columns:", ", ".join(table))
print("y at the last year:", table["y"].values[-1])
