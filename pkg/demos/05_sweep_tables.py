"""
Tables for the ratio surfaces
=============================

Run a bundled preset and write a CSV table. The same is available from the
shell as ``ghzmag sweep --config fig2 --output fig2.csv``.
"""
import sys

from ghzmag import sweep

cfg = sweep.load_config("fig2")
rows = sweep.run_sweep(cfg)
out = sys.argv[1] if len(sys.argv) > 1 else "fig2.csv"
sweep.emit(rows, "csv", out)
print(f"{len(rows)} rows written to {out}")

for r in rows[:6]:
    print(r.L, r.m, r.scheme, f"{r.delta_eps_norm:.4g}", r.ratio and f"{r.ratio:.4g}", r.regime)
