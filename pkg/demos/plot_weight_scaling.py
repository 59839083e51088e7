"""
How the first-mode weight scales with network size
===================================================

In ER graphs the all-ones direction concentrates on the top eigenvector
as N grows, so 1 - w_1 shrinks. In BA graphs w_1 itself decays and the
residue takes over. Small sizes keep this demo quick; the acceptance
suite runs the full range.
"""

import sys
from pathlib import Path

from netsense import analysis, netgen
from netsense.plotting import scaling_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)
sizes = [128, 256, 512, 1024]

for template, mode in ((netgen.GraphSpec("er", p=0.05, seed=3), "er"),
                       (netgen.GraphSpec("ba", m=5, seed=3), "sf")):
    res = analysis.weight_scaling(template, sizes, trials=5, mode=mode)
    label = "log(1 - w_1)" if mode == "er" else "log(w_1)"
    print(f"{template.kind}: medians {res.medians.round(4)}; "
          f"{label} ~ {res.slope:.3f} log N (R^2 {res.r2:.3f})")
    scaling_svg(res, out / f"scaling_{template.kind}.svg")
