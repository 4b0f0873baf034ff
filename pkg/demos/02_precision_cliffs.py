#!/usr/bin/env python3
"""Where hyperbolic arithmetic falls off a cliff, per floating-point format.

The exponential map pushes tangent vectors toward the unit boundary as
tanh(||v||); once the format can no longer distinguish that value from 1,
the point collapses onto the boundary and the logarithm is undefined.
This script measures the cliff for binary16/32/64 and sketches how the
round-trip error grows on the way there.
"""

import numpy as np

from shgcn import Precision, roundtrip_residual, threshold_report
from shgcn.stability import reports_to_text

reports = [threshold_report(mode) for mode in Precision]
print(reports_to_text(reports), end="")

print()
print("round-trip relative error ||log0(exp0(v)) - v|| / ||v||, c = 1:")
print()
norms = [0.5, 1, 2, 3, 4, 4.4, 4.6, 6, 8, 9.2, 12, 16, 18.8, 19.2, 24]
header = f"{'||v||':>6} " + "".join(f"{m.value:>12}" for m in Precision)
print(header)
for norm in norms:
    v = np.array([norm, 0.0])
    cells = []
    for mode in Precision:
        res = roundtrip_residual(v, mode)
        cells.append(f"{'collapsed':>12}" if np.isinf(res) else f"{res:12.2e}")
    print(f"{norm:6.1f} " + "".join(cells))

print()
print("reading guide: each column stays accurate until its threshold above,")
print("then the exponential rounds onto the boundary and the trip is gone.")
