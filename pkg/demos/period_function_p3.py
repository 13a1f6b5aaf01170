"""Find a period function for Gamma_0(3), check it, and map it to the other cross section.

Run from the repository root:  python3 demos/period_function_p3.py
"""
import numpy as np

from hecke_transfer.cohomology import verification_report
from hecke_transfer.search import extract_period_function, scan_line
from hecke_transfer.transfer import (
    alternate_charts_p3,
    build_transfer,
    build_transfer_alt_p3,
    p3_isomorphism,
    pointwise_residual,
)

# a coarse scan around the lowest dip; the full range is what the CLI scan does
res = scan_line(3, 48, 3, 0.5, 4.0, 5.0, 50, N_confirm=64)
for c in res.candidates:
    print(f"dip at t = {c.t:.10f}  sigma_min = {c.sigma_min:.2e}  N=64 shift = {c.shift:.1e}")

t = res.candidates[0].t_confirm
pf = extract_period_function(3, complex(0.5, t), 64)
print("eigen residual", f"{pf.eigen_residual:.1e}", "constraint residual", f"{pf.constraint_residual:.1e}")

f = pf.vector
x = np.array([0.5, 1.0, 3.0])
print("f_1 at", x, "=", np.round(f.eval(x, 1), 6))

rep = verification_report(f)
print("worst relator residual", f"{max(rep['relators'].values()):.1e}")
print("parabolic residual", f"{rep['parabolic']:.1e}", "roundtrip", f"{rep['roundtrip']:.1e}")

g = p3_isomorphism(f)
r0 = pointwise_residual(build_transfer(3), f.s, f.evaluators(), f.charts)
r1 = pointwise_residual(build_transfer_alt_p3(), f.s, g.evaluators(), alternate_charts_p3())
print(f"residual under the first operator {r0:.1e}, under the alternate one {r1:.1e}")
