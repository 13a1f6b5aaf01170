"""Compare transfer-operator spectral parameters for Gamma_0(5) with the Hejhal solver,
then check that the Green-form cocycle of the oracle's cusp form is proportional
to the cocycle read off the period function.

Run from the repository root:  python3 demos/oracle_vs_transfer_p5.py   (a few minutes)
"""
import numpy as np

from hecke_transfer.cohomology import cocycle_from_period
from hecke_transfer.green import FourierSum, cocycle_integral
from hecke_transfer.group import generators
from hecke_transfer.hejhal import HejhalSolver, fourier_sum_json
from hecke_transfer.search import extract_period_function, scan_line

res = scan_line(5, 48, 3, 0.5, 2.5, 5.0, 125, N_confirm=64)
for c in res.candidates:
    hits = []
    for eps in (1, -1):
        for parity in (0, 1):
            for R, err in HejhalSolver(5, eps, parity).find(c.t - 0.01, c.t + 0.01, step=0.0025):
                hits.append((R, eps, parity))
    print(f"transfer t = {c.t:.8f}  oracle {[(round(R, 8), e, q) for R, e, q in hits]}")

# the lowest form sits in the class (Fricke sign -1, odd)
t = res.candidates[0].t_confirm
form = FourierSum.from_json(fourier_sum_json(5, t, -1, 1))
pf = extract_period_function(5, complex(0.5, t), 64)
c = cocycle_from_period(pf.vector)
h1 = generators(5).h[1]
x = np.array([-1.0, 0.1, 0.5, 2.0])
ratio = cocycle_integral(form, form.s, h1)(x) / c.values["h1"](x)
print("Green-form cocycle / period-function cocycle:", np.round(ratio, 8))
