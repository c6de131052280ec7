"""
Reading AR orders off the correlogram
=====================================

Simulate a few AR processes, look at their sample ACF and PACF against the
2/sqrt(T) band and let ``identify_ar_order`` pick the order.
"""

import numpy as np

from sharedvol.ar import ARSpec, fit_ar, identify_ar_order, simulate_ar
from sharedvol.core import sample_acf, sample_pacf, significance_limit

rng = np.random.default_rng(1)
T = 2000
band = significance_limit(T)
print(f"T = {T}, significance band +-{band:.4f}\n")

# three processes: white noise, AR(1), AR(2)
cases = {"white noise": (), "AR(1) 0.8": (0.8,), "AR(2) 0.5, 0.3": (0.5, 0.3)}

for name, coefs in cases.items():
    y = simulate_ar(ARSpec(coefs), rng.standard_normal(T + 200))[200:]
    acf, pacf = sample_acf(y, 6), sample_pacf(y, 6)
    print(name)
    print("  lag   acf     pacf")
    for k in range(6):
        flag = "*" if abs(pacf[k]) > band else " "
        print(f"  {k + 1:>3} {acf[k]:+.3f}  {pacf[k]:+.3f}{flag}")
    u = identify_ar_order(y)
    print(f"  identified order: {u}")
    if u:
        fit = fit_ar(y, u)
        est = ", ".join(f"{c:.3f} ({s:.3f})" for c, s in zip(fit.coefficients, fit.standard_errors))
        print(f"  OLS estimates (se): {est}")
    print()

# the ACF of an AR(1) decays geometrically while the PACF stops after lag 1;
# the order rule counts the leading run of PACF lags outside the band.
