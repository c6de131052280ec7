"""
A panel without volatility clustering
=====================================

Pure AR series with Gaussian innovations carry no ARCH effect. McLeod-Li
does not reject on the averaged residuals, the GARCH stage is skipped and
the report holds AR results only.
"""

import numpy as np

from sharedvol import Panel, run_pipeline
from sharedvol.ar import ARSpec, simulate_ar

rng = np.random.default_rng(45)
phis = rng.uniform(0.2, 0.8, 12)
cols = [simulate_ar(ARSpec((ph,)), rng.standard_normal(461))[200:] for ph in phis]
panel = Panel(np.column_stack(cols), tuple(f"roi{i:02d}" for i in range(12)))

report = run_pipeline(panel)
print("GARCH applicable:", report.garch_applicable)
for note in report.warnings:
    print("note:", note)

print("\nseries  true   final  (se)")
for label, ph, c, s in zip(panel.labels, phis, report.final_coefficients, report.final_standard_errors):
    print(f"{label}   {ph:.3f}  {c[0]:.3f}  ({s[0]:.3f})")
