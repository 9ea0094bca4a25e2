#!/usr/bin/env python3
"""Mesh-refinement study: the lattice model converges to the continuum one.

The filtered lattice solutions are linearly interpolated onto a fine
reference grid and compared - snapshot by snapshot - against a
pseudo-spectral solution of the continuum equation (multiplier |xi|^alpha,
no filter).  The linear study isolates the symbol mismatch and exhibits
the h^{2-alpha} rate; the nonlinear study shows monotone convergence of
both the sup-in-time Sobolev distance and the full contraction norm.

Desk-scale run, about half a minute.
"""

import numpy as np

from fraclat import ModelParams, run_continuum_study

f = lambda x: 0.8 * np.exp(-((np.asarray(x) / 2.0) ** 2)).astype(complex)
params = ModelParams(alpha=1.5, beta=0.85, p=3, sign=1, s=0.25)

print("=== linear study (nonlinearity off): target order 2 - alpha = 0.5 ===")
lin = run_continuum_study(
    params, [0.2, 0.1, 0.05, 0.025], 0.00625, f,
    extent=51.2, T=1.0, m_steps=16, linear_only=True,
)
for (h, e), (_, e2) in zip(lin["pairs"], lin["l2_errors"]):
    print(f"h = {h:6.4f}:  sup_t H^s err = {e:.5f}   sup_t L2 err = {e2:.5f}")
print(f"fitted order (H^s): {lin['fitted_order']:.3f}")

print()
print("=== nonlinear study (p = 3, defocusing, filtered) ===")
rep = run_continuum_study(
    params, [0.2, 0.1, 0.05], 0.0125, f,
    extent=51.2, T=0.4, m_steps=256,
)
for (h, e), (_, lam) in zip(rep["pairs"], rep["lambda_errors"]):
    print(f"h = {h:6.4f}:  sup_t H^s err = {e:.5f}   Lambda_T err = {lam:.5f}")
print(f"strictly decreasing: H^s {rep['monotone']}, Lambda_T {rep['lambda_monotone']}")
print(f"fitted order {rep['fitted_order']:.3f} (qualitative target {rep['target_order']})")
print(f"contraction horizon used: T = {rep['T_used']}")
worst = max(
    (r[i] / r[i - 1] for r in rep["residuals"].values() for i in range(1, len(r))),
    default=float("nan"),
)
print(f"worst Picard residual ratio across the sweep: {worst:.3f}")
