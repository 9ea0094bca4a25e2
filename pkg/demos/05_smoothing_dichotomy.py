#!/usr/bin/env python3
"""The filtered-vs-unfiltered smoothing dichotomy.

Wave packets concentrated at the edge frequency xi = pi sit exactly on the
critical point of the lattice symbol: the group velocity vanishes and the
packet refuses to disperse.  The smoothing quotient

    Q(h) = || <h^{-1} grad>^{(sigma-1)/2-eps} u ||_{L^inf_h L^2_T} / ||u_0||_{L^2_h}

then grows under mesh refinement for raw data, while data passed through
the coarse-to-fine filter (which annihilates the edge modes) keeps Q
h-uniform.  This is the measurable face of the smoothing-effect dichotomy.
"""

from fraclat import ModelParams, run_smoothing_experiment

params = ModelParams(alpha=1.5, beta=0.85)
rep = run_smoothing_experiment(
    params, [0.2, 0.1, 0.05, 0.025], extent=51.2, T=1.0, n_times=64
)

print(f"exponent (sigma-1)/2 - eps = {rep['delta']:.4f}")
print()
print(f"{'h':>7} {'width':>7} {'mass@pi':>8} {'Q unfiltered':>14} {'Q filtered':>12}")
for e in rep["entries"]:
    print(
        f"{e['h']:7.3f} {e['packet_width']:7.2f} {e['packet_spectral_mass']:8.4f} "
        f"{e['unfiltered']:14.6f} {e['filtered']:12.6f}"
    )

print()
print("growth ratios Q(h/2)/Q(h):")
print(f"  unfiltered: {[f'{r:.4f}' for r in rep['unfiltered_growth_ratios']]}  (lattice resonance)")
print(f"  filtered:   {[f'{r:.4f}' for r in rep['filtered_ratios']]}  (h-uniform)")
print(f"dichotomy (every unfiltered ratio above every filtered one): {rep['dichotomy']}")
