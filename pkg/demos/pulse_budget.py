"""
Where the pulses go
===================

Compare the closed-form average pulse counts of the five scratch-space
variants with counts taken from actually built networks.
"""

from qfn.cost_analysis import (
    MIN_SPACE, TABLE_VARIANTS, empirical_average, formula_pulses, leading_coefficients,
)

K, L = 8, 16
print(f"average pulses, K={K} L={L}")
for cfg in TABLE_VARIANTS:
    exact = formula_pulses(cfg, "avg", K, L)
    measured = empirical_average(cfg, K, L, trials=10, seed=0).mean_pulses
    lead = leading_coefficients(cfg)[1] * L * K * K
    print(f"  {cfg}: formula {float(exact):9.0f}  built {float(measured):9.0f}  leading term {lead}")

# the minimal-space network trades pulses (~K^4) for qubits
print("minimal space, K=4 L=2:", formula_pulses(MIN_SPACE, "avg", 4, 2))

# large instance, formula only
print("E2K1 at K=432, L=864: %.2e pulses" % float(formula_pulses("E2K1", "avg", 432, 864)))
