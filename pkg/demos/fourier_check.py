"""
Checking the Fourier transform against a known period
=====================================================

Copying a mod 2^K into a second register makes the input register periodic
with period 2^K.  After the transform, y lands on multiples of 2^(L-K),
each with probability 1/2^K.
"""

import numpy as np

from qfn.machine_model import circuit_pulses
from qfn.shor_demo import build_mod2k, build_period_demo, y_distribution
from qfn.simulator import ft_reference_prob

L, K = 5, 2
demo = build_period_demo(build_mod2k(L, K), L)
p = y_distribution(demo, L)

for y in np.flatnonzero(p > 1e-12):
    print(f"y={y:2d} ({y:0{L}b})  P={p[y]:.4f}")

print("max gap to closed form:", np.abs(p - ft_reference_prob(L, 2**K).probabilities).max())

# smallest case: 2 pulses of preparation, one CNOT (5), transform (6)
print("L=2 K=1 pulses:", circuit_pulses(build_period_demo(build_mod2k(2, 1), 2)))
