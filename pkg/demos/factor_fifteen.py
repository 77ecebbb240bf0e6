"""
Factoring 15 on six qubits
==========================

Two input qubits are enough for x = 7: the order is 4, so x^a mod 15 only
needs a mod 4.  We build the lookup circuit three ways, run order finding,
and post-process each sample with continued fractions.
"""

from qfn.machine_model import circuit_pulses
from qfn.shor_demo import STYLES, build_expn15, build_period_demo, run_factoring_experiment

# pulse cost of the function circuit for each construction
for style in STYLES:
    print(f"{style:>15}: {circuit_pulses(build_expn15(7, style))} pulses")

# the whole experiment: uniform input, function, Fourier transform
demo = build_period_demo(build_expn15(7, "custom"), 2)
print("full demo with custom gates:", circuit_pulses(demo), "pulses")

rep = run_factoring_experiment(15, 7, 2, seed=1, trials=2000)
print("P(y):", [round(p, 3) for p in rep.y_probabilities])
print("y counts:", rep.y_counts())

# y = 1 and y = 3 give r = 4 and gcd(7^2 +- 1, 15) = 3, 5
# y = 2 gives r = 2, which fails 7^2 = 1 mod 15; y = 0 says nothing
print("success rate:", rep.success_rate)
for y in range(4):
    t = next(t for t in rep.trials if t.y == y)
    print(f"  y={y}: r={t.r} factors={t.factors} {t.reason}")
