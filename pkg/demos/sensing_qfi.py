"""AC-field sensing with the kicked chain: quantum Fisher information.

Attaches a resonant AC probe (frequency pi/T, the period-doubling
frequency) at zero amplitude and tracks the QFI of the evolved state.
The ratio F / (N (2t/pi)^2) compares against N uncorrelated spins run
through an ideal echo protocol; above 1 means beating the standard
quantum limit.
"""

import math

import numpy as np

import kickedchain as kc

T_MAX, R = 300, 40
ac = kc.ACFieldParams(h_ac=0.0, omega=math.pi, theta=0.0)

print("ideal echo benchmark (J1=J2=D=h=0, phi=pi, theta_j=pi/2):")
params = kc.ChainParams(N=4, J1=0, J2=0, D=0, h=0, phi=math.pi)
prop = kc.FloquetPropagator.build(params, kc.DisorderRealization.draw(0.0, 4, 0, 0))
pair = kc.DerivativePair.initial(kc.prepare_initial_state(4, np.full(4, math.pi / 2)))
for n in range(50):
    pair = kc.evolve_period_with_derivative(prop, ac, n, pair)
f = kc.qfi(pair)
print(f"  F(50T) = {f:.4f}, SQL ratio = {kc.sql_ratio(f, 4, 50.0):.6f}  (exactly 1)")
print()

print(f"kicked chain sensor, R={R} disorder realizations:")
for h in (1.0, 7.0):
    for N in (4, 6):
        params = kc.ChainParams(N=N, J1=-1.0, J2=0.25, D=0.0, h=h, phi=3.05)
        stats = kc.run_ensemble(params, ac, R=R, seed=99, t_max=T_MAX, workers=1)
        ratio, argmax_t = stats.max_qfi_ratio()
        print(f"  h={h} N={N}: max_t F/(N(2t/pi)^2) = {ratio:.3f} at t = {argmax_t:.0f}, "
              f"t* = {stats.lifetime}")
print()
print("In the ordered phase the sensor keeps accumulating signal for as long")
print("as the period doubling survives, so the optimum tracks the lifetime.")
