"""Period doubling and its death: ergodic vs prethermally ordered chains.

Runs small disorder ensembles at weak (h=1) and strong (h=7) disorder and
prints the stroboscopic magnetization. At strong disorder the sign flips
every period while the envelope survives; at weak disorder the signal is
gone within tens of periods.
"""

import numpy as np

import kickedchain as kc

N, R, T_MAX = 6, 50, 400

for h in (1.0, 7.0):
    params = kc.ChainParams(N=N, J1=-1.0, J2=0.25, D=0.0, h=h, phi=3.05)
    stats = kc.run_ensemble(params, R=R, seed=2024, t_max=T_MAX, workers=1)
    t_star = stats.lifetime
    label = t_star if t_star is not None else f">{T_MAX} (capped)"
    print(f"h = {h}: lifetime t* = {label}")
    print("  n    <S_z>     envelope")
    for n in (0, 1, 2, 3, 10, 50, 100, 200, 400):
        print(f"  {n:3d}  {stats.sz_mean[n]:+.4f}   {abs(stats.sz_mean[n]):.4f}")
    sat = kc.SaturationWindow.default(T_MAX)
    print(f"  entanglement saturation: {kc.saturation_average(stats.ent_mean, sat):.3f} bits")
    print(f"  coherence saturation:    {kc.saturation_average(stats.coh_mean, sat):.3f} bits")
    print()

print("At h=7 the magnetization alternates sign each period (period-2 response")
print("to a period-1 drive) and the entanglement saturates well below the")
print("weak-disorder value: the prethermal time-crystal fingerprint.")
