"""Tiny disorder-vs-kick-angle phase map, printed as text.

A scaled-down version of the lifetime map: a 4x4 grid over (h, phi) with a
short horizon. Capped cells (lifetime beyond the horizon) mark the ordered
lobe near phi = pi at strong disorder.
"""

import math

import numpy as np

import kickedchain as kc

grid = kc.SweepGrid(
    axes=(
        kc.SweepAxis("h", tuple(np.linspace(1.0, 7.0, 4))),
        kc.SweepAxis("phi", tuple(np.linspace(2.8, math.pi, 4))),
    ),
    params=kc.ChainParams(N=5, J1=-1.0, J2=0.25, D=0.0),
    ac=None,
    R=20,
    t_max=2000,
    seed=11,
)

cells = kc.run_sweep(grid, workers=1)

phis = grid.axes[1].values
print("lifetime t* (periods); '>' = still alive at the horizon")
print("         " + "  ".join(f"phi={p:5.3f}" for p in phis))
for h in grid.axes[0].values:
    row = [c for c in cells if c.coords["h"] == h]
    cellstr = [
        f"{('>' + str(grid.t_max)) if c.lifetime is None else c.lifetime:>9}" for c in row
    ]
    print(f"h={h:4.1f}  " + "  ".join(cellstr))

print()
print("entanglement saturation (bits): low values track the long-lived lobe")
for h in grid.axes[0].values:
    row = [c for c in cells if c.coords["h"] == h]
    print(f"h={h:4.1f}  " + "  ".join(f"{c.ent_sat:9.3f}" for c in row))
