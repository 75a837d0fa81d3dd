"""
Frequency weights and truncation counts
=======================================

Where the adaptive weights come from.  A low-rank cube concentrates its
energy in a few frequency slices; noise spreads it evenly.  The weights
follow the energy, and the truncation counts follow the singular value
profile of each slice.
"""

import numpy as np

from mdwtnn import apply_noise, build_weight_plan, case_spec
from mdwtnn.synthetic import cp_cube
from mdwtnn.tensor_core import permute_mode
from mdwtnn.weights import slice_singular_values

clean = cp_cube((40, 40, 12), 3, seed=2)
noisy = apply_noise(clean, case_spec(1, seed=3))

np.set_printoptions(precision=3, suppress=True, linewidth=110)

# leading singular values of the first few frequency slices, mode 3
print("clean, mode 3\n", slice_singular_values(clean)[:4, :5])
print("noisy, mode 3\n", slice_singular_values(noisy)[:4, :5])

# low-energy slices get large weights, so they are shrunk hardest
for name, cube in (("clean", clean), ("noisy", noisy)):
    plan = build_weight_plan(cube)
    print(f"\n{name}")
    for p in (1, 2, 3):
        w, tw = plan.mode(p)
        print(f"  mode {p}: w {w[:6]}  TW {tw[:6]}")

# eta sets how many leading values escape shrinkage
for eta in (0.05, 0.3, 0.6, 0.95):
    counts = build_weight_plan(noisy, eta=eta).mode(3)[1]
    print(f"eta {eta:4.2f}: mean TW {counts.mean():5.2f}")

# a cube built from three outer products has tubal rank 3 in every orientation
for p in (1, 2, 3):
    s = slice_singular_values(permute_mode(clean, p))
    print(f"mode {p}: max rank {int(np.max(np.sum(s > 1e-9 * s.max(), axis=1)))}")
