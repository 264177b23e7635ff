"""
Distances in the three planar shape quotients
=============================================

One landmark configuration, three notions of "same shape": modulo
rotations, modulo rotations and reflections, and modulo rotations,
reflections, and reading the landmarks backwards.  Each larger group can
only shrink the distance.
"""

import numpy as np

from shapespaces import shape_distance, to_preshape

# a small planar pentagon, coordinate rows by landmark columns
fish = np.array(
    [
        [0.0, 1.0, 2.0, 0.5, -1.0],
        [0.0, 0.5, -0.5, 1.5, 0.25],
    ]
)

# the same points mirrored (flip the y row) and read backwards
mirrored = fish * np.array([[1.0], [-1.0]])
backwards = fish[:, ::-1]

p = to_preshape(fish)
for name, other in (("mirrored", mirrored), ("backwards", backwards)):
    q = to_preshape(other)
    print(f"distance to the {name} copy")
    for kind in ("rotation", "reflection", "rr"):
        print(f"  {kind:12s} {shape_distance(p, q, kind):.6f}")

# the mirror image is a genuinely different rotation-shape but the same
# reflection-shape; the backwards reading stays distinct until the
# reverse-labeling group removes it as well
print()
print("a generic unrelated shape stays distant in every quotient")
other = to_preshape(np.array([[0.3, -1.1, 0.9, 1.8, -0.7], [1.2, 0.4, -0.9, 0.1, 0.6]]))
for kind in ("rotation", "reflection", "rr"):
    print(f"  {kind:12s} {shape_distance(p, other, kind):.6f}")
