"""
The unit-sphere chart of triangle shapes
========================================

Rotation-shapes of three planar landmarks fill a round 2-sphere.  The
chart sends equilateral triangles to the poles (one pole per handedness),
collinear triples to the equator, and mirroring a triangle flips the
second coordinate, so the reflection-shape space is the closed upper half.
"""

import numpy as np

from shapespaces import hopf_from_preshape, to_preshape

equilateral = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, np.sqrt(3) / 2]])
collinear = np.array([[-1.0, 0.0, 2.0], [0.0, 0.0, 0.0]])
scalene = np.array([[0.0, 2.0, 0.4], [0.0, 0.1, 0.9]])

for name, config in (("equilateral", equilateral), ("collinear", collinear), ("scalene", scalene)):
    point = hopf_from_preshape(to_preshape(config))
    mirrored = hopf_from_preshape(to_preshape(config * [[1.0], [-1.0]]))
    print(f"{name:12s} chart point {np.round(point, 6)}  mirrored {np.round(mirrored, 6)}")

# the y coordinate is the handedness: +-1 at the equilateral poles,
# exactly 0 for degenerate (collinear) triangles
print()
rng = np.random.default_rng(4)
ys = []
for _ in range(2000):
    triangle = rng.standard_normal((2, 3))
    ys.append(hopf_from_preshape(to_preshape(triangle))[1])
ys = np.array(ys)
print(f"handedness coordinate over 2000 random triangles:"
      f" min {ys.min():.3f}, max {ys.max():.3f} (bounded by the poles)")
print(f"fraction left-handed: {np.mean(ys < 0):.3f} (generic triangles split evenly)")
