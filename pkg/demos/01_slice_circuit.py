"""
A slice circuit on the Bloch sphere
===================================

Two half-turns of |+> about tilted axes bring the state back to where it
started. The phase it picks up depends only on the area of the loop.
"""

import numpy as np

from aagate import pancharatnam_phase, slice_circuit, solid_angle

# the loop for theta = pi/8 is a lune with opening angle 2 theta
loop = slice_circuit(np.pi / 8)
print("closed:", loop.is_closed, " samples:", len(loop.points))

# halfway round the state sits on -x
print("midpoint:", np.round(loop.points[len(loop.points) // 2], 12))

# solid angle 4 theta, phase 2 theta
for n in (1, 2, 4, 6):
    theta = n * np.pi / 16
    loop = slice_circuit(theta)
    omega = solid_angle(loop)
    gamma = pancharatnam_phase(loop)
    print(f"theta = {n}pi/16   Omega = {omega:+.6f}   gamma = {gamma:+.6f}   gamma/Omega = {gamma / omega:+.3f}")
