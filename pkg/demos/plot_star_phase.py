"""
Hub and leaves of a star network
================================

A star with nine leaves, second-order nodes. Below the natural frequency
the hub responds more strongly than the leaves; above it the order flips.
The leaves are interchangeable, so their responses coincide at every
frequency.
"""

import numpy as np

from netsense import dynamics, netgen, sensitivity, spectral

# build the star and read off its top eigenvalue
g = netgen.generate(netgen.GraphSpec("star", n=10))
A = netgen.interaction_matrix(g)
dec = spectral.decompose(A)
lam1 = dec.eigenvalues[0]
print(f"lambda_1 = {lam1:.4f}, w_1 = {dec.weights[0]:.4f}")

# lightly damped oscillators, gain kept 10% inside the stability limit
dyn = dynamics.second_order(1.0, 0.01, 0.9 / lam1)

# node responses at a few frequencies
for omega in (0.25, 0.5, 1.0, 2.0, 3.0):
    x = sensitivity.node_sensitivity(A, dyn, omega)
    hub, leaf = abs(x[0]), abs(x[1])
    side = "hub" if hub > leaf else "leaf"
    print(f"omega = {omega:4.2f}  |hub| = {hub:9.4f}  |leaf| = {leaf:9.4f}  larger: {side}")

# the whole curve; locate where the two magnitudes cross
sw = sensitivity.sweep(A, dec, dyn, sensitivity.default_grid(dyn))
hub = np.abs(sw.node_response[:, 0])
leaf = np.abs(sw.node_response[:, 1])
flip = np.flatnonzero(np.diff(np.sign(hub - leaf)))
print("magnitude order flips near omega =", np.round(sw.omegas[flip], 3))
