"""Size of the first Neumann correction against its a-priori envelope.

The correction integrates K_scl against the residual kernel over the
interior time.  Its norm is bounded by D C^2 t^2 / 2 ||phi|| with D the
sup of the residual and C the operator norm of the kernel; on a window
that avoids the caustics both are finite and the bound holds with room.

Run: python3 demos/03_neumann_first_term.py   (about 15 s)
"""
import numpy as np

from powerwall import NeumannQuadrature, Potential
from powerwall.validation import neumann_bound_check

quad = NeumannQuadrature((-5.0, 5.0), (-2.5, -0.2), panels=6, order=6, outer_nodes=36, min_leg=0.05)
r = neumann_bound_check(Potential.quadratic(1.0), 2.0, np.linspace(-6.0, 6.0, 241), -1.0, 0.3, quad)
print(f"D = {r.D:.3g}   C = {r.C:.3f}   ||phi|| = {r.phi_norm:.3f}")
print(f"||K Q phi|| = {r.norm:.3g}   envelope = {r.envelope:.3g}   holds: {r.passed}")
