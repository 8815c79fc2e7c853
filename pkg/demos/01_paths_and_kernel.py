"""Classical paths behind the semiclassical kernel, and where it is exact.

Run: python3 demos/01_paths_and_kernel.py
"""
import math

from powerwall import BoundaryProblem, Potential, enumerate_paths, k_free, k_harmonic, k_scl, scl_term

wall = Potential.quadratic(1.0)

# A start and end point left of the wall: for omega t < pi only the direct
# path exists, past a half period a bounce (type E) joins it.
for t in (2.0, 4.0):
    bp = BoundaryProblem(y=-1.0, x=-0.5, t=t)
    print(f"y=-1, x=-0.5, t={t}")
    for path in enumerate_paths(bp, wall):
        term = scl_term(path, wall)
        print(f"  type {path.path_type.value}: S={term.S:+.6f}  A2={term.A2:+.6f}  maslov={term.maslov}"
              f"  residual={term.residual}")

# Free-to-wall (type C) paths can come in pairs; their residual is the
# effective potential that the leading term fails to absorb.
bp = BoundaryProblem(y=-2.0, x=0.8, t=3.3)
print("\ny=-2, x=0.8, t=3.3")
for path in enumerate_paths(bp, wall):
    term = scl_term(path, wall)
    print(f"  type {path.path_type.value}: t1={path.t1:.6f}  S={term.S:+.6f}  residual={term.residual:+.4e}")

# Where only direct or only interior paths contribute, the sum reproduces
# the exact kernels to rounding.
print()
for y, x, t, ref in ((-1.0, -2.0, 1.0, k_free(-2.0, -1.0, 1.0)),
                     (0.7, 1.3, 2.0, k_harmonic(1.3, 0.7, 2.0, 1.0))):
    val = k_scl(BoundaryProblem(y, x, t), wall).value
    print(f"K_scl({x}, {t}; {y}) = {val:.12f}   exact {ref:.12f}   rel err {abs(val - ref) / abs(ref):.1e}")

# Origin to origin after exactly half a period every interior orbit
# returns, so no finite sum of terms describes the kernel there.
(special,) = enumerate_paths(BoundaryProblem(0.0, 0.0, math.pi), wall)
print(f"\norigin to origin at t = pi: {special.path_type.name} (action {scl_term(special, wall).S})")
