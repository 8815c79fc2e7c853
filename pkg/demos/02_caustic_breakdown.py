"""The leading term fails at caustics: residual blow-up and wavepacket error.

A Gaussian packet is sent into the quadratic wall and evolved both with
the semiclassical kernel and with Crank-Nicolson.  Before the reflected
packet folds the two agree; afterwards the kernel is wrong.  The residual
scan shows why: Delta A / A grows like the fourth inverse power of the
caustic denominator.

Run: python3 demos/02_caustic_breakdown.py   (about a minute)
"""
from powerwall import Potential, Window, scan_residual
from powerwall.validation import wavepacket_errors

wall = Potential.quadratic(1.0)

for r in wavepacket_errors(wall, [1.5, 3.36]):
    print(f"t={r.t:5.2f}  L2 error {r.l2_error:.2e}  ({r.seconds:.0f} s)")

clean = scan_residual(wall, Window((0.5, 2.0), (-2.0, -0.5), (0.2, 1.0)))
fold = scan_residual(wall, Window((0.3, 1.5), (-2.5, -1.5), (3.4, 3.9)))
print(f"\nwindow without caustic: sup |Delta A / A| = {clean.sup_residual:.4f}, finite: {clean.verdict_i}")
print(f"window across the fold: refinement sups {[f'{s:.3g}' for s in fold.refinement_sups]}")
print(f"  fitted exponent in the denominator: {fold.denom_exponent:.2f}")
