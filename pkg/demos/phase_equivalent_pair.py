"""Two very different potentials, one set of phase shifts.

-6 sech^2 r binds one state at E = -1; 6 cosech^2 r binds nothing and is
infinitely repulsive at the origin.  Yet their phase shifts differ by
exactly pi at every energy, which no scattering experiment can detect.

Run:  python3 demos/phase_equivalent_pair.py
"""
import math

import numpy as np

from susyqm.potentials import PotentialModel, bound_state, eval_potential, partner_state
from susyqm.scattering import Method, phase_shift_curve

n = 1
deep, singular = PotentialModel.deep(n), PotentialModel.singular(n)

print("potentials")
print(f"{'r':>6} {'V_deep':>12} {'V_singular':>12}")
for r in (0.25, 0.5, 1.0, 2.0, 4.0):
    print(f"{r:6.2f} {eval_potential(deep, r):12.6f} {eval_potential(singular, r):12.6f}")

print("\nbound state of the deep well and the matching singular solution (E = -1)")
print(f"{'r':>6} {'Psi_1':>12} {'Phi_1':>12} {'Phi_1/Psi_1':>12}")
for r in (0.5, 1.0, 3.0, 6.0, 12.0):
    psi, phi = bound_state(n, 1, r), partner_state(n, 1, r)
    print(f"{r:6.2f} {psi:12.6e} {phi:12.6e} {phi / psi:12.8f}")
print("Phi_1 blows up at the origin, so the singular potential has no bound state,")
print("but it tends to Psi_1 far out.")

kappas = np.array([1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0])
exact = phase_shift_curve(n, kappas).deltas
numerov_deep = phase_shift_curve(n, kappas, Method.NUMEROV).deltas
numerov_sing = phase_shift_curve(n, kappas, Method.NUMEROV, singular=True).deltas

print("\nphase shifts (Numerov integration vs closed form)")
print(f"{'kappa':>8} {'deep':>12} {'exact':>12} {'singular':>12} {'difference/pi':>14}")
for k, a, e, s in zip(kappas, numerov_deep, exact, numerov_sing):
    print(f"{k:8.3f} {a:12.8f} {e:12.8f} {s:12.8f} {(a - s) / math.pi:14.10f}")
print("\nAt zero energy the deep phase is pi (one bound state) and the singular one is 0,")
print("as Levinson's theorem requires.  At high energy the deep phase falls off like")
print("3/kappa and the singular one approaches -pi, which is the same thing modulo pi.")
