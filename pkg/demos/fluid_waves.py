"""Characteristic speeds and simple-wave elements of the rotating fluid.

Run: python3 demos/fluid_waves.py
"""

import numpy as np

from riemann_kit.chardata import dispersion_roots
from riemann_kit.fluid import FluidParams, FluidState, fluid_element, fluid_system

params = FluidParams(1.4, (0.0, 0.0, 1.0), (0.0, 0.0, 0.5))
state = FluidState(1.2, 0.9, (0.3, -0.1, 0.0))
sys = fluid_system(params)
d = np.array([1.0, 0.0, 0.0])

print("relative speed, multiplicity")
for root, mult in dispersion_roots(sys, state.u, d):
    print(f"  {root:+.6f}  x{mult}")

c = state.sound_speed(params.kappa)
for kind, opts in [("E", dict(direction=d, gamma_v=(0.0, 1.0, 0.0), gamma_rho=0.2)),
                   ("A", dict(direction=d, epsilon=1.0)),
                   ("H0", dict(direction=d, speed=0.5 * c))]:
    el = fluid_element(kind, state, params, **opts)
    print(f"{kind:>2}: residual {el.residual(sys, state.u):.1e}")
