"""Integrate the reduced ODE of the sech family and watch RK4 converge.

Run: python3 demos/sech_reduced_ode.py
"""

import numpy as np

from riemann_kit.examples import ex1
from riemann_kit.superpose import GridSpec, integrate_reduced

cfg = ex1.Example1Config()
ode = ex1.reduced_rhs(cfg)
f0 = [1 / np.cosh(c) for c in (0.5, 0.8, 2.0)]
shifts = np.array([0.5, 0.8, 2.0])

prev = None
for step in (0.4, 0.2, 0.1, 0.05):
    tab = integrate_reduced(lambda r, f: ode(f)[:, None], f0, GridSpec([0.0], [10.0], [11]), max_step=step)
    exact = 1 / np.cosh(tab.axes[0][:, None] / (1 + cfg.M ** 2) + shifts)
    err = np.max(np.abs(tab.values - exact))
    ratio = "" if prev is None else f"  ratio {prev / err:.1f}"
    print(f"step {step:<5} max error {err:.2e}{ratio}")
    prev = err
