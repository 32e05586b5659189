"""Where the infinitesimal PRC stops being useful.

The adjoint gives q(theta), the response to vanishingly small kicks. It is
excellent for tiny kicks and poor for a kick of 1.5, and the singular
prediction does better there. Small sample counts keep this quick.
"""

import warnings

import numpy as np

from relaxprc import (
    Impulse, MonodromyIllConditioned, build_orbit, convolve_iprc, find_limit_cycle,
    fitzhugh_nagumo, fold_points, iprc_adjoint, numeric_phase_shift, prc_numeric, prc_singular,
)

base = fitzhugh_nagumo()
orbit = build_orbit(fold_points(base))
theta = 2 * np.pi * np.arange(32) / 32

for eps in (0.1, 0.02):
    sys = base.with_epsilon(eps)
    cycle = find_limit_cycle(sys)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MonodromyIllConditioned)
        q = iprc_adjoint(sys, cycle, 512)
    tiny = 1e-4 * eps
    rel = max(abs(numeric_phase_shift(sys, cycle, Impulse(tiny), t) / tiny - q(t)) / abs(q(t))
              for t in theta[1::4])
    big = prc_numeric(sys, Impulse(1.5), len(theta), cycle=cycle)
    lin = convolve_iprc(q, Impulse(1.5), theta)
    sing = prc_singular(orbit, Impulse(1.5), len(theta))
    print(f"eps={eps}: T_f={cycle.period_fast:.1f}  tiny-kick rel. error {rel:.1e}  "
          f"alpha=1.5 error: adjoint {np.max(np.abs(big.shift - lin.shift)):.2f}, "
          f"singular {np.max(np.abs(big.shift - sing.shift)):.2f}")
