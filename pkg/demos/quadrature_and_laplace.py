"""
The numerical building blocks
=============================

Adaptive Gauss-Kronrod integration in one and two dimensions, the
Richardson-corrected second derivative and the Laplace width Delta_N.
"""

import math

import numpy as np

from qdistill import quadrature

r = quadrature.integrate_1d(lambda x: np.exp(-x * x), -8, 8)
print(r.value, math.sqrt(math.pi), r.error_estimate, r.evaluations)

# A peak of width 1e-4 falls between the nodes of the initial intervals and
# integrates to nothing. Breakpoints that bracket it, tails included, fix that.
# A breakpoint on the peak alone is not enough since no node sits on an
# interval end.
narrow = lambda x: np.exp(-((x - 0.3) ** 2) / 2e-8)
print(quadrature.integrate_1d(narrow, -5, 5).value)
print(quadrature.integrate_1d(narrow, -5, 5, points=[0.3 - 8e-4, 0.3 + 8e-4]).value,
      math.sqrt(2e-8 * math.pi))

r = quadrature.integrate_2d(lambda x, y: np.exp(-x * x - y * y), ((-8, 8), (-8, 8)))
print(r.value, math.pi, r.evaluations)

value, err = quadrature.second_derivative_with_error(np.cos, 0.0, 1e-3)
print(value, err)

# for |lambda|^2N ~ exp(-N Lambda'' x^2 / 2) the width is 1/sqrt(N Lambda'')
curv = 2 * 100 * math.sin(math.pi / 8) ** 2
for n in (1, 10, 100):
    print(n, 1 / math.sqrt(n * curv))
