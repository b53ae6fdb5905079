"""
One-photon projections and the Laplace limit
=============================================

Checking the cavity for a single photon gives a filter that is maximal at
p = 0 and vanishes at p = +-1/|g_tau|. There is no closed form for P(N), but
for large N the filter is effectively Gaussian and the Laplace expansion
takes over. Here the quadrature values are compared with it.
"""

import math

from qdistill import cavity, spectral
from qdistill.cavity import GaussianParticleState, ModelParams, NumberOne

params = ModelParams(math.pi / 4, 5.0, NumberOne())
state = GaussianParticleState(p0=0.1, x0=0.0, dp0=0.2, dx0=5.0, pi0=1 / math.sqrt(2))

kernel = cavity.make_kernel(params, state)
rho = cavity.initial_density(state)
data = spectral.laplace_data(kernel, spectral.locate_peak(kernel))

g2 = cavity.coefficients(params).g_tau_mod_sq
print("curvature", data.curvature, "= 6|g_tau|^2 =", 6 * g2)

series = spectral.run_series(kernel, rho, [1, 2, 5, 10, 20, 50, 100, 200])
print(f"{'N':>4} {'P exact':>10} {'leading':>10} {'2nd order':>10} {'Pi exact':>10} {'Pi asym':>10}")
for row in series.rows:
    print(f"{row.n:4d} {row.p_exact:10.6f} {row.p_asym0:10.6f} {row.p_asym:10.6f}"
          f" {row.pi_exact:10.6f} {row.pi_asym:10.6f}")

# the leading Laplace term is exactly the familiar closed expression
n = 10
print()
print(cavity.survival_asym_number1(params, state, n), spectral.survival_asymptotic(data, rho, n, order=0))

# relative error of the leading term shrinks like 1/N
for n in (10, 40, 160):
    exact = spectral.survival_exact(kernel, rho, n)
    print(n, abs(exact / cavity.survival_asym_number1(params, state, n) - 1))
