"""
Distilling a particle's momentum with coherent-state projections
================================================================

A particle in a mixed Gaussian state is coupled to a cavity mode. After each
interval the cavity is checked for the coherent state it started in. Every
successful check narrows the particle's momentum distribution around a single
selected value, so the state grows purer while the success probability falls
off only like 1/sqrt(N).
"""

import math

from qdistill import cavity, spectral
from qdistill.cavity import Coherent, GaussianParticleState, ModelParams

params = ModelParams(omega_tau=math.pi / 4, g_tilde=5.0, cavity=Coherent(1.0, math.pi))
state = GaussianParticleState(p0=0.1, x0=0.0, dp0=0.2, dx0=5.0, pi0=1 / math.sqrt(2))

kernel = cavity.make_kernel(params, state)
rho = cavity.initial_density(state)

# the filter picks out p* = Re b / |g_tau|^2
p_star = spectral.locate_peak(kernel)
print("selected momentum", p_star, "analytic", cavity.selected_momentum(params))

# with gamma = pi the selected momentum survives every check with certainty
data = spectral.laplace_data(kernel, p_star)
print("Lambda(p*)", data.big_lambda_star, "curvature", data.curvature)

print()
print(f"{'N':>4} {'P exact':>10} {'P closed':>10} {'Pi exact':>10} {'Pi closed':>10}")
for n in (0, 1, 2, 5, 10, 20, 50, 100):
    print(f"{n:4d} {spectral.survival_exact(kernel, rho, n):10.6f}"
          f" {cavity.survival_closed_coherent(params, state, n):10.6f}"
          f" {spectral.purity_exact(kernel, rho, n):10.6f}"
          f" {cavity.purity_closed_coherent(params, state, n):10.6f}")

# 1 - Pi decays like 1/N; the prefactor is (1/pi0^2 - 1) / (2 dp0^2 * 2|g_tau|^2)
limit = (1 / state.pi0**2 - 1) / (2 * state.dp0**2 * data.curvature)
for n in (50, 200, 800):
    print(n, (1 - spectral.purity_exact(kernel, rho, n)) * n, "->", limit)

# Rotating the cavity phase away from gamma = pi costs an exponential factor.
off = ModelParams(math.pi / 4, 5.0, Coherent(1.0, math.pi / 2))
off_kernel = cavity.make_kernel(off, state)
print()
print("gamma = pi/2, decay per measurement", cavity.coherent_decay_rate(off))
for n in (10, 100, 1000):
    p = spectral.survival_exact(off_kernel, rho, n)
    print(n, p, math.log(p) / n)
