"""
Bringing your own spectral kernel
=================================

Nothing in the spectral core knows about cavities. Any complex function with
|lambda| <= 1 on a bracket can be repeated N times and applied to any density
kernel. This script distils a thermal-like Gaussian state with a filter that
has a kink at its maximum and a slow phase twist.
"""

import numpy as np

from qdistill import spectral
from qdistill.spectral import DensityKernel, SpectralKernel


def lam(e):
    e = np.asarray(e, dtype=float)
    return np.exp(-0.3 * (e - 0.5) ** 2 - 0.05 * np.abs(e - 0.5) ** 3 + 0.4j * e)


kernel = SpectralKernel(lam, bracket=(-6.0, 6.0), width_hint=1.0)

# a mixed Gaussian: mean 0, spread 1, purity 1/2
sigma, purity = 1.0, 0.5


def rho(e, f):
    e, f = np.asarray(e, dtype=float), np.asarray(f, dtype=float)
    return np.exp(-(e + f) ** 2 / (8 * sigma**2) - (e - f) ** 2 / (8 * sigma**2 * purity**2)) / np.sqrt(
        2 * np.pi * sigma**2)


rho0 = DensityKernel(rho, support_center=0.0, support_width=sigma / purity)
print("trace", spectral.density_trace(rho0), "purity", spectral.density_purity(rho0))

e_star = spectral.locate_peak(kernel)
data = spectral.laplace_data(kernel, e_star)
print("E*", e_star, "Lambda''", data.curvature)

for n in (1, 10, 100):
    evolved = spectral.evolve_density(kernel, rho0, n)
    print(n, spectral.survival_exact(kernel, rho0, n), spectral.purity_exact(kernel, rho0, n),
          "centre", evolved.support_center, "width", evolved.support_width)

# a filter with two equal maxima cannot distil; the core refuses it
twin = SpectralKernel(lambda e: np.exp(-((np.asarray(e) ** 2 - 1) ** 2)), (-3.0, 3.0), 0.5)
try:
    spectral.locate_peak(twin)
except Exception as exc:
    print(type(exc).__name__, exc)
