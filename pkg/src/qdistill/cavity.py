"""Particle coupled to a cavity mode through ``g p (a† + a)``.

Units: ħ = m = ω = 1. Momenta are in ``sqrt(m ħ ω)``, positions in
``sqrt(ħ/(m ω))``, the coupling is ``g_tilde = sqrt(m/(ħ ω)) g`` and time
enters only through ``omega_tau``.

The cavity is repeatedly projected onto either a coherent state ``|α>`` or the
one-photon state ``|1>``. In both cases the projected evolution operator of the
particle is diagonal in momentum, so the particle's spectral kernel is an
explicit function of ``p``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMaximum, InvalidState, StroboscopicDecoupling
from .spectral import DensityKernel, SpectralKernel

#: Half-width of the kernel bracket in units of the larger of (Δp)0 and Δ_1.
BRACKET_WIDTHS = 12.0


@dataclass(frozen=True)
class Coherent:
    alpha_mod: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha_mod) and self.alpha_mod >= 0):
            raise ValueError("alpha_mod must be finite and >= 0")
        if not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite")


@dataclass(frozen=True)
class NumberOne:
    """Projection onto the one-photon Fock state."""


@dataclass(frozen=True)
class ModelParams:
    omega_tau: float
    g_tilde: float
    cavity: object

    def __post_init__(self):
        if not (np.isfinite(self.omega_tau) and self.omega_tau > 0):
            raise ValueError("omega_tau must be finite and positive")
        if not np.isfinite(self.g_tilde):
            raise ValueError("g_tilde must be finite")
        if abs(math.sin(self.omega_tau / 2)) < 1e-12:
            raise StroboscopicDecoupling(
                f"sin(omega_tau/2) = 0 at omega_tau = {self.omega_tau}: |g_tau| vanishes")
        if not isinstance(self.cavity, (Coherent, NumberOne)):
            raise TypeError("cavity must be Coherent or NumberOne")

    @property
    def alpha(self):
        c = self.cavity
        return c.alpha_mod * complex(math.cos(c.gamma), math.sin(c.gamma))


@dataclass(frozen=True)
class GaussianParticleState:
    """General Gaussian state of the particle.

    ``p0``/``x0`` are the mean momentum and position, ``dp0``/``dx0`` their
    standard deviations and ``pi0`` the purity. Admissibility requires
    ``4 dx0^2 dp0^2 pi0^2 >= 1``.
    """

    p0: float
    x0: float
    dp0: float
    dx0: float
    pi0: float

    def __post_init__(self):
        for name in ("p0", "x0", "dp0", "dx0", "pi0"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidState(f"{name} must be finite")
        if not self.dp0 > 0 or not self.dx0 > 0:
            raise InvalidState("dp0 and dx0 must be positive")
        if not 0 < self.pi0 <= 1:
            raise InvalidState(f"pi0 = {self.pi0} outside (0, 1]")
        if self._b_squared < -1e-12:
            raise InvalidState(
                f"4 dx0^2 dp0^2 pi0^2 = {self._b_squared + 1:.6g} < 1 violates the "
                "uncertainty relation")

    @property
    def _b_squared(self):
        return 4.0 * self.dx0**2 * self.dp0**2 * self.pi0**2 - 1.0

    @property
    def b_coeff(self):
        return math.sqrt(max(self._b_squared, 0.0))


@dataclass(frozen=True)
class ModelCoefficients:
    xi_tau: float
    g_tau: complex
    g_tau_mod_sq: float


def coefficients(params):
    """Kinetic renormalisation ``xi_tau`` and displacement ``g_tau``."""
    wt, g = params.omega_tau, params.g_tilde
    xi_tau = 1.0 - 2.0 * g**2 * (1.0 - math.sin(wt) / wt)
    g_tau = g * (1.0 - complex(math.cos(wt), math.sin(wt)))
    # closed form is better conditioned than abs(g_tau)**2 for small omega_tau
    g_tau_mod_sq = 4.0 * g**2 * math.sin(wt / 2) ** 2
    return ModelCoefficients(xi_tau, g_tau, g_tau_mod_sq)


def _bracket_scale(g2, curvature_factor, state):
    width = 1.0 / math.sqrt(curvature_factor * g2)
    return max(width, state.dp0) if state is not None else width


def coherent_b(params, coeffs=None):
    """``b = -α g_tau* + e^{-iωτ} g_tau α*``."""
    coeffs = coeffs or coefficients(params)
    alpha = params.alpha
    rotation = complex(math.cos(params.omega_tau), -math.sin(params.omega_tau))
    return -alpha * coeffs.g_tau.conjugate() + rotation * coeffs.g_tau * alpha.conjugate()


def kernel_coherent(params, state=None, coeffs=None):
    """Spectral kernel for repeated projection onto ``|α>``.

    ``λ(p) = exp(-iωτ/2 - 2i|α|^2 sin(ωτ/2) e^{-iωτ/2})
             exp(-i xi_tau p^2 ωτ/2 - p^2 |g_tau|^2/2 + p b)``.

    The bracket is centred on the selected momentum and spans
    ``BRACKET_WIDTHS`` times the larger of the one-step filter width and the
    state's momentum spread. ``coeffs`` may be supplied to override the model
    coefficients (for example to test that ``xi_tau`` is phase-only).
    """
    if not isinstance(params.cavity, Coherent):
        raise TypeError("kernel_coherent needs a Coherent cavity")
    coeffs = coeffs or coefficients(params)
    wt = params.omega_tau
    a2 = params.cavity.alpha_mod**2
    half = complex(math.cos(wt / 2), -math.sin(wt / 2))
    prefactor = np.exp(-0.5j * wt - 2j * a2 * math.sin(wt / 2) * half)
    b = coherent_b(params, coeffs)
    xi, g2 = coeffs.xi_tau, coeffs.g_tau_mod_sq

    def lam(p):
        p = np.asarray(p, dtype=float)
        return prefactor * np.exp(-0.5j * xi * p**2 * wt - 0.5 * g2 * p**2 + p * b)

    if g2 > 0:
        center = b.real / g2
        width = _bracket_scale(g2, 2.0, state)
    else:
        center = state.p0 if state is not None else 0.0
        width = state.dp0 if state is not None else 1.0
    hint = 1.0 / math.sqrt(2.0 * g2) if g2 > 0 else width
    return SpectralKernel(lam, (center - BRACKET_WIDTHS * width,
                                center + BRACKET_WIDTHS * width), hint)


def kernel_number1(params, state=None, coeffs=None):
    """Spectral kernel for repeated projection onto ``|1>``.

    ``λ(p) = (1 - p^2 |g_tau|^2) e^{-3iωτ/2} exp(-i xi_tau p^2 ωτ/2 - p^2 |g_tau|^2/2)``,
    which vanishes at ``p = ±1/|g_tau|``. The bracket always contains both zeros.
    """
    if not isinstance(params.cavity, NumberOne):
        raise TypeError("kernel_number1 needs the NumberOne cavity")
    coeffs = coeffs or coefficients(params)
    wt = params.omega_tau
    xi, g2 = coeffs.xi_tau, coeffs.g_tau_mod_sq
    phase = np.exp(-1.5j * wt)

    def lam(p):
        p = np.asarray(p, dtype=float)
        return (1.0 - g2 * p**2) * phase * np.exp(-0.5j * xi * p**2 * wt - 0.5 * g2 * p**2)

    if g2 > 0:
        width = _bracket_scale(g2, 6.0, state)
        hint = 1.0 / math.sqrt(6.0 * g2)
    else:
        width = state.dp0 if state is not None else 1.0
        hint = width
    return SpectralKernel(lam, (-BRACKET_WIDTHS * width, BRACKET_WIDTHS * width), hint)


def make_kernel(params, state=None, coeffs=None):
    if isinstance(params.cavity, Coherent):
        return kernel_coherent(params, state, coeffs)
    return kernel_number1(params, state, coeffs)


def initial_density(state):
    """Density kernel ``ρ(p, p')`` of the Gaussian particle state (ħ = 1)."""
    p0, x0, s2, pi0 = state.p0, state.x0, state.dp0**2, state.pi0
    norm = 1.0 / math.sqrt(2.0 * math.pi * s2)
    chirp = state.b_coeff / (4.0 * s2 * pi0)

    def rho(p, q):
        p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        total, diff = p + q - 2.0 * p0, p - q
        real = -total**2 / (8.0 * s2) - diff**2 / (8.0 * s2 * pi0**2)
        imag = -diff * x0 - chirp * diff * total
        return norm * np.exp(real + 1j * imag)

    return DensityKernel(rho, p0, state.dp0 * max(1.0, 1.0 / pi0))


def selected_momentum(params):
    """Momentum the filter converges to: ``Re b/|g_tau|^2`` or 0 for ``|1>``."""
    if isinstance(params.cavity, NumberOne):
        return 0.0
    if params.g_tilde == 0:
        raise DegenerateMaximum("g_tilde = 0: the filter is flat in momentum")
    c = params.cavity
    return -c.alpha_mod * math.cos(c.gamma) / params.g_tilde


def curvature(params):
    """Analytic ``Λ''(p*)``: ``2|g_tau|^2`` for ``|α>``, ``6|g_tau|^2`` for ``|1>``."""
    g2 = coefficients(params).g_tau_mod_sq
    return 2.0 * g2 if isinstance(params.cavity, Coherent) else 6.0 * g2


def coherent_decay_rate(params):
    """Per-measurement decay ``4|α|^2 sin^2 γ sin^2(ωτ/2)`` of P(N)."""
    c = params.cavity
    return 4.0 * c.alpha_mod**2 * math.sin(c.gamma) ** 2 * math.sin(params.omega_tau / 2) ** 2


def survival_closed_coherent(params, state, n):
    """Exact P(N) for coherent-state projections on a Gaussian particle."""
    if not isinstance(params.cavity, Coherent):
        raise TypeError("closed form exists only for the coherent cavity")
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1.0
    g2 = coefficients(params).g_tau_mod_sq
    s2 = state.dp0**2
    spread = 2.0 * g2 * s2 * n
    p_star = selected_momentum(params) if g2 > 0 else state.p0
    gaussian = math.exp(-((state.p0 - p_star) ** 2) / (2.0 * s2 * (1.0 + 1.0 / spread)))
    return math.exp(-n * coherent_decay_rate(params)) / math.sqrt(1.0 + spread) * gaussian


def purity_closed_coherent(params, state, n):
    """Exact Π(N) for coherent-state projections on a Gaussian particle."""
    if not isinstance(params.cavity, Coherent):
        raise TypeError("closed form exists only for the coherent cavity")
    spread = 2.0 * coefficients(params).g_tau_mod_sq * state.dp0**2 * n
    return math.sqrt((1.0 + spread) / (1.0 / state.pi0**2 + spread))


def survival_asym_number1(params, state, n):
    """Large-N P(N) for ``|1>`` projections: ``e^{-p0^2/2dp0^2}/sqrt(6|g_tau|^2 dp0^2 N)``."""
    if n < 1:
        raise ValueError("asymptotic formula needs n >= 1")
    g2 = coefficients(params).g_tau_mod_sq
    s2 = state.dp0**2
    return math.exp(-state.p0**2 / (2.0 * s2)) / math.sqrt(6.0 * g2 * s2 * n)


def purity_asym_formula(params, state, n):
    """Large-N Π(N) shared by both cavity choices: ``1 - (1/pi0^2 - 1) Δ_N^2 / (2 dp0^2)``."""
    if n < 1:
        raise ValueError("asymptotic formula needs n >= 1")
    width_sq = 1.0 / (n * curvature(params))
    return 1.0 - (1.0 / state.pi0**2 - 1.0) / (2.0 * state.dp0**2) * width_sq
