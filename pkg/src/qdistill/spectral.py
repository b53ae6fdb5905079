"""Distillation engine for projected evolution operators with continuous spectrum.

The engine works in the eigenbasis where the projected one-step operator is
diagonal, ``V = ∫ dE λ(E) |E><E|``. After ``N`` successful measurements the
unmeasured system has been filtered by ``λ(E)^N`` on the left and its
conjugate on the right, so

* the survival probability is ``P(N) = ∫ |λ(E)|^{2N} ρ(E, E) dE``;
* the purity is ``∬ |λ(E)|^{2N} |λ(E')|^{2N} |ρ(E, E')|^2 dE dE' / P(N)^2``.

For large ``N`` the filter ``|λ|^{2N}`` narrows to a Gaussian of width
``Δ_N = 1/sqrt(N Λ''(E*))`` around the maximum ``E*`` of ``|λ|``, with
``Λ(E) = -ln |λ(E)|^2``; the ``*_asymptotic`` functions evaluate the resulting
Laplace expansions.

All callables here operate on numpy arrays.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import (
    BoundaryMaximum,
    DegenerateMaximum,
    DegenerateProbability,
    DistillError,
    InvalidKernel,
    InvalidLaplace,
)

#: Truncation half-width of the integration window, in characteristic widths.
WINDOW_WIDTHS = 8.0
#: Minimum number of points in the coarse peak scan.
PEAK_GRID_POINTS = 513
#: Smallest P(N) for which the conditioned state is still normalisable.
MIN_PROBABILITY = 1e-300

_CONTRACTION_SLACK = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpectralKernel:
    """Eigenvalue function ``lam`` of the projected evolution operator.

    ``bracket`` bounds both the peak search and all integrations;
    ``width_hint`` is the scale on which ``|lam|`` varies near its maximum.
    Construction samples ``lam`` on the bracket and rejects kernels that are
    not finite contractions.
    """

    lam: object
    bracket: tuple
    width_hint: float

    def __post_init__(self):
        lo, hi = map(float, self.bracket)
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise InvalidKernel(f"bad bracket {self.bracket}")
        if not self.width_hint > 0:
            raise InvalidKernel("width_hint must be positive")
        object.__setattr__(self, "bracket", (lo, hi))
        modulus = np.abs(self.lam(np.linspace(lo, hi, 1025)))
        if not np.all(np.isfinite(modulus)):
            raise InvalidKernel("lambda is not finite on its bracket")
        if modulus.max() > 1.0 + _CONTRACTION_SLACK:
            raise InvalidKernel(
                f"|lambda| reaches {modulus.max():.15g} > 1; not a contraction")

    def modulus(self, e):
        return np.abs(self.lam(e))

    def decay_rate(self, e):
        """``Λ(E) = -ln |λ(E)|^2``; ``+inf`` at zeros of λ."""
        with np.errstate(divide="ignore"):
            return -2.0 * np.log(self.modulus(e))

    def power(self, e, n, scale=1.0):
        """``(λ(E)/scale)^n`` built from modulus and phase separately."""
        lam = self.lam(e)
        mod = np.abs(lam) / scale
        return mod**n * np.exp(1j * n * np.angle(lam))

    def filter_weight(self, e, n, scale=1.0):
        """``(|λ(E)|/scale)^{2n}``, evaluated directly rather than via Λ."""
        return (self.modulus(e) / scale) ** (2 * n)


@dataclass(frozen=True)
class DensityKernel:
    """Density-matrix kernel ``rho(E, E')`` in the eigenbasis of the filter.

    ``support_center`` and ``support_width`` locate the bulk of the diagonal;
    they size integration windows and finite-difference steps.
    """

    rho: object
    support_center: float
    support_width: float

    def __post_init__(self):
        if not self.support_width > 0:
            raise ValueError("support_width must be positive")

    def __call__(self, e, e2):
        return self.rho(e, e2)

    def diagonal(self, e):
        return np.real(self.rho(e, e))

    def window(self, k=WINDOW_WIDTHS):
        return (self.support_center - k * self.support_width,
                self.support_center + k * self.support_width)


@dataclass(frozen=True)
class LaplaceData:
    e_star: float
    big_lambda_star: float
    curvature: float
    valid: bool

    def require_valid(self):
        if not self.valid:
            raise InvalidLaplace(
                f"Laplace data at E*={self.e_star} has curvature {self.curvature}")


@dataclass(frozen=True)
class SeriesRow:
    n: int
    p_exact: float = None
    pi_exact: float = None
    p_asym: float = None
    pi_asym: float = None
    delta_n: float = None
    p_asym0: float = None
    low_n: bool = False
    error: str = None


@dataclass(frozen=True)
class DistillationSeries:
    rows: list
    laplace: LaplaceData = None
    laplace_error: str = None

    def column(self, name):
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.rows], dtype=float)

    @property
    def errors(self):
        return [(r.n, r.error) for r in self.rows if r.error]


# -- peak location and Laplace data ---------------------------------------------------


def _golden_section(fn, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (a, b, c, fc) if fc <= fd else (a, b, d, fd)


def locate_peak(kernel, grid_points=PEAK_GRID_POINTS):
    """Return ``E*``, the unique interior maximiser of ``|λ|`` on the bracket.

    A grid scan brackets the minimum of Λ, golden-section search narrows it,
    and a final three-point parabolic step (accepted only if it stays inside
    the golden bracket and does not raise Λ beyond rounding) removes the
    ``sqrt(eps)`` floor that pure value comparison leaves.
    """
    lo, hi = kernel.bracket
    grid = np.linspace(lo, hi, max(grid_points, 512))
    rate = kernel.decay_rate(grid)
    best = float(np.min(rate))
    if not np.isfinite(best):
        raise DegenerateMaximum("lambda vanishes on the whole bracket")

    near = np.flatnonzero(rate <= best + 1e-9)
    runs = np.split(near, np.flatnonzero(np.diff(near) > 1) + 1)
    if len(runs) > 1:
        where = ", ".join(f"{grid[r[0]]:.6g}" for r in runs[:4])
        raise DegenerateMaximum(f"|lambda| attains its maximum at separated points {where}")
    if len(runs[0]) > 2:
        raise DegenerateMaximum(
            f"|lambda| is flat to 1e-9 on [{grid[runs[0][0]]:.6g}, {grid[runs[0][-1]]:.6g}]")

    i = int(np.argmin(rate))
    if i == 0 or i == grid.size - 1:
        raise BoundaryMaximum(f"maximum of |lambda| on the bracket edge at {grid[i]:.6g}")

    def fn(x):
        return float(kernel.decay_rate(np.array([x]))[0])

    a, b, x, fx = _golden_section(fn, grid[i - 1], grid[i + 1], 1e-12 * (hi - lo))
    h = 1e-3 * kernel.width_hint
    fm, fp = fn(x - h), fn(x + h)
    curv = fp - 2.0 * fx + fm
    if curv > 0 and np.isfinite(curv):
        shifted = x - 0.5 * h * (fp - fm) / curv
        # near the minimum Λ differences are pure rounding noise
        noise = 8.0 * np.finfo(float).eps * max(1.0, abs(fx))
        if a - h <= shifted <= b + h and fn(shifted) <= fx + noise:
            x = shifted

    edge = 1e-6 * (hi - lo)
    if x - lo < edge or hi - x < edge:
        raise BoundaryMaximum(f"maximum of |lambda| on the bracket edge at {x:.6g}")
    return float(x)


def laplace_data(kernel, e_star):
    """Λ(E*) and Λ''(E*) at a maximum of ``|λ|``.

    Raises :class:`DegenerateMaximum` when the curvature is too small for the
    Gaussian approximation of the filter to exist.
    """
    e_star = float(e_star)
    big_lambda_star = float(kernel.decay_rate(np.array([e_star]))[0]) + 0.0  # no -0.0
    h = quadrature.stencil_step(kernel.width_hint)
    curvature = quadrature.second_derivative(kernel.decay_rate, e_star, h)
    valid = curvature > 1e-12 / kernel.width_hint**2
    if not valid:
        raise DegenerateMaximum(
            f"curvature of -ln|lambda|^2 at E*={e_star:.6g} is {curvature:.3g}; "
            "the filter has no Gaussian limit")
    return LaplaceData(e_star, big_lambda_star, curvature, True)


def delta_n(data, n):
    """Gaussian filter width ``1/sqrt(n Λ''(E*))`` after ``n`` measurements."""
    data.require_valid()
    if n < 1:
        raise InvalidLaplace(f"filter width undefined for n={n}")
    return 1.0 / math.sqrt(n * data.curvature)


def gaussian_prefactor(data, n):
    """``f(N) = sqrt(2π Δ_N^2) exp(-N Λ(E*))``."""
    width = delta_n(data, n)
    return math.sqrt(2.0 * math.pi) * width * math.exp(-n * data.big_lambda_star)


# -- exact quantities ------------------------------------------------------------


def integration_window(kernel, rho0, e_star=None, k=WINDOW_WIDTHS):
    """Truncated domain for the survival and purity integrals.

    Hull of ``E* ± k W`` (``W = width_hint``) and ``center ± k width`` of the
    density, clipped to the kernel bracket.
    """
    lo, hi = rho0.window(k)
    if e_star is not None:
        lo = min(lo, e_star - k * kernel.width_hint)
        hi = max(hi, e_star + k * kernel.width_hint)
    lo, hi = max(lo, kernel.bracket[0]), min(hi, kernel.bracket[1])
    if not lo < hi:
        raise ValueError("density support does not overlap the kernel bracket")
    return lo, hi


def _peak_scale(kernel, e_star):
    if e_star is not None:
        scale = float(kernel.modulus(np.array([e_star]))[0])
    else:
        lo, hi = kernel.bracket
        scale = float(np.max(kernel.modulus(np.linspace(lo, hi, PEAK_GRID_POINTS))))
    return scale if scale > 0 else 1.0


def _try_peak(kernel):
    try:
        return locate_peak(kernel)
    except DistillError:
        return None


def _breakpoints(kernel, e_star, n, k=WINDOW_WIDTHS):
    """Partition points around the filter peak, whose width is ~ width_hint/sqrt(n)."""
    if e_star is None:
        return None
    width = kernel.width_hint / math.sqrt(max(n, 1))
    return (e_star - k * width, e_star - width, e_star, e_star + width, e_star + k * width)


@dataclass(frozen=True)
class _Survival:
    """``P(N) = scaled * scale^{2N}``, kept factored so it never underflows."""

    scaled: float
    scale: float
    n: int
    window: tuple = field(default=None)
    points: tuple = field(default=None)

    @property
    def log_value(self):
        if self.scaled <= 0:
            return -math.inf
        return math.log(self.scaled) + 2 * self.n * math.log(self.scale)

    @property
    def value(self):
        return self.scaled * self.scale ** (2 * self.n)


def _survival(kernel, rho0, n, e_star, abs_tol, rel_tol):
    window = integration_window(kernel, rho0, e_star)
    scale = _peak_scale(kernel, e_star)

    def integrand(e):
        return kernel.filter_weight(e, n, scale) * rho0.diagonal(e)

    points = _breakpoints(kernel, e_star, n)
    result = quadrature.integrate_1d(integrand, *window, abs_tol=abs_tol, rel_tol=rel_tol,
                                     points=points)
    return _Survival(result.value, scale, n, window, points)


def survival_exact(kernel, rho0, n, e_star=None,
                   abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    """Survival probability after ``n`` measurements by direct quadrature.

    The integrand is divided by ``|λ(E*)|^{2n}`` before integrating (and the
    factor restored afterwards) so that the absolute tolerance does not swamp
    exponentially small probabilities.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if e_star is None:
        e_star = _try_peak(kernel)
    return _survival(kernel, rho0, n, e_star, abs_tol, rel_tol).value


def _purity(kernel, rho0, n, survival, abs_tol, rel_tol):
    if survival.log_value < math.log(MIN_PROBABILITY):
        raise DegenerateProbability(f"P({n}) is below {MIN_PROBABILITY:g}")
    scale = survival.scale
    lo, hi = survival.window

    def integrand(e, e2):
        weight = kernel.filter_weight(e, n, scale) * kernel.filter_weight(e2, n, scale)
        return weight * np.abs(rho0(e, e2)) ** 2

    # the box integral is relative to scaled^2, so the absolute floor is scaled too
    result = quadrature.integrate_2d(
        integrand, ((lo, hi), (lo, hi)),
        abs_tol=abs_tol * survival.scaled**2, rel_tol=rel_tol,
        points=(survival.points, survival.points))
    return result.value / survival.scaled**2


def purity_exact(kernel, rho0, n, e_star=None,
                 abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    """Purity of the conditioned state after ``n`` measurements by quadrature."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if e_star is None:
        e_star = _try_peak(kernel)
    survival = _survival(kernel, rho0, n, e_star, abs_tol, rel_tol)
    return _purity(kernel, rho0, n, survival, abs_tol, rel_tol)


def density_trace(rho, window=None, abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    lo, hi = window if window is not None else rho.window()
    return quadrature.integrate_1d(rho.diagonal, lo, hi, abs_tol, rel_tol).value


def density_purity(rho, window=None, abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    """``Tr ρ^2 = ∬ |ρ(E, E')|^2`` over ``window`` squared."""
    lo, hi = window if window is not None else rho.window()

    def integrand(e, e2):
        return np.abs(rho(e, e2)) ** 2

    return quadrature.integrate_2d(integrand, ((lo, hi), (lo, hi)), abs_tol, rel_tol).value


# -- asymptotics ----------------------------------------------------------------------


def _density_derivatives(data, rho0):
    e_star = data.e_star
    h = quadrature.stencil_step(rho0.support_width)
    g0 = float(rho0.diagonal(np.array([e_star]))[0])
    g2 = quadrature.second_derivative(lambda y: rho0.diagonal(e_star + y), 0.0, h)
    h_yy = quadrature.second_derivative(
        lambda y: np.abs(rho0(e_star + y, np.full_like(y, e_star))) ** 2, 0.0, h)
    return g0, g2, h_yy


def survival_asymptotic(data, rho0, n, order=2):
    """Laplace approximation ``f(N) (g(0) + ½ g''(0) Δ_N^2)`` to ``P(N)``.

    ``order=0`` drops the ``Δ_N^2`` correction. Here ``g(y) = ρ(E*+y, E*+y)``.
    """
    width = delta_n(data, n)
    prefactor = gaussian_prefactor(data, n)
    g0, g2, _ = _density_derivatives(data, rho0)
    if order == 0:
        return prefactor * g0
    if order != 2:
        raise ValueError("order must be 0 or 2")
    return prefactor * (g0 + 0.5 * g2 * width**2)


def purity_coefficient(data, rho0):
    """``[g(0) g''(0) - h_yy(0, 0)] / g(0)^2``, the slope of ``1 - Π`` in ``Δ_N^2``."""
    data.require_valid()
    g0, g2, h_yy = _density_derivatives(data, rho0)
    if not g0 > 0:
        raise InvalidLaplace(f"density vanishes at E*={data.e_star}")
    return (g0 * g2 - h_yy) / g0**2


def purity_asymptotic(data, rho0, n):
    """Laplace approximation ``1 - Δ_N^2 [g g'' - h_yy] / g^2`` to ``Π(N)``."""
    return 1.0 - delta_n(data, n) ** 2 * purity_coefficient(data, rho0)


def is_low_n(data, rho0, n):
    """True when the filter is still wider than the initial density."""
    return delta_n(data, n) >= rho0.support_width


# -- conditioned state and sweeps ------------------------------------------------


def evolve_density(kernel, rho0, n, e_star=None,
                   abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    """Conditioned state after ``n`` measurements, as a lazily evaluated kernel.

    Its support descriptors are the mean and standard deviation of the new
    diagonal, computed once by quadrature.
    """
    if n == 0:
        return rho0
    if e_star is None:
        e_star = _try_peak(kernel)
    survival = _survival(kernel, rho0, n, e_star, abs_tol, rel_tol)
    if survival.log_value < math.log(MIN_PROBABILITY):
        raise DegenerateProbability(f"P({n}) is below {MIN_PROBABILITY:g}")
    scale, norm = survival.scale, survival.scaled

    def rho(e, e2):
        return (kernel.power(e, n, scale) * rho0(e, e2)
                * np.conj(kernel.power(e2, n, scale)) / norm)

    def diagonal(e):
        return kernel.filter_weight(e, n, scale) * rho0.diagonal(e) / norm

    lo, hi = survival.window
    points = survival.points
    mean = quadrature.integrate_1d(lambda e: e * diagonal(e), lo, hi, abs_tol, rel_tol,
                                   points=points).value
    var = quadrature.integrate_1d(lambda e: (e - mean) ** 2 * diagonal(e), lo, hi,
                                  abs_tol, rel_tol, points=points).value
    return DensityKernel(rho, mean, math.sqrt(max(var, 0.0)))


def run_series(kernel, rho0, n_values,
               abs_tol=quadrature.ABS_TOL, rel_tol=quadrature.REL_TOL):
    """Exact and asymptotic P(N), Π(N) for each N in ``n_values``.

    Failures are recorded on the affected rows instead of aborting the sweep.
    The asymptotic columns stay empty at N = 0 where Δ_N is undefined.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ValueError("n_values must be non-empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])) or n_values[0] < 0:
        raise ValueError("n_values must be non-negative and strictly increasing")

    data, laplace_error, e_star = None, None, None
    try:
        e_star = locate_peak(kernel)
        data = laplace_data(kernel, e_star)
        coefficient = purity_coefficient(data, rho0)
    except DistillError as exc:
        laplace_error = f"{type(exc).__name__}: {exc}"

    rows = []
    for n in n_values:
        values, problems = {"n": n}, []
        try:
            survival = _survival(kernel, rho0, n, e_star, abs_tol, rel_tol)
            values["p_exact"] = survival.value
            values["pi_exact"] = _purity(kernel, rho0, n, survival, abs_tol, rel_tol)
        except DistillError as exc:
            problems.append(f"{type(exc).__name__}: {exc}")
        if n >= 1:
            if data is None:
                problems.append(laplace_error)
            else:
                try:
                    width = delta_n(data, n)
                    values.update(
                        delta_n=width,
                        p_asym=survival_asymptotic(data, rho0, n),
                        p_asym0=survival_asymptotic(data, rho0, n, order=0),
                        pi_asym=1.0 - width**2 * coefficient,
                        low_n=width >= rho0.support_width,
                    )
                except DistillError as exc:
                    problems.append(f"{type(exc).__name__}: {exc}")
        rows.append(SeriesRow(**values, error="; ".join(problems) or None))
    return DistillationSeries(rows, data, laplace_error)
