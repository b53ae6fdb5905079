"""Self-consistency checks for one configured model.

Each check compares two independent routes to the same number (quadrature
against a closed form, the numerical peak against the analytic one, ...) or
verifies an invariance that must hold exactly, and reports the measured
discrepancy next to its tolerance.
"""

import dataclasses
from dataclasses import dataclass

from . import cavity, spectral
from .cavity import Coherent

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"

CLOSED_FORM_N = (0, 1, 2, 5, 10, 20, 50)
LADDER_N = (5, 10, 20, 40, 80)
MONOTONE_N = (0, 1, 2, 3, 5, 8, 13, 20, 35, 50)
INVARIANCE_N = (1, 10, 50)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    measured: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self):
        return self.status == PASS

    def line(self):
        text = f"{self.status} {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.1e})"
        return f"{text} {self.detail}" if self.detail else text


def _bound(name, measured, tolerance, detail=""):
    status = PASS if measured <= tolerance else FAIL
    return CheckResult(name, status, measured, tolerance, detail)


def _ladder(name, gaps, floor=1e-9):
    """Gaps along a geometric N-ladder must shrink (until they hit ``floor``)."""
    shrinking = all(b < a or b < floor for a, b in zip(gaps, gaps[1:]))
    if shrinking:
        status = PASS
    elif gaps[-1] < gaps[0]:
        status = WARN
    else:
        status = FAIL
    detail = "gaps " + ", ".join(f"{g:.2e}" for g in gaps)
    return CheckResult(name, status, gaps[-1], gaps[0], detail)


class _Model:
    """Kernel, density and tolerances of one configuration, built once."""

    def __init__(self, config, state=None, coeffs=None):
        self.config = config
        self.params = config.model
        self.state = state or config.state
        self.kernel = cavity.make_kernel(self.params, self.state, coeffs)
        self.rho = cavity.initial_density(self.state)
        self.e_star = spectral.locate_peak(self.kernel)
        self.tol = dict(abs_tol=config.abs_tol, rel_tol=config.rel_tol)

    def survival(self, n):
        return spectral.survival_exact(self.kernel, self.rho, n, self.e_star, **self.tol)

    def purity(self, n):
        return spectral.purity_exact(self.kernel, self.rho, n, self.e_star, **self.tol)


def _check_peak(model):
    params = model.params
    expected = cavity.selected_momentum(params)
    yield _bound("peak location vs selected momentum", abs(model.e_star - expected), 1e-8,
                 f"p*={model.e_star:.12g}")
    data = spectral.laplace_data(model.kernel, model.e_star)
    analytic = cavity.curvature(params)
    yield _bound("curvature vs analytic", abs(data.curvature / analytic - 1), 1e-4,
                 f"Lambda''={data.curvature:.10g}")
    rate = cavity.coherent_decay_rate(params) if isinstance(params.cavity, Coherent) else 0.0
    yield _bound("Lambda(p*) vs analytic decay rate", abs(data.big_lambda_star - rate), 1e-10)


def _check_initial_state(model):
    trace = spectral.density_trace(model.rho)
    yield _bound("initial trace", abs(trace - 1), 1e-9)
    yield _bound("P(0) = 1", abs(model.survival(0) - 1), 1e-9)
    yield _bound("Pi(0) = pi0", abs(model.purity(0) - model.state.pi0), 1e-6)


def _check_closed_forms(model):
    params, state = model.params, model.state
    p_gap = max(abs(model.survival(n) / cavity.survival_closed_coherent(params, state, n) - 1)
                for n in CLOSED_FORM_N)
    yield _bound("survival quadrature vs closed form (relative)", p_gap, 1e-5)
    pi_gap = max(abs(model.purity(n) - cavity.purity_closed_coherent(params, state, n))
                 for n in CLOSED_FORM_N)
    yield _bound("purity quadrature vs closed form", pi_gap, 1e-5)


def _check_number_asymptotics(model):
    params, state = model.params, model.state
    for n, tol in ((10, 0.05), (50, 0.01)):
        gap = abs(model.survival(n) / cavity.survival_asym_number1(params, state, n) - 1)
        yield _bound(f"survival vs number-state asymptote at N={n} (relative)", gap, tol)
    gap = abs(model.purity(50) - cavity.purity_asym_formula(params, state, 50))
    yield _bound("purity vs number-state asymptote at N=50", gap, 1e-3)


def _check_ladder(model):
    data = spectral.laplace_data(model.kernel, model.e_star)
    p_gaps, pi_gaps = [], []
    for n in LADDER_N:
        p_gaps.append(abs(spectral.survival_asymptotic(data, model.rho, n) / model.survival(n) - 1))
        pi_gaps.append(abs(spectral.purity_asymptotic(data, model.rho, n) - model.purity(n)))
    yield _ladder("survival asymptote converges along N ladder", p_gaps)
    yield _ladder("purity asymptote converges along N ladder", pi_gaps)


def _check_monotone(model):
    values = [model.survival(n) for n in MONOTONE_N]
    rise = max(b - a for a, b in zip(values, values[1:]))
    yield _bound("P(N) non-increasing", max(rise, 0.0), 1e-9)


def _check_invariances(model):
    config = model.config
    coeffs = cavity.coefficients(config.model)
    shifted = _Model(config, coeffs=dataclasses.replace(coeffs, xi_tau=coeffs.xi_tau + 3.7))
    gap = max(max(abs(model.survival(n) - shifted.survival(n)),
                  abs(model.purity(n) - shifted.purity(n))) for n in INVARIANCE_N)
    yield _bound("xi_tau does not affect P or Pi", gap, 1e-10)

    state = config.state
    moved = _Model(config, dataclasses.replace(state, x0=state.x0 + 1.3, dx0=2.0 * state.dx0))
    gap = max(max(abs(model.survival(n) - moved.survival(n)),
                  abs(model.purity(n) - moved.purity(n))) for n in INVARIANCE_N)
    yield _bound("x0 and dx0 do not affect P or Pi", gap, 1e-8)

    pure_state = dataclasses.replace(state, pi0=1.0, dx0=max(state.dx0, 1.0 / (2.0 * state.dp0)))
    pure = _Model(config, pure_state)
    gap = max(abs(pure.purity(n) - 1.0) for n in (0,) + INVARIANCE_N)
    yield _bound("pure initial state stays pure", gap, 1e-6)


def validate(config):
    """Run every applicable check and return the list of :class:`CheckResult`."""
    model = _Model(config)
    groups = [_check_peak, _check_initial_state, _check_monotone, _check_invariances,
              _check_ladder]
    if isinstance(config.model.cavity, Coherent):
        groups.insert(2, _check_closed_forms)
    else:
        groups.insert(2, _check_number_asymptotics)
    return [result for group in groups for result in group(model)]


def passed(results, strict=False):
    allowed = {PASS} if strict else {PASS, WARN}
    return all(r.status in allowed for r in results)


def summary_line(results):
    counts = {s: sum(r.status == s for r in results) for s in (PASS, WARN, FAIL)}
    return f"{counts[PASS]} passed, {counts[WARN]} warnings, {counts[FAIL]} failed"

