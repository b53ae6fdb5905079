"""Exception hierarchy.

Two families matter to callers: configuration problems (bad parameters, bad
files) and numerical failures (quadrature that cannot converge, spectra whose
peak cannot be characterised). The command line maps them to exit codes 2 and
3 respectively.
"""


class DistillError(Exception):
    """Base class for every error raised by qdistill."""


class ConfigurationError(DistillError):
    """Inputs are inadmissible before any numerics run."""


class ConfigError(ConfigurationError):
    """A configuration file is malformed; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class InvalidState(ConfigurationError, ValueError):
    """Gaussian particle state violates 4 dx0^2 dp0^2 pi0^2 >= 1 (or similar)."""


class StroboscopicDecoupling(ConfigurationError, ValueError):
    """sin(omega_tau/2) == 0: the cavity disentangles at every measurement."""


class InvalidKernel(DistillError, ValueError):
    """A spectral kernel is not a contraction or is not finite on its bracket."""


class NumericalError(DistillError):
    """Base class for failures of the numerical machinery."""


class NonConvergence(NumericalError):
    """Adaptive quadrature exhausted its evaluation budget."""


class NonFinite(NumericalError):
    """An integrand or stencil evaluation returned inf or nan."""


class BoundaryMaximum(NumericalError):
    """The maximum of |lambda| sits on the edge of the search bracket."""


class DegenerateMaximum(NumericalError):
    """The maximum of |lambda| is flat or not unique."""


class InvalidLaplace(NumericalError):
    """Asymptotics requested from Laplace data that is not valid."""


class DegenerateProbability(NumericalError):
    """Survival probability underflowed; the conditioned state is undefined."""
