"""Adaptive quadrature and finite-difference second derivatives.

Integration uses the 15-point Gauss-Kronrod rule with its embedded 7-point
Gauss rule as the error estimator. Intervals (or rectangles in 2D) whose
estimated error exceeds their share of the tolerance are bisected, and all
pending pieces are evaluated in one vectorised call per round. Integrands must
therefore accept numpy arrays and return arrays of the same shape.

Everything here is a pure function of its inputs: the same call always takes
the same subdivision path and returns the same bits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, NonFinite

ABS_TOL = 1e-12
REL_TOL = 1e-10
MAX_EVALUATIONS = 1_000_000

#: Evaluations spent by one application of the 1D rule.
RULE_SIZE_1D = 15
#: Evaluations spent by one application of the tensor-product 2D rule.
RULE_SIZE_2D = RULE_SIZE_1D**2

# Kronrod abscissae on [-1, 1]; the Gauss-7 nodes are the odd-indexed ones.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[:3][::-1]


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    evaluations: int


def _check_tolerances(abs_tol, rel_tol):
    if not (abs_tol > 0 and rel_tol > 0):
        raise ValueError("tolerances must be positive")


def _evaluate(f, *args):
    values = np.asarray(f(*args), dtype=float)
    values = np.broadcast_to(values, args[0].shape)
    if not np.all(np.isfinite(values)):
        raise NonFinite("integrand returned a non-finite value")
    return values


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = _evaluate(f, x)
    kronrod = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss)


def _initial_edges(lo, hi, pieces, points):
    edges = np.linspace(lo, hi, pieces + 1)
    if points is not None:
        inner = [float(x) for x in points if lo < x < hi]
        edges = np.unique(np.concatenate([edges, inner]))
    return edges


def integrate_1d(f, lo, hi, abs_tol=ABS_TOL, rel_tol=REL_TOL,
                 max_evaluations=MAX_EVALUATIONS, initial_intervals=4, points=None):
    """Integrate a vectorised ``f`` over ``[lo, hi]``.

    The result satisfies ``error_estimate <= max(abs_tol, rel_tol*|value|)``
    or :class:`NonConvergence` is raised once ``max_evaluations`` would be
    exceeded. ``points`` adds breakpoints to the initial partition; use them
    to bracket features narrower than ``(hi - lo)/initial_intervals`` that the
    rule could otherwise step over. Bracket the tails too: Kronrod nodes never
    sit on an interval end, so a breakpoint on a peak alone does not help.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    _check_tolerances(abs_tol, rel_tol)

    edges = _initial_edges(lo, hi, initial_intervals, points)
    a, b = edges[:-1], edges[1:]
    values, errors = _gk15(f, a, b)
    evaluations = RULE_SIZE_1D * a.size
    length = hi - lo

    while True:
        total = float(np.sum(values))
        error = float(np.sum(errors))
        tol = max(abs_tol, rel_tol * abs(total))
        if error <= tol:
            return IntegrationResult(total, error, evaluations)

        split = errors > tol * (b - a) / length
        if not split.any():
            split[np.argmax(errors)] = True
        cost = 2 * RULE_SIZE_1D * int(split.sum())
        if evaluations + cost > max_evaluations:
            raise NonConvergence(
                f"1D quadrature on [{lo:g}, {hi:g}] stalled at error {error:.3g} "
                f"> {tol:.3g} after {evaluations} evaluations")

        sa, sb = a[split], b[split]
        mid = 0.5 * (sa + sb)
        ca = np.concatenate([sa, mid])
        cb = np.concatenate([mid, sb])
        cv, ce = _gk15(f, ca, cb)
        evaluations += cost

        keep = ~split
        a = np.concatenate([a[keep], ca])
        b = np.concatenate([b[keep], cb])
        values = np.concatenate([values[keep], cv])
        errors = np.concatenate([errors[keep], ce])
        order = np.argsort(a, kind="stable")
        a, b, values, errors = a[order], b[order], values[order], errors[order]


def _gk15_2d(f, ax, bx, ay, by):
    hx, hy = 0.5 * (bx - ax), 0.5 * (by - ay)
    cx, cy = 0.5 * (ax + bx), 0.5 * (ay + by)
    xs = cx[:, None] + hx[:, None] * NODES[None, :]
    ys = cy[:, None] + hy[:, None] * NODES[None, :]
    X = np.broadcast_to(xs[:, :, None], (xs.shape[0], 15, 15))
    Y = np.broadcast_to(ys[:, None, :], (ys.shape[0], 15, 15))
    fxy = _evaluate(f, X, Y)
    jac = hx * hy
    kk = jac * np.einsum("rij,i,j->r", fxy, KRONROD_WEIGHTS, KRONROD_WEIGHTS)
    gk = jac * np.einsum("rij,i,j->r", fxy, GAUSS_WEIGHTS, KRONROD_WEIGHTS)
    kg = jac * np.einsum("rij,i,j->r", fxy, KRONROD_WEIGHTS, GAUSS_WEIGHTS)
    err_x, err_y = np.abs(kk - gk), np.abs(kk - kg)
    return kk, err_x + err_y, err_x >= err_y


def integrate_2d(f, box, abs_tol=ABS_TOL, rel_tol=REL_TOL,
                 max_evaluations=MAX_EVALUATIONS, initial_cells=2, points=None):
    """Integrate a vectorised ``f(x, y)`` over ``box = ((lo1, hi1), (lo2, hi2))``.

    Adaptive tensor-product Gauss-Kronrod: each rectangle is bisected along
    the axis whose Gauss/Kronrod disagreement is larger. ``points`` is an
    optional pair of breakpoint sequences, one per axis.
    """
    (lo1, hi1), (lo2, hi2) = box
    lo1, hi1, lo2, hi2 = map(float, (lo1, hi1, lo2, hi2))
    if not (lo1 < hi1 and lo2 < hi2):
        raise ValueError(f"degenerate box {box}")
    if not all(np.isfinite([lo1, hi1, lo2, hi2])):
        raise ValueError("box must be finite")
    _check_tolerances(abs_tol, rel_tol)

    px, py = points if points is not None else (None, None)
    ex = _initial_edges(lo1, hi1, initial_cells, px)
    ey = _initial_edges(lo2, hi2, initial_cells, py)
    gx, gy = np.meshgrid(np.arange(ex.size - 1), np.arange(ey.size - 1), indexing="ij")
    ax, bx = ex[gx.ravel()], ex[gx.ravel() + 1]
    ay, by = ey[gy.ravel()], ey[gy.ravel() + 1]
    values, errors, along_x = _gk15_2d(f, ax, bx, ay, by)
    evaluations = RULE_SIZE_2D * ax.size
    area = (hi1 - lo1) * (hi2 - lo2)

    while True:
        total = float(np.sum(values))
        error = float(np.sum(errors))
        tol = max(abs_tol, rel_tol * abs(total))
        if error <= tol:
            return IntegrationResult(total, error, evaluations)

        split = errors > tol * (bx - ax) * (by - ay) / area
        if not split.any():
            split[np.argmax(errors)] = True
        cost = 2 * RULE_SIZE_2D * int(split.sum())
        if evaluations + cost > max_evaluations:
            raise NonConvergence(
                f"2D quadrature stalled at error {error:.3g} > {tol:.3g} "
                f"after {evaluations} evaluations")

        sx0, sx1, sy0, sy1 = ax[split], bx[split], ay[split], by[split]
        on_x = along_x[split]
        mx = np.where(on_x, 0.5 * (sx0 + sx1), sx1)
        my = np.where(on_x, sy1, 0.5 * (sy0 + sy1))
        # first child keeps the lower corner, second child the upper one
        c_ax = np.concatenate([sx0, np.where(on_x, mx, sx0)])
        c_bx = np.concatenate([mx, sx1])
        c_ay = np.concatenate([sy0, np.where(on_x, sy0, my)])
        c_by = np.concatenate([my, sy1])
        cv, ce, cd = _gk15_2d(f, c_ax, c_bx, c_ay, c_by)
        evaluations += cost

        keep = ~split
        ax = np.concatenate([ax[keep], c_ax])
        bx = np.concatenate([bx[keep], c_bx])
        ay = np.concatenate([ay[keep], c_ay])
        by = np.concatenate([by[keep], c_by])
        values = np.concatenate([values[keep], cv])
        errors = np.concatenate([errors[keep], ce])
        along_x = np.concatenate([along_x[keep], cd])
        order = np.lexsort((ay, ax))
        ax, bx, ay, by = ax[order], bx[order], ay[order], by[order]
        values, errors, along_x = values[order], errors[order], along_x[order]


def stencil_step(scale):
    """Default finite-difference step for a function varying on ``scale``."""
    return max(1e-3 * scale, 1e-6)


_OFFSETS = np.array([-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0])


def _five_point(fm2, fm1, f0, fp1, fp2, h):
    # grouped as second differences so constants cancel exactly
    return (16.0 * (fp1 + fm1 - 2.0 * f0) - (fp2 + fm2 - 2.0 * f0)) / (12.0 * h * h)


def second_derivative_with_error(f, x0, h):
    """Return ``(f''(x0), error_estimate)``.

    The 5-point central difference at steps ``h`` and ``2h`` is combined by
    one Richardson step; the error estimate is the size of that correction.
    ``f`` is called once with a numpy array of the 7 stencil points.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    points = x0 + h * _OFFSETS
    fx = np.broadcast_to(np.asarray(f(points), dtype=float), points.shape)
    if not np.all(np.isfinite(fx)):
        raise NonFinite(f"non-finite value in second-derivative stencil around {x0}")
    fm4, fm2, fm1, f0, fp1, fp2, fp4 = fx
    fine = _five_point(fm2, fm1, f0, fp1, fp2, h)
    coarse = _five_point(fm4, fm2, f0, fp2, fp4, 2.0 * h)
    correction = (fine - coarse) / 15.0
    return float(fine + correction), float(abs(correction))


def second_derivative(f, x0, h):
    """Richardson-refined 5-point estimate of ``f''(x0)``."""
    return second_derivative_with_error(f, x0, h)[0]
