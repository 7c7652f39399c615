# phasefield_engine/optimize.py - Scalar and box-constrained minimizers
"""
Small deterministic minimizers shared by the envelope, cohesive-law,
discrete-solver and limit-oracle modules.

- ``golden_section``: bracketed scalar minimization, returns a result dict.
- ``golden_section_vec``: the same iteration applied elementwise to arrays
  of brackets, with a fixed iteration count.
- ``scan_then_golden``: first-argmin grid scan followed by golden refinement
  on the neighbouring bracket.
- ``projected_gradient``: projected gradient descent on a box with a
  Barzilai-Borwein trial step and monotone Armijo backtracking.
"""
import logging
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

logger = logging.getLogger(__name__)

INV_PHI = 2.0 / (1.0 + sqrt(5.0))

BB_STEP_MIN = 1e-10
BB_STEP_MAX = 1e10


def golden_section(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> dict:
    """Minimize a unimodal scalar function on [lo, hi].

    Endpoints are compared with the interior estimate so a minimum sitting on
    the bracket boundary is returned exactly. Ties keep the smaller abscissa.
    """
    a, b = float(lo), float(hi)
    f_lo, f_hi = f(a), f(b)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    iteration = 0
    while iteration < max_iter and (b - a) > tol * max(1.0, abs(a) + abs(b)):
        if f2 < f1:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        iteration += 1

    candidates = [(float(lo), f_lo), (x1, f1), (x2, f2), (float(hi), f_hi)]
    argmin, minimum = min(candidates, key=lambda c: (c[1], c[0]))
    return dict(
        iterations=iteration,
        argmin=argmin,
        minimum=minimum,
        converged=bool(np.isfinite(minimum)) and iteration < max_iter,
    )


def golden_section_vec(f, lo: np.ndarray, hi: np.ndarray, iterations: int = 80):
    """Elementwise golden section; ``f`` maps an array of abscissae to values.

    Returns ``(argmin, minimum)`` arrays with endpoints included as candidates.
    """
    lo, hi = np.broadcast_arrays(np.atleast_1d(np.asarray(lo, dtype=float)),
                                 np.atleast_1d(np.asarray(hi, dtype=float)))
    a, b = lo.copy(), hi.copy()
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        right = f2 < f1
        a = np.where(right, x1, a)
        b = np.where(right, b, x2)
        x1_next = np.where(right, x2, b - INV_PHI * (b - a))
        x2_next = np.where(right, a + INV_PHI * (b - a), x1)
        f_probe = f(np.where(right, x2_next, x1_next))
        f1, f2 = np.where(right, f2, f_probe), np.where(right, f_probe, f1)
        x1, x2 = x1_next, x2_next

    xs = np.stack([lo, x1, x2, hi])
    fs = np.stack([f(lo), f1, f2, f(hi)])
    best = np.argmin(fs, axis=0)
    cols = np.arange(xs.shape[1])
    return xs[best, cols], fs[best, cols]


def scan_then_golden(f, grid: np.ndarray, tol: float = 1e-12) -> dict:
    """Scan ``f`` on ``grid`` (first argmin wins) then refine with golden section.

    ``f`` is called with scalars only.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.array([f(x) for x in grid])
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    result = golden_section(f, lo, hi, tol=tol)
    if values[i] <= result["minimum"]:
        result = dict(result, argmin=float(grid[i]), minimum=float(values[i]))
    result["scan_index"] = i
    return result


@dataclass
class DescentResult:
    """Outcome of a projected gradient run."""
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    line_search_failures: int = 0
    history: list = field(default_factory=list)


def projected_gradient(
    fun,
    grad,
    x0: np.ndarray,
    lower,
    upper,
    fixed: np.ndarray | None = None,
    max_iter: int = 500,
    rel_tol: float = 1e-12,
    step0: float | None = None,
    shrink: float = 0.5,
    max_halvings: int = 40,
    armijo: float = 1e-4,
) -> DescentResult:
    """Monotone projected gradient descent on the box [lower, upper].

    The trial step is the Barzilai-Borwein step ``s.s / s.y`` clipped to
    [BB_STEP_MIN, BB_STEP_MAX]; backtracking halves it until the Armijo
    condition holds along the projected arc. Entries flagged in ``fixed``
    never move. A failed line search ends the run with the last accepted
    point (no move is taken).
    """
    lower = np.broadcast_to(np.asarray(lower, dtype=float), np.shape(x0))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), np.shape(x0))
    free = np.ones(np.shape(x0), dtype=bool) if fixed is None else ~np.asarray(fixed, dtype=bool)

    x = np.asarray(x0, dtype=float).copy()
    x[free] = np.clip(x[free], lower[free], upper[free])
    f = float(fun(x))
    g = np.where(free, grad(x), 0.0)
    g_norm = float(np.max(np.abs(g))) if g.size else 0.0
    alpha = step0 if step0 is not None else 1.0 / max(g_norm, 1e-12)
    alpha = float(np.clip(alpha, BB_STEP_MIN, BB_STEP_MAX))

    history = [f]
    failures = 0
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        step = alpha
        accepted = False
        stationary = False
        for _ in range(max_halvings):
            x_trial = np.where(free, np.clip(x - step * g, lower, upper), x)
            d = x_trial - x
            slope = float(np.dot(g, d))
            if not np.any(d) or slope >= 0.0:
                stationary = True
                break
            f_trial = float(fun(x_trial))
            if f_trial <= f + armijo * slope:
                accepted = True
                break
            step *= shrink

        if stationary:
            converged = True
            break
        if not accepted:
            failures += 1
            logger.debug(f"⚠️ line search failed after {max_halvings} halvings at iteration {iteration}")
            break

        g_trial = np.where(free, grad(x_trial), 0.0)
        s = x_trial - x
        y = g_trial - g
        sy = float(np.dot(s, y))
        alpha = float(np.dot(s, s)) / sy if sy > 0.0 else BB_STEP_MAX
        alpha = float(np.clip(alpha, BB_STEP_MIN, BB_STEP_MAX))

        decrease = f - f_trial
        x, f, g = x_trial, f_trial, g_trial
        history.append(f)
        if decrease <= rel_tol * max(abs(f), 1e-300):
            converged = True
            break

    return DescentResult(
        x=x,
        value=f,
        iterations=iteration,
        converged=converged,
        line_search_failures=failures,
        history=history,
    )
