# phasefield_engine/envelope.py - Effective bulk density and its convex envelope
"""
Effective bulk density

    h_σ(t) = inf_{τ > 0} φ(1/τ) t² + (σ²/4) τ

and its convex envelope h**. For finite σ the envelope grows linearly at
infinity with slope m = (φ'(0⁺))^{1/2} σ; the table closes the sampled hull
with an exact recession ray of that slope.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import DomainError, ValidationError
from .model_core import Family, ModelSpec, SigmaBar, phi_inf, phi_prime0
from .optimize import golden_section_vec
from .utils import write_csv

logger = logging.getLogger(__name__)

TAU_SCAN = 128
TAU_FLOOR = 1e-8
SLOPE_TOLERANCE = 0.01


def as_sigma(sigma) -> SigmaBar:
    """Accept a SigmaBar or a number (0, finite positive, or inf)."""
    if isinstance(sigma, SigmaBar):
        return sigma
    value = float(sigma)
    if value == 0:
        return SigmaBar.zero()
    if math.isinf(value):
        return SigmaBar.infinite()
    if value < 0:
        raise DomainError(f"σ must be ≥ 0, got {value}")
    return SigmaBar.finite(value)


def _h_finite(model: ModelSpec, sigma: float, t: np.ndarray, scan: int) -> np.ndarray:
    """Vectorized inner minimization over τ for t > 0."""
    p_inf = phi_inf(model)
    coef = sigma * sigma / 4.0
    tau_max = 4.0 * p_inf * t * t / (sigma * sigma) + t
    fractions = np.geomspace(TAU_FLOOR, 1.0, scan)
    taus = tau_max[:, None] * fractions[None, :]
    values = np.asarray(model.phi(1.0 / taus)) * (t * t)[:, None] + coef * taus
    best = np.argmin(values, axis=1)
    rows = np.arange(t.size)
    lo = taus[rows, np.maximum(best - 1, 0)]
    hi = taus[rows, np.minimum(best + 1, scan - 1)]
    # first argmin at the floor: the bracket reaches down to τ → 0
    lo = np.where(best == 0, 0.0, lo)

    def objective(tau):
        with np.errstate(divide="ignore"):
            inv = np.where(tau > 0, 1.0 / np.where(tau > 0, tau, 1.0), np.inf)
        return np.asarray(model.phi(inv)) * t * t + coef * tau

    _, refined = golden_section_vec(objective, lo, hi, iterations=90)
    scanned = values[rows, best]
    at_zero = p_inf * t * t
    return np.minimum(np.minimum(refined, scanned), at_zero)


def h_sigma_array(model: ModelSpec, sigma, t, scan: int = TAU_SCAN) -> np.ndarray:
    sigma = as_sigma(sigma)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("h_σ is defined for t ≥ 0")
    if sigma.kind == "zero":
        return np.zeros_like(t)
    if sigma.kind == "infinite":
        return phi_inf(model) * t * t
    out = np.zeros_like(t)
    positive = t > 0
    if np.any(positive):
        out[positive] = _h_finite(model, sigma.value, t[positive], scan)
    return out


def h_sigma_pointwise(model: ModelSpec, sigma, t: float, scan: int = TAU_SCAN) -> float:
    """h_σ(t) by log-scan over τ plus golden refinement; ties keep the smallest τ."""
    if t < 0:
        raise DomainError(f"h_σ is defined for t ≥ 0, got {t}")
    return float(h_sigma_array(model, sigma, [t], scan)[0])


def h_sigma_closed_form(model: ModelSpec, sigma: float, t):
    """Closed forms for φ = c·(1∧t) and φ = c·t/(1+t); None for other families."""
    family = model.phi.family
    if family not in (Family.MIN_WITH_ONE, Family.RATIONAL):
        return None
    c = model.phi.scale
    rc = math.sqrt(c)
    t = np.asarray(t, dtype=float)
    if family is Family.MIN_WITH_ONE:
        return np.where(t <= sigma / rc, c * t * t, rc * sigma * t)
    return np.where(t <= sigma / (2.0 * rc), c * t * t, rc * sigma * t - sigma * sigma / 4.0)


def recession_slope(model: ModelSpec, sigma) -> float:
    """(φ'(0⁺))^{1/2}·σ."""
    sigma = as_sigma(sigma)
    if sigma.kind == "infinite":
        raise DomainError("recession slope needs a finite σ")
    return math.sqrt(phi_prime0(model)) * sigma.numeric


def _lower_hull(x: np.ndarray, y: np.ndarray) -> list:
    """Indices of the lower convex hull of points sorted by x (monotone chain)."""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


@dataclass
class EnvelopeTable:
    sigma: SigmaBar
    grid: np.ndarray
    raw: np.ndarray
    hull: np.ndarray
    recession_slope: float
    vertices: np.ndarray
    ray_start: float | None = None
    final_slope: float = 0.0
    outer_slope: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def t_max(self) -> float:
        return float(self.grid[-1])

    @property
    def xi(self) -> float:
        """max over the grid of m·t - hull(t)."""
        if self.sigma.kind != "finite":
            return 0.0
        return float(np.max(self.recession_slope * self.grid - self.hull))

    def __call__(self, t):
        return eval_envelope(self, t)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid, "raw": self.raw, "hull": self.hull})

    def to_csv(self, path: str) -> str:
        return write_csv(self.to_frame(), path)

    def summary(self) -> dict:
        return {
            "sigma": self.sigma.to_dict(),
            "t_max": self.t_max,
            "n": int(self.grid.size),
            "recession_slope": self.recession_slope,
            "final_slope": self.final_slope,
            "ray_start": self.ray_start,
            "xi": self.xi,
            "warnings": list(self.warnings),
        }


def build_envelope(model: ModelSpec, sigma, t_max: float, n: int = 4096, scan: int = TAU_SCAN) -> EnvelopeTable:
    """Sample h_σ on a square-root graded grid and take its lower convex hull."""
    if n < 128:
        raise ValidationError(f"envelope grid needs n ≥ 128, got {n}")
    if not t_max > 0:
        raise ValidationError(f"t_max must be positive, got {t_max}")
    sigma = as_sigma(sigma)
    grid = t_max * (np.arange(n) / (n - 1.0)) ** 2
    raw = h_sigma_array(model, sigma, grid, scan)
    warnings = []

    if sigma.kind == "zero":
        hull = np.zeros_like(grid)
        return EnvelopeTable(sigma, grid, raw, hull, 0.0, np.array([0.0, t_max]), warnings=warnings)

    if sigma.kind == "infinite":
        idx = _lower_hull(grid, raw)
        hull = np.interp(grid, grid[idx], raw[idx])
        last = (hull[-1] - hull[-2]) / (grid[-1] - grid[-2])
        return EnvelopeTable(sigma, grid, raw, hull, math.inf, grid[idx],
                             final_slope=float(last), outer_slope=float(last), warnings=warnings)

    m = recession_slope(model, sigma)
    shifted = raw - m * grid
    j_star = int(np.argmin(shifted))
    idx = _lower_hull(grid[: j_star + 1], raw[: j_star + 1])
    hull = np.empty_like(grid)
    hull[: j_star + 1] = np.interp(grid[: j_star + 1], grid[idx], raw[idx])
    hull[j_star + 1:] = raw[j_star] + m * (grid[j_star + 1:] - grid[j_star])
    if len(idx) >= 2:
        a, b = idx[-2], idx[-1]
        final_slope = float((raw[b] - raw[a]) / (grid[b] - grid[a]))
    else:
        final_slope = m

    if j_star == n - 1:
        warnings.append(f"t_max={t_max:g} does not reach the linear regime (recession ray starts at the last node)")
    if m > 0 and abs(final_slope - m) > SLOPE_TOLERANCE * m:
        warnings.append(f"final hull slope {final_slope:.6g} differs from recession slope {m:.6g} by more than 1%")
    for message in warnings:
        logger.warning(f"⚠️ envelope σ={sigma.value:g}: {message}")

    table = EnvelopeTable(sigma, grid, raw, hull, m, grid[idx], ray_start=float(grid[j_star]),
                          final_slope=final_slope, outer_slope=m, warnings=warnings)
    logger.info(f"📊 envelope σ={sigma.value:g}: n={n}, t_max={t_max:g}, m={m:.6g}, ray from t={grid[j_star]:.6g}")
    return table


def eval_envelope(table: EnvelopeTable, t):
    """Piecewise-linear hull, extended linearly beyond the grid."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("h** is defined for t ≥ 0")
    inside = np.interp(t_arr, table.grid, table.hull)
    beyond = table.hull[-1] + table.outer_slope * (t_arr - table.t_max)
    out = np.where(t_arr <= table.t_max, inside, beyond)
    return float(out) if out.ndim == 0 else out
