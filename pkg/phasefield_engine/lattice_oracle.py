# phasefield_engine/lattice_oracle.py - Shortest-path baseline for the cohesive law
"""
Independent, slow baseline for g(s): the exact optimum of the profile energy
over lattice paths. States are (step, γ level, β level); γ may only increase,
β may move up or down, and each move costs the midpoint metric length

    ( J(β_m) Δγ² + D(β_m) Δβ² )^{1/2}.

Used as a reference for the projected-gradient optimizer on coarse grids.
"""
import logging
import math

import numpy as np

from .cohesive_law import ProfileMetric
from .exceptions import DomainError
from .model_core import ModelSpec, phi_prime0

logger = logging.getLogger(__name__)


def lattice_g(model: ModelSpec, s: float, n_gamma: int = 64, n_beta: int = 64,
              n_steps: int = 64, radius: int = 8) -> float:
    if s < 0:
        raise DomainError(f"jump amplitude must be ≥ 0, got {s}")
    if s == 0:
        return 0.0
    metric = ProfileMetric(model)
    s_norm = math.sqrt(phi_prime0(model)) * s
    h_gamma = s_norm / (n_gamma - 1)
    betas = np.linspace(0.0, 1.0, n_beta)
    h_beta = betas[1] - betas[0]

    # move costs indexed by source β level, one row per (di, dj)
    moves = []
    for di in range(radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj == 0:
                continue
            lo, hi = max(0, -dj), min(n_beta, n_beta - dj)
            src = np.arange(lo, hi)
            bm = 0.5 * (betas[src] + betas[src + dj])
            cost = np.sqrt(metric.J(bm) * (di * h_gamma) ** 2 + metric.D(bm) * (dj * h_beta) ** 2)
            moves.append((di, dj, lo, hi, cost))

    value = np.full((n_gamma, n_beta), np.inf)
    value[0, n_beta - 1] = 0.0
    for _ in range(n_steps):
        nxt = value.copy()
        for di, dj, lo, hi, cost in moves:
            src = value[: n_gamma - di, lo:hi] + cost[None, :]
            dst = nxt[di:, lo + dj: hi + dj]
            np.minimum(dst, src, out=dst)
        value = nxt
    result = float(value[n_gamma - 1, n_beta - 1])
    logger.debug(f"📊 lattice g({s:g}) = {result:.6g} on {n_gamma}x{n_beta} levels, {n_steps} steps")
    return result
