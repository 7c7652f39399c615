# phasefield_engine/cohesive_law.py - Surface energy density g(s) by optimal profiles
"""
Cohesive law of the limit functional.

    g(s) = inf over (γ, β) in 𝔘_s of ∫₀¹ ( 𝔡(1-β) (φ'(0⁺) f²(β) |γ'|² + |β'|²) )^{1/2} dx

with γ(0) = 0, γ(1) = s and β = 1 at both ends (β ≥ 1 - η for the relaxed
density g_η). The integrand is 1-homogeneous in the derivatives, so a
discrete profile is a polyline in the (γ, β) plane and its energy is the
length of that polyline in the metric J(β) dγ² + D(β) dβ² with

    J(β) = 𝔡(1-β) f̂(β) / Q(1-β),    D(β) = 𝔡(1-β).

All optimization runs on the normalized jump s̃ = (φ'(0⁺))^{1/2} s, which
turns g into g₁(s̃). Values returned here are upper approximations of g
(energies of explicit profiles); ĝ and the Lipschitz caps bound from above,
g_η + 2 λ₀(η) η from below.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .exceptions import DomainError, ValidationError
from .model_core import ONE_CLAMP, ModelSpec, phi_prime0, psi, root_primitive
from .optimize import golden_section, projected_gradient, scan_then_golden
from .utils import chunk_ranges, write_csv, write_json

logger = logging.getLogger(__name__)

FD_STEP = 1e-7
THETA_MAX = 1.0 - 1e-4
TIE_TOLERANCE = 1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class LawConfig:
    n_nodes: int = 401
    max_iter: int = 400
    polish_top: int = 2
    refine: bool = True
    refine_fraction: float = 0.25
    plateau_deltas: tuple = (1.0, 0.5, 0.25, 0.1, 0.05, 0.02)
    eta: float = 1e-2
    chunk_size: int = 16
    rel_tol: float = 1e-12
    ghat_scan: int = 1024
    geodesic_scan: int = 48
    repv_nodes: int = 201
    repv_max_iter: int = 300
    repv_t_range: tuple = (0.1, 100.0)
    repv_tol: float = 1e-3

    def __post_init__(self):
        if self.n_nodes < 8:
            raise ValidationError(f"profiles need at least 8 nodes, got {self.n_nodes}")
        if not 0 <= self.eta <= 1:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta}")
        if self.chunk_size < 1:
            raise ValidationError("chunk_size must be positive")


@dataclass
class ProfilePair:
    """Nodal (γ, β) on [0, T]; the energy does not depend on T."""
    gamma: np.ndarray
    beta: np.ndarray
    s: float
    eta: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.gamma.shape != self.beta.shape or self.gamma.ndim != 1 or self.gamma.size < 2:
            raise ValidationError("gamma and beta must be 1D arrays of equal length ≥ 2")
        if self.gamma[0] != 0.0 or self.gamma[-1] != self.s:
            raise ValidationError(f"γ must run from 0 to s={self.s}, got {self.gamma[0]} → {self.gamma[-1]}")
        if np.any(self.beta < 0) or np.any(self.beta > 1):
            raise ValidationError("β must stay within [0, 1]")
        floor = 1.0 - self.eta
        if self.beta[0] < floor or self.beta[-1] < floor or (self.eta == 0 and (self.beta[0] != 1 or self.beta[-1] != 1)):
            raise ValidationError(f"β boundary values must be ≥ {floor}")

    @property
    def n(self) -> int:
        return int(self.gamma.size)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n)


# ---------- Metric ----------

class ProfileMetric:
    """J(β) and D(β) with finite-difference derivatives, φ'(0⁺) factored out."""

    def __init__(self, model: ModelSpec):
        self.model = model

    def J(self, beta):
        beta = np.asarray(beta, dtype=float)
        d = np.maximum(1.0 - beta, ONE_CLAMP)
        return np.asarray(self.model.dpot(d)) * np.asarray(self.model.fhat(beta)) / np.asarray(self.model.qfn(d))

    def D(self, beta):
        return np.asarray(self.model.dpot(np.clip(1.0 - np.asarray(beta, dtype=float), 0.0, 1.0)))

    def _derivative(self, fn, beta):
        beta = np.asarray(beta, dtype=float)
        hi = np.minimum(beta + FD_STEP, 1.0)
        lo = np.maximum(beta - FD_STEP, 0.0)
        return (fn(hi) - fn(lo)) / (hi - lo)

    def dJ(self, beta):
        return self._derivative(self.J, beta)

    def dD(self, beta):
        return self._derivative(self.D, beta)


def _energy(metric: ProfileMetric, gamma: np.ndarray, beta: np.ndarray) -> float:
    bm = 0.5 * (beta[:-1] + beta[1:])
    dg = np.diff(gamma)
    db = np.diff(beta)
    return float(np.sum(np.sqrt(metric.J(bm) * dg * dg + metric.D(bm) * db * db)))


def _energy_gradient(metric: ProfileMetric, gamma: np.ndarray, beta: np.ndarray):
    bm = 0.5 * (beta[:-1] + beta[1:])
    dg = np.diff(gamma)
    db = np.diff(beta)
    J, D = metric.J(bm), metric.D(bm)
    q = np.sqrt(J * dg * dg + D * db * db)
    inv = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), 0.0)
    q_dg = J * dg * inv
    q_db = D * db * inv
    q_bm = 0.5 * (metric.dJ(bm) * dg * dg + metric.dD(bm) * db * db) * inv

    grad_gamma = np.zeros_like(gamma)
    grad_gamma[1:] += q_dg
    grad_gamma[:-1] -= q_dg
    grad_beta = np.zeros_like(beta)
    grad_beta[1:] += q_db + 0.5 * q_bm
    grad_beta[:-1] += -q_db + 0.5 * q_bm
    return grad_gamma, grad_beta


def profile_energy(model: ModelSpec, p: ProfilePair) -> float:
    """Midpoint-rule energy of a profile pair."""
    return _energy(ProfileMetric(model), math.sqrt(phi_prime0(model)) * p.gamma, p.beta)


# ---------- Explicit bounds ----------

def lambda0(model: ModelSpec, eta: float) -> float:
    """max of 𝔡^{1/2} on [0, η] over 512 samples."""
    if not 0 <= eta <= 1:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    t = np.linspace(0.0, eta, 512)
    return float(np.max(np.sqrt(np.maximum(np.asarray(model.dpot(t)), 0.0))))


def g_hat_detail(model: ModelSpec, s: float, scan: int = 1024) -> tuple:
    """(ĝ(s), x*) with x* the minimizing dip depth."""
    if s < 0:
        raise DomainError(f"jump amplitude must be ≥ 0, got {s}")
    if s == 0:
        return 0.0, 0.0
    metric = ProfileMetric(model)
    s_norm = math.sqrt(phi_prime0(model)) * s

    def objective(x):
        return 2.0 * root_primitive(model, x) + math.sqrt(float(metric.J(1.0 - x))) * s_norm

    grid = np.concatenate([np.geomspace(1e-9, 1.0, scan - 1), [1.0]])
    result = scan_then_golden(objective, np.unique(grid), tol=1e-13)
    return float(result["minimum"]), float(result["argmin"])


def g_hat(model: ModelSpec, s: float, scan: int = 1024) -> float:
    """Explicit upper bound ĝ(s) from the plateau construction."""
    return g_hat_detail(model, s, scan)[0]


# ---------- Start profiles (normalized units) ----------

def _plateau_start(n: int, s_norm: float, delta: float):
    third = max((n - 1) // 3, 1)
    k1, k2 = third, n - 1 - third
    beta = np.empty(n)
    gamma = np.empty(n)
    beta[: k1 + 1] = np.linspace(1.0, 1.0 - delta, k1 + 1)
    beta[k1: k2 + 1] = 1.0 - delta
    beta[k2:] = np.linspace(1.0 - delta, 1.0, n - k2)
    gamma[: k1 + 1] = 0.0
    gamma[k1: k2 + 1] = np.linspace(0.0, s_norm, k2 - k1 + 1)
    gamma[k2:] = s_norm
    return gamma, beta


def _linear_start(n: int, s_norm: float, delta: float):
    gamma = np.linspace(0.0, s_norm, n)
    beta = np.full(n, 1.0 - delta)
    beta[0] = beta[-1] = 1.0
    return gamma, beta


def _resample(gamma: np.ndarray, beta: np.ndarray, n: int):
    old = np.linspace(0.0, 1.0, gamma.size)
    new = np.linspace(0.0, 1.0, n)
    return np.interp(new, old, gamma), np.interp(new, old, beta)


def _branch(metric: ProfileMetric, beta_min: float, mu: float):
    """Gain in γ and cost of one monotone branch from β=1 down to β_min."""
    span = 1.0 - beta_min
    b = beta_min + span * _GL_X ** 2
    jac = 2.0 * span * _GL_X
    Jb, Db = metric.J(b), metric.D(b)
    if mu == 0.0:
        return 0.0, float(np.sum(_GL_W * np.sqrt(Db) * jac))
    gap = np.maximum(Jb - mu * mu, 1e-300)
    p = mu * np.sqrt(Db) / np.sqrt(Jb * gap)
    cost = np.sqrt(Db * Jb / gap)
    return float(np.sum(_GL_W * p * jac)), float(np.sum(_GL_W * cost * jac))


def _geodesic_plan(metric: ProfileMetric, s_norm: float, beta_min: float):
    """Momentum, plateau length and predicted cost for a descent to β_min."""
    span_nodes = beta_min + (1.0 - beta_min) * _GL_X ** 2
    j_star = float(min(np.min(metric.J(span_nodes)), metric.J(beta_min)))
    mu_max = THETA_MAX * math.sqrt(max(j_star, 0.0))
    gain_max, cost_max = _branch(metric, beta_min, mu_max)
    if 2.0 * gain_max <= s_norm:
        plateau = s_norm - 2.0 * gain_max
        return mu_max, plateau, 2.0 * cost_max + math.sqrt(max(j_star, 0.0)) * plateau
    mu = brentq(lambda m: 2.0 * _branch(metric, beta_min, m)[0] - s_norm, 0.0, mu_max, xtol=1e-14)
    return mu, 0.0, 2.0 * _branch(metric, beta_min, mu)[1]


def _geodesic_start(metric: ProfileMetric, n: int, s_norm: float, scan: int):
    """Semi-analytic start: symmetric monotone branches plus a plateau at β_min."""
    def predicted(beta_min):
        return _geodesic_plan(metric, s_norm, beta_min)[2]

    grid = np.concatenate([[0.0], 1.0 - np.geomspace(1.0, 1e-4, scan - 1)])
    best = scan_then_golden(predicted, np.unique(grid), tol=1e-10)
    beta_min = best["argmin"]
    mu, plateau, _ = _geodesic_plan(metric, s_norm, beta_min)

    w = np.linspace(0.0, 1.0, 200)
    span = 1.0 - beta_min
    b = beta_min + span * w ** 2
    jac = 2.0 * span * w
    if mu > 0:
        Jb = metric.J(b)
        p = mu * np.sqrt(metric.D(b)) / np.sqrt(Jb * np.maximum(Jb - mu * mu, 1e-300))
    else:
        p = np.zeros_like(b)
    integrand = p * jac
    # gain measured from β_min upward; the descent runs from β = 1 down to β_min
    gain = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(w))])
    half = gain[-1]
    total_gain = 2.0 * half + plateau
    scale = s_norm / total_gain if total_gain > 0 else 0.0
    gamma_desc = (half - gain)[::-1]
    beta_desc = b[::-1]
    gamma_asc = half + plateau + gain
    gamma_path = np.concatenate([gamma_desc, gamma_asc]) * scale
    beta_path = np.concatenate([beta_desc, b])

    bm = 0.5 * (beta_path[:-1] + beta_path[1:])
    dg, db = np.diff(gamma_path), np.diff(beta_path)
    seg_cost = np.sqrt(metric.J(bm) * dg * dg + metric.D(bm) * db * db)
    seg_len = np.hypot(dg, db)
    if seg_cost.sum() <= 0 or seg_len.sum() <= 0:
        return None
    param = 0.98 * np.concatenate([[0.0], np.cumsum(seg_cost)]) / seg_cost.sum() \
        + 0.02 * np.concatenate([[0.0], np.cumsum(seg_len)]) / seg_len.sum()
    target = np.linspace(0.0, 1.0, n)
    gamma = np.interp(target, param, gamma_path)
    beta = np.clip(np.interp(target, param, beta_path), 0.0, 1.0)
    gamma[0], gamma[-1] = 0.0, s_norm
    beta[0] = beta[-1] = 1.0
    return gamma, beta


# ---------- Optimizer ----------

@dataclass
class GResult:
    value: float
    profile: ProfilePair
    winner: str
    iterations: int = 0
    converged: bool = True
    candidates: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {"winner": self.winner, "iterations": self.iterations, "converged": self.converged}


def _polish(metric: ProfileMetric, gamma, beta, s_norm: float, eta: float, cfg: LawConfig, max_iter: int):
    n = gamma.size
    lower = np.concatenate([np.full(n, -np.inf), np.zeros(n)])
    upper = np.concatenate([np.full(n, np.inf), np.ones(n)])
    fixed = np.zeros(2 * n, dtype=bool)
    fixed[[0, n - 1]] = True
    if eta > 0:
        lower[[n, 2 * n - 1]] = 1.0 - eta
    else:
        fixed[[n, 2 * n - 1]] = True

    def fun(z):
        return _energy(metric, z[:n], z[n:])

    def grad(z):
        gg, gb = _energy_gradient(metric, z[:n], z[n:])
        return np.concatenate([gg, gb])

    z0 = np.concatenate([gamma, beta])
    result = projected_gradient(fun, grad, z0, lower, upper, fixed=fixed, max_iter=max_iter, rel_tol=cfg.rel_tol)
    g_out, b_out = result.x[:n].copy(), result.x[n:].copy()
    g_out[0], g_out[-1] = 0.0, s_norm
    return g_out, b_out, result


def _refine(gamma: np.ndarray, beta: np.ndarray, fraction: float):
    """Insert midpoints in the elements with the steepest β."""
    steep = np.abs(np.diff(beta))
    if not np.any(steep > 0):
        return gamma, beta
    cut = np.quantile(steep, 1.0 - fraction)
    pick = np.nonzero(steep >= max(cut, 1e-300))[0]
    g_mid = 0.5 * (gamma[pick] + gamma[pick + 1])
    b_mid = 0.5 * (beta[pick] + beta[pick + 1])
    return np.insert(gamma, pick + 1, g_mid), np.insert(beta, pick + 1, b_mid)


def _minimize(model: ModelSpec, s: float, eta: float, cfg: LawConfig, warm: ProfilePair | None) -> GResult:
    metric = ProfileMetric(model)
    root = math.sqrt(phi_prime0(model))
    s_norm = root * s
    n = cfg.n_nodes

    starts = []
    _, x_hat = g_hat_detail(model, s, cfg.ghat_scan)
    deltas = [x_hat] + [d for d in cfg.plateau_deltas if not math.isclose(d, x_hat)]
    for delta in deltas:
        starts.append((f"plateau(δ={delta:.4g})", *_plateau_start(n, s_norm, delta)))
    starts.append((f"linear(δ={x_hat:.4g})", *_linear_start(n, s_norm, x_hat)))
    geodesic = _geodesic_start(metric, n, s_norm, cfg.geodesic_scan)
    if geodesic is not None:
        starts.append(("geodesic", *geodesic))
    warm_label = None
    if warm is not None:
        wg, wb = root * warm.gamma, warm.beta.copy()
        if warm.s != s:
            # different jump: rescale and bring back to the working resolution
            if warm.s > 0:
                wg = wg * (s / warm.s)
            if wg.size != n:
                wg, wb = _resample(wg, wb, n)
        wg[0], wg[-1] = 0.0, s_norm
        if eta == 0:
            wb[0] = wb[-1] = 1.0
        else:
            wb[[0, -1]] = np.clip(wb[[0, -1]], 1.0 - eta, 1.0)
        warm_label = "warm"
        starts.append((warm_label, wg, wb))

    energies = [(_energy(metric, g, b), i) for i, (_, g, b) in enumerate(starts)]
    order = [i for _, i in sorted(energies)]
    to_polish = order[: cfg.polish_top]
    if warm_label is not None and len(starts) - 1 not in to_polish:
        to_polish.append(len(starts) - 1)

    candidates = {starts[i][0]: e for e, i in energies}
    best = min((e, i, starts[i][1], starts[i][2], 0, True) for e, i in energies)
    for i in sorted(to_polish):
        label, g0, b0 = starts[i]
        g1, b1, res = _polish(metric, g0, b0, s_norm, eta, cfg, cfg.max_iter)
        e1 = _energy(metric, g1, b1)
        candidates[f"{label}+polish"] = e1
        if e1 < best[0] - TIE_TOLERANCE or (abs(e1 - best[0]) <= TIE_TOLERANCE and i < best[1]):
            best = (e1, i, g1, b1, res.iterations, res.converged)

    value, index, gamma, beta, iterations, converged = best
    winner = starts[index][0]
    if cfg.refine:
        g2, b2 = _refine(gamma, beta, cfg.refine_fraction)
        g2, b2, res = _polish(metric, g2, b2, s_norm, eta, cfg, max(cfg.max_iter // 2, 1))
        e2 = _energy(metric, g2, b2)
        if e2 < value - TIE_TOLERANCE:
            value, gamma, beta = e2, g2, b2
            iterations += res.iterations
            converged = res.converged
            winner = f"{winner}+refine"

    if not converged:
        logger.debug(f"⚠️ g({s:g}) optimizer hit its iteration cap; keeping best-so-far")
    out_gamma = gamma / root
    out_gamma[0], out_gamma[-1] = 0.0, s
    profile = ProfilePair(out_gamma, np.clip(beta, 0.0, 1.0), s, eta=eta)
    return GResult(profile_energy(model, profile), profile, winner, iterations, converged, candidates)


def _zero_result(cfg: LawConfig, eta: float) -> GResult:
    n = cfg.n_nodes
    return GResult(0.0, ProfilePair(np.zeros(n), np.ones(n), 0.0, eta=eta), "trivial")


def g_value_detail(model: ModelSpec, s: float, cfg: LawConfig = LawConfig(),
                   warm: ProfilePair | None = None) -> GResult:
    if s < 0:
        raise DomainError(f"jump amplitude must be ≥ 0, got {s}")
    if s == 0:
        return _zero_result(cfg, 0.0)
    return _minimize(model, s, 0.0, cfg, warm)


def g_value(model: ModelSpec, s: float, cfg: LawConfig = LawConfig(), warm: ProfilePair | None = None) -> float:
    """Upper approximation of g(s) by multistart projected gradient."""
    return g_value_detail(model, s, cfg, warm).value


def g_eta_detail(model: ModelSpec, s: float, eta: float, cfg: LawConfig = LawConfig(),
                 warm: ProfilePair | None = None) -> GResult:
    if s < 0:
        raise DomainError(f"jump amplitude must be ≥ 0, got {s}")
    if not 0 <= eta <= 1:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if s == 0:
        return _zero_result(cfg, eta)
    if eta == 0:
        return _minimize(model, s, 0.0, cfg, warm)
    if warm is None:
        warm = g_value_detail(model, s, cfg).profile
    return _minimize(model, s, eta, cfg, warm)


def g_eta(model: ModelSpec, s: float, eta: float, cfg: LawConfig = LawConfig(),
          warm: ProfilePair | None = None) -> float:
    """Relaxed density with β(0), β(1) ≥ 1 - η; never above the g profile it starts from."""
    return g_eta_detail(model, s, eta, cfg, warm).value


def with_ramps(profile: ProfilePair, nodes: int = 8) -> ProfilePair:
    """Close a relaxed profile with pure-β ramps back to β = 1 at both ends."""
    head = np.linspace(1.0, profile.beta[0], nodes + 1)[:-1]
    tail = np.linspace(profile.beta[-1], 1.0, nodes + 1)[1:]
    gamma = np.concatenate([np.zeros(nodes), profile.gamma, np.full(nodes, profile.s)])
    beta = np.concatenate([head, profile.beta, tail])
    return ProfilePair(gamma, beta, profile.s)


def truncate(profile: ProfilePair, s_new: float) -> ProfilePair:
    """min(γ, s_new): a competitor for a smaller jump whose energy can only drop."""
    gamma = np.minimum(profile.gamma, s_new)
    gamma[-1] = s_new
    return ProfilePair(gamma, profile.beta.copy(), s_new, eta=profile.eta)


# ---------- Alternative representation on [0, T] ----------

def _repv_energy(model: ModelSpec, s_norm: float, beta: np.ndarray, T: float):
    n = beta.size
    h = T / (n - 1)
    bm = 0.5 * (beta[:-1] + beta[1:])
    compliance = _compliance(model, bm)
    C = float(np.sum(h * compliance))
    elastic = s_norm * s_norm / C if C > 0 else (0.0 if s_norm == 0 else math.inf)
    db = np.diff(beta)
    return elastic + float(np.sum(h * np.asarray(model.dpot(np.clip(1.0 - bm, 0.0, 1.0))) / 4.0 + db * db / h))


def _compliance(model: ModelSpec, beta):
    """1/f²(β) = Q(1-β)/f̂(β), with β clamped at 1e-9 from below."""
    b = np.maximum(np.asarray(beta, dtype=float), 1e-9)
    return np.asarray(model.qfn(np.clip(1.0 - b, 0.0, 1.0))) / np.asarray(model.fhat(b))


def _repv_gradient(model: ModelSpec, s_norm: float, beta: np.ndarray, T: float) -> np.ndarray:
    n = beta.size
    h = T / (n - 1)
    bm = 0.5 * (beta[:-1] + beta[1:])
    comp = _compliance(model, bm)
    C = float(np.sum(h * comp))
    hi, lo = np.minimum(bm + FD_STEP, 1.0), np.maximum(bm - FD_STEP, 0.0)
    d_comp = (_compliance(model, hi) - _compliance(model, lo)) / (hi - lo)
    # derivative of 𝔡(1 - β) with respect to β
    d_pot = (np.asarray(model.dpot(np.clip(1.0 - hi, 0.0, 1.0))) - np.asarray(model.dpot(np.clip(1.0 - lo, 0.0, 1.0)))) / (hi - lo)
    d_elastic = -s_norm * s_norm * h * d_comp / (C * C) if C > 0 else np.zeros_like(bm)
    per_mid = d_elastic + h * d_pot / 4.0
    grad = np.zeros(n)
    grad[1:] += 0.5 * per_mid
    grad[:-1] += 0.5 * per_mid
    db = np.diff(beta) / h
    grad[1:] += 2.0 * db
    grad[:-1] -= 2.0 * db
    return grad


def _repv_start(model: ModelSpec, seed: ProfilePair, n: int, T: float) -> np.ndarray:
    """Reparametrize a unit-interval profile by dx = 2 ds / 𝔡(1-β) and fit it into [0, T]."""
    metric = ProfileMetric(model)
    root = math.sqrt(phi_prime0(model))
    gamma, beta = root * seed.gamma, seed.beta
    bm = 0.5 * (beta[:-1] + beta[1:])
    dg, db = np.diff(gamma), np.diff(beta)
    ds = np.sqrt(metric.J(bm) * dg * dg + metric.D(bm) * db * db)
    dx = 2.0 * ds / np.maximum(metric.D(bm), 1e-3)
    X = np.concatenate([[0.0], np.cumsum(dx)])
    cost = np.concatenate([[0.0], np.cumsum(ds)])
    x_mid = np.interp(0.5 * cost[-1], cost, X) if cost[-1] > 0 else 0.5 * X[-1]
    x_new = np.linspace(0.0, T, n) - 0.5 * T + x_mid
    out = np.interp(x_new, X, beta, left=1.0, right=1.0)
    out[0] = out[-1] = 1.0
    return np.clip(out, 0.0, 1.0)


def _repv_inner(model: ModelSpec, s_norm: float, seed: ProfilePair, T: float, cfg: LawConfig):
    n = cfg.repv_nodes
    beta0 = _repv_start(model, seed, n, T)
    fixed = np.zeros(n, dtype=bool)
    fixed[[0, -1]] = True
    res = projected_gradient(
        lambda b: _repv_energy(model, s_norm, b, T),
        lambda b: _repv_gradient(model, s_norm, b, T),
        beta0, 0.0, 1.0, fixed=fixed, max_iter=cfg.repv_max_iter, rel_tol=cfg.rel_tol,
    )
    return res.value, res


def g_repV_value(model: ModelSpec, s: float, cfg: LawConfig = LawConfig(),
                 seed: ProfilePair | None = None) -> float:
    """inf over T and profiles on [0, T] of the unscaled length-plus-potential form of g."""
    if s < 0:
        raise DomainError(f"jump amplitude must be ≥ 0, got {s}")
    if s == 0:
        return 0.0
    s_norm = math.sqrt(phi_prime0(model)) * s
    if seed is None:
        seed = g_value_detail(model, s, cfg).profile
    lo, hi = (math.log(t) for t in cfg.repv_t_range)
    outer = golden_section(lambda logT: _repv_inner(model, s_norm, seed, math.exp(logT), cfg)[0],
                           lo, hi, tol=cfg.repv_tol)
    return float(outer["minimum"])


# ---------- Law table ----------

@dataclass
class CohesiveLawTable:
    s: np.ndarray
    g: np.ndarray
    g_hat: np.ndarray
    g_eta: np.ndarray
    eta: float
    lambda0: float
    toughness: float
    diagnostics: list = field(default_factory=list)
    profiles: list = field(default_factory=list, repr=False)

    def eval_g(self, s):
        """Monotone piecewise-linear interpolation of g on the table grid."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0):
            raise DomainError("g is defined for s ≥ 0")
        if np.any(s_arr > self.s[-1] * (1.0 + 1e-12)):
            raise DomainError(f"jump {float(np.max(s_arr)):g} beyond the law table range [0, {self.s[-1]:g}]")
        out = np.interp(s_arr, self.s, self.g)
        return float(out) if out.ndim == 0 else out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"s": self.s, "g": self.g, "g_hat": self.g_hat, "g_eta": self.g_eta})

    def to_csv(self, path: str) -> str:
        return write_csv(self.to_frame(), path)

    def to_json(self, path: str) -> str:
        return write_json({
            "eta": self.eta,
            "lambda0": self.lambda0,
            "toughness": self.toughness,
            "s": self.s,
            "g": self.g,
            "g_hat": self.g_hat,
            "g_eta": self.g_eta,
            "diagnostics": self.diagnostics,
        }, path)


def _solve_chunk(model: ModelSpec, s_values, eta: float, cfg: LawConfig):
    rows = []
    warm = None
    for s in s_values:
        g_res = g_value_detail(model, s, cfg, warm)
        eta_res = g_eta_detail(model, s, eta, cfg, g_res.profile) if eta > 0 else g_res
        rows.append((g_res, eta_res))
        if s > 0:
            warm = g_res.profile
    return rows


def build_law_table(model: ModelSpec, s_grid, cfg: LawConfig = LawConfig(), threads: int = 1,
                    progress_callback=None) -> CohesiveLawTable:
    """g, ĝ and g_η on an s-grid.

    The grid is split into fixed chunks of ``cfg.chunk_size`` points; warm
    starts chain only inside a chunk, so the values do not depend on
    ``threads``. A backward sweep with truncated profiles makes g and g_η
    non-decreasing, and the ramp construction keeps g ≤ g_η + 2λ₀(η)η.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size < 1 or np.any(np.diff(s_grid) <= 0) or s_grid[0] < 0:
        raise ValidationError("s-grid must be non-negative and strictly increasing")
    eta = cfg.eta
    chunks = chunk_ranges(s_grid.size, cfg.chunk_size)
    results = [None] * len(chunks)

    def work(k):
        start, stop = chunks[k]
        return k, _solve_chunk(model, s_grid[start:stop], eta, cfg)

    done = 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for k, rows in pool.map(work, range(len(chunks))):
            results[k] = rows
            done += 1
            if progress_callback:
                progress_callback(int(100 * done / len(chunks)), f"law table chunk {done}/{len(chunks)}")

    rows = [row for chunk in results for row in chunk]
    g_profiles = [r[0].profile for r in rows]
    e_profiles = [r[1].profile for r in rows]
    g = np.array([r[0].value for r in rows])
    ge = np.array([r[1].value for r in rows])
    diagnostics = [{"s": float(s), "g": r[0].diagnostics(), "g_eta": r[1].diagnostics()} for s, r in zip(s_grid, rows)]

    def sweep(values, profiles, label):
        for k in range(len(values) - 2, -1, -1):
            if values[k] > values[k + 1]:
                candidate = truncate(profiles[k + 1], float(s_grid[k]))
                e = profile_energy(model, candidate)
                if e < values[k]:
                    values[k], profiles[k] = e, candidate
                    diagnostics[k][label]["winner"] = "truncated"

    if eta > 0:
        sweep(ge, e_profiles, "g_eta")
        for k in range(len(g)):
            if s_grid[k] == 0:
                continue
            candidate = with_ramps(e_profiles[k])
            e = profile_energy(model, candidate)
            if e < g[k]:
                g[k], g_profiles[k] = e, candidate
                diagnostics[k]["g"]["winner"] = "relaxed+ramps"
    sweep(g, g_profiles, "g")
    if eta > 0:
        swap = g < ge
        ge[swap] = g[swap]
    else:
        ge = g.copy()

    ghat = np.array([g_hat(model, float(s), cfg.ghat_scan) for s in s_grid])
    table = CohesiveLawTable(
        s=s_grid, g=g, g_hat=ghat, g_eta=ge, eta=eta, lambda0=lambda0(model, eta),
        toughness=2.0 * psi(model, 1.0), diagnostics=diagnostics, profiles=g_profiles,
    )
    logger.info(f"✅ law table for {model.name}: {s_grid.size} points, g(s_max)={g[-1]:.6g}, 2Ψ(1)={table.toughness:.6g}")
    return table
