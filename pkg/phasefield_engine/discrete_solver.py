# phasefield_engine/discrete_solver.py - 1D regularized functionals and their minimization
"""
Discrete phase-field functional on a uniform 1D mesh with element-midpoint
quadrature:

    F_ε(u, v) = Σ_e h [ (W(v_m) + κ_ε) (Δu/h)² + 𝔡(1 - v_m)/(4ε) + ε (Δv/h)² ]

with W(v) = φ(c_ε f²(v)), c_ε = ε in cohesive mode and γ_ε in brittle mode,
W(1) = φ(∞). Minimization alternates an exact banded solve in u with
projected gradient descent in v, and ε-continuation warm-starts each ε from
the previous minimizer.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy.linalg import solve_banded

from .exceptions import ConfigurationError, ValidationError
from .model_core import ModelSpec, f_squared, phi_inf
from .optimize import projected_gradient

logger = logging.getLogger(__name__)

V_CLAMP = 1.0 - 1e-12
FD_STEP = 1e-7
MODES = ("cohesive", "brittle")


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError(f"mesh needs N ≥ 3 nodes, got {self.n}")
        if not self.b > self.a:
            raise ValidationError(f"mesh needs b > a, got ({self.a}, {self.b})")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    @classmethod
    def for_eps(cls, a: float, b: float, eps: float, ratio: float = 10.0) -> "Mesh1D":
        """Smallest uniform mesh with h ≤ ε/ratio."""
        return cls(a, b, int(math.ceil((b - a) * ratio / eps - 1e-9)) + 1)


@dataclass(frozen=True)
class SolveConfig:
    eps: float
    mode: str = "cohesive"
    L: float = 0.0
    dirichlet: bool = True
    tol_rel_energy: float = 1e-8
    max_outer_iters: int = 2000
    v_max_iter: int = 50
    v_rel_tol: float = 1e-12
    v_step0: float | None = None
    v_backtrack: float = 0.5
    v_max_halvings: int = 40
    mesh_ratio: float = 10.0
    notch_depth: float = 0.1
    notch_width: float = 2.0
    perturbed_starts: int = 0
    seed: int = 42
    kappa: float | None = None
    degradation_scale: float | None = None  # replaces c_ε in W(v) = φ(c_ε f²(v))

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if not 0 < self.tol_rel_energy <= 1e-2:
            raise ConfigurationError(f"tol_rel_energy must lie in (0, 1e-2], got {self.tol_rel_energy}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got '{self.mode}'")
        if self.mesh_ratio < 10:
            raise ConfigurationError(f"mesh_ratio must keep h ≤ ε/10, got {self.mesh_ratio}")


@dataclass
class DiscreteState:
    mesh: Mesh1D
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != (self.mesh.n,) or self.v.shape != (self.mesh.n,):
            raise ValidationError(f"u and v must have {self.mesh.n} nodal values")
        if np.any(self.v < 0) or np.any(self.v > 1):
            raise ValidationError("v must lie in [0, 1] at every node")

    def copy(self) -> "DiscreteState":
        return DiscreteState(self.mesh, self.u.copy(), self.v.copy())

    @classmethod
    def plain(cls, mesh: Mesh1D, L: float) -> "DiscreteState":
        return cls(mesh, np.linspace(0.0, L, mesh.n), np.ones(mesh.n))

    @classmethod
    def notched(cls, mesh: Mesh1D, L: float, eps: float, depth: float = 0.1, width: float = 2.0) -> "DiscreteState":
        """Gaussian dip of v to ``depth`` at the midpoint, width ``width``·ε."""
        x = mesh.x
        mid = 0.5 * (mesh.a + mesh.b)
        v = 1.0 - (1.0 - depth) * np.exp(-(((x - mid) / (width * eps)) ** 2))
        v[0] = v[-1] = 1.0
        return cls(mesh, np.linspace(0.0, L, mesh.n), np.clip(v, 0.0, 1.0))

    @classmethod
    def perturbed(cls, mesh: Mesh1D, L: float, seed: int) -> "DiscreteState":
        rng = np.random.default_rng(seed)
        v = 1.0 - 0.5 * rng.random(mesh.n)
        v[0] = v[-1] = 1.0
        return cls(mesh, np.linspace(0.0, L, mesh.n), v)

    def interpolate(self, mesh: Mesh1D, L: float) -> "DiscreteState":
        """Transfer onto another mesh, restoring the Dirichlet values."""
        u = np.interp(mesh.x, self.mesh.x, self.u)
        v = np.clip(np.interp(mesh.x, self.mesh.x, self.v), 0.0, 1.0)
        u[0], u[-1] = 0.0, L
        v[0] = v[-1] = 1.0
        return DiscreteState(mesh, u, v)

    def fields_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.mesh.x, "u": self.u, "v": self.v})


@dataclass
class EnergyTrace:
    total: list = field(default_factory=list)
    elastic: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    gradient: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    start_label: str = ""
    start_energies: dict = field(default_factory=dict)
    converged: bool = False

    def record(self, total: float, breakdown: dict, flagged: bool = False):
        self.total.append(total)
        self.elastic.append(breakdown["elastic"])
        self.potential.append(breakdown["potential"])
        self.gradient.append(breakdown["gradient"])
        self.flagged.append(flagged)

    @property
    def iterations(self) -> int:
        return max(len(self.total) - 1, 0)

    def is_monotone(self, slack: float = 1e-12) -> bool:
        t = np.asarray(self.total)
        return bool(np.all(np.diff(t) <= slack)) if t.size > 1 else True

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "iteration": np.arange(len(self.total)),
            "total": self.total,
            "elastic": self.elastic,
            "potential": self.potential,
            "gradient": self.gradient,
        })


class _Functional:
    """Element terms of F_ε for one (model, cfg) pair."""

    def __init__(self, model: ModelSpec, cfg: SolveConfig):
        self.model = model
        self.cfg = cfg
        self.eps = cfg.eps
        if cfg.degradation_scale is not None:
            self.scale = cfg.degradation_scale
        else:
            self.scale = cfg.eps if cfg.mode == "cohesive" else model.gamma(cfg.eps)
        self.kappa = cfg.kappa if cfg.kappa is not None else model.kappa(cfg.eps)
        self.phi_inf = phi_inf(model)

    def degradation(self, v):
        v = np.asarray(v, dtype=float)
        vc = np.minimum(v, V_CLAMP)
        w = np.asarray(self.model.phi(self.scale * np.asarray(f_squared(self.model, vc))))
        return np.where(v >= 1.0, self.phi_inf, w)

    def potential(self, v):
        """𝔡(1 - v)."""
        return np.asarray(self.model.dpot(np.clip(1.0 - np.asarray(v, dtype=float), 0.0, 1.0)))

    @staticmethod
    def _slope(fn, v):
        hi = np.minimum(v + FD_STEP, 1.0)
        lo = np.maximum(v - FD_STEP, 0.0)
        return (fn(hi) - fn(lo)) / (hi - lo)

    def d_degradation(self, v):
        return self._slope(self.degradation, v)

    def d_potential(self, v):
        return self._slope(self.potential, v)

    def terms(self, mesh: Mesh1D, u: np.ndarray, v: np.ndarray) -> dict:
        h = mesh.h
        vm = 0.5 * (v[:-1] + v[1:])
        du = np.diff(u) / h
        dv = np.diff(v) / h
        return {
            "elastic": float(np.sum(h * (self.degradation(vm) + self.kappa) * du * du)),
            "potential": float(np.sum(h * self.potential(vm) / (4.0 * self.eps))),
            "gradient": float(np.sum(h * self.eps * dv * dv)),
        }

    def v_gradient(self, mesh: Mesh1D, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        h = mesh.h
        vm = 0.5 * (v[:-1] + v[1:])
        du = np.diff(u) / h
        dv = np.diff(v) / h
        per_mid = h * (self.d_degradation(vm) * du * du + self.d_potential(vm) / (4.0 * self.eps))
        grad = np.zeros_like(v)
        grad[1:] += 0.5 * per_mid + 2.0 * self.eps * dv
        grad[:-1] += 0.5 * per_mid - 2.0 * self.eps * dv
        return grad

    def weights(self, v: np.ndarray) -> np.ndarray:
        return self.degradation(0.5 * (v[:-1] + v[1:])) + self.kappa


def _check_state(state: DiscreteState, cfg: SolveConfig):
    if cfg.dirichlet:
        if state.u[0] != 0.0 or not math.isclose(state.u[-1], cfg.L, rel_tol=0, abs_tol=1e-14):
            raise ValidationError(f"Dirichlet data violated: u(a)={state.u[0]}, u(b)={state.u[-1]}, L={cfg.L}")
        if state.v[0] != 1.0 or state.v[-1] != 1.0:
            raise ValidationError("Dirichlet data violated: v must equal 1 at both ends")


def energy(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> tuple:
    """(total, breakdown) of the discrete functional."""
    terms = _Functional(model, cfg).terms(state.mesh, state.u, state.v)
    return terms["elastic"] + terms["potential"] + terms["gradient"], terms


def _u_system(state: DiscreteState, functional: _Functional, L: float):
    w = functional.weights(state.v)
    if np.any(w <= 0):
        raise ConfigurationError(
            "u-system is singular: an element has zero stiffness; use a positive residual stiffness κ_ε"
        )
    n = state.mesh.n - 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -w[1:-1]
    ab[1, :] = w[:-1] + w[1:]
    ab[2, :-1] = -w[1:-1]
    rhs = np.zeros(n)
    rhs[-1] = w[-1] * L
    return ab, rhs


def u_residual(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> float:
    """Equilibrium residual of the interior nodes relative to the system scale."""
    ab, rhs = _u_system(state, _Functional(model, cfg), cfg.L)
    x = state.u[1:-1]
    r = ab[1] * x - rhs
    r[:-1] += ab[0, 1:] * x[1:]
    r[1:] += ab[2, :-1] * x[:-1]
    scale = float(np.max(np.abs(ab[1])) * max(np.max(np.abs(state.u)), 1e-300) + np.max(np.abs(rhs)))
    return float(np.max(np.abs(r)) / scale) if scale > 0 else 0.0


def u_step(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> DiscreteState:
    """Exact minimization in u for fixed v (banded SPD solve)."""
    if not cfg.dirichlet:
        raise ConfigurationError("u_step needs Dirichlet data")
    ab, rhs = _u_system(state, _Functional(model, cfg), cfg.L)
    interior = solve_banded((1, 1), ab, rhs)
    u = np.concatenate([[0.0], interior, [cfg.L]])
    return DiscreteState(state.mesh, u, state.v.copy())


def v_step_detail(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> tuple:
    functional = _Functional(model, cfg)
    mesh, u = state.mesh, state.u

    def fun(v):
        t = functional.terms(mesh, u, v)
        return t["elastic"] + t["potential"] + t["gradient"]

    fixed = np.zeros(mesh.n, dtype=bool)
    if cfg.dirichlet:
        fixed[[0, -1]] = True
    result = projected_gradient(
        fun,
        lambda v: functional.v_gradient(mesh, u, v),
        state.v,
        0.0,
        1.0,
        fixed=fixed,
        max_iter=cfg.v_max_iter,
        rel_tol=cfg.v_rel_tol,
        step0=cfg.v_step0,
        shrink=cfg.v_backtrack,
        max_halvings=cfg.v_max_halvings,
    )
    return DiscreteState(mesh, u.copy(), np.clip(result.x, 0.0, 1.0)), result


def v_step(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> DiscreteState:
    """Projected gradient descent in v for fixed u; v(a) = v(b) = 1 stay pinned."""
    return v_step_detail(state, model, cfg)[0]


def v_gradient(state: DiscreteState, model: ModelSpec, cfg: SolveConfig) -> np.ndarray:
    return _Functional(model, cfg).v_gradient(state.mesh, state.u, state.v)


def _staggered(initial: DiscreteState, model: ModelSpec, cfg: SolveConfig):
    state = u_step(initial, model, cfg)
    trace = EnergyTrace()
    total, terms = energy(state, model, cfg)
    trace.record(total, terms)
    for _ in range(cfg.max_outer_iters):
        candidate, result = v_step_detail(state, model, cfg)
        candidate = u_step(candidate, model, cfg)
        new_total, terms = energy(candidate, model, cfg)
        flagged = result.line_search_failures > 0
        if new_total > total:
            # round-off in the banded solve; keep the previous iterate
            trace.record(total, trace_terms(trace), flagged=True)
            trace.converged = True
            break
        state = candidate
        trace.record(new_total, terms, flagged)
        decrease = total - new_total
        total = new_total
        if decrease <= cfg.tol_rel_energy * max(abs(total), 1e-300):
            trace.converged = True
            break
    return state, trace


def trace_terms(trace: EnergyTrace) -> dict:
    return {"elastic": trace.elastic[-1], "potential": trace.potential[-1], "gradient": trace.gradient[-1]}


def standard_starts(mesh: Mesh1D, cfg: SolveConfig) -> list:
    starts = [
        ("plain", DiscreteState.plain(mesh, cfg.L)),
        ("notched", DiscreteState.notched(mesh, cfg.L, cfg.eps, cfg.notch_depth, cfg.notch_width)),
    ]
    for k in range(cfg.perturbed_starts):
        starts.append((f"perturbed-{k}", DiscreteState.perturbed(mesh, cfg.L, cfg.seed + k)))
    return starts


def alternate_minimize(initial: DiscreteState, model: ModelSpec, cfg: SolveConfig,
                       multistart: bool = True, threads: int = 1) -> tuple:
    """Staggered u/v minimization; with ``multistart`` the plain and notched
    starts run as well and the lowest final energy wins (earlier start on ties)."""
    _check_state(initial, cfg)
    starts = [("initial", initial)]
    if multistart:
        starts += standard_starts(initial.mesh, cfg)

    def run(item):
        return _staggered(item[1], model, cfg)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(item) for item in starts]

    finals = [trace.total[-1] for _, trace in outcomes]
    best = min(range(len(starts)), key=lambda i: (finals[i], i))
    state, trace = outcomes[best]
    trace.start_label = starts[best][0]
    trace.start_energies = {label: finals[i] for i, (label, _) in enumerate(starts)}
    if not trace.converged:
        logger.warning(f"⚠️ ε={cfg.eps:g}: staggered scheme hit max_outer_iters={cfg.max_outer_iters}")
    return state, trace


@dataclass
class ContinuationRow:
    eps: float
    energy: float
    breakdown: dict
    max_strain: float
    max_strain_x: float
    min_v: float
    iterations: int
    start_label: str
    start_energies: dict
    mesh_nodes: int
    state: DiscreteState = field(repr=False)
    trace: EnergyTrace = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "energy": self.energy,
            "breakdown": self.breakdown,
            "max_strain": self.max_strain,
            "max_strain_x": self.max_strain_x,
            "min_v": self.min_v,
            "iterations": self.iterations,
            "start": self.start_label,
            "start_energies": self.start_energies,
            "mesh_nodes": self.mesh_nodes,
            "trace_monotone": self.trace.is_monotone(),
        }


def continuation(model: ModelSpec, cfg_base: SolveConfig, eps_list, L: float, mesh_rule=None,
                 a: float = 0.0, b: float = 1.0, threads: int = 1, progress_callback=None) -> list:
    """Minimize F_ε along a decreasing ε list, warm-starting from the previous minimizer."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ConfigurationError(f"eps_list must be non-empty and strictly decreasing, got {eps_list}")
    if mesh_rule is None:
        def mesh_rule(eps):
            return Mesh1D.for_eps(a, b, eps, cfg_base.mesh_ratio)

    rows = []
    previous = None
    for k, eps in enumerate(eps_list):
        mesh = mesh_rule(eps)
        if mesh.h > eps / 10.0 * (1.0 + 1e-12):
            raise ConfigurationError(f"mesh rule violated at ε={eps:g}: h={mesh.h:g} > ε/10")
        cfg = replace(cfg_base, eps=eps, L=L)
        initial = previous.interpolate(mesh, L) if previous is not None else DiscreteState.plain(mesh, L)
        state, trace = alternate_minimize(initial, model, cfg, multistart=True, threads=threads)
        total, terms = energy(state, model, cfg)
        strain = np.abs(np.diff(state.u)) / mesh.h
        j = int(np.argmax(strain))
        rows.append(ContinuationRow(
            eps=eps,
            energy=total,
            breakdown=terms,
            max_strain=float(strain[j]),
            max_strain_x=float(0.5 * (mesh.x[j] + mesh.x[j + 1])),
            min_v=float(np.min(state.v)),
            iterations=trace.iterations,
            start_label=trace.start_label,
            start_energies=trace.start_energies,
            mesh_nodes=mesh.n,
            state=state,
            trace=trace,
        ))
        previous = state
        logger.info(f"📊 ε={eps:g}: energy={total:.8g}, min v={rows[-1].min_v:.4g}, start={trace.start_label}")
        if progress_callback:
            progress_callback(int(100 * (k + 1) / len(eps_list)), f"ε={eps:g} done")
    return rows
