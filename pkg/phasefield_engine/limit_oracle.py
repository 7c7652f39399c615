# phasefield_engine/limit_oracle.py - Limit functionals and the limit Dirichlet problem
"""
Evaluates the limit energies on piecewise representations (absolutely
continuous strain sampled per element plus a finite list of jumps) and
solves the 1D limit Dirichlet problem

    min over s ∈ [0, L] of  ℓ·h**((L - s)/ℓ) + g(s)

which is the reference value for the ε-continuation studies. The Cantor part
of a profile is not representable here and contributes 0.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cohesive_law import CohesiveLawTable
from .envelope import EnvelopeTable, eval_envelope
from .exceptions import DomainError, ValidationError
from .model_core import ModelSpec, phi_inf, toughness
from .optimize import scan_then_golden

logger = logging.getLogger(__name__)

ELASTIC_FRACTION = 1e-6
SATURATION_FRACTION = 0.98
KJUMP_GRID = {2: 256, 3: 64}


@dataclass
class SBVProfile:
    """Piecewise-Sobolev function on [a, b] with finitely many jumps.

    ``strain`` holds u' on a uniform partition of [a, b]; ``jumps`` is a list
    of (location, amplitude); ``u_left``/``u_right`` are the traces u(a⁺) and
    u(b⁻).
    """
    a: float
    b: float
    strain: np.ndarray
    jumps: list = field(default_factory=list)
    u_left: float = 0.0
    u_right: float = 0.0

    def __post_init__(self):
        if not self.b > self.a:
            raise ValidationError(f"profile needs b > a, got ({self.a}, {self.b})")
        self.strain = np.atleast_1d(np.asarray(self.strain, dtype=float))
        if self.strain.size < 1:
            raise ValidationError("profile needs at least one element")
        self.jumps = [(float(x), float(s)) for x, s in self.jumps]
        locations = [x for x, _ in self.jumps]
        if any(x < self.a or x > self.b for x in locations):
            raise ValidationError(f"jump locations must lie in [{self.a}, {self.b}]")
        if any(x2 <= x1 for x1, x2 in zip(locations, locations[1:])):
            raise ValidationError("jump locations must be sorted and distinct")
        if any(s <= 0 for _, s in self.jumps):
            raise ValidationError("jump amplitudes must be positive")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def element_width(self) -> float:
        return self.length / self.strain.size

    @classmethod
    def zero(cls, a: float = 0.0, b: float = 1.0) -> "SBVProfile":
        return cls(a, b, np.zeros(1))


def _bulk(p: SBVProfile, env: EnvelopeTable) -> float:
    return float(np.sum(p.element_width * np.asarray(eval_envelope(env, np.abs(p.strain)))))


def limit_energy(p: SBVProfile, env: EnvelopeTable, law: CohesiveLawTable) -> tuple:
    """∫ h**(|u'|) + Σ g(s_j); returns (total, {bulk, jump, cantor})."""
    bulk = _bulk(p, env)
    jump = float(sum(law.eval_g(s) for _, s in p.jumps))
    return bulk + jump, {"bulk": bulk, "jump": jump, "cantor": 0.0}


def dirichlet_limit_energy(p: SBVProfile, env: EnvelopeTable, law: CohesiveLawTable, L: float) -> tuple:
    """limit_energy plus the boundary trace terms g(|u(a⁺)|) + g(|u(b⁻) - L|)."""
    total, terms = limit_energy(p, env, law)
    boundary = law.eval_g(abs(p.u_left)) + law.eval_g(abs(p.u_right - L))
    terms = dict(terms, jump=terms["jump"] + boundary, boundary=boundary)
    return total + boundary, terms


@dataclass
class DirichletSolution:
    s_star: float
    energy: float
    bulk: float
    jump: float
    regime: str
    L: float
    ell: float

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "energy": self.energy,
            "bulk": self.bulk,
            "jump": self.jump,
            "regime": self.regime,
            "L": self.L,
            "ell": self.ell,
        }

    def reconstruct(self, a: float = 0.0, b: float | None = None, n_elements: int = 64) -> SBVProfile:
        """Affine profile with slope (L - s*)/ℓ and one jump s* at the midpoint."""
        if b is None:
            b = a + self.ell
        slope = (self.L - self.s_star) / (b - a)
        jumps = [(0.5 * (a + b), self.s_star)] if self.s_star > 0 else []
        return SBVProfile(a, b, np.full(n_elements, slope), jumps, u_left=0.0, u_right=self.L)


def _check_L(L: float, ell: float):
    if L < 0:
        raise DomainError(f"boundary displacement L must be ≥ 0, got {L}")
    if not ell > 0:
        raise DomainError(f"bar length must be positive, got {ell}")


def _split_energy(env: EnvelopeTable, law: CohesiveLawTable, L: float, ell: float):
    def objective(s):
        remainder = max(L - s, 0.0) / ell
        return ell * float(eval_envelope(env, remainder)) + law.eval_g(s)
    return objective


def _regime(s_star: float, g_star: float, L: float, tough: float) -> str:
    if s_star < ELASTIC_FRACTION * L or L == 0:
        return "elastic"
    if g_star > SATURATION_FRACTION * tough:
        return "saturated"
    return "cohesive"


def dirichlet_limit(model: ModelSpec, env: EnvelopeTable, law: CohesiveLawTable, L: float,
                    ell: float = 1.0, n_grid: int = 2048) -> DirichletSolution:
    """Single-jump reduction of the limit Dirichlet problem (dense scan plus golden)."""
    _check_L(L, ell)
    if L == 0:
        return DirichletSolution(0.0, 0.0, 0.0, 0.0, "elastic", 0.0, ell)
    if law.s[-1] < L * (1.0 - 1e-12):
        raise DomainError(f"law table covers s ≤ {law.s[-1]:g}, the problem needs s ≤ {L:g}")
    objective = _split_energy(env, law, L, ell)
    result = scan_then_golden(objective, np.linspace(0.0, L, n_grid))
    s_star = min(max(float(result["argmin"]), 0.0), L)
    g_star = law.eval_g(s_star)
    bulk = ell * float(eval_envelope(env, (L - s_star) / ell))
    solution = DirichletSolution(
        s_star=s_star,
        energy=bulk + g_star,
        bulk=bulk,
        jump=g_star,
        regime=_regime(s_star, g_star, L, toughness(model)),
        L=L,
        ell=ell,
    )
    logger.info(f"📊 limit Dirichlet L={L:g}: s*={s_star:.6g}, energy={solution.energy:.8g} ({solution.regime})")
    return solution


def _pair_energy(env, law, L, ell, n):
    a = np.linspace(0.0, L, n)
    s1, s2 = np.meshgrid(a, a, indexing="ij")
    total = s1 + s2
    ok = total <= L * (1.0 + 1e-12)
    g = np.asarray(law.eval_g(a))
    remainder = np.clip(L - total[ok], 0.0, None) / ell
    values = ell * np.asarray(eval_envelope(env, remainder)) + (g[:, None] + g[None, :])[ok]
    return float(np.min(values))


def _triple_energy(env, law, L, ell, n):
    a = np.linspace(0.0, L, n)
    s1, s2, s3 = np.meshgrid(a, a, a, indexing="ij")
    total = s1 + s2 + s3
    ok = total <= L * (1.0 + 1e-12)
    g = np.asarray(law.eval_g(a))
    jumps = g[:, None, None] + g[None, :, None] + g[None, None, :]
    remainder = np.clip(L - total[ok], 0.0, None) / ell
    values = ell * np.asarray(eval_envelope(env, remainder)) + jumps[ok]
    return float(np.min(values))


def kjump_oracle(env: EnvelopeTable, law: CohesiveLawTable, L: float, ell: float, k: int) -> float:
    """Brute-force minimum over up to k jump amplitudes and the elastic remainder."""
    if k not in (1, 2, 3):
        raise ValidationError(f"k must be 1, 2 or 3, got {k}")
    _check_L(L, ell)
    if L == 0:
        return 0.0
    single = scan_then_golden(_split_energy(env, law, L, ell), np.linspace(0.0, L, 2048))
    best = float(single["minimum"])
    if k >= 2:
        best = min(best, _pair_energy(env, law, L, ell, KJUMP_GRID[2]))
    if k >= 3:
        best = min(best, _triple_energy(env, law, L, ell, KJUMP_GRID[3]))
    return best


def brittle_dirichlet_limit(model: ModelSpec, L: float, ell: float = 1.0) -> float:
    """min(φ(∞)L²/ℓ, 2Ψ(1)): uncracked elastic bar against a single crack."""
    _check_L(L, ell)
    return min(phi_inf(model) * L * L / ell, toughness(model))


def brittle_crossover(model: ModelSpec, ell: float = 1.0) -> float:
    """L* = (2Ψ(1)·ℓ/φ(∞))^{1/2}."""
    return math.sqrt(toughness(model) * ell / phi_inf(model))


def sigma_zero_limit(L: float) -> float:
    """The limit functional vanishes identically when σ̄ = 0."""
    return 0.0
