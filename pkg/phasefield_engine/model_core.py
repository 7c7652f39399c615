# phasefield_engine/model_core.py - Model specifications and primitive scalar maps
"""
Phase-field model specifications.

A model is the quadruple (f̂, Q, 𝔡, φ) of scalar functions plus the two
scaling rules κ_ε = c_κ ε^a (residual stiffness) and γ_ε = c_γ ε^b (brittle
scaling). From it the engine derives

- f(t) = (f̂(t) / Q(1 - t))^{1/2} and its two regularized versions f_ε, f̃_ε,
- Ψ(t) = ∫₀ᵗ 𝔡^{1/2}(1 - τ) dτ, whose value 2Ψ(1) is the toughness,
- σ̄ = lim_{t→0⁺} (𝔡(t) / Q(t))^{1/2}, the critical stress parameter,
- φ'(0⁺) and φ(∞).

Built-in families carry closed forms for the limits; tabulated inputs are
classified numerically and report an extrapolation residual.
"""
import logging
import math
import os
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .exceptions import DomainError, LimitNotResolvedError, ValidationError

logger = logging.getLogger(__name__)

# Clamp applied to 1 - t inside Q when the continuous extension at t = 1 is wanted
ONE_CLAMP = 1e-12

SIGMA_K_RANGE = (4, 40)
SIGMA_GROWTH_RATIO = 1.2
SIGMA_FLOOR = 1e-6


class Family(str, Enum):
    POWER = "power"
    SCALED_POWER = "scaled-power"
    QUADRATIC = "quadratic"
    MIN_WITH_ONE = "min-with-one"
    RATIONAL = "rational"
    TABULATED = "tabulated"


class Domain(str, Enum):
    UNIT = "unit-interval"
    HALFLINE = "nonneg-halfline"


_ARITY = {
    Family.POWER: 1,
    Family.SCALED_POWER: 2,
    Family.QUADRATIC: 0,
    Family.MIN_WITH_ONE: 0,
    Family.RATIONAL: 0,
    Family.TABULATED: 0,
}


@dataclass(frozen=True)
class ScalarFnSpec:
    """One scalar function of the model.

    ``params`` holds the family arguments (``p`` for power, ``(λ, q)`` for
    scaled-power meaning λ⁻² t^{2q}); ``samples`` holds the ``(t, value)``
    pairs of a tabulated function. Every value is multiplied by ``scale``.
    """
    family: Family
    params: tuple = ()
    samples: tuple = ()
    domain: Domain = Domain.UNIT
    scale: float = 1.0
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "domain", Domain(self.domain))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.params) != _ARITY[self.family]:
            raise ValidationError(
                f"{self.family.value} expects {_ARITY[self.family]} parameter(s), got {len(self.params)}"
            )
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValidationError(f"scale must be finite and positive, got {self.scale}")
        if self.family is Family.SCALED_POWER and self.params[0] <= 0:
            raise ValidationError(f"scaled-power needs λ > 0, got {self.params[0]}")
        if self.family is Family.TABULATED:
            samples = tuple((float(t), float(v)) for t, v in self.samples)
            object.__setattr__(self, "samples", samples)
            self._check_samples(samples)

    @staticmethod
    def _check_samples(samples):
        if len(samples) < 2:
            raise ValidationError("tabulated function needs at least two samples")
        ts = np.array([s[0] for s in samples])
        vs = np.array([s[1] for s in samples])
        if not np.all(np.isfinite(ts)) or not np.all(np.isfinite(vs)):
            raise ValidationError("tabulated samples must be finite")
        bad = np.nonzero(np.diff(ts) <= 0)[0]
        if bad.size:
            raise ValidationError(
                f"tabulated abscissae must be strictly increasing (first violation at t={ts[bad[0] + 1]})"
            )
        if np.any(vs < 0):
            raise ValidationError(f"tabulated values must be ≥ 0 (first violation at t={ts[np.argmax(vs < 0)]})")

    @cached_property
    def _interpolant(self):
        ts = np.array([s[0] for s in self.samples])
        vs = np.array([s[1] for s in self.samples])
        return ts[0], ts[-1], PchipInterpolator(ts, vs, extrapolate=False)

    def __call__(self, t):
        x = np.asarray(t, dtype=float)
        fam = self.family
        with np.errstate(invalid="ignore", over="ignore"):
            if fam is Family.POWER:
                out = np.power(x, self.params[0])
            elif fam is Family.SCALED_POWER:
                lam, q = self.params
                out = np.power(x, 2.0 * q) / lam ** 2
            elif fam is Family.QUADRATIC:
                out = x * x
            elif fam is Family.MIN_WITH_ONE:
                out = np.minimum(1.0, x)
            elif fam is Family.RATIONAL:
                out = np.where(np.isinf(x), 1.0, x / (1.0 + x))
            else:
                lo, hi, interp = self._interpolant
                out = interp(np.clip(x, lo, hi))
        out = self.scale * out
        return float(out) if out.ndim == 0 else out

    def leading_term(self):
        """``(coef, exponent)`` with value ≈ coef·t^exponent as t → 0⁺, or None."""
        fam = self.family
        if fam is Family.POWER:
            return self.scale, self.params[0]
        if fam is Family.SCALED_POWER:
            lam, q = self.params
            return self.scale / lam ** 2, 2.0 * q
        if fam is Family.QUADRATIC:
            return self.scale, 2.0
        if fam in (Family.MIN_WITH_ONE, Family.RATIONAL):
            return self.scale, 1.0
        return None

    def limit_at_infinity(self):
        """Closed-form value at +∞, or None for tabulated inputs."""
        fam = self.family
        if fam in (Family.MIN_WITH_ONE, Family.RATIONAL):
            return self.scale
        if fam is Family.TABULATED:
            return None
        exponent = self.leading_term()[1]
        return self.scale * (1.0 if exponent == 0 else math.inf)

    def describe(self) -> str:
        if self.family is Family.TABULATED:
            body = f"tabulated({self.source or f'{len(self.samples)} samples'})"
        elif self.params:
            body = f"{self.family.value}({', '.join(f'{p:g}' for p in self.params)})"
        else:
            body = self.family.value
        return body if self.scale == 1.0 else f"{self.scale:g}*{body}"


@dataclass(frozen=True)
class ScalingRule:
    """coef · ε^exponent."""
    coef: float
    exponent: float

    def __call__(self, eps: float) -> float:
        return self.coef * eps ** self.exponent


@dataclass(frozen=True)
class ModelSpec:
    fhat: ScalarFnSpec
    qfn: ScalarFnSpec
    dpot: ScalarFnSpec
    phi: ScalarFnSpec
    kappa_rule: ScalingRule = ScalingRule(1.0, 2.0)
    gamma_rule: ScalingRule = ScalingRule(1.0, 0.5)
    name: str = "custom"

    def __post_init__(self):
        if self.phi.domain is not Domain.HALFLINE:
            object.__setattr__(self, "phi", replace(self.phi, domain=Domain.HALFLINE))
        if self.kappa_rule.coef < 0 or self.kappa_rule.exponent <= 1:
            raise ValidationError(
                f"κ_ε = c·ε^a needs c ≥ 0 and a > 1, got c={self.kappa_rule.coef}, a={self.kappa_rule.exponent}"
            )
        if self.gamma_rule.coef <= 0 or not (0 < self.gamma_rule.exponent < 1):
            raise ValidationError(
                f"γ_ε = c·ε^b needs c > 0 and b in (0, 1), got c={self.gamma_rule.coef}, b={self.gamma_rule.exponent}"
            )

    def kappa(self, eps: float) -> float:
        return self.kappa_rule(eps)

    def gamma(self, eps: float) -> float:
        return self.gamma_rule(eps)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "fhat": self.fhat.describe(),
            "Q": self.qfn.describe(),
            "dpot": self.dpot.describe(),
            "phi": self.phi.describe(),
            "kappa_rule": [self.kappa_rule.coef, self.kappa_rule.exponent],
            "gamma_rule": [self.gamma_rule.coef, self.gamma_rule.exponent],
        }


# ---------- Built-in models ----------

def _phi_spec(phi) -> ScalarFnSpec:
    if isinstance(phi, ScalarFnSpec):
        return replace(phi, domain=Domain.HALFLINE)
    return ScalarFnSpec(Family(phi), domain=Domain.HALFLINE)


def cfi_model(lam: float = 1.0, q: float = 1.0, phi="min-with-one",
              kappa_rule: ScalingRule = ScalingRule(1.0, 2.0),
              gamma_rule: ScalingRule = ScalingRule(1.0, 0.5)) -> ModelSpec:
    """f̂ = t², Q = λ⁻² t^{2q}, 𝔡 = t²; σ̄ = λ for q = 1 and ∞ for q > 1."""
    return ModelSpec(
        fhat=ScalarFnSpec(Family.QUADRATIC),
        qfn=ScalarFnSpec(Family.SCALED_POWER, (lam, q)),
        dpot=ScalarFnSpec(Family.QUADRATIC),
        phi=_phi_spec(phi),
        kappa_rule=kappa_rule,
        gamma_rule=gamma_rule,
        name=f"cfi(lam={lam:g}, q={q:g})",
    )


def wu_model(p: float = 2.0, lam: float = 1.0,
             kappa_rule: ScalingRule = ScalingRule(1.0, 2.0),
             gamma_rule: ScalingRule = ScalingRule(1.0, 0.5)) -> ModelSpec:
    """f̂ = t^p, Q = λ⁻² t², 𝔡 = t², φ = t/(1+t)."""
    return ModelSpec(
        fhat=ScalarFnSpec(Family.POWER, (p,)),
        qfn=ScalarFnSpec(Family.SCALED_POWER, (lam, 1.0)),
        dpot=ScalarFnSpec(Family.QUADRATIC),
        phi=ScalarFnSpec(Family.RATIONAL, domain=Domain.HALFLINE),
        kappa_rule=kappa_rule,
        gamma_rule=gamma_rule,
        name=f"wu(p={p:g}, lam={lam:g})",
    )


# ---------- Tabulated input and config sections ----------

def load_tabulated(path: str, domain: Domain = Domain.UNIT, scale: float = 1.0) -> ScalarFnSpec:
    """Read a two-column ``t,value`` CSV (header optional) into a tabulated spec."""
    if not os.path.exists(path):
        raise ValidationError(f"tabulated file not found: {path}")
    df = pd.read_csv(path, header=None, dtype=str, encoding="utf-8", skipinitialspace=True)
    if df.shape[1] < 2:
        raise ValidationError(f"{path}: expected two columns (t, value), found {df.shape[1]}")
    df = df.iloc[:, :2]
    first = pd.to_numeric(df.iloc[0], errors="coerce")
    if first.isna().any():
        df = df.iloc[1:]
    values = df.apply(pd.to_numeric, errors="coerce")
    if values.isna().any().any():
        bad_row = int(values.isna().any(axis=1).to_numpy().argmax())
        raise ValidationError(f"{path}: non-numeric entry in data row {bad_row + 1}")
    samples = tuple(map(tuple, values.to_numpy(dtype=float)))
    return ScalarFnSpec(Family.TABULATED, samples=samples, domain=domain, scale=scale,
                        source=os.path.basename(path))


_FN_PATTERN = re.compile(r"^\s*(?:(?P<scale>[0-9.eE+-]+)\s*\*\s*)?(?P<family>[a-z-]+)\s*(?:\((?P<args>.*)\))?\s*$")


def parse_scalar_fn(text: str, domain: Domain = Domain.UNIT, base_dir: str = ".") -> ScalarFnSpec:
    """Parse ``family``, ``family(a, b)`` or ``c*family(...)`` into a ScalarFnSpec."""
    match = _FN_PATTERN.match(str(text))
    if not match:
        raise ValidationError(f"cannot parse scalar function '{text}'")
    try:
        family = Family(match.group("family"))
    except ValueError:
        raise ValidationError(f"unknown function family '{match.group('family')}'") from None
    scale = float(match.group("scale")) if match.group("scale") else 1.0
    args = match.group("args")
    if family is Family.TABULATED:
        if not args:
            raise ValidationError("tabulated(...) needs a CSV path")
        path = args.strip().strip("'\"")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return load_tabulated(path, domain=domain, scale=scale)
    try:
        params = tuple(float(a) for a in args.split(",")) if args and args.strip() else ()
    except ValueError:
        raise ValidationError(f"non-numeric parameter in '{text}'") from None
    return ScalarFnSpec(family, params, domain=domain, scale=scale)


def _number(section: dict, key: str, default: float) -> float:
    value = section.get(key, default)
    if isinstance(value, (str, bool, list, tuple, dict)):
        raise ValidationError(f"model key '{key}' must be a number, got {value!r}")
    return float(value)


def _rule(section: dict, key: str, default: list) -> ScalingRule:
    value = section.get(key, default)
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"model key '{key}' must be a [coef, exponent] pair, got {value!r}")
    return ScalingRule(*(_number({key: x}, key, 0.0) for x in value))


def model_from_section(section: dict, base_dir: str = ".") -> ModelSpec:
    """Build a ModelSpec from a flat ``[model]`` config section."""
    section = dict(section)
    rules = dict(kappa_rule=_rule(section, "kappa", [1.0, 2.0]), gamma_rule=_rule(section, "gamma", [1.0, 0.5]))
    family = section.get("family", "custom")
    if family == "cfi":
        phi = parse_scalar_fn(section.get("phi", "min-with-one"), Domain.HALFLINE, base_dir)
        return cfi_model(_number(section, "lam", 1.0), _number(section, "q", 1.0), phi, **rules)
    if family == "wu":
        return wu_model(_number(section, "p", 2.0), _number(section, "lam", 1.0), **rules)
    if family != "custom":
        raise ValidationError(f"unknown model family '{family}' (expected cfi, wu or custom)")
    missing = [k for k in ("fhat", "Q", "dpot", "phi") if k not in section]
    if missing:
        raise ValidationError(f"custom model is missing keys: {', '.join(missing)}")
    return ModelSpec(
        fhat=parse_scalar_fn(section["fhat"], Domain.UNIT, base_dir),
        qfn=parse_scalar_fn(section["Q"], Domain.UNIT, base_dir),
        dpot=parse_scalar_fn(section["dpot"], Domain.UNIT, base_dir),
        phi=parse_scalar_fn(section["phi"], Domain.HALFLINE, base_dir),
        name=str(section.get("name", "custom")),
        **rules,
    )


# ---------- Primitive maps ----------

def _as_output(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def f_squared(model: ModelSpec, t):
    """f̂(t)/Q(1 - t) with 1 - t clamped at ONE_CLAMP (finite at t = 1)."""
    t = np.asarray(t, dtype=float)
    q = model.qfn(np.maximum(1.0 - t, ONE_CLAMP))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(q > 0, model.fhat(t) / q, np.inf)
    out = np.where(model.fhat(t) == 0, 0.0, out)
    return _as_output(out)


def eval_f(model: ModelSpec, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr >= 1):
        raise DomainError("f is defined on [0, 1); use φ(∞) for the continuous extension at t = 1")
    return _as_output(np.sqrt(model.fhat(t_arr) / model.qfn(1.0 - t_arr)))


def eval_f_eps(model: ModelSpec, eps: float, t):
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise DomainError("f_eps is defined on [0, 1]")
    num = eps * model.fhat(t_arr)
    den = num + model.qfn(1.0 - t_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, 0.0)
    return _as_output(np.sqrt(np.clip(ratio, 0.0, 1.0)))


def eval_f_tilde_eps(model: ModelSpec, eps: float, t):
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise DomainError("f_tilde_eps is defined on [0, 1]")
    inner = np.where(t_arr < 1, t_arr, 0.0)
    value = np.minimum(1.0, math.sqrt(eps) * np.sqrt(model.fhat(inner) / model.qfn(1.0 - inner)))
    return _as_output(np.where(t_arr == 1, 1.0, value))


@dataclass(frozen=True)
class SigmaBar:
    kind: str                       # "finite" | "infinite" | "zero"
    value: float = math.nan
    residual: float = 0.0
    samples: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("finite", "infinite", "zero"):
            raise ValidationError(f"unknown sigma kind '{self.kind}'")
        if self.kind == "finite" and not (self.value > 0 and math.isfinite(self.value)):
            raise ValidationError(f"finite σ̄ must be positive, got {self.value}")

    @classmethod
    def finite(cls, value: float, residual: float = 0.0) -> "SigmaBar":
        return cls("finite", float(value), residual)

    @classmethod
    def infinite(cls) -> "SigmaBar":
        return cls("infinite", math.inf)

    @classmethod
    def zero(cls) -> "SigmaBar":
        return cls("zero", 0.0)

    @property
    def numeric(self) -> float:
        return {"finite": self.value, "infinite": math.inf, "zero": 0.0}[self.kind]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.numeric, "residual": self.residual}


def _richardson(values: np.ndarray, order: int = 1) -> np.ndarray:
    """One Richardson pass for a sequence with error ~ C·2^{-order·k}."""
    factor = 2.0 ** order
    return (factor * values[1:] - values[:-1]) / (factor - 1.0)


def _classify_sequence(seq: np.ndarray, what: str):
    """Shared classification for a sequence sampled at t = 2^{-k}."""
    if np.all(seq[-6:] > 0) and np.all(seq[-5:] / seq[-6:-1] > SIGMA_GROWTH_RATIO):
        return "infinite", math.inf, 0.0
    if seq[-1] < SIGMA_FLOOR:
        return "zero", 0.0, float(seq[-1])
    diffs = np.diff(seq[-8:])
    signs = np.sign(diffs[np.abs(diffs) > 1e-14 * max(abs(seq[-1]), 1.0)])
    flips = int(np.count_nonzero(signs[1:] != signs[:-1])) if signs.size > 1 else 0
    scale = max(abs(seq[-1]), 1e-300)
    if flips >= 3 and np.max(np.abs(diffs[-4:])) > 1e-6 * scale:
        raise LimitNotResolvedError(f"{what}: sequence oscillates without settling", samples=seq)
    extrapolated = _richardson(seq)
    value = float(extrapolated[-1])
    residual = float(abs(extrapolated[-1] - extrapolated[-2]) / max(abs(value), 1e-300))
    return "finite", value, residual


def sigma_bar(model: ModelSpec) -> SigmaBar:
    """Classify lim_{t→0⁺} (𝔡(t)/Q(t))^{1/2}."""
    lead_d = model.dpot.leading_term()
    lead_q = model.qfn.leading_term()
    if lead_d is not None and lead_q is not None:
        (cd, pd_), (cq, pq) = lead_d, lead_q
        if math.isclose(pd_, pq, rel_tol=0, abs_tol=1e-12):
            return SigmaBar.finite(math.sqrt(cd / cq))
        return SigmaBar.infinite() if pd_ < pq else SigmaBar.zero()

    ks = np.arange(SIGMA_K_RANGE[0], SIGMA_K_RANGE[1] + 1)
    ts = 2.0 ** (-ks.astype(float))
    q = np.asarray(model.qfn(ts), dtype=float)
    d = np.asarray(model.dpot(ts), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        seq = np.sqrt(d / q)
    if np.any(q[-5:] == 0) and np.all(d[-5:] > 0):
        return SigmaBar.infinite()
    if not np.all(np.isfinite(seq[-8:])):
        raise LimitNotResolvedError("σ̄: ratio 𝔡/Q undefined on the extrapolation grid", samples=seq)
    kind, value, residual = _classify_sequence(seq, "σ̄")
    if kind == "finite":
        return SigmaBar("finite", value, residual, tuple(seq))
    if kind == "zero":
        return SigmaBar("zero", 0.0, residual, tuple(seq))
    return SigmaBar("infinite", math.inf, 0.0, tuple(seq))


@dataclass(frozen=True)
class PhiLimits:
    prime0: float
    at_infinity: float
    prime0_residual: float = 0.0
    infinity_residual: float = 0.0


def _tabulated_phi_limits(phi: ScalarFnSpec) -> PhiLimits:
    ts = np.array([s[0] for s in phi.samples])
    positive = ts[ts > 0]
    if positive.size == 0:
        raise LimitNotResolvedError("φ: no positive abscissa to differentiate at 0⁺")
    h = positive[0] * 2.0 ** (-np.arange(0, 16, dtype=float))
    phi0 = phi(0.0)
    quotients = (np.asarray(phi(h)) - phi0) / h
    level1 = _richardson(quotients, 1)
    level2 = _richardson(level1, 2)
    prime0 = float(level2[-1])
    prime0_residual = float(abs(level2[-1] - level2[-2]) / max(abs(prime0), 1e-300))
    if not math.isfinite(prime0) or prime0_residual > 1e-6:
        raise LimitNotResolvedError(f"φ'(0⁺) extrapolation did not settle (residual {prime0_residual:.3e})",
                                    samples=level2)

    t_max = ts[-1]
    tail = ts[ts >= t_max / 10.0]
    if tail.size < 2:
        tail = ts[-2:]
    tail_values = np.asarray(phi(tail))
    at_inf = float(np.mean(tail_values))
    spread = float((tail_values.max() - tail_values.min()) / max(abs(at_inf), 1e-300))
    if spread > 0.05:
        raise LimitNotResolvedError(f"φ(∞): tail over the last decade still varies by {spread:.1%}",
                                    samples=tail_values)
    return PhiLimits(prime0, at_inf, prime0_residual, spread)


@lru_cache(maxsize=256)
def phi_limits(model: ModelSpec) -> PhiLimits:
    phi = model.phi
    if phi.family is Family.TABULATED:
        return _tabulated_phi_limits(phi)
    coef, exponent = phi.leading_term()
    if exponent == 1:
        prime0 = coef
    else:
        prime0 = 0.0 if exponent > 1 else math.inf
    return PhiLimits(prime0, phi.limit_at_infinity())


def phi_prime0(model: ModelSpec) -> float:
    return phi_limits(model).prime0


def phi_inf(model: ModelSpec) -> float:
    return phi_limits(model).at_infinity


def _sqrt_dpot(model: ModelSpec):
    return lambda u: math.sqrt(max(model.dpot(u), 0.0))


@lru_cache(maxsize=4096)
def _psi_scalar(model: ModelSpec, t: float) -> float:
    root = _sqrt_dpot(model)
    value, _ = quad(lambda tau: root(1.0 - tau), 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def psi(model: ModelSpec, t):
    """Ψ(t) = ∫₀ᵗ 𝔡^{1/2}(1 - τ) dτ on [0, 1]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > 1):
        raise DomainError("Ψ is defined on [0, 1]")
    if t_arr.ndim == 0:
        return _psi_scalar(model, float(t_arr))
    return np.array([_psi_scalar(model, float(x)) for x in t_arr.ravel()]).reshape(t_arr.shape)


def toughness(model: ModelSpec) -> float:
    """2Ψ(1)."""
    return 2.0 * psi(model, 1.0)


@lru_cache(maxsize=4096)
def _root_primitive_scalar(model: ModelSpec, x: float) -> float:
    root = _sqrt_dpot(model)
    value, _ = quad(root, 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def root_primitive(model: ModelSpec, x):
    """∫₀ˣ 𝔡^{1/2}(u) du, which equals Ψ(1) - Ψ(1 - x)."""
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim == 0:
        return _root_primitive_scalar(model, float(x_arr))
    return np.array([_root_primitive_scalar(model, float(v)) for v in x_arr.ravel()]).reshape(x_arr.shape)


# ---------- Hypothesis validation ----------

@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "witnesses": [float(w) for w in self.witnesses], "message": self.message}


@dataclass
class HypothesisReport:
    checks: dict
    phi_prime0: float = math.nan
    phi_inf: float = math.nan
    sigma: SigmaBar | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {name: c.to_dict() for name, c in self.checks.items()},
            "phi_prime0": self.phi_prime0,
            "phi_inf": self.phi_inf,
            "sigma_bar": self.sigma.to_dict() if self.sigma else None,
            "diagnostics": self.diagnostics,
        }


class _Check:
    """Accumulates witnesses for one hypothesis."""

    def __init__(self, name: str):
        self.name = name
        self.witnesses = []
        self.messages = []

    def fail(self, message: str, points):
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        self.witnesses.extend(float(p) for p in pts[:5])
        self.messages.append(message)

    def require(self, mask, points, message: str):
        mask = np.asarray(mask, dtype=bool)
        if not np.all(mask):
            self.fail(message, np.atleast_1d(points)[~mask] if np.ndim(points) else points)

    def done(self) -> HypothesisCheck:
        return HypothesisCheck(self.name, not self.messages, self.witnesses, "; ".join(self.messages))


def _non_decreasing(values: np.ndarray) -> np.ndarray:
    slack = 1e-12 * max(float(np.max(np.abs(values))), 1.0)
    return np.concatenate([[True], np.diff(values) >= -slack])


def validate_hypotheses(model: ModelSpec, n_samples: int = 256, neighbourhood: float = 0.1) -> HypothesisReport:
    """Check the model hypotheses on geometric grids accumulating at 0 and 1.

    Failures are reported with witness points, never raised.
    """
    if n_samples < 64:
        raise ValidationError(f"n_samples must be at least 64, got {n_samples}")
    half = n_samples // 2
    toward_zero = np.geomspace(1e-10, 1.0, half)
    toward_one = 1.0 - np.geomspace(1e-10, 0.5, n_samples - half)
    grid = np.unique(np.concatenate([[0.0], toward_zero, toward_one, [1.0]]))
    interior = grid[(grid > 0)]
    near_zero = np.unique(np.concatenate([[0.0], np.geomspace(1e-10, neighbourhood, half)]))

    hp1 = _Check("Hp1")
    fh, qv = np.asarray(model.fhat(grid)), np.asarray(model.qfn(grid))
    hp1.require(np.isfinite(fh) & (fh >= 0), grid, "f̂ must be finite and ≥ 0")
    hp1.require(np.isfinite(qv) & (qv >= 0), grid, "Q must be finite and ≥ 0")
    tol_one = 0.0 if model.fhat.family is not Family.TABULATED else 1e-12
    if abs(model.fhat(1.0) - 1.0) > tol_one:
        hp1.fail(f"f̂(1) = {model.fhat(1.0):.12g}, expected 1", 1.0)
    if model.fhat(0.0) != 0:
        hp1.fail("f̂(0) must vanish", 0.0)
    if model.qfn(0.0) != 0:
        hp1.fail("Q(0) must vanish", 0.0)
    hp1.require(np.asarray(model.qfn(interior)) > 0, interior, "Q must be positive on (0, 1]")
    hp1.require(_non_decreasing(np.asarray(model.qfn(near_zero))), near_zero,
                f"Q must be non-decreasing on [0, {neighbourhood:g}]")
    f_near = np.sqrt(np.asarray(model.fhat(near_zero)) / np.asarray(model.qfn(1.0 - near_zero)))
    hp1.require(_non_decreasing(f_near), near_zero, f"f must be non-decreasing on [0, {neighbourhood:g}]")

    hp2 = _Check("Hp2")
    dv = np.asarray(model.dpot(grid))
    hp2.require(np.isfinite(dv) & (dv >= 0), grid, "𝔡 must be finite and ≥ 0")
    if model.dpot(0.0) != 0:
        hp2.fail(f"𝔡(0) = {model.dpot(0.0):g}, must vanish", 0.0)
    hp2.require(np.asarray(model.dpot(interior)) > 0, interior, "𝔡 must vanish only at 0")
    sigma = None
    try:
        sigma = sigma_bar(model)
    except LimitNotResolvedError as exc:
        hp2.fail(f"σ̄ limit not resolved: {exc}", 2.0 ** -SIGMA_K_RANGE[1])

    hp3 = _Check("Hp3")
    hp4 = _Check("Hp4")
    phi_grid = np.concatenate([[0.0], np.geomspace(1e-8, 1e8, n_samples)])
    pv = np.asarray(model.phi(phi_grid))
    if model.phi(0.0) != 0:
        hp3.fail(f"φ(0) = {model.phi(0.0):g}, must vanish", 0.0)
    hp3.require(_non_decreasing(pv), phi_grid, "φ must be non-decreasing")
    limits = None
    try:
        limits = phi_limits(model)
    except LimitNotResolvedError as exc:
        hp3.fail(f"φ limits not resolved: {exc}", phi_grid[-1])
        hp4.fail(f"φ limits not resolved: {exc}", phi_grid[1])
    if limits is not None:
        if not (0 < limits.at_infinity < math.inf):
            hp3.fail(f"φ(∞) = {limits.at_infinity} must be finite and positive", phi_grid[-1])
        if not (0 < limits.prime0 < math.inf):
            hp4.fail(f"φ'(0⁺) = {limits.prime0} must be finite and positive", phi_grid[1])

    scaling = _Check("scaling")
    if model.kappa_rule.exponent <= 1:
        scaling.fail("κ_ε must be o(ε)", model.kappa_rule.exponent)
    if not 0 < model.gamma_rule.exponent < 1:
        scaling.fail("γ_ε/ε must diverge", model.gamma_rule.exponent)

    checks = {c.name: c.done() for c in (hp1, hp2, hp3, hp4, scaling)}
    report = HypothesisReport(
        checks=checks,
        phi_prime0=limits.prime0 if limits else math.nan,
        phi_inf=limits.at_infinity if limits else math.nan,
        sigma=sigma,
        diagnostics={
            "n_samples": int(grid.size),
            "neighbourhood": neighbourhood,
            "phi_prime0_residual": limits.prime0_residual if limits else None,
            "phi_inf_residual": limits.infinity_residual if limits else None,
            "sigma_residual": sigma.residual if sigma else None,
        },
    )
    if report.passed:
        logger.info(f"✅ hypotheses hold for {model.name}")
    else:
        logger.warning(f"⚠️ hypotheses failed for {model.name}: {', '.join(report.failed())}")
    return report
