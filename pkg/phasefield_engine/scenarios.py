# phasefield_engine/scenarios.py - Scenario files, run kinds and reports
"""
A scenario is a flat TOML file with the sections ``[model]``, ``[run]``,
``[numerics]``, ``[output]`` and, for family comparisons, ``[compare]``.
``ScenarioRunner.run`` executes one of the run kinds and returns a report
dict; every file it mentions is written below the output directory.
"""
import logging
import math
import os
import re
import threading
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .cohesive_law import LawConfig, build_law_table
from .discrete_solver import SolveConfig, continuation
from .envelope import build_envelope
from .exceptions import ConfigurationError, HypothesisError, PhaseFieldError, ValidationError
from .limit_oracle import brittle_dirichlet_limit, dirichlet_limit, kjump_oracle, sigma_zero_limit
from .model_core import (ModelSpec, cfi_model, model_from_section, phi_inf, phi_prime0, psi,
                         sigma_bar, validate_hypotheses)
from .utils import ensure_dir, to_jsonable, write_csv, write_json

logger = logging.getLogger(__name__)

RUN_KINDS = ("law", "gamma-study", "brittle-study", "sigma-zero-study", "family-compare")
SECTIONS = ("model", "run", "numerics", "output", "compare")
_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")

DEFAULT_EPS = (0.1, 0.05, 0.025, 0.0125)


def _read_toml(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigurationError(f"scenario file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        text = str(exc)
        match = _POSITION.search(text)
        line = getattr(exc, "lineno", None) or (int(match.group(1)) if match else None)
        column = getattr(exc, "colno", None) or (int(match.group(2)) if match else None)
        message = _POSITION.sub("", text).strip()
        raise ConfigurationError(f"cannot parse {path}: {message}", line, column) from exc


def _float_list(value, name: str) -> list:
    values = value if isinstance(value, (list, tuple)) else [value]
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{name}' must be a number or a list of numbers, got {value!r}") from None


def _setting(section: dict, name: str, default, cast=float):
    value = section.get(name, default)
    if isinstance(value, (str, bool)):
        raise ConfigurationError(f"'{name}' must be a number, got {value!r}")
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{name}' must be a number, got {value!r}") from None


@dataclass
class ScenarioConfig:
    path: str
    model: dict
    run: dict
    numerics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    out_dir: str = "./out"
    threads: int = 1
    seed: int = 42
    strict: bool = False

    def __post_init__(self):
        if self.kind not in RUN_KINDS:
            raise ConfigurationError(f"unknown run kind '{self.kind}' (expected one of {', '.join(RUN_KINDS)})")
        eps = self.eps_list
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError(f"eps_list must be positive and strictly decreasing, got {eps}")
        if any(L < 0 for L in self.L_values):
            raise ConfigurationError(f"L must be ≥ 0, got {self.L_values}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be ≥ 1, got {self.threads}")

    @classmethod
    def from_file(cls, path: str, out_dir: str | None = None, threads: int | None = None,
                  seed: int | None = None, strict: bool = False,
                  default_out_dir: str = "./out") -> "ScenarioConfig":
        """Load a scenario; ``out_dir`` wins over ``[output] dir``, which wins over ``default_out_dir``."""
        data = _read_toml(path)
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigurationError(f"{path}: unknown section(s) {', '.join(unknown)}")
        for name in ("model", "run"):
            if name not in data:
                raise ConfigurationError(f"{path}: missing [{name}] section")
        output = dict(data.get("output", {}))
        return cls(
            path=os.path.abspath(path),
            model=dict(data["model"]),
            run=dict(data["run"]),
            numerics=dict(data.get("numerics", {})),
            output=output,
            compare=dict(data.get("compare", {})),
            out_dir=out_dir or output.get("dir") or default_out_dir,
            threads=int(threads) if threads else 1,
            seed=int(seed) if seed is not None else 42,
            strict=bool(strict or data["run"].get("strict", False)),
        )

    @property
    def kind(self) -> str:
        return str(self.run.get("kind", ""))

    @property
    def base_dir(self) -> str:
        return os.path.dirname(self.path)

    @property
    def eps_list(self) -> list:
        return _float_list(self.run.get("eps_list", list(DEFAULT_EPS)), "eps_list")

    @property
    def L_values(self) -> list:
        return _float_list(self.run.get("L", 0.3), "L")

    @property
    def ell(self) -> float:
        return _setting(self.run, "b", 1.0) - _setting(self.run, "a", 0.0)

    def build_model(self, overrides: dict | None = None) -> ModelSpec:
        section = dict(self.model, **(overrides or {}))
        try:
            return model_from_section(section, self.base_dir)
        except ValidationError as exc:
            raise ConfigurationError(f"[model]: {exc}") from exc

    def law_config(self) -> LawConfig:
        n = self.numerics
        return LawConfig(
            n_nodes=_setting(n, "law_nodes", 401, int),
            max_iter=_setting(n, "law_max_iter", 400, int),
            eta=_setting(n, "eta", 1e-2),
            chunk_size=_setting(n, "chunk_size", 16, int),
        )

    def solve_config(self, mode: str) -> SolveConfig:
        n = self.numerics
        default_ratio = 20.0 if mode == "brittle" else 10.0
        return SolveConfig(
            eps=self.eps_list[0],
            mode=mode,
            tol_rel_energy=_setting(n, "tol_rel_energy", 1e-8),
            max_outer_iters=_setting(n, "max_outer_iters", 2000, int),
            v_max_iter=_setting(n, "v_max_iter", 50, int),
            mesh_ratio=_setting(n, "mesh_ratio", default_ratio),
            perturbed_starts=_setting(n, "perturbed_starts", 0, int),
            seed=self.seed,
        )

    def echo(self) -> dict:
        return {name: getattr(self, name) for name in SECTIONS} | {
            "path": self.path, "threads": self.threads, "seed": self.seed, "strict": self.strict,
        }


def _log_progress(percentage: int, message: str):
    logger.info(f"📊 [{percentage:3d}%] {message}")


def phi_regime(prime0: float) -> str:
    """Limiting regime predicted by φ'(0⁺) alone."""
    if prime0 == 0:
        return "elastic-free"
    if math.isinf(prime0):
        return "brittle-like"
    return "cohesive"


def _rel_gap(energy: float, oracle: float) -> float:
    return abs(energy - oracle) / oracle if oracle > 0 else math.nan


def exit_code(report: dict) -> int:
    return 0 if report.get("success") else 1


class ScenarioRunner:
    """Runs one scenario; each run kind writes its tables and a report.json."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.out_dir = ensure_dir(os.path.abspath(config.out_dir))
        self.paths = {}

    # ---------- helpers ----------

    def _path(self, key: str, filename: str) -> str:
        path = os.path.join(self.out_dir, filename)
        self.paths[key] = os.path.relpath(path, self.out_dir)
        return path

    def _model_summary(self, model: ModelSpec) -> tuple:
        hyp = validate_hypotheses(model)
        if self.config.strict and not hyp.passed:
            raise HypothesisError(f"hypotheses failed for {model.name}: {', '.join(hyp.failed())}", hyp)
        sigma = hyp.sigma if hyp.sigma is not None else sigma_bar(model)
        return {
            "model": model.describe(),
            "sigma_bar": sigma.to_dict(),
            "phi_prime0": phi_prime0(model),
            "phi_inf": phi_inf(model),
            "psi_1": float(psi(model, 1.0)),
            "toughness": 2.0 * float(psi(model, 1.0)),
            "phi_regime": phi_regime(phi_prime0(model)),
            "hypotheses": hyp.to_dict(),
        }, sigma

    def _envelope(self, model: ModelSpec, sigma, tag: str):
        n = self.config.numerics
        L_over_ell = max(self.config.L_values) / self.config.ell
        if sigma.kind == "finite":
            t_max = _setting(n, "envelope_t_max", max(50.0 * sigma.value, 2.0 * L_over_ell))
        else:
            t_max = _setting(n, "envelope_t_max", max(2.0 * L_over_ell, 1.0))
        env = build_envelope(model, sigma, t_max, _setting(n, "envelope_points", 4096, int))
        env.to_csv(self._path(f"envelope_{tag}", f"envelope_{tag}.csv"))
        return env

    def _s_grid(self) -> np.ndarray:
        n = self.config.numerics
        s_max = max(_setting(n, "s_max", 4.0), max(self.config.L_values))
        return np.linspace(0.0, s_max, _setting(n, "s_points", 201, int))

    def _law(self, model: ModelSpec, tag: str, progress_callback):
        law = build_law_table(model, self._s_grid(), self.config.law_config(), self.config.threads,
                              progress_callback)
        law.to_csv(self._path(f"law_{tag}", f"law_{tag}.csv"))
        law.to_json(self._path(f"law_{tag}_json", f"law_{tag}.json"))
        return law

    def _study(self, model: ModelSpec, mode: str, L: float, tag: str, oracle: float, progress_callback) -> list:
        cfg = self.config.solve_config(mode)
        a = _setting(self.config.run, "a", 0.0)
        b = _setting(self.config.run, "b", 1.0)
        rows = continuation(model, cfg, self.config.eps_list, L, a=a, b=b,
                            threads=self.config.threads, progress_callback=progress_callback)
        records = []
        for row in rows:
            label = f"{tag}_L{L:g}_eps{row.eps:g}"
            fields_path = self._path(f"fields_{label}", f"fields_{label}.csv")
            write_csv(row.state.fields_frame(), fields_path)
            trace_path = self._path(f"trace_{label}", f"trace_{label}.csv")
            write_csv(row.trace.to_frame(), trace_path)
            records.append({
                "model": tag,
                "mode": mode,
                "L": L,
                "eps": row.eps,
                "energy": row.energy,
                "oracle": oracle,
                "rel_gap": _rel_gap(row.energy, oracle),
                "min_v": row.min_v,
                "max_strain": row.max_strain,
                "max_strain_x": row.max_strain_x,
                "iterations": row.iterations,
                "start": row.start_label,
                "trace_monotone": row.trace.is_monotone(),
                "fields": os.path.relpath(fields_path, self.out_dir),
                "trace": os.path.relpath(trace_path, self.out_dir),
                "diagnostics": row.to_dict(),
            })
        return records

    def _write_convergence(self, records: list):
        columns = ["model", "mode", "L", "eps", "energy", "oracle", "rel_gap", "min_v",
                   "max_strain", "iterations", "start", "fields"]
        frame = pd.DataFrame([{k: r[k] for k in columns} for r in records], columns=columns)
        write_csv(frame, self._path("convergence", "convergence.csv"))

    # ---------- run kinds ----------

    def _run_law(self, progress_callback, stop_event) -> dict:
        model = self.config.build_model()
        summary, sigma = self._model_summary(model)
        progress_callback(5, f"model {model.name}: σ̄={sigma.numeric:g}")
        env = self._envelope(model, sigma, "model")
        if stop_event and stop_event.is_set():
            return {"success": False, "error": "Run stopped by user."}
        law = self._law(model, "model", progress_callback)
        return dict(summary, envelope=env.summary(), law={
            "s_max": float(law.s[-1]),
            "g_max": float(law.g[-1]),
            "saturation_ratio": float(law.g[-1] / law.toughness) if law.toughness > 0 else math.nan,
            "eta": law.eta,
            "lambda0": law.lambda0,
        })

    def _run_gamma_study(self, progress_callback, stop_event) -> dict:
        model = self.config.build_model()
        summary, sigma = self._model_summary(model)
        env = self._envelope(model, sigma, "model")
        law = self._law(model, "model", lambda p, m: progress_callback(int(0.4 * p), m))
        ell = self.config.ell
        k = _setting(self.config.numerics, "kjump", 3, int)
        records, oracles = [], []
        for L in self.config.L_values:
            if stop_event and stop_event.is_set():
                return {"success": False, "error": "Run stopped by user."}
            solution = dirichlet_limit(model, env, law, L, ell)
            brute = kjump_oracle(env, law, L, ell, k)
            oracles.append(dict(solution.to_dict(), kjump=brute, kjump_k=k,
                                kjump_gap=solution.energy - brute))
            records += self._study(model, "cohesive", L, "model", solution.energy,
                                   lambda p, m: progress_callback(40 + int(0.6 * p), m))
        self._write_convergence(records)
        return dict(summary, envelope=env.summary(), oracles=oracles, convergence=records)

    def _run_brittle_study(self, progress_callback, stop_event) -> dict:
        model = self.config.build_model()
        summary, _ = self._model_summary(model)
        records, oracles = [], []
        for L in self.config.L_values:
            if stop_event and stop_event.is_set():
                return {"success": False, "error": "Run stopped by user."}
            oracle = brittle_dirichlet_limit(model, L, self.config.ell)
            oracles.append({"L": L, "energy": oracle,
                            "regime": "elastic" if oracle < summary["toughness"] else "fracture"})
            records += self._study(model, "brittle", L, "model", oracle, progress_callback)
        self._write_convergence(records)
        return dict(summary, oracles=oracles, convergence=records)

    def _run_sigma_zero_study(self, progress_callback, stop_event) -> dict:
        model = self.config.build_model()
        summary, sigma = self._model_summary(model)
        if sigma.kind != "zero":
            logger.warning(f"⚠️ sigma-zero-study on a model with σ̄ kind '{sigma.kind}'")
        if "reference" in self.config.compare:
            reference = self.config.build_model(dict(self.config.compare["reference"]))
        else:
            reference = cfi_model(1.0, 1.0, model.phi, model.kappa_rule, model.gamma_rule)
        records, reference_records = [], []
        for L in self.config.L_values:
            if stop_event and stop_event.is_set():
                return {"success": False, "error": "Run stopped by user."}
            records += self._study(model, "cohesive", L, "model", sigma_zero_limit(L), progress_callback)
            reference_records += self._study(reference, "cohesive", L, "reference", math.nan, progress_callback)
        for row, ref in zip(records, reference_records):
            row["reference_energy"] = ref["energy"]
            row["ratio"] = row["energy"] / ref["energy"] if ref["energy"] > 0 else math.nan
        self._write_convergence(records + reference_records)
        energies = [r["energy"] for r in records]
        checks = {
            "monotone_decrease": bool(all(b < a for a, b in zip(energies, energies[1:]))),
            "final_ratio": records[-1]["ratio"] if records else math.nan,
        }
        return dict(summary, reference=reference.describe(), convergence=records,
                    reference_convergence=reference_records, checks=checks)

    def _run_family_compare(self, progress_callback, stop_event) -> dict:
        families = self.config.compare.get("families", ["cfi", "wu"])
        if not families:
            raise ConfigurationError("[compare] families must list at least one family")
        results = {}
        for i, family in enumerate(families):
            if stop_event and stop_event.is_set():
                return {"success": False, "error": "Run stopped by user."}
            model = self.config.build_model({"family": family})
            summary, sigma = self._model_summary(model)
            offset = int(100 * i / len(families))
            law = self._law(model, family, lambda p, m: progress_callback(offset + p // len(families), m))
            results[family] = dict(summary, g_max=float(law.g[-1]), s_max=float(law.s[-1]))
        return {"families": results, "s_grid": self._s_grid()}

    # ---------- entry point ----------

    def run(self, progress_callback=None, stop_event: threading.Event | None = None) -> dict:
        progress_callback = progress_callback or _log_progress
        handlers = {
            "law": self._run_law,
            "gamma-study": self._run_gamma_study,
            "brittle-study": self._run_brittle_study,
            "sigma-zero-study": self._run_sigma_zero_study,
            "family-compare": self._run_family_compare,
        }
        try:
            progress_callback(0, f"starting {self.config.kind} run")
            body = handlers[self.config.kind](progress_callback, stop_event)
            if body.get("success") is False:
                return body
            report = {
                "success": True,
                "kind": self.config.kind,
                "inputs": self.config.echo(),
                **body,
                "paths": dict(sorted(self.paths.items())),
            }
            report_path = os.path.join(self.out_dir, "report.json")
            report["paths"]["report"] = os.path.relpath(report_path, self.out_dir)
            write_json(report, report_path)
            progress_callback(100, "run complete")
            logger.info(f"✅ {self.config.kind} run finished, report at {report_path}")
            return to_jsonable(report)
        except PhaseFieldError as exc:
            logger.error(f"❌ {self.config.kind} run failed: {exc}")
            return {"success": False, "error": f"{type(exc).__name__}: {exc}"}


def run(config_path: str, out_dir: str | None = None, threads: int | None = None, seed: int | None = None,
        strict: bool = False, progress_callback=None, default_out_dir: str = "./out") -> dict:
    """Load a scenario file and execute it; configuration errors become failed reports."""
    try:
        config = ScenarioConfig.from_file(config_path, out_dir, threads, seed, strict, default_out_dir)
    except PhaseFieldError as exc:
        logger.error(f"❌ cannot load scenario {config_path}: {exc}")
        return {"success": False, "error": f"{type(exc).__name__}: {exc}"}
    return ScenarioRunner(config).run(progress_callback)
