# phasefield_engine - cohesive phase-field models, their limit energies and 1D solvers
from .cohesive_law import CohesiveLawTable, LawConfig, build_law_table, g_eta, g_hat, g_repV_value, g_value
from .discrete_solver import DiscreteState, Mesh1D, SolveConfig, alternate_minimize, continuation, energy
from .envelope import EnvelopeTable, build_envelope, eval_envelope, h_sigma_pointwise
from .exceptions import (ConfigurationError, DomainError, HypothesisError, LimitNotResolvedError,
                         PhaseFieldError, ValidationError)
from .limit_oracle import (DirichletSolution, SBVProfile, brittle_dirichlet_limit, dirichlet_limit,
                           kjump_oracle, limit_energy, sigma_zero_limit)
from .model_core import ModelSpec, ScalarFnSpec, cfi_model, sigma_bar, validate_hypotheses, wu_model
from .scenarios import ScenarioConfig, ScenarioRunner, run

__version__ = "0.1.0"
