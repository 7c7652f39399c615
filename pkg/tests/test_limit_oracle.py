import numpy as np
import pytest

from phasefield_engine.cohesive_law import LawConfig, build_law_table
from phasefield_engine.envelope import build_envelope, eval_envelope
from phasefield_engine.exceptions import DomainError, ValidationError
from phasefield_engine.limit_oracle import (SBVProfile, brittle_crossover, brittle_dirichlet_limit,
                                            dirichlet_limit, dirichlet_limit_energy, kjump_oracle,
                                            limit_energy, sigma_zero_limit)
from phasefield_engine.model_core import cfi_model

FAST = LawConfig(n_nodes=101, max_iter=150, ghat_scan=512, geodesic_scan=24)


@pytest.fixture(scope="module")
def model():
    return cfi_model(1.0, 1.0, "min-with-one")


@pytest.fixture(scope="module")
def env(model):
    return build_envelope(model, 1.0, t_max=50.0, n=2048)


@pytest.fixture(scope="module")
def law(model):
    return build_law_table(model, np.linspace(0.0, 1.0, 11), FAST)


class TestLimitEnergy:

    def test_zero_profile_is_free(self, env, law):
        total, terms = limit_energy(SBVProfile.zero(), env, law)
        assert total == 0.0
        assert terms["cantor"] == 0.0

    def test_single_jump_costs_g(self, env, law):
        p = SBVProfile(0.0, 1.0, np.zeros(8), [(0.5, 0.5)])
        assert limit_energy(p, env, law)[0] == pytest.approx(law.eval_g(0.5), abs=1e-12)

    def test_affine_profile_costs_the_envelope(self, env, law):
        p = SBVProfile(0.0, 2.0, np.full(16, 0.2))
        assert limit_energy(p, env, law)[0] == pytest.approx(2.0 * eval_envelope(env, 0.2), rel=1e-12)

    def test_boundary_mismatch_is_charged(self, env, law):
        p = SBVProfile(0.0, 1.0, np.zeros(4), u_left=0.0, u_right=0.0)
        total, terms = dirichlet_limit_energy(p, env, law, 0.3)
        assert total == pytest.approx(law.eval_g(0.3), abs=1e-12)
        assert terms["boundary"] == pytest.approx(total)

    def test_profile_is_validated(self):
        with pytest.raises(ValidationError):
            SBVProfile(0.0, 1.0, np.zeros(4), [(0.6, 0.1), (0.4, 0.1)])
        with pytest.raises(ValidationError):
            SBVProfile(0.0, 1.0, np.zeros(4), [(0.5, -0.1)])
        with pytest.raises(ValidationError):
            SBVProfile(1.0, 1.0, np.zeros(4))


class TestDirichletProblem:

    def test_zero_and_negative_loads(self, model, env, law):
        assert dirichlet_limit(model, env, law, 0.0).energy == 0.0
        with pytest.raises(DomainError):
            dirichlet_limit(model, env, law, -0.1)

    def test_law_must_cover_the_load(self, model, env, law):
        with pytest.raises(DomainError, match="covers"):
            dirichlet_limit(model, env, law, 1.5)

    @pytest.mark.parametrize("L", [0.1, 0.3, 0.8])
    def test_energy_below_pure_strategies(self, model, env, law, L):
        solution = dirichlet_limit(model, env, law, L)
        assert solution.energy <= min(float(eval_envelope(env, L)), law.eval_g(L)) + 1e-12
        assert 0.0 <= solution.s_star <= L

    def test_energy_grows_with_the_load(self, model, env, law):
        energies = [dirichlet_limit(model, env, law, L).energy for L in (0.1, 0.2, 0.4, 0.6, 0.9)]
        assert np.all(np.diff(energies) >= -1e-12)

    def test_reconstruction_reproduces_the_energy(self, model, env, law):
        solution = dirichlet_limit(model, env, law, 0.6)
        total, _ = dirichlet_limit_energy(solution.reconstruct(), env, law, 0.6)
        assert total == pytest.approx(solution.energy, abs=1e-9)
        assert set(solution.to_dict()) == {"s_star", "energy", "bulk", "jump", "regime", "L", "ell"}


class TestKJumpOracle:

    def test_one_jump_matches_the_reduction(self, model, env, law):
        solution = dirichlet_limit(model, env, law, 0.5)
        assert kjump_oracle(env, law, 0.5, 1.0, 1) == pytest.approx(solution.energy, abs=1e-9)

    def test_more_jumps_do_not_help_a_subadditive_law(self, model, env, law):
        single = kjump_oracle(env, law, 0.7, 1.0, 1)
        triple = kjump_oracle(env, law, 0.7, 1.0, 3)
        assert triple <= single + 1e-12
        assert single - triple <= 1e-4

    def test_k_is_validated(self, env, law):
        with pytest.raises(ValidationError):
            kjump_oracle(env, law, 0.5, 1.0, 4)
        assert kjump_oracle(env, law, 0.0, 1.0, 2) == 0.0


class TestClosedForms:

    def test_brittle_limit(self, model):
        assert brittle_dirichlet_limit(model, 0.5) == pytest.approx(0.25)
        assert brittle_dirichlet_limit(model, 2.0) == pytest.approx(1.0)
        assert brittle_crossover(model) == pytest.approx(1.0)

    def test_sigma_zero_limit_vanishes(self):
        assert sigma_zero_limit(0.7) == 0.0
