from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefield_engine.discrete_solver import (DiscreteState, Mesh1D, SolveConfig, alternate_minimize, continuation,
                                               energy, u_residual, u_step, v_gradient, v_step)
from phasefield_engine.exceptions import ConfigurationError, ValidationError


def _random_state(mesh, L, rng, low=0.05, high=0.95):
    v = rng.uniform(low, high, mesh.n)
    v[0] = v[-1] = 1.0
    u = np.linspace(0.0, L, mesh.n) + 0.01 * rng.normal(size=mesh.n)
    u[0], u[-1] = 0.0, L
    return DiscreteState(mesh, u, v)


class TestMesh:

    def test_mesh_rule(self):
        mesh = Mesh1D.for_eps(0.0, 1.0, 0.1)
        assert mesh.n == 101
        assert mesh.h == pytest.approx(0.01)
        assert Mesh1D.for_eps(0.0, 1.0, 0.0125, ratio=20).h <= 0.0125 / 20 + 1e-15

    def test_mesh_needs_three_nodes(self):
        with pytest.raises(ValidationError):
            Mesh1D(0.0, 1.0, 2)

    def test_state_rejects_v_outside_unit_interval(self):
        mesh = Mesh1D(0.0, 1.0, 5)
        with pytest.raises(ValidationError):
            DiscreteState(mesh, np.zeros(5), np.array([1.0, 1.2, 1.0, 1.0, 1.0]))

    def test_config_is_validated(self):
        with pytest.raises(ConfigurationError):
            SolveConfig(eps=0.1, tol_rel_energy=0.5)
        with pytest.raises(ConfigurationError):
            SolveConfig(eps=0.1, mesh_ratio=5)
        with pytest.raises(ConfigurationError):
            SolveConfig(eps=0.1, mode="ductile")


class TestEnergy:

    def test_sound_state_is_purely_elastic(self, cfi):
        eps, L = 0.1, 0.3
        cfg = SolveConfig(eps=eps, L=L)
        state = DiscreteState.plain(Mesh1D.for_eps(0.0, 1.0, eps), L)
        total, terms = energy(state, cfi, cfg)
        assert total == pytest.approx((1.0 + eps ** 2) * L ** 2, rel=1e-12)
        assert terms["potential"] == 0.0 and terms["gradient"] == 0.0

    def test_fully_damaged_state_pays_the_potential(self, cfi):
        eps = 0.1
        mesh = Mesh1D.for_eps(0.0, 1.0, eps)
        v = np.zeros(mesh.n)
        v[0] = v[-1] = 1.0
        cfg = SolveConfig(eps=eps, L=0.0)
        _, terms = energy(DiscreteState(mesh, np.zeros(mesh.n), v), cfi, cfg)
        # 𝔡(1) = 1 on all but the two boundary elements, over 4ε
        assert terms["potential"] == pytest.approx((1.0 - 2 * mesh.h) / (4 * eps) + 2 * mesh.h * 0.25 / (4 * eps))

    def test_brittle_mode_with_gamma_equal_to_eps_is_cohesive(self, cfi):
        eps, L = 0.1, 0.3
        mesh = Mesh1D.for_eps(0.0, 1.0, eps)
        state = DiscreteState.notched(mesh, L, eps)
        cohesive = energy(state, cfi, SolveConfig(eps=eps, L=L))
        brittle = energy(state, cfi, SolveConfig(eps=eps, L=L, mode="brittle", degradation_scale=eps))
        assert brittle == cohesive
        assert energy(state, cfi, SolveConfig(eps=eps, L=L, mode="brittle"))[0] != cohesive[0]

    def test_v_gradient_matches_central_differences(self, wu):
        rng = np.random.default_rng(7)
        mesh = Mesh1D(0.0, 1.0, 21)
        cfg = SolveConfig(eps=0.1, L=0.3)
        step = 1e-6
        for _ in range(100):
            state = _random_state(mesh, 0.3, rng)
            analytic = v_gradient(state, wu, cfg)
            numeric = np.zeros(mesh.n)
            for i in range(1, mesh.n - 1):
                up, down = state.copy(), state.copy()
                up.v[i] += step
                down.v[i] -= step
                numeric[i] = (energy(up, wu, cfg)[0] - energy(down, wu, cfg)[0]) / (2 * step)
            inner = slice(1, -1)
            error = np.linalg.norm(analytic[inner] - numeric[inner]) / np.linalg.norm(numeric[inner])
            assert error <= 1e-5


class TestSteps:

    def test_u_step_solves_equilibrium(self, cfi):
        rng = np.random.default_rng(3)
        mesh = Mesh1D.for_eps(0.0, 1.0, 0.05)
        cfg = SolveConfig(eps=0.05, L=0.3)
        state = u_step(_random_state(mesh, 0.3, rng), cfi, cfg)
        assert state.u[0] == 0.0 and state.u[-1] == 0.3
        assert u_residual(state, cfi, cfg) <= 1e-10

    def test_u_step_is_a_minimizer(self, cfi):
        rng = np.random.default_rng(5)
        mesh = Mesh1D.for_eps(0.0, 1.0, 0.1)
        cfg = SolveConfig(eps=0.1, L=0.3)
        state = u_step(_random_state(mesh, 0.3, rng), cfi, cfg)
        base = energy(state, cfi, cfg)[0]
        for _ in range(50):
            delta = rng.normal(size=mesh.n)
            delta[0] = delta[-1] = 0.0
            moved = state.copy()
            moved.u += 1e-6 * delta / np.linalg.norm(delta)
            assert energy(moved, cfi, cfg)[0] >= base - 1e-12

    def test_u_step_is_antisymmetric_for_a_centred_notch(self, cfi):
        L = 0.3
        mesh = Mesh1D(0.0, 1.0, 101)
        state = DiscreteState.notched(mesh, L, 0.1)
        state.v = 0.5 * (state.v + state.v[::-1])
        state = u_step(state, cfi, SolveConfig(eps=0.1, L=L))
        assert_allclose(state.u + state.u[::-1], L, rtol=0.0, atol=1e-10)
        assert state.u[50] == pytest.approx(0.5 * L, abs=1e-10)

    def test_u_step_is_linear_for_uniform_damage(self, cfi):
        mesh = Mesh1D(0.0, 1.0, 11)
        cfg = SolveConfig(eps=0.1, L=0.5)
        state = u_step(DiscreteState(mesh, np.zeros(11), np.ones(11)), cfi, cfg)
        assert_allclose(state.u, np.linspace(0.0, 0.5, 11), atol=1e-14)

    def test_u_step_rejects_zero_stiffness(self, cfi):
        mesh = Mesh1D(0.0, 1.0, 11)
        v = np.ones(11)
        v[5] = v[6] = 0.0
        cfg = SolveConfig(eps=0.1, L=0.5, kappa=0.0)
        with pytest.raises(ConfigurationError, match="singular"):
            u_step(DiscreteState(mesh, np.zeros(11), v), cfi, cfg)

    def test_u_step_needs_dirichlet_data(self, cfi):
        mesh = Mesh1D(0.0, 1.0, 11)
        with pytest.raises(ConfigurationError):
            u_step(DiscreteState.plain(mesh, 0.5), cfi, SolveConfig(eps=0.1, L=0.5, dirichlet=False))

    def test_v_step_descends_and_keeps_bounds(self, cfi):
        rng = np.random.default_rng(11)
        mesh = Mesh1D.for_eps(0.0, 1.0, 0.1)
        cfg = SolveConfig(eps=0.1, L=0.3)
        state = u_step(_random_state(mesh, 0.3, rng), cfi, cfg)
        after = v_step(state, cfi, cfg)
        assert energy(after, cfi, cfg)[0] <= energy(state, cfi, cfg)[0]
        assert np.all(after.v >= 0) and np.all(after.v <= 1)
        assert after.v[0] == 1.0 and after.v[-1] == 1.0


class TestAlternateMinimization:

    def test_trace_is_monotone_and_best_start_wins(self, cfi):
        eps, L = 0.1, 0.3
        cfg = SolveConfig(eps=eps, L=L, max_outer_iters=300, perturbed_starts=1)
        mesh = Mesh1D.for_eps(0.0, 1.0, eps)
        state, trace = alternate_minimize(DiscreteState.plain(mesh, L), cfi, cfg)
        assert trace.is_monotone(1e-12)
        assert set(trace.start_energies) == {"initial", "plain", "notched", "perturbed-0"}
        assert trace.total[-1] == pytest.approx(min(trace.start_energies.values()))
        assert energy(state, cfi, cfg)[0] == pytest.approx(trace.total[-1])
        assert list(trace.to_frame().columns) == ["iteration", "total", "elastic", "potential", "gradient"]

    def test_small_load_stays_elastic(self, cfi):
        eps, L = 0.1, 0.05
        cfg = SolveConfig(eps=eps, L=L, max_outer_iters=300)
        mesh = Mesh1D.for_eps(0.0, 1.0, eps)
        state, trace = alternate_minimize(DiscreteState.plain(mesh, L), cfi, cfg)
        assert trace.total[-1] == pytest.approx(L * L, rel=0.05)
        assert np.min(state.v) > 0.5

    def test_mesh_refinement_barely_moves_the_energy(self, cfi):
        eps, L = 0.1, 0.3
        cfg = SolveConfig(eps=eps, L=L)
        energies = []
        for n in (101, 201):
            _, trace = alternate_minimize(DiscreteState.plain(Mesh1D(0.0, 1.0, n), L), cfi, cfg)
            energies.append(trace.total[-1])
        assert abs(energies[1] - energies[0]) <= 0.005 * energies[1]

    def test_dirichlet_data_is_checked(self, cfi):
        mesh = Mesh1D(0.0, 1.0, 11)
        with pytest.raises(ValidationError):
            alternate_minimize(DiscreteState.plain(mesh, 0.2), cfi, SolveConfig(eps=0.1, L=0.3))

    def test_thread_count_does_not_change_the_result(self, cfi):
        eps, L = 0.1, 0.3
        cfg = SolveConfig(eps=eps, L=L, max_outer_iters=100)
        mesh = Mesh1D.for_eps(0.0, 1.0, eps)
        one = alternate_minimize(DiscreteState.plain(mesh, L), cfi, cfg, threads=1)
        many = alternate_minimize(DiscreteState.plain(mesh, L), cfi, cfg, threads=3)
        assert one[1].total == many[1].total
        assert one[1].start_label == many[1].start_label


class TestContinuation:

    def test_rows_follow_the_eps_list(self, cfi):
        cfg = SolveConfig(eps=0.2, max_outer_iters=200)
        seen = []
        rows = continuation(cfi, cfg, [0.2, 0.1], 0.3, progress_callback=lambda p, m: seen.append(p))
        assert [r.eps for r in rows] == [0.2, 0.1]
        assert rows[1].mesh_nodes == 101
        assert all(r.trace.is_monotone() for r in rows)
        assert seen[-1] == 100
        data = rows[0].to_dict()
        assert {"eps", "energy", "max_strain", "min_v", "start"} <= set(data)
        assert list(rows[0].state.fields_frame().columns) == ["x", "u", "v"]

    def test_eps_list_must_decrease(self, cfi):
        with pytest.raises(ConfigurationError):
            continuation(cfi, SolveConfig(eps=0.1), [0.1, 0.2], 0.3)

    def test_mesh_rule_is_enforced(self, cfi):
        with pytest.raises(ConfigurationError, match="mesh rule"):
            continuation(cfi, SolveConfig(eps=0.1), [0.1], 0.3, mesh_rule=lambda eps: Mesh1D(0.0, 1.0, 11))

    def test_brittle_mode_uses_gamma_scaling(self, brittle_cfi):
        cfg = replace(SolveConfig(eps=0.1, mode="brittle", mesh_ratio=20), max_outer_iters=200)
        rows = continuation(brittle_cfi, cfg, [0.1], 0.5)
        assert rows[0].energy <= (1.0 + 0.1 ** 3) * 0.25 + 1e-12
