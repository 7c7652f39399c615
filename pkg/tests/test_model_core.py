import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefield_engine.exceptions import DomainError, ValidationError
from phasefield_engine.model_core import (Domain, Family, ModelSpec, ScalarFnSpec, ScalingRule, cfi_model,
                                          eval_f, eval_f_eps, eval_f_tilde_eps, f_squared, load_tabulated,
                                          model_from_section, parse_scalar_fn, phi_inf, phi_limits, phi_prime0,
                                          psi, root_primitive, sigma_bar, toughness, validate_hypotheses)


def _tabulated_phi(tmp_path, c=1.0):
    t = np.concatenate([[0.0], np.geomspace(1e-6, 1e4, 400)])
    path = tmp_path / "phi.csv"
    path.write_text("t,phi\n" + "\n".join(f"{a!r},{c * a / (1 + a)!r}" for a in t) + "\n", encoding="utf-8")
    return load_tabulated(str(path), Domain.HALFLINE)


class TestScalarFunctions:

    def test_families_evaluate_elementwise(self):
        t = np.array([0.0, 0.5, 2.0])
        assert_allclose(ScalarFnSpec(Family.POWER, (3.0,))(t), t ** 3)
        assert_allclose(ScalarFnSpec(Family.SCALED_POWER, (2.0, 1.0))(t), t ** 2 / 4.0)
        assert_allclose(ScalarFnSpec(Family.MIN_WITH_ONE)(t), [0.0, 0.5, 1.0])
        assert_allclose(ScalarFnSpec(Family.RATIONAL)(t), t / (1 + t))
        assert ScalarFnSpec(Family.RATIONAL)(math.inf) == 1.0

    def test_scale_multiplies_values(self):
        spec = ScalarFnSpec(Family.QUADRATIC, scale=3.0)
        assert spec(2.0) == pytest.approx(12.0)
        assert spec.leading_term() == (3.0, 2.0)

    def test_wrong_arity_is_rejected(self):
        with pytest.raises(ValidationError):
            ScalarFnSpec(Family.POWER, ())

    def test_tabulated_rejects_non_increasing_abscissae(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            ScalarFnSpec(Family.TABULATED, samples=((0.0, 0.0), (0.5, 0.2), (0.5, 0.3)))

    def test_tabulated_rejects_negative_values(self):
        with pytest.raises(ValidationError):
            ScalarFnSpec(Family.TABULATED, samples=((0.0, 0.0), (1.0, -0.1)))

    def test_load_tabulated_with_and_without_header(self, tmp_path):
        with_header = tmp_path / "a.csv"
        with_header.write_text("t,value\n0,0\n0.5,0.25\n1,1\n", encoding="utf-8")
        bare = tmp_path / "b.csv"
        bare.write_text("0,0\n0.5,0.25\n1,1\n", encoding="utf-8")
        a, b = load_tabulated(str(with_header)), load_tabulated(str(bare))
        assert a.samples == b.samples
        assert a(0.5) == pytest.approx(0.25)

    def test_load_tabulated_reports_bad_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,0\n0.5,abc\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="non-numeric"):
            load_tabulated(str(path))

    def test_parse_scalar_fn_grammar(self, tmp_path):
        spec = parse_scalar_fn("2*power(3)")
        assert spec.family is Family.POWER and spec.params == (3.0,) and spec.scale == 2.0
        assert parse_scalar_fn("scaled-power(0.7, 1)").params == (0.7, 1.0)
        (tmp_path / "d.csv").write_text("0,0\n1,1\n", encoding="utf-8")
        tab = parse_scalar_fn("tabulated(d.csv)", base_dir=str(tmp_path))
        assert tab.family is Family.TABULATED and tab.source == "d.csv"
        with pytest.raises(ValidationError):
            parse_scalar_fn("cubic")


class TestModel:

    def test_scaling_rules_are_validated(self):
        with pytest.raises(ValidationError):
            cfi_model(kappa_rule=ScalingRule(1.0, 1.0))
        with pytest.raises(ValidationError):
            cfi_model(gamma_rule=ScalingRule(1.0, 1.0))

    def test_kappa_and_gamma(self, cfi):
        assert cfi.kappa(0.1) == pytest.approx(0.01)
        assert cfi.gamma(0.04) == pytest.approx(0.2)

    def test_model_from_section_builtins_and_custom(self):
        model = model_from_section({"family": "cfi", "lam": 2.0, "q": 1.0, "kappa": [1.0, 3.0]})
        assert sigma_bar(model).value == pytest.approx(2.0)
        assert model.kappa_rule == ScalingRule(1.0, 3.0)
        custom = model_from_section({"fhat": "quadratic", "Q": "quadratic", "dpot": "power(4)",
                                     "phi": "rational", "name": "s0"})
        assert custom.name == "s0"
        assert custom.phi.domain is Domain.HALFLINE

    def test_model_from_section_reports_missing_keys(self):
        with pytest.raises(ValidationError, match="missing keys"):
            model_from_section({"family": "custom", "fhat": "quadratic"})

    @pytest.mark.parametrize("key", ["lam", "q", "kappa"])
    def test_model_from_section_rejects_non_numeric_values(self, key):
        section = {"family": "cfi", "lam": 1.0, "q": 1.0}
        section[key] = ["abc", 2.0] if key == "kappa" else "abc"
        with pytest.raises(ValidationError, match=f"'{key}'"):
            model_from_section(section)


class TestPrimitiveMaps:

    def test_f_for_the_cfi_model(self, cfi):
        assert eval_f(cfi, 0.5) == pytest.approx(1.0)
        assert_allclose(eval_f(cfi, np.array([0.0, 0.25])), [0.0, 1.0 / 3.0])
        with pytest.raises(DomainError):
            eval_f(cfi, 1.0)
        with pytest.raises(DomainError):
            eval_f(cfi, -0.1)

    def test_f_squared_is_finite_at_one(self, cfi):
        assert math.isfinite(f_squared(cfi, 1.0))
        assert f_squared(cfi, 0.0) == 0.0

    @pytest.mark.parametrize("model", [cfi_model(), cfi_model(0.7), cfi_model(1.0, 2.0)])
    def test_f_eps_squared_identity(self, model):
        t = np.linspace(0.0, 1.0, 101)
        for eps in (1e-4, 1e-2, 0.3):
            f_eps = np.asarray(eval_f_eps(model, eps, t))
            lhs = f_eps ** 2 * (eps * model.fhat(t) + model.qfn(1.0 - t))
            assert_allclose(lhs, eps * model.fhat(t), rtol=1e-12, atol=0.0)

    def test_f_eps_and_f_tilde_eps(self, cfi):
        eps = 0.01
        t = 0.5
        assert eval_f_eps(cfi, eps, t) == pytest.approx(math.sqrt(eps / (eps + 1.0)))
        assert eval_f_eps(cfi, eps, 1.0) == pytest.approx(1.0)
        assert eval_f_tilde_eps(cfi, eps, 1.0) == 1.0
        assert eval_f_tilde_eps(cfi, eps, t) == pytest.approx(0.1)
        assert eval_f_tilde_eps(cfi, eps, 0.999) == 1.0
        with pytest.raises(DomainError):
            eval_f_eps(cfi, 0.0, t)

    def test_sigma_bar_classification(self, cfi, cfi_q2, sigma_zero_model):
        assert sigma_bar(cfi).kind == "finite" and sigma_bar(cfi).value == pytest.approx(1.0)
        assert sigma_bar(cfi_q2).kind == "infinite"
        assert sigma_bar(sigma_zero_model).kind == "zero"

    def test_sigma_bar_equals_lambda(self):
        assert sigma_bar(cfi_model(0.7)).value == pytest.approx(0.7, rel=1e-12)

    def test_sigma_bar_is_homogeneous_in_root_dpot(self, cfi, wu):
        for model in (cfi, wu):
            base = sigma_bar(model).value
            scaled = replace(model, dpot=replace(model.dpot, scale=9.0))
            assert sigma_bar(scaled).value == pytest.approx(3.0 * base, rel=1e-12)

    def test_sigma_bar_numeric_path_for_tabulated_inputs(self, tmp_path):
        # Q = t/4 is reproduced exactly by the monotone cubic interpolant
        t = np.linspace(0.0, 1.0, 201)
        path = tmp_path / "q.csv"
        path.write_text("\n".join(f"{a!r},{a / 4.0!r}" for a in t) + "\n", encoding="utf-8")
        model = ModelSpec(
            fhat=ScalarFnSpec(Family.QUADRATIC),
            qfn=load_tabulated(str(path)),
            dpot=ScalarFnSpec(Family.POWER, (1.0,)),
            phi=ScalarFnSpec(Family.MIN_WITH_ONE, domain=Domain.HALFLINE),
        )
        sigma = sigma_bar(model)
        assert sigma.kind == "finite"
        assert sigma.value == pytest.approx(2.0, rel=1e-6)

    def test_phi_limits_closed_forms(self, cfi, wu):
        assert phi_prime0(cfi) == 1.0 and phi_inf(cfi) == 1.0
        assert phi_prime0(wu) == 1.0 and phi_inf(wu) == 1.0

    def test_phi_limits_tabulated(self, tmp_path):
        limits = phi_limits(cfi_model(phi=_tabulated_phi(tmp_path)))
        assert limits.prime0 == pytest.approx(1.0, rel=1e-3)
        assert limits.at_infinity == pytest.approx(1.0, rel=1e-2)

    def test_phi_limits_scaled_tabulated(self, tmp_path):
        limits = phi_limits(cfi_model(phi=_tabulated_phi(tmp_path, c=3.0)))
        assert limits.prime0 == pytest.approx(3.0, rel=1e-3)
        assert limits.at_infinity == pytest.approx(3.0, rel=1e-3)

    def test_psi_of_linear_dpot(self):
        model = ModelSpec(
            fhat=ScalarFnSpec(Family.QUADRATIC),
            qfn=ScalarFnSpec(Family.POWER, (1.0,)),
            dpot=ScalarFnSpec(Family.POWER, (1.0,)),
            phi=ScalarFnSpec(Family.RATIONAL, domain=Domain.HALFLINE),
        )
        assert psi(model, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-9)
        assert psi(model, 0.0) == 0.0

    @pytest.mark.parametrize("model", [cfi_model(), cfi_model(0.7, 2.0, "rational")])
    def test_psi_is_non_decreasing(self, model):
        values = psi(model, np.linspace(0.0, 1.0, 201))
        assert values[0] == 0.0
        assert np.all(np.diff(values) >= 0.0)

    def test_psi_and_toughness(self, cfi):
        t = np.array([0.0, 0.3, 1.0])
        assert_allclose(psi(cfi, t), t - t * t / 2.0, atol=1e-12)
        assert toughness(cfi) == pytest.approx(1.0, abs=1e-12)
        assert root_primitive(cfi, 0.4) == pytest.approx(0.08, abs=1e-12)
        with pytest.raises(DomainError):
            psi(cfi, 1.5)


class TestHypotheses:

    def test_builtin_models_pass(self, cfi, wu, cfi_q2):
        for model in (cfi, wu, cfi_q2):
            report = validate_hypotheses(model)
            assert report.passed, report.failed()

    def test_sub_quadratic_phi_flags_hp4_with_witness(self):
        model = cfi_model(phi=ScalarFnSpec(Family.POWER, (0.5,), domain=Domain.HALFLINE))
        report = validate_hypotheses(model)
        assert "Hp4" in report.failed()
        assert report.checks["Hp4"].witnesses

    def test_dpot_not_vanishing_at_zero_fails_hp2(self):
        model = replace(cfi_model(), dpot=ScalarFnSpec(Family.TABULATED, samples=((0.0, 0.1), (0.5, 0.3), (1.0, 1.0))))
        report = validate_hypotheses(model)
        assert "Hp2" in report.failed()
        assert report.checks["Hp2"].witnesses == [0.0]

    def test_sample_count_floor(self, cfi):
        with pytest.raises(ValidationError):
            validate_hypotheses(cfi, n_samples=32)

    def test_report_serializes(self, cfi):
        data = validate_hypotheses(cfi).to_dict()
        assert data["passed"] is True
        assert set(data["checks"]) == {"Hp1", "Hp2", "Hp3", "Hp4", "scaling"}
        assert data["sigma_bar"]["kind"] == "finite"
