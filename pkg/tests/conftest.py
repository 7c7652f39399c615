import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from phasefield_engine.model_core import (Domain, Family, ModelSpec, ScalarFnSpec, ScalingRule,  # noqa: E402
                                          cfi_model, wu_model)


@pytest.fixture
def cfi():
    """f̂ = Q = 𝔡 = t², φ = 1∧t: σ̄ = 1, 2Ψ(1) = 1."""
    return cfi_model(1.0, 1.0, "min-with-one")


@pytest.fixture
def cfi_rational():
    return cfi_model(1.0, 1.0, "rational")


@pytest.fixture
def cfi_q2():
    return cfi_model(1.0, 2.0, "min-with-one")


@pytest.fixture
def wu():
    return wu_model(2.0, 1.0)


@pytest.fixture
def sigma_zero_model():
    """𝔡 = t⁴, Q = t²."""
    return ModelSpec(
        fhat=ScalarFnSpec(Family.QUADRATIC),
        qfn=ScalarFnSpec(Family.QUADRATIC),
        dpot=ScalarFnSpec(Family.POWER, (4.0,)),
        phi=ScalarFnSpec(Family.MIN_WITH_ONE, domain=Domain.HALFLINE),
        name="sigma-zero",
    )


@pytest.fixture
def brittle_cfi():
    return cfi_model(1.0, 1.0, "min-with-one", kappa_rule=ScalingRule(1.0, 3.0))


@pytest.fixture
def write_scenario(tmp_path):
    def _write(text: str, name: str = "scenario.toml") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
