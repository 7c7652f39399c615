import pytest

from phasefield_engine.cohesive_law import LawConfig, g_value
from phasefield_engine.exceptions import DomainError
from phasefield_engine.lattice_oracle import lattice_g


def test_trivial_jumps(cfi):
    assert lattice_g(cfi, 0.0) == 0.0
    with pytest.raises(DomainError):
        lattice_g(cfi, -1.0)


def test_undamaged_path_bounds_the_lattice_value(cfi):
    # the straight path along β = 1 is a lattice path of cost s
    assert lattice_g(cfi, 0.3, n_gamma=32, n_beta=32, n_steps=32) <= 0.3 + 1e-12


@pytest.mark.parametrize("s", [0.5, 1.5])
def test_lattice_agrees_with_profile_optimizer(cfi, s):
    reference = g_value(cfi, s, LawConfig(n_nodes=201, max_iter=300))
    assert lattice_g(cfi, s) == pytest.approx(reference, rel=0.05)
