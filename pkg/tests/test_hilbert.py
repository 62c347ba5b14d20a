import numpy as np
import pytest

from qdcascade.config import CavityParams, SystemConfig, validate
from qdcascade.hilbert import (
    Level,
    annihilator,
    build_space,
    emission_channel,
    projector,
)


def space_with(n_max=1):
    return build_space(validate(SystemConfig(cavity=CavityParams(n_max=n_max))))


def test_dimensions():
    assert space_with(1).dim == 16
    assert space_with(2).dim == 36
    assert build_space(validate(SystemConfig(cavity=CavityParams(enabled=False)))).dim == 4


def test_index_map_is_bijection():
    for n_max in (1, 2):
        space = space_with(n_max)
        idx = [space.index(l, nh, nv) for (l, nh, nv) in space.basis_labels()]
        assert sorted(idx) == list(range(space.dim))


def test_basis_ordering_electronic_major():
    space = space_with(1)
    # index = (level*(n_max+1) + n_h)*(n_max+1) + n_v
    assert space.index(Level.G, 0, 0) == 0
    assert space.index(Level.G, 0, 1) == 1
    assert space.index(Level.G, 1, 0) == 2
    assert space.index(Level.X_H, 0, 0) == 4
    assert space.index(Level.XX, 1, 1) == 15


def test_projector_algebra():
    space = space_with(1)
    pgg = projector(space, Level.G, Level.G)
    ground = space.basis_state(Level.G, 0, 0)
    assert np.allclose(pgg @ ground, ground)
    left = projector(space, Level.X_H, Level.XX) @ projector(space, Level.XX, Level.X_H)
    assert np.allclose(left, projector(space, Level.X_H, Level.X_H), atol=1e-15)
    assert abs(np.trace(projector(space, Level.G, Level.X_H))) == 0.0
    # transition projectors carry one entry per photon configuration
    assert np.count_nonzero(projector(space, Level.G, Level.X_H)) == 4


def test_annihilator_action_and_commutators():
    space = space_with(1)
    b = annihilator(space, "H")
    one = space.basis_state(Level.G, 1, 0)
    zero = space.basis_state(Level.G, 0, 0)
    assert np.allclose(b @ one, zero)
    bv = annihilator(space, "V")
    assert np.max(np.abs(b @ bv - bv @ b)) == 0.0
    # canonical commutator below the truncation edge
    space2 = space_with(2)
    b2 = annihilator(space2, "H")
    comm = b2 @ b2.conj().T - b2.conj().T @ b2
    for n in (0, 1):
        v = space2.basis_state(Level.G, n, 0)
        assert np.allclose(comm @ v, v, atol=1e-14)
    num = b2.conj().T @ b2
    assert np.allclose(num, np.diag(np.diag(num)))
    assert set(np.round(np.diag(num).real, 12)) == {0.0, 1.0, 2.0}


def test_emission_channels():
    space = space_with(1)
    a_xx = emission_channel(space, "XX", "H")
    a_x = emission_channel(space, "X", "H")
    xx00 = space.basis_state(Level.XX, 0, 0)
    xh00 = space.basis_state(Level.X_H, 0, 0)
    g10 = space.basis_state(Level.G, 1, 0)
    g00 = space.basis_state(Level.G, 0, 0)
    assert np.allclose(a_xx @ xx00, xh00)
    assert np.allclose(a_xx @ g10, g00)
    assert np.max(np.abs(a_x @ xx00)) == 0.0
    # the X channel carries no cavity term unless explicitly requested
    assert np.max(np.abs(a_x @ g10)) == 0.0
    a_x_sym = emission_channel(space, "X", "H", x_includes_cavity=True)
    assert np.allclose(a_x_sym @ g10, g00)


def test_no_cavity_channels_are_bare_projectors():
    space = build_space(validate(SystemConfig(cavity=CavityParams(enabled=False))))
    a_xx = emission_channel(space, "XX", "V")
    assert np.allclose(a_xx, space.projector(Level.X_V, Level.XX))
    with pytest.raises(ValueError):
        annihilator(space, "H")


def test_operator_products_match_index_rules():
    """Brute-force oracle: matrix products against direct index bookkeeping."""
    space = space_with(2)
    rng = np.random.default_rng(3)
    b_h = annihilator(space, "H")
    p = space.n_photon_states
    for _ in range(20):
        l = Level(rng.integers(0, 4))
        nh = int(rng.integers(0, p))
        nv = int(rng.integers(0, p))
        v = space.basis_state(l, nh, nv)
        # b_H lowers n_h with amplitude sqrt(n_h)
        got = b_h @ v
        expect = np.zeros_like(v)
        if nh > 0:
            expect[space.index(l, nh - 1, nv)] = np.sqrt(nh)
        assert np.allclose(got, expect, atol=1e-12)
        # |X_H><XX| maps XX -> X_H leaving photons alone
        op = projector(space, Level.X_H, Level.XX)
        got = op @ v
        expect = np.zeros_like(v)
        if l == Level.XX:
            expect[space.index(Level.X_H, nh, nv)] = 1.0
        assert np.allclose(got, expect, atol=1e-12)
