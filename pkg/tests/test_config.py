import json

import numpy as np
import pytest

from qdcascade.config import (
    CavityParams,
    DephasingParams,
    ElectronicParams,
    GridParams,
    InitialState,
    PulseParams,
    SystemConfig,
    config_from_json,
    config_hash,
    config_to_json,
    set_by_path,
    validate,
)
from qdcascade.errors import InvalidField
from qdcascade.units import HBAR_UEV_PS, energy_of, rate_of


def test_hbar_constant():
    assert HBAR_UEV_PS == 658.2119569


def test_rate_round_trip_exact():
    rng = np.random.default_rng(7)
    for hbar_rate in rng.uniform(1e-3, 1e6, size=200):
        back = energy_of(rate_of(hbar_rate))
        assert abs(back - hbar_rate) <= 1e-14 * hbar_rate


def test_rate_of_examples():
    # hbar*gamma = 2.5 ueV corresponds to a ~263 ps lifetime
    gamma = rate_of(2.5)
    assert 1.0 / gamma == pytest.approx(263.28, abs=0.01)
    assert rate_of(0.0) == 0.0
    assert rate_of(3000.0) == pytest.approx(4.558, abs=1e-3)
    with pytest.raises(ValueError):
        rate_of(-1.0)


def test_derived_quantities():
    vc = validate(SystemConfig(electronic=ElectronicParams(e_x=0.8e6, e_bind=5000.0)))
    assert vc.e_xx == pytest.approx(1.595e6, rel=1e-14)
    assert vc.e_x_h - vc.e_x_v == pytest.approx(vc.electronic.e_fsp, rel=1e-12)
    assert vc.e_xx + vc.electronic.e_bind == pytest.approx(2 * vc.electronic.e_x, rel=1e-12)


def test_q_factor_from_explicit_cavity_energy():
    vc = validate(SystemConfig(cavity=CavityParams(e_cavity=0.8e6, hbar_kappa=3000.0)))
    assert vc.q_factor == pytest.approx(266.6667, abs=0.01)


def test_q_factor_at_xx_transition_matches_quoted_265():
    # default E_cavity = E_XX - E_X = 795 meV at E_X = 0.8 eV, E_Bind = 5 meV
    vc = validate(SystemConfig())
    assert vc.e_cavity == pytest.approx(795000.0)
    assert vc.q_factor == pytest.approx(265.0, abs=1e-9)


@pytest.mark.parametrize("path,value", [
    ("cavity.hbar_kappa", -1.0),
    ("cavity.hbar_kappa", 0.0),
    ("cavity.n_max", 0),
    ("electronic.hbar_gamma_rad", 0.0),
    ("electronic.e_fsp", -1.0),
    ("grid.dt_fine", 0.0),
    ("grid.fine_window", -5.0),
    ("dephasing.hbar_gamma_deph", -0.1),
])
def test_invalid_fields_rejected(path, value):
    cfg = set_by_path(SystemConfig(), path, value)
    with pytest.raises(InvalidField) as err:
        validate(cfg)
    assert err.value.path == path


def test_t_end_shorter_than_fine_window_rejected():
    cfg = SystemConfig(grid=GridParams(t_end=100.0, fine_window=200.0))
    with pytest.raises(InvalidField) as err:
        validate(cfg)
    assert err.value.path == "grid.t_end"


def test_validate_idempotent():
    cfg = SystemConfig(pulse=PulseParams(enabled=True, pol_h=2.0, pol_v=1.0))
    v1 = validate(cfg)
    v2 = validate(v1)
    assert v1 == v2
    assert v1.pol_h ** 2 + v1.pol_v ** 2 == pytest.approx(1.0, rel=1e-12)


def test_default_laser_energy_is_two_photon_resonance():
    vc = validate(SystemConfig(pulse=PulseParams(enabled=True)))
    assert vc.laser_energy == pytest.approx(vc.e_xx / 2.0)
    assert vc.laser_energy == pytest.approx(vc.electronic.e_x - vc.electronic.e_bind / 2.0)


def test_json_round_trip():
    cfg = SystemConfig(
        electronic=ElectronicParams(e_fsp=4.0),
        cavity=CavityParams(hbar_g=150.0),
        pulse=PulseParams(enabled=True, area=2.0),
        dephasing=DephasingParams(enabled=True, hbar_gamma_deph=1.0),
        initial_state=InitialState.GROUND,
    )
    back = config_from_json(config_to_json(cfg))
    assert back == cfg
    assert config_hash(back) == config_hash(cfg)


def test_unknown_keys_are_errors():
    doc = json.loads(config_to_json(SystemConfig()))
    doc["cavity"]["quality"] = 100.0
    with pytest.raises(InvalidField) as err:
        config_from_json(json.dumps(doc))
    assert "cavity.quality" in str(err.value)
    with pytest.raises(InvalidField):
        config_from_json(json.dumps({"unknown_section": {}}))


def test_config_hash_distinguishes_physics():
    h0 = config_hash(SystemConfig())
    h1 = config_hash(set_by_path(SystemConfig(), "cavity.hbar_g", 201.0))
    assert h0 != h1
    assert config_hash(SystemConfig()) == h0


def test_set_by_path_errors():
    with pytest.raises(InvalidField):
        set_by_path(SystemConfig(), "cavity.nope", 1.0)
    with pytest.raises(InvalidField):
        set_by_path(SystemConfig(), "nope.field", 1.0)
