"""System configuration: physical parameters, validation, JSON round trip.

Every quantity is annotated with its unit in the field comment.  Energies
are ueV, times ps.  Rates enter as energies (hbar*gamma) and are converted
with :func:`qdcascade.units.rate_of` where angular rates are needed.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import InvalidField
from .units import HBAR_UEV_PS

SQRT_HALF = 1.0 / math.sqrt(2.0)


class InitialState(str, enum.Enum):
    GROUND = "ground"
    BIEXCITON = "biexciton"


@dataclass(frozen=True)
class ElectronicParams:
    """Four-level diamond system: ground, two excitons split by the
    fine-structure splitting, and the bound biexciton."""

    e_x: float = 800_000.0            # exciton mean energy (ueV)
    e_fsp: float = 2.0                # fine-structure splitting (ueV), X_H/X_V split by +-e_fsp/2
    e_bind: float = 5_000.0           # biexciton binding energy (ueV), E_XX = 2 E_X - E_Bind
    hbar_gamma_rad: float = 2.5       # radiative decay per transition channel (ueV)
    # Per-channel XX -> X_i rate override (ueV).  None means hbar_gamma_rad.
    # The total biexciton decay is twice this value (two polarization paths),
    # so a cascade rate ratio r = gamma_XX/gamma_X needs r*hbar_gamma_rad/2 here.
    hbar_gamma_rad_xx: Optional[float] = None


@dataclass(frozen=True)
class CavityParams:
    """Two degenerate single-mode resonators, one per polarization."""

    enabled: bool = True
    e_cavity: Optional[float] = None  # mode energy (ueV); None -> E_XX - E_X
    hbar_g: float = 200.0             # light-matter coupling (ueV)
    hbar_kappa: float = 3_000.0       # loss rate as energy (ueV)
    n_max: int = 1                    # photon-number truncation per mode


@dataclass(frozen=True)
class PulseParams:
    """Gaussian excitation pulse driving the electronic coherences.

    The envelope integrates to area*pi (in rad); see
    :func:`qdcascade.liouville.pulse_envelope`.
    """

    enabled: bool = False
    area: float = 1.0                 # pulse area in units of pi
    width_tau: float = 4.0            # Gaussian width (ps)
    center_t0: float = 20.0           # pulse center (ps)
    laser_energy: Optional[float] = None  # ueV; None -> two-photon resonance E_XX/2
    # Polarization amplitudes; default is diagonal-linear, the conventional
    # two-photon excitation choice.  Normalized during validation.
    pol_h: float = SQRT_HALF
    pol_v: float = SQRT_HALF


@dataclass(frozen=True)
class GridParams:
    """Piecewise-uniform time grid: dt_fine on [0, fine_window], dt_coarse after."""

    t_end: float = 1_500.0            # ps
    fine_window: float = 200.0        # ps
    dt_fine: float = 0.1              # ps
    dt_coarse: float = 0.5            # ps


@dataclass(frozen=True)
class DephasingParams:
    """Markovian pure-dephasing stand-in (labelled, non-paper).

    The polaron-frame electron-phonon model is out of scope; this channel
    only provides a hook for exploring dephasing-like degradation.
    """

    enabled: bool = False
    hbar_gamma_deph: float = 0.0      # ueV


@dataclass(frozen=True)
class SystemConfig:
    electronic: ElectronicParams = field(default_factory=ElectronicParams)
    cavity: CavityParams = field(default_factory=CavityParams)
    pulse: PulseParams = field(default_factory=PulseParams)
    grid: GridParams = field(default_factory=GridParams)
    dephasing: DephasingParams = field(default_factory=DephasingParams)
    initial_state: InitialState = InitialState.BIEXCITON


@dataclass(frozen=True)
class ValidatedConfig:
    """A SystemConfig with all derived quantities populated.

    validate() is idempotent: feeding a ValidatedConfig back (via .base)
    reproduces the same derived values.
    """

    base: SystemConfig
    e_xx: float                       # 2 E_X - E_Bind (ueV)
    e_x_h: float                      # E_X + E_FSP/2
    e_x_v: float                      # E_X - E_FSP/2
    e_cavity: float                   # resolved mode energy (ueV)
    q_factor: float                   # E_cavity / hbar_kappa
    laser_energy: float               # resolved laser energy (ueV)
    frame_reference: float            # rotating-frame zero (ueV)
    hbar_gamma_rad_xx: float          # resolved per-channel XX->X rate (ueV)
    pol_h: float
    pol_v: float

    # Convenience pass-throughs
    @property
    def electronic(self) -> ElectronicParams:
        return self.base.electronic

    @property
    def cavity(self) -> CavityParams:
        return self.base.cavity

    @property
    def pulse(self) -> PulseParams:
        return self.base.pulse

    @property
    def grid(self) -> GridParams:
        return self.base.grid

    @property
    def dephasing(self) -> DephasingParams:
        return self.base.dephasing

    @property
    def initial_state(self) -> InitialState:
        return self.base.initial_state


def _require(cond: bool, path: str, reason: str) -> None:
    if not cond:
        raise InvalidField(path, reason)


def validate(config: SystemConfig | ValidatedConfig) -> ValidatedConfig:
    """Check every invariant and populate derived quantities.

    Raises :class:`InvalidField` with a dotted field path on the first
    violated invariant.
    """
    if isinstance(config, ValidatedConfig):
        config = config.base

    el = config.electronic
    cav = config.cavity
    pu = config.pulse
    gr = config.grid
    de = config.dephasing

    _require(math.isfinite(el.e_x), "electronic.e_x", "must be finite")
    _require(el.e_fsp >= 0, "electronic.e_fsp", "must be >= 0")
    _require(el.hbar_gamma_rad > 0, "electronic.hbar_gamma_rad", "must be > 0")
    gxx = el.hbar_gamma_rad if el.hbar_gamma_rad_xx is None else el.hbar_gamma_rad_xx
    _require(gxx > 0, "electronic.hbar_gamma_rad_xx", "must be > 0")

    e_xx = 2.0 * el.e_x - el.e_bind
    e_x_h = el.e_x + el.e_fsp / 2.0
    e_x_v = el.e_x - el.e_fsp / 2.0

    _require(cav.n_max >= 1, "cavity.n_max", "photon truncation must be >= 1")
    _require(cav.hbar_g >= 0, "cavity.hbar_g", "must be >= 0")
    _require(cav.hbar_kappa > 0, "cavity.hbar_kappa", "must be > 0")
    e_cavity = e_xx - el.e_x if cav.e_cavity is None else cav.e_cavity
    _require(e_cavity > 0, "cavity.e_cavity", "must be > 0")
    q_factor = e_cavity / cav.hbar_kappa

    _require(pu.area >= 0, "pulse.area", "must be >= 0")
    if pu.enabled:
        _require(pu.width_tau > 0, "pulse.width_tau", "must be > 0 when the pulse is enabled")
    pol_norm = math.hypot(pu.pol_h, pu.pol_v)
    if pu.enabled:
        _require(pol_norm > 0, "pulse.pol_h", "polarization amplitudes must not both vanish")
        pol_h, pol_v = pu.pol_h / pol_norm, pu.pol_v / pol_norm
    else:
        pol_h, pol_v = pu.pol_h, pu.pol_v
    laser_energy = e_xx / 2.0 if pu.laser_energy is None else pu.laser_energy

    _require(gr.dt_fine > 0, "grid.dt_fine", "must be > 0")
    _require(gr.dt_coarse >= gr.dt_fine, "grid.dt_coarse", "must be >= dt_fine")
    _require(gr.fine_window > 0, "grid.fine_window", "must be > 0")
    _require(gr.t_end >= gr.fine_window, "grid.t_end", "must be >= fine_window")

    _require(de.hbar_gamma_deph >= 0, "dephasing.hbar_gamma_deph", "must be >= 0")

    # Rotating-frame zero: the cavity energy keeps H(t) slowly varying in
    # cavity runs; without a cavity the exciton energy plays that role.
    frame_reference = e_cavity if cav.enabled else el.e_x

    return ValidatedConfig(
        base=config,
        e_xx=e_xx,
        e_x_h=e_x_h,
        e_x_v=e_x_v,
        e_cavity=e_cavity,
        q_factor=q_factor,
        laser_energy=laser_energy,
        frame_reference=frame_reference,
        hbar_gamma_rad_xx=gxx,
        pol_h=pol_h,
        pol_v=pol_v,
    )


# ---------------------------------------------------------------------------
# JSON round trip.  The document mirrors SystemConfig field names exactly;
# unknown keys are an error so typos cannot silently fall back to defaults.
# ---------------------------------------------------------------------------

_SECTIONS = {
    "electronic": ElectronicParams,
    "cavity": CavityParams,
    "pulse": PulseParams,
    "grid": GridParams,
    "dephasing": DephasingParams,
}


def _build_section(cls, data: dict, path: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise InvalidField(f"{path}.{key}", "unknown key")
    kwargs = {}
    for key, value in data.items():
        fld = known[key]
        if fld.type in ("bool",) and not isinstance(value, bool):
            raise InvalidField(f"{path}.{key}", f"expected a boolean, got {value!r}")
        if not isinstance(value, (int, float, bool)) and value is not None:
            raise InvalidField(f"{path}.{key}", f"expected a number, got {value!r}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:  # pragma: no cover - defensive
        raise InvalidField(path, str(exc))


def config_from_dict(data: dict) -> SystemConfig:
    if not isinstance(data, dict):
        raise InvalidField("<root>", "configuration document must be an object")
    sections: dict[str, Any] = {}
    for key, value in data.items():
        if key == "initial_state":
            try:
                sections[key] = InitialState(value)
            except ValueError:
                raise InvalidField("initial_state", f"must be one of {[s.value for s in InitialState]}, got {value!r}")
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise InvalidField(key, "must be an object")
            sections[key] = _build_section(_SECTIONS[key], value, key)
        else:
            raise InvalidField(key, "unknown key")
    return SystemConfig(**sections)


def config_to_dict(config: SystemConfig | ValidatedConfig) -> dict:
    if isinstance(config, ValidatedConfig):
        config = config.base
    out: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        section = getattr(config, name)
        out[name] = dataclasses.asdict(section)
    out["initial_state"] = config.initial_state.value
    return out


def config_from_json(text: str) -> SystemConfig:
    return config_from_dict(json.loads(text))


def config_to_json(config: SystemConfig | ValidatedConfig, indent: int = 2) -> str:
    return json.dumps(config_to_dict(config), indent=indent, sort_keys=True)


def config_hash(config: SystemConfig | ValidatedConfig) -> str:
    """Stable identity of a configuration: sha256 over the canonical JSON
    of the normalized (validated) parameter set."""
    vc = validate(config)
    doc = config_to_dict(vc.base)
    doc["_derived"] = {
        "e_xx": vc.e_xx,
        "e_cavity": vc.e_cavity,
        "laser_energy": vc.laser_energy,
        "frame_reference": vc.frame_reference,
        "hbar_gamma_rad_xx": vc.hbar_gamma_rad_xx,
        "pol_h": vc.pol_h,
        "pol_v": vc.pol_v,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def set_by_path(config: SystemConfig, path: str, value) -> SystemConfig:
    """Return a copy of `config` with the dotted-path field replaced.

    Used by the sweep harness; the path must resolve to an existing field
    (e.g. "cavity.hbar_g" or "initial_state").
    """
    parts = path.split(".")
    if parts[0] == "initial_state":
        if len(parts) != 1:
            raise InvalidField(path, "initial_state has no sub-fields")
        return dataclasses.replace(config, initial_state=InitialState(value))
    if parts[0] not in _SECTIONS:
        raise InvalidField(path, "unknown section")
    if len(parts) != 2:
        raise InvalidField(path, "expected section.field")
    section = getattr(config, parts[0])
    if parts[1] not in {f.name for f in dataclasses.fields(section)}:
        raise InvalidField(path, "unknown field")
    new_section = dataclasses.replace(section, **{parts[1]: value})
    return dataclasses.replace(config, **{parts[0]: new_section})


HBAR = HBAR_UEV_PS
