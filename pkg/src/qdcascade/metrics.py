"""Photon figures of merit from two-time correlations.

Channels: the biexciton-exciton photon is collected through the composite
operator a_XX = |X_i><XX| + b_i, the exciton-ground photon through
a_X = |G><X_i|.  Per polarization-resolved channel the engine accumulates

    S1  = int int |G1(t,tau)|^2
    Sg2 = int int G2(t,tau)
    Snn = int int <n>(t) <n>(t+tau)
    Saa = int int |<a>(t+tau)|^2 |<a>(t)|^2

over the triangle [0,T] x [0,T-t], from which

    V = 2 S1 / (int G1(t,0) dt)^2
    I = 1 - (Snn + Sg2 - S1) / (2 Snn - Saa).

The two-photon polarization matrix is built from the sixteen
double-integrated fourth-order correlators in cascade order (trigger
photon from the XX channel at t, exciton photon at t+tau).  With a finite
fine-structure splitting the cross-polarized coherences pick up, next to
the exciton precession during tau, the carrier mismatch of the two
trigger-photon channels, exp(i (E_X,k - E_X,i) t / hbar); dropping that
factor (fss_phase=False) reproduces the fully carrier-referenced limit.
Entanglement is quantified by the Wootters concurrence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import SystemConfig, ValidatedConfig, config_hash, validate
from .errors import OutOfRange, TailWarning, ZeroEmission
from .grid import TwoTimeGrid
from .hilbert import HilbertSpace, build_space, emission_channel
from .liouville import Liouvillian, Trajectory, build_liouvillian, initial_vec, propagate
from .twotime import CorrelationEngine, CorrelationMap, ReductionSpec, ScanTask
from .units import HBAR_UEV_PS

BOUND_SLACK = 1e-3
ZERO_EMISSION_EPS = 1e-12
TAIL_BUDGET = 1e-3

_MODES = ("H", "V")


def analytic_visibility(ratio: float) -> float:
    """Cascade visibility estimate [1 + gamma_X/gamma_XX]^-1 = r/(1+r)."""
    if ratio <= 0:
        raise ValueError("decay-rate ratio must be > 0")
    return ratio / (1.0 + ratio)


def _check_bounded(name: str, value: float) -> float:
    if not (-BOUND_SLACK <= value <= 1.0 + BOUND_SLACK):
        raise OutOfRange(f"{name} = {value:.6f} outside [0, 1] beyond slack {BOUND_SLACK}")
    return float(value)


def _visibility_from_integrals(s1: float, d1: float) -> float:
    if d1 * d1 < ZERO_EMISSION_EPS:
        raise ZeroEmission("G1(t,0) integral vanished")
    return _check_bounded("visibility", 2.0 * s1 / (d1 * d1))


def _indist_from_integrals(snn: float, sg2: float, sg1: float, saa: float) -> float:
    den = 2.0 * snn - saa
    if abs(den) < ZERO_EMISSION_EPS:
        raise ZeroEmission("indistinguishability denominator vanished")
    return _check_bounded("indistinguishability", 1.0 - (snn + sg2 - sg1) / den)


def visibility(g1_map: CorrelationMap, grid: Optional[TwoTimeGrid] = None) -> float:
    """V = 2 int int |G1|^2 / (int G1(t,0) dt)^2 on the triangular grid."""
    grid = g1_map.grid if grid is None else grid
    vals = np.nan_to_num(g1_map.values)
    ep = np.nan_to_num(g1_map.endpoint)
    s1 = grid.double_integral(vals.real ** 2 + vals.imag ** 2,
                              ep.real ** 2 + ep.imag ** 2)
    d1 = float(np.real(grid.t_weights @ vals[:, 0]))
    return _visibility_from_integrals(float(s1), d1)


@dataclass
class ChannelCorrelations:
    """Everything the HOM formula needs for one channel, on one grid."""

    grid: TwoTimeGrid
    n_t: np.ndarray                      # <adag a>(t)
    a_t: np.ndarray                      # <a>(t)
    g1: CorrelationMap                   # <adag(t+tau) a(t)>
    g2: CorrelationMap                   # <adag(t) adag a(t+tau)... intensity-ordered
    n_map: CorrelationMap                # <adag a>(t+tau)
    a_map: CorrelationMap                # <a>(t+tau)


def indistinguishability(data: ChannelCorrelations) -> float:
    """HOM indistinguishability I(T) = 1 - p_c evaluated from full maps."""
    grid = data.grid
    w = grid.t_weights

    def dint(values, endpoint):
        return grid.double_integral(np.nan_to_num(values), np.nan_to_num(endpoint))

    g1v, g1e = data.g1.values, data.g1.endpoint
    sg1 = float(dint(g1v.real ** 2 + g1v.imag ** 2, g1e.real ** 2 + g1e.imag ** 2))
    sg2 = float(np.real(dint(data.g2.values, data.g2.endpoint)))
    snn = float(np.real(dint(data.n_map.values * data.n_t[:, None],
                             data.n_map.endpoint * data.n_t)))
    am, ae = data.a_map.values, data.a_map.endpoint
    scale = (data.a_t.real ** 2 + data.a_t.imag ** 2)
    saa = float(dint((am.real ** 2 + am.imag ** 2) * scale[:, None],
                     (ae.real ** 2 + ae.imag ** 2) * scale))
    return _indist_from_integrals(snn, sg2, sg1, saa)


# ---------------------------------------------------------------------------
# Two-photon density matrix and concurrence
# ---------------------------------------------------------------------------

_BASIS = ("HH", "HV", "VH", "VV")


@dataclass(frozen=True)
class TwoPhotonDensityMatrix:
    """4x4 matrix in the {HH, HV, VH, VV} polarization-pair basis."""

    matrix: np.ndarray
    raw_trace: float

    def __post_init__(self):
        m = self.matrix
        assert m.shape == (4, 4)


def two_photon_dm(g2bar: np.ndarray) -> TwoPhotonDensityMatrix:
    """Normalize and Hermitize the matrix of double-integrated correlators.

    g2bar[(ij),(kl)] are the sixteen time-integrated fourth-order
    correlators in the {HH, HV, VH, VV} basis.
    """
    g2bar = np.asarray(g2bar, dtype=complex)
    if g2bar.shape != (4, 4):
        raise ValueError("expected a 4x4 correlator matrix")
    trace = float(np.real(np.trace(g2bar)))
    if trace < ZERO_EMISSION_EPS:
        raise ZeroEmission("two-photon correlator trace vanished")
    rho = (g2bar + g2bar.conj().T) / (2.0 * trace)
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -1e-8:
        raise OutOfRange(f"two-photon matrix eigenvalue {evals.min():.3e} < -1e-8")
    return TwoPhotonDensityMatrix(matrix=rho, raw_trace=trace)


_SY_SY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])).real


def concurrence(rho) -> float:
    """Wootters concurrence C = max(0, l1 - l2 - l3 - l4) of a two-qubit state."""
    if isinstance(rho, TwoPhotonDensityMatrix):
        rho = rho.matrix
    rho = np.asarray(rho, dtype=complex)
    m = rho @ _SY_SY @ rho.conj() @ _SY_SY
    evals = np.linalg.eigvals(m).real
    evals[evals < 0] = 0.0
    lams = np.sort(np.sqrt(evals))[::-1]
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsOptions:
    channel_mode: str = "H"              # polarization used for I and V
    compute_channels: tuple[str, ...] = ("X", "XX")
    two_photon: bool = True
    fss_phase: bool = True               # trigger-channel carrier mismatch in rho2ph
    swap_arms: bool = False              # X photon as trigger instead of XX
    pulse_in_tau: bool = True
    x_channel_includes_cavity: bool = False
    tail_budget: float = TAIL_BUDGET


@dataclass(frozen=True)
class PhotonMetrics:
    i_x: float
    i_xx: float
    v_x: float
    v_xx: float
    concurrence: float
    g2bar: dict
    fom: float
    warnings: tuple[str, ...]
    config_hash: str
    trace_error_max: float
    min_eigenvalue: float
    two_photon: Optional[TwoPhotonDensityMatrix] = None

    CSV_COLUMNS = ("schema_version", "config_hash", "i_x", "i_xx", "v_x", "v_xx",
                   "concurrence", "g2bar_x", "g2bar_xx", "fom", "tail_warning",
                   "trace_error_max", "min_eigenvalue")
    SCHEMA_VERSION = "1"

    def csv_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))
        return [self.SCHEMA_VERSION, self.config_hash, fmt(self.i_x), fmt(self.i_xx),
                fmt(self.v_x), fmt(self.v_xx), fmt(self.concurrence),
                fmt(self.g2bar.get("X")), fmt(self.g2bar.get("XX")), fmt(self.fom),
                "1" if any("tail" in w for w in self.warnings) else "0",
                fmt(self.trace_error_max), fmt(self.min_eigenvalue)]


def _channel_shift(vc: ValidatedConfig, kind: str) -> float:
    """Co-rotating reference for an excitation-lowering channel.

    The stored G1 of a channel with transition energy E_t rotates at
    (E_t - frame_reference)/hbar; shifting by that difference makes the
    scanned sector stationary so the coarse grid resolves it.
    """
    if kind == "X":
        return vc.electronic.e_x - vc.frame_reference
    if kind == "XX":
        return (vc.e_xx - vc.electronic.e_x) - vc.frame_reference
    raise ValueError(f"unknown channel kind {kind!r}")


def _x_level_energy(vc: ValidatedConfig, mode: str) -> float:
    return vc.e_x_h if mode == "H" else vc.e_x_v


@dataclass
class _Pipeline:
    """Shared state for one metrics evaluation (pure; no caching across configs)."""

    vc: ValidatedConfig
    options: MetricsOptions
    space: HilbertSpace = field(init=False)
    lv: Liouvillian = field(init=False)
    grid: TwoTimeGrid = field(init=False)
    traj: Trajectory = field(init=False)
    engine: CorrelationEngine = field(init=False)

    def __post_init__(self):
        self.space = build_space(self.vc)
        self.lv = build_liouvillian(self.vc, self.space)
        self.grid = TwoTimeGrid.from_params(self.vc.grid)
        rho0 = initial_vec(self.vc, self.space)
        self.traj = propagate(self.lv, rho0, self.grid)
        self.engine = CorrelationEngine(self.lv, self.traj, self.grid,
                                        pulse_in_tau=self.options.pulse_in_tau)

    def channel_op(self, kind: str, mode: str) -> np.ndarray:
        return emission_channel(self.space, kind, mode,
                                x_includes_cavity=self.options.x_channel_includes_cavity)

    def channel_metrics(self, kind: str) -> dict:
        """V, I and the integrated G2 for one emission channel."""
        mode = self.options.channel_mode
        a = self.channel_op(kind, mode)
        adag = a.conj().T
        n_op = adag @ a
        n_t = np.real(self.traj.expectation(n_op))
        a_t = self.traj.expectation(a)
        w = self.grid.t_weights
        shift = _channel_shift(self.vc, kind)

        # s = -1 sector maps (carrier-removed): G1 and <a>(t+tau)
        res1 = self.engine.scan(
            sources={"arho": self.engine.sandwich(a, None), "rho": self.engine.rho_stack},
            observables={"adag": adag, "a": a},
            tasks=[
                ScanTask("arho", "adag", (ReductionSpec("s1", "abs2", w.astype(complex)),)),
                ScanTask("rho", "a", (ReductionSpec(
                    "saa", "abs2", (w * (a_t.real ** 2 + a_t.imag ** 2)).astype(complex)),)),
            ],
            shift=shift,
        )
        # s = 0 sector: G2 and <n>(t+tau)
        res0 = self.engine.scan(
            sources={"arhoad": self.engine.sandwich(a, adag), "rho": self.engine.rho_stack},
            observables={"n": n_op},
            tasks=[
                ScanTask("arhoad", "n", (ReductionSpec("sg2", "complex", w.astype(complex)),)),
                ScanTask("rho", "n", (ReductionSpec("snn", "complex", (w * n_t).astype(complex)),)),
            ],
            shift=0.0,
        )
        s1 = float(res1[("arho", "adag")]["reductions"]["s1"])
        saa = float(res1[("rho", "a")]["reductions"]["saa"])
        sg2 = float(np.real(res0[("arhoad", "n")]["reductions"]["sg2"]))
        snn = float(np.real(res0[("rho", "n")]["reductions"]["snn"]))
        d1 = float(w @ n_t)
        return {
            "V": _visibility_from_integrals(s1, d1),
            "I": _indist_from_integrals(snn, sg2, s1, saa),
            "g2bar": sg2,
            "brightness": d1,
        }

    def two_photon_matrix(self) -> TwoPhotonDensityMatrix:
        """Cascade-ordered polarization-resolved correlator matrix."""
        first_kind, second_kind = ("X", "XX") if self.options.swap_arms else ("XX", "X")
        a1 = {m: self.channel_op(first_kind, m) for m in _MODES}
        a2 = {m: self.channel_op(second_kind, m) for m in _MODES}

        def first_arm_energy(mode: str) -> float:
            ex = _x_level_energy(self.vc, mode)
            return ex if first_kind == "X" else self.vc.e_xx - ex

        sources = {f"s_{i}{k}": self.engine.sandwich(a1[k], a1[i].conj().T)
                   for i in _MODES for k in _MODES}
        observables = {f"o_{j}{l}": a2[j].conj().T @ a2[l]
                       for j in _MODES for l in _MODES}
        w = self.grid.t_weights
        tasks = []
        for i in _MODES:
            for k in _MODES:
                if self.options.fss_phase:
                    phi = (first_arm_energy(i) - first_arm_energy(k)) / HBAR_UEV_PS
                    rw = w * np.exp(1j * phi * self.grid.t)
                else:
                    rw = w.astype(complex)
                for j in _MODES:
                    for l in _MODES:
                        tasks.append(ScanTask(f"s_{i}{k}", f"o_{j}{l}",
                                              (ReductionSpec(f"p_{i}{j}{k}{l}", "complex", rw),)))
        res = self.engine.scan(sources, observables, tasks, shift=0.0)

        gbar = np.zeros((4, 4), dtype=complex)
        idx = {"H": 0, "V": 1}
        for i in _MODES:
            for j in _MODES:
                for k in _MODES:
                    for l in _MODES:
                        row = 2 * idx[i] + idx[j]
                        col = 2 * idx[k] + idx[l]
                        gbar[row, col] = res[(f"s_{i}{k}", f"o_{j}{l}")]["reductions"][f"p_{i}{j}{k}{l}"]
        return two_photon_dm(gbar)


def metrics_bundle(config: SystemConfig | ValidatedConfig,
                   options: MetricsOptions = MetricsOptions()) -> PhotonMetrics:
    """Propagate, correlate and reduce one configuration to its metrics.

    Deterministic for a fixed config: no seeds, fixed reduction order.
    Independent configs may be evaluated concurrently.
    """
    vc = validate(config)
    pipe = _Pipeline(vc, options)
    warn_list: list[str] = []

    tail = pipe.traj.excited_population(-1)
    if tail > options.tail_budget:
        msg = (f"tail: excited population {tail:.2e} at t_end exceeds the "
               f"truncation budget {options.tail_budget:.0e}")
        warnings.warn(msg, TailWarning)
        warn_list.append(msg)

    nan = float("nan")
    values = {"X": {"V": nan, "I": nan, "g2bar": nan},
              "XX": {"V": nan, "I": nan, "g2bar": nan}}
    for kind in pipe.options.compute_channels:
        values[kind] = pipe.channel_metrics(kind)

    conc = nan
    two_ph = None
    if options.two_photon:
        two_ph = pipe.two_photon_matrix()
        conc = _check_bounded("concurrence", concurrence(two_ph))

    i_x, i_xx = values["X"]["I"], values["XX"]["I"]
    fom = i_x * i_xx * conc

    return PhotonMetrics(
        i_x=i_x,
        i_xx=i_xx,
        v_x=values["X"]["V"],
        v_xx=values["XX"]["V"],
        concurrence=conc,
        g2bar={"X": values["X"]["g2bar"], "XX": values["XX"]["g2bar"]},
        fom=fom,
        warnings=tuple(warn_list),
        config_hash=config_hash(vc),
        trace_error_max=float(np.max(pipe.traj.trace_error)),
        min_eigenvalue=float(np.min(pipe.traj.min_eigenvalue)),
        two_photon=two_ph,
    )
