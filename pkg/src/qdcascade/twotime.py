"""Quantum-regression-theorem engine for G1/G2 maps on the triangular grid.

For every row t the modified state sigma(0) = C rho(t) A is propagated over
tau with the same Liouvillian and traced against an observable B, giving
<A(t) B(t+tau) C(t)>.  Two execution paths produce identical numbers:

* row-wise: sigma marched per row with the cell propagators (reference
  path; also the only correct path while the pulse overlaps the tau axis,
  where the generator depends on absolute time t+tau);
* stationary: when the generator is tau-independent the observable is
  evolved once in the adjoint picture over the shared tau ladder and the
  whole map collapses to one matrix product W @ P against the stacked
  sources.  Both paths apply the identical RK4 cell matrices, so they
  agree to float associativity.

Channels whose sigma lives in an excitation-changing sector rotate at
meV-scale carrier frequencies; each scan therefore runs in a co-rotating
frame (`shift`) chosen per channel, and the stored maps are the
carrier-removed correlators.  All shipped metrics consume |G1|^2, G2 (a
non-rotating sector) or magnitudes, so the removed carrier never enters a
result; the binary dump records the shift.

Reductions over the triangle are computed in k-chunks with a fixed
summation order, independent of any parallel scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridMismatch
from .grid import TwoTimeGrid, double_integral  # re-exported
from .liouville import Liouvillian, Trajectory
from .units import HBAR_UEV_PS

__all__ = ["TwoTimeGrid", "double_integral", "CorrelationMap", "CorrelationEngine",
           "ReductionSpec", "ScanTask"]

_CHUNK_TARGET = 4_000_000  # complex entries per streamed block (~64 MB)


@dataclass(frozen=True)
class ReductionSpec:
    """One accumulated integral over the triangular map.

    kind "complex": sum_i w_i sum_k w(i,k) M[i,k]
    kind "abs2":    sum_i w_i sum_k w(i,k) |M[i,k]|^2

    row_weight w_i already contains the t-axis quadrature weight and any
    per-row scale or phase factor.
    """

    name: str
    kind: str
    row_weight: np.ndarray


@dataclass(frozen=True)
class ScanTask:
    source: str
    observable: str
    reductions: tuple[ReductionSpec, ...] = ()
    want_map: bool = False


@dataclass
class CorrelationMap:
    """Full two-time map on the grid; values beyond each row's triangular
    extent are NaN.  `shift` is the co-rotating reference removed from the
    stored values."""

    grid: TwoTimeGrid
    values: np.ndarray            # (N_t, N_tau) complex
    endpoint: np.ndarray          # (N_t,) complex, exact row-end samples
    #: stored = exp(-i s shift tau / hbar) * absolute-phase value, where s is
    #: the excitation change of the traced observable; multiply by
    #: exp(+i s shift tau / hbar) to restore absolute phases.
    shift: float = 0.0
    label: str = ""

    def masked(self) -> np.ndarray:
        return self.values

    def row(self, i: int) -> np.ndarray:
        k = int(self.grid.row_len[i])
        vals = self.values[i, :k]
        if self.grid.endpoint_weight[i] > 0:
            vals = np.append(vals, self.endpoint[i])
        return vals


class _Accumulator:
    def __init__(self, spec: ReductionSpec):
        self.spec = spec
        self.total = 0.0 + 0.0j

    def add_block(self, tw: np.ndarray, block: np.ndarray, cols: np.ndarray) -> None:
        if self.spec.kind == "abs2":
            data = block.real ** 2 + block.imag ** 2
        else:
            data = block
        inner = np.einsum("ki,ki->i", tw, data)
        self.total += np.dot(self.spec.row_weight[cols], inner)

    def add_endpoint(self, values: np.ndarray, cols: np.ndarray, weights: np.ndarray) -> None:
        if self.spec.kind == "abs2":
            data = values.real ** 2 + values.imag ** 2
        else:
            data = values
        self.total += np.dot(self.spec.row_weight[cols] * weights, data)

    def result(self):
        if self.spec.kind == "abs2":
            return self.total.real
        return self.total


class CorrelationEngine:
    """Evaluates two-time correlators of a finished trajectory."""

    def __init__(self, liouvillian: Liouvillian, trajectory: Trajectory,
                 grid: TwoTimeGrid, pulse_in_tau: bool = True):
        if len(trajectory.t) != grid.n_t or not np.allclose(trajectory.t, grid.t, atol=1e-9):
            raise GridMismatch("trajectory samples differ from the requested grid")
        self.lv = liouvillian
        self.traj = trajectory
        self.grid = grid
        self.pulse_in_tau = pulse_in_tau
        self.dim = liouvillian.dim
        # Stacked vec(rho(t)) columns, reused by every scan.
        self.rho_stack = np.ascontiguousarray(trajectory.vecs.T)

    # -- source construction ------------------------------------------------

    def sandwich(self, left: Optional[np.ndarray], right: Optional[np.ndarray]) -> np.ndarray:
        """Columns vec(left @ rho(t) @ right) for every grid time."""
        d = self.dim
        rhos = self.traj.vecs.reshape(-1, d, d)
        out = rhos
        if left is not None:
            out = np.einsum("ab,nbc->nac", left, out)
        if right is not None:
            out = np.einsum("nab,bc->nac", out, right)
        return np.ascontiguousarray(out.reshape(-1, d * d).T)

    # -- row split ----------------------------------------------------------

    def _pulsed_rows(self) -> np.ndarray:
        if not self.pulse_in_tau:
            return np.zeros(0, dtype=int)
        start, end = self.lv.pulse_window()
        if end <= start:
            return np.zeros(0, dtype=int)
        return np.nonzero(self.grid.t < end)[0]

    # -- main entry ----------------------------------------------------------

    def scan(self, sources: dict[str, np.ndarray], observables: dict[str, np.ndarray],
             tasks: list[ScanTask], shift: float = 0.0, method: str = "auto") -> dict:
        """Run a batch of correlation tasks sharing one frame shift.

        Returns {(source, observable): {"reductions": {...}, "map": CorrelationMap?}}
        """
        grid = self.grid
        if method not in ("auto", "fast", "rowwise"):
            raise ValueError(f"unknown method {method!r}")
        pulsed = self._pulsed_rows()
        if method == "rowwise":
            pulsed = np.arange(grid.n_t)
        elif method == "fast":
            if len(pulsed):
                raise ValueError("fast path invalid while the pulse overlaps the tau axis")
        stationary = np.setdiff1d(np.arange(grid.n_t), pulsed)

        results = {}
        accs = {}
        maps = {}
        for task in tasks:
            key = (task.source, task.observable)
            accs[key] = [_Accumulator(r) for r in task.reductions]
            if task.want_map:
                maps[key] = CorrelationMap(
                    grid=grid,
                    values=np.full((grid.n_t, grid.n_tau), np.nan, dtype=complex),
                    endpoint=np.full(grid.n_t, np.nan, dtype=complex),
                    shift=shift,
                    label=f"{task.source}|{task.observable}",
                )

        if len(stationary):
            self._scan_stationary(sources, observables, tasks, shift, stationary, accs, maps)
        if len(pulsed):
            self._scan_rowwise(sources, observables, tasks, shift, pulsed, accs, maps)

        for task in tasks:
            key = (task.source, task.observable)
            entry = {"reductions": {a.spec.name: a.result() for a in accs[key]}}
            if task.want_map:
                m = maps[key]
                k_idx = np.arange(grid.n_tau)
                m.values[k_idx[None, :] >= grid.row_len[:, None]] = np.nan
                entry["map"] = m
            results[key] = entry
        return results

    # -- weighting ------------------------------------------------------------

    def _tau_weight_block(self, k0: int, k1: int, cols: np.ndarray) -> np.ndarray:
        grid = self.grid
        k = np.arange(k0, k1)
        rl = grid.row_len[cols]
        interior = k[:, None] <= (rl - 2)[None, :]
        tw = grid.ladder_weights[k0:k1, None] * interior
        bmask = k[:, None] == (rl - 1)[None, :]
        if bmask.any():
            tw = tw + bmask * grid.boundary_weight[cols][None, :]
        return tw

    # -- stationary (Heisenberg) path -----------------------------------------

    def _adjoint_ladder(self, obs: np.ndarray, shift: float) -> np.ndarray:
        """Observable evolved over the tau ladder; W[k] gives Tr[O sigma(tau_k)]
        as W[k] . vec(sigma0)."""
        grid = self.grid
        props = self.lv.propagators(shift)
        d2 = self.dim ** 2
        w = obs.T.reshape(-1).astype(complex)
        out = np.empty((grid.n_tau, d2), dtype=complex)
        out[0] = w
        cells = np.diff(grid.ladder)
        transposed: dict[float, np.ndarray] = {}
        for k, h in enumerate(cells):
            key = round(float(h), 12)
            rt = transposed.get(key)
            if rt is None:
                rt = np.ascontiguousarray(props.propagator(h).T)
                transposed[key] = rt
            w = rt @ w
            out[k + 1] = w
        return out

    def _scan_stationary(self, sources, observables, tasks, shift, cols, accs, maps) -> None:
        grid = self.grid
        props = self.lv.propagators(shift)
        by_obs: dict[str, list[ScanTask]] = {}
        for task in tasks:
            by_obs.setdefault(task.observable, []).append(task)

        ep_groups = {delta: np.intersect1d(rows, cols)
                     for delta, rows in grid.endpoint_groups().items()}
        chunk = max(64, _CHUNK_TARGET // max(1, len(cols)))

        for okey, otasks in by_obs.items():
            w_ladder = self._adjoint_ladder(observables[okey], shift)
            for task in otasks:
                key = (task.source, task.observable)
                src = sources[task.source][:, cols]
                for k0 in range(0, grid.n_tau, chunk):
                    k1 = min(k0 + chunk, grid.n_tau)
                    block = w_ladder[k0:k1] @ src
                    tw = self._tau_weight_block(k0, k1, cols)
                    for acc in accs[key]:
                        acc.add_block(tw, block, cols)
                    if task.want_map:
                        maps[key].values[cols, k0:k1] = block.T
                # exact row endpoints, grouped by step size
                for delta, rows in ep_groups.items():
                    if len(rows) == 0:
                        continue
                    kb = grid.row_len[rows] - 1
                    gathered = w_ladder[kb] @ props.propagator(delta)
                    vals = np.einsum("ij,ji->i", gathered, sources[task.source][:, rows])
                    wts = grid.endpoint_weight[rows]
                    for acc in accs[key]:
                        acc.add_endpoint(vals, rows, wts)
                    if task.want_map:
                        maps[key].endpoint[rows] = vals

    # -- row-wise path ---------------------------------------------------------

    def _march_cell(self, sig: np.ndarray, t_rows: np.ndarray, tau0: float, h: float,
                    shift: float, props) -> np.ndarray:
        """Advance the row batch across one tau cell."""
        lv = self.lv
        t_lo, t_hi = float(t_rows.min()), float(t_rows.max())
        driven = (lv.k_plus is not None and self.pulse_in_tau
                  and lv.pulse_active(t_lo + tau0, t_hi + tau0 + h))
        if not driven:
            return props.propagator(h) @ sig
        pu = lv.config.pulse
        peak = abs(pu.area) * math.pi / (math.sqrt(2 * math.pi) * pu.width_tau)
        m = max(1, math.ceil(h * (props.norm + 2 * peak) / props.stab_limit))
        hs = h / m
        phase_rate = shift / HBAR_UEV_PS

        def l_apply(tau, v):
            om = lv.envelope(t_rows + tau)
            if phase_rate != 0.0:
                om = om * np.exp(1j * phase_rate * tau)
            out = props.l @ v
            out += (lv.k_plus @ v) * om[None, :]
            out += (lv.k_minus @ v) * np.conj(om)[None, :]
            return out

        for j in range(m):
            tau = tau0 + j * hs
            k1 = l_apply(tau, sig)
            k2 = l_apply(tau + hs / 2, sig + (hs / 2) * k1)
            k3 = l_apply(tau + hs / 2, sig + (hs / 2) * k2)
            k4 = l_apply(tau + hs, sig + hs * k3)
            sig = sig + (hs / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return sig

    def _scan_rowwise(self, sources, observables, tasks, shift, cols, accs, maps) -> None:
        grid = self.grid
        props = self.lv.propagators(shift)
        d2 = self.dim ** 2
        n_p = len(cols)
        t_rows = grid.t[cols]
        kb = grid.row_len[cols] - 1
        kmax = int(kb.max()) + 1
        obs_vecs = {k: observables[k].T.reshape(-1).astype(complex) for k in observables}
        by_source: dict[str, list[ScanTask]] = {}
        for task in tasks:
            by_source.setdefault(task.source, []).append(task)

        for skey, stasks in by_source.items():
            sig = np.array(sources[skey][:, cols], dtype=complex)
            boundary = np.empty((d2, n_p), dtype=complex)
            values = {t.observable: np.empty((kmax, n_p), dtype=complex)
                      for t in stasks}
            for k in range(kmax):
                for okey, buf in values.items():
                    buf[k] = obs_vecs[okey] @ sig
                hit = kb == k
                if hit.any():
                    boundary[:, hit] = sig[:, hit]
                if k + 1 < kmax:
                    h = grid.ladder[k + 1] - grid.ladder[k]
                    sig = self._march_cell(sig, t_rows, float(grid.ladder[k]), float(h),
                                           shift, props)

            # endpoint samples, grouped by step size
            ep_vals = {t.observable: np.zeros(n_p, dtype=complex) for t in stasks}
            has_ep = grid.endpoint_weight[cols] > 0
            if has_ep.any():
                deltas = np.round(grid.endpoint_delta[cols], 9)
                for delta in np.unique(deltas[has_ep]):
                    sel = has_ep & (deltas == delta)
                    stepped = props.propagator(float(delta)) @ boundary[:, sel]
                    for okey in ep_vals:
                        ep_vals[okey][sel] = obs_vecs[okey] @ stepped

            chunk = max(64, _CHUNK_TARGET // max(1, n_p))
            for task in stasks:
                key = (task.source, task.observable)
                buf = values[task.observable]
                for k0 in range(0, kmax, chunk):
                    k1 = min(k0 + chunk, kmax)
                    tw = self._tau_weight_block(k0, k1, cols)
                    for acc in accs[key]:
                        acc.add_block(tw, buf[k0:k1], cols)
                    if task.want_map:
                        maps[key].values[cols, k0:k1] = buf[k0:k1].T
                rows_ep = cols[has_ep]
                if len(rows_ep):
                    wts = grid.endpoint_weight[rows_ep]
                    for acc in accs[key]:
                        acc.add_endpoint(ep_vals[task.observable][has_ep], rows_ep, wts)
                    if task.want_map:
                        maps[key].endpoint[rows_ep] = ep_vals[task.observable][has_ep]

    # -- spec-level convenience -------------------------------------------------

    def g1(self, a: np.ndarray, shift: float = 0.0, method: str = "auto") -> CorrelationMap:
        """G1(t,tau) = <adag(t+tau) a(t)>: sigma(0) = a rho(t), traced with adag."""
        src = {"g1": self.sandwich(a, None)}
        obs = {"adag": a.conj().T}
        res = self.scan(src, obs, [ScanTask("g1", "adag", want_map=True)],
                        shift=shift, method=method)
        return res[("g1", "adag")]["map"]

    def g2(self, a: np.ndarray, b: np.ndarray, shift: float = 0.0,
           method: str = "auto") -> CorrelationMap:
        """G2(t,tau) = <adag(t) bdag(t+tau) b(t+tau) a(t)>."""
        src = {"g2": self.sandwich(a, a.conj().T)}
        obs = {"bdagb": b.conj().T @ b}
        res = self.scan(src, obs, [ScanTask("g2", "bdagb", want_map=True)],
                        shift=shift, method=method)
        return res[("g2", "bdagb")]["map"]
