"""Nonuniform t-tau grid with exact triangular quadrature.

The t axis is piecewise uniform: dt_fine on [0, fine_window], dt_coarse on
(fine_window, t_end].  Every row t gets the same tau ladder (fine split
anchored at tau=0) truncated to its range t_end - t; when the ladder does
not land exactly on the range the row carries one extra endpoint sample so
the trapezoidal weights of each row sum exactly to its interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import GridParams

_SNAP = 1e-9


def piecewise_axis(t_end: float, fine_window: float, dt_fine: float, dt_coarse: float) -> np.ndarray:
    """Strictly increasing sample points covering [0, t_end] exactly."""
    fw = min(fine_window, t_end)
    nf = int(np.floor(fw / dt_fine + _SNAP))
    pts = [np.arange(nf + 1) * dt_fine]
    if pts[0][-1] < fw - _SNAP:
        pts.append(np.array([fw]))
    start = pts[-1][-1]
    if start < t_end - _SNAP:
        nc = int(np.floor((t_end - start) / dt_coarse + _SNAP))
        if nc > 0:
            pts.append(start + np.arange(1, nc + 1) * dt_coarse)
        if pts[-1][-1] < t_end - _SNAP:
            pts.append(np.array([t_end]))
    axis = np.concatenate(pts)
    axis[np.abs(axis - np.round(axis / dt_fine) * dt_fine) < _SNAP] = \
        np.round(axis[np.abs(axis - np.round(axis / dt_fine) * dt_fine) < _SNAP] / dt_fine) * dt_fine
    return axis


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Standard nonuniform trapezoid weights; sum equals x[-1] - x[0]."""
    n = len(x)
    w = np.zeros(n)
    if n < 2:
        return w
    dx = np.diff(x)
    w[0] = dx[0] / 2
    w[-1] = dx[-1] / 2
    w[1:-1] = (dx[:-1] + dx[1:]) / 2
    return w


@dataclass(frozen=True)
class TwoTimeGrid:
    """Triangular (t, tau) sampling with per-row quadrature weights.

    For row i (time t[i]) the tau samples are ladder[:row_len[i]] plus,
    when has_endpoint[i], the exact range row_end[i].  Row tau extents
    never exceed t_end - t[i].
    """

    t: np.ndarray                # (N_t,)
    ladder: np.ndarray           # (N_tau,) shared tau samples, ladder[0] = 0
    t_weights: np.ndarray        # (N_t,) trapezoid weights on the t axis
    ladder_weights: np.ndarray   # (N_tau,) weights valid for k <= row_len-2
    row_len: np.ndarray          # (N_t,) int, ladder points in each row
    row_end: np.ndarray          # (N_t,) exact tau range per row
    boundary_weight: np.ndarray  # (N_t,) weight of ladder[row_len-1] in its row
    endpoint_weight: np.ndarray  # (N_t,) weight of the extra endpoint (0 if none)
    endpoint_delta: np.ndarray   # (N_t,) row_end - ladder[row_len-1]
    t_end: float
    params: Optional[GridParams] = None

    @property
    def n_t(self) -> int:
        return len(self.t)

    @property
    def n_tau(self) -> int:
        return len(self.ladder)

    @property
    def has_endpoint(self) -> np.ndarray:
        return self.endpoint_weight > 0

    @classmethod
    def from_params(cls, params: GridParams) -> "TwoTimeGrid":
        axis = piecewise_axis(params.t_end, params.fine_window, params.dt_fine, params.dt_coarse)
        return cls.from_axes(axis, axis, params.t_end, params)

    @classmethod
    def from_axes(cls, t: np.ndarray, ladder: np.ndarray, t_end: float,
                  params: Optional[GridParams] = None) -> "TwoTimeGrid":
        t = np.asarray(t, dtype=float)
        ladder = np.asarray(ladder, dtype=float)
        n_t = len(t)
        row_end = t_end - t
        row_len = np.searchsorted(ladder, row_end + _SNAP)
        row_len = np.clip(row_len, 1, len(ladder))
        last = ladder[row_len - 1]
        delta = row_end - last
        delta[delta < _SNAP] = 0.0

        lw = np.zeros(len(ladder))
        if len(ladder) >= 2:
            dx = np.diff(ladder)
            lw[0] = dx[0] / 2
            lw[1:-1] = (dx[:-1] + dx[1:]) / 2
            lw[-1] = dx[-1] / 2  # only correct for full-length rows; rows use boundary_weight

        boundary = np.zeros(n_t)
        multi = row_len >= 2
        prev = ladder[np.maximum(row_len - 2, 0)]
        boundary[multi] = (last[multi] - prev[multi]) / 2
        boundary += delta / 2
        endpoint_w = delta / 2

        return cls(t=t, ladder=ladder, t_weights=trapezoid_weights(t),
                   ladder_weights=lw, row_len=row_len, row_end=row_end,
                   boundary_weight=boundary, endpoint_weight=endpoint_w,
                   endpoint_delta=delta, t_end=t_end, params=params)

    # -- quadrature --------------------------------------------------------

    def row_tau(self, i: int) -> np.ndarray:
        """All tau samples of row i, endpoint included."""
        pts = self.ladder[: self.row_len[i]]
        if self.endpoint_weight[i] > 0:
            pts = np.append(pts, self.row_end[i])
        return pts

    def row_weights(self, i: int) -> np.ndarray:
        k = int(self.row_len[i])
        w = self.ladder_weights[:k].copy()
        w[k - 1] = self.boundary_weight[i]
        if k >= 2:
            w[0] = (self.ladder[1] - self.ladder[0]) / 2
        else:
            w[0] = self.boundary_weight[i]
        if self.endpoint_weight[i] > 0:
            w = np.append(w, self.endpoint_weight[i])
        return w

    def row_integral(self, values: np.ndarray, endpoint_values: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-row tau integrals of a (N_t, N_tau) field.

        Entries beyond each row's length are ignored; endpoint_values (N_t,)
        supplies the extra exact-endpoint samples where present.
        """
        n_t, n_tau = values.shape
        if n_t != self.n_t or n_tau != self.n_tau:
            raise ValueError("field shape does not match the grid")
        k_idx = np.arange(self.n_tau)
        interior = k_idx[None, :] <= (self.row_len - 2)[:, None]
        out = np.where(interior, values, 0.0) @ self.ladder_weights
        rows = np.arange(self.n_t)
        out = out + values[rows, self.row_len - 1] * self.boundary_weight
        if endpoint_values is not None:
            out = out + np.where(self.endpoint_weight > 0, endpoint_values, 0.0) * self.endpoint_weight
        return out

    def double_integral(self, values, endpoint_values: Optional[np.ndarray] = None):
        """Trapezoidal integral over the triangle [0,T] x [0, T-t].

        `values` is a (N_t, N_tau) array or a vectorized callable f(t, tau).
        """
        if callable(values):
            f = values
            tt = np.broadcast_to(self.t[:, None], (self.n_t, self.n_tau))
            ll = np.broadcast_to(self.ladder[None, :], (self.n_t, self.n_tau))
            values = np.asarray(f(tt, ll))
            endpoint_values = np.asarray(f(self.t, self.row_end))
        inner = self.row_integral(values, endpoint_values)
        return self.t_weights @ inner

    def endpoint_groups(self) -> dict[float, np.ndarray]:
        """Row indices grouped by their endpoint step size."""
        groups: dict[float, list[int]] = {}
        for i in np.nonzero(self.endpoint_weight > 0)[0]:
            key = round(float(self.endpoint_delta[i]), 9)
            groups.setdefault(key, []).append(int(i))
        return {k: np.asarray(v) for k, v in groups.items()}


def double_integral(field, grid: TwoTimeGrid, endpoint_values: Optional[np.ndarray] = None):
    """Module-level convenience wrapper around TwoTimeGrid.double_integral."""
    return grid.double_integral(field, endpoint_values)
