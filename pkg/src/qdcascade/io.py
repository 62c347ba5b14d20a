"""Binary dump of correlation maps (layout also documented in docs/formats.md).

Layout, all little-endian:

    magic   8 bytes  b"QDCORR1\\0"
    n_t     uint32
    n_tau   uint32
    shift   float64   co-rotating reference removed from the stored values (ueV)
    t_end   float64
    t       float64[n_t]
    ladder  float64[n_tau]
    row_len uint32[n_t]
    row_end float64[n_t]
    values  complex128[n_t * n_tau]  row-major, NaN beyond each row
    endpoint complex128[n_t]
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import TwoTimeGrid
from .twotime import CorrelationMap

MAGIC = b"QDCORR1\x00"


def write_corrmap(path, corrmap: CorrelationMap) -> None:
    grid = corrmap.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", grid.n_t, grid.n_tau))
        fh.write(struct.pack("<dd", corrmap.shift, grid.t_end))
        fh.write(grid.t.astype("<f8").tobytes())
        fh.write(grid.ladder.astype("<f8").tobytes())
        fh.write(grid.row_len.astype("<u4").tobytes())
        fh.write(grid.row_end.astype("<f8").tobytes())
        fh.write(corrmap.values.astype("<c16").tobytes())
        fh.write(corrmap.endpoint.astype("<c16").tobytes())


def read_corrmap(path) -> CorrelationMap:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"not a correlation map dump (magic {magic!r})")
        n_t, n_tau = struct.unpack("<II", fh.read(8))
        shift, t_end = struct.unpack("<dd", fh.read(16))
        t = np.frombuffer(fh.read(8 * n_t), dtype="<f8")
        ladder = np.frombuffer(fh.read(8 * n_tau), dtype="<f8")
        fh.read(4 * n_t)  # row_len, reconstructed by the grid
        fh.read(8 * n_t)  # row_end, reconstructed by the grid
        values = np.frombuffer(fh.read(16 * n_t * n_tau), dtype="<c16").reshape(n_t, n_tau)
        endpoint = np.frombuffer(fh.read(16 * n_t), dtype="<c16")
    grid = TwoTimeGrid.from_axes(t, ladder, t_end)
    return CorrelationMap(grid=grid, values=values.copy(), endpoint=endpoint.copy(),
                          shift=shift)
