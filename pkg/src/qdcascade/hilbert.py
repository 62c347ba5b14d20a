"""Product Hilbert space and system operators as dense complex matrices.

Basis ordering is electronic-major: index = level*(n_max+1)^2 + n_H*(n_max+1) + n_V
with levels G=0, X_H=1, X_V=2, XX=3.  This makes the partial trace over
photons a strided reduction.  At dim <= 36 dense matrices beat any sparse
machinery, so everything is a plain complex ndarray.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import ValidatedConfig


class Level(enum.IntEnum):
    G = 0
    X_H = 1
    X_V = 2
    XX = 3


#: Electronic excitation count per level (G:0, X:1, XX:2).
EXCITATIONS = {Level.G: 0, Level.X_H: 1, Level.X_V: 1, Level.XX: 2}


@dataclass(frozen=True)
class HilbertSpace:
    """Four electronic levels, optionally tensored with two truncated
    photon modes (H, V)."""

    n_max: int          # photon truncation per mode; 0 encodes "no cavity modes"
    with_cavity: bool

    @property
    def n_photon_states(self) -> int:
        return (self.n_max + 1) if self.with_cavity else 1

    @property
    def dim(self) -> int:
        return 4 * self.n_photon_states ** 2

    def index(self, level: Level, n_h: int = 0, n_v: int = 0) -> int:
        p = self.n_photon_states
        if not (0 <= n_h < p and 0 <= n_v < p):
            raise ValueError(f"photon numbers ({n_h},{n_v}) outside truncation {p - 1}")
        return (int(level) * p + n_h) * p + n_v

    def basis_labels(self) -> list[tuple[Level, int, int]]:
        p = self.n_photon_states
        return [(Level(l), nh, nv) for l in range(4) for nh in range(p) for nv in range(p)]

    def basis_state(self, level: Level, n_h: int = 0, n_v: int = 0) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(level, n_h, n_v)] = 1.0
        return v

    # -- operator builders ------------------------------------------------

    def projector(self, i: Level, j: Level) -> np.ndarray:
        """|i><j| on the electronic factor, identity on the photons."""
        p = self.n_photon_states
        el = np.zeros((4, 4), dtype=complex)
        el[int(i), int(j)] = 1.0
        return np.kron(el, np.eye(p * p, dtype=complex))

    def annihilator(self, mode: str) -> np.ndarray:
        """Photon annihilation operator for mode "H" or "V", truncated at n_max."""
        if not self.with_cavity:
            raise ValueError("space has no cavity modes")
        p = self.n_photon_states
        a = np.diag(np.sqrt(np.arange(1, p, dtype=float)), k=1).astype(complex)
        eye_el = np.eye(4, dtype=complex)
        eye_p = np.eye(p, dtype=complex)
        if mode == "H":
            return np.kron(eye_el, np.kron(a, eye_p))
        if mode == "V":
            return np.kron(eye_el, np.kron(eye_p, a))
        raise ValueError(f"mode must be 'H' or 'V', got {mode!r}")

    def number_op(self, mode: str) -> np.ndarray:
        b = self.annihilator(mode)
        return b.conj().T @ b

    def excitation_number(self) -> np.ndarray:
        """Diagonal operator counting electronic excitations plus photons.

        The internal Hamiltonian conserves it; the semiclassical drive
        changes it by one.  Used to apply rotating-frame shifts.
        """
        p = self.n_photon_states
        diag = np.zeros(self.dim)
        for l in range(4):
            for nh in range(p):
                for nv in range(p):
                    diag[(l * p + nh) * p + nv] = EXCITATIONS[Level(l)] + nh + nv
        return np.diag(diag).astype(complex)

    def population(self, rho: np.ndarray, level: Level) -> float:
        """Electronic-level population of a density matrix (photons traced out)."""
        p = self.n_photon_states
        i0 = int(level) * p * p
        return float(np.real(np.trace(rho[i0:i0 + p * p, i0:i0 + p * p])))


_X_LEVEL = {"H": Level.X_H, "V": Level.X_V}


def build_space(config: ValidatedConfig) -> HilbertSpace:
    """Hilbert space for a validated configuration.

    dim = 4 (n_max+1)^2 with the cavity, plain dim = 4 without.
    """
    cav = config.cavity
    if cav.enabled:
        return HilbertSpace(n_max=cav.n_max, with_cavity=True)
    return HilbertSpace(n_max=0, with_cavity=False)


def projector(space: HilbertSpace, i: Level, j: Level) -> np.ndarray:
    return space.projector(i, j)


def annihilator(space: HilbertSpace, mode: str) -> np.ndarray:
    return space.annihilator(mode)


def emission_channel(space: HilbertSpace, kind: str, mode: str,
                     x_includes_cavity: bool = False) -> np.ndarray:
    """Composite photon-detection channel operators.

    kind "XX": a_XX = |X_i><XX| + b_i  -- the biexciton-exciton photon is
    collected from both the radiative decay and the resonator, which are
    never spectrally separated for the broad low-Q modes used here.
    kind "X": a_X = |G><X_i| exactly, with no cavity term.  The symmetric
    variant (adding b_i) is reachable with x_includes_cavity=True but is a
    deliberate departure from the published channel definition.
    """
    if mode not in _X_LEVEL:
        raise ValueError(f"mode must be 'H' or 'V', got {mode!r}")
    x = _X_LEVEL[mode]
    if kind == "XX":
        op = space.projector(x, Level.XX)
        if space.with_cavity:
            op = op + space.annihilator(mode)
        return op
    if kind == "X":
        op = space.projector(Level.G, x)
        if x_includes_cavity and space.with_cavity:
            op = op + space.annihilator(mode)
        return op
    raise ValueError(f"kind must be 'XX' or 'X', got {kind!r}")


def assert_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10,
                          trace_tol: float = 1e-8, eig_tol: float = -1e-8) -> None:
    """Raise AssertionError unless rho is Hermitian, unit-trace and PSD
    within the stated tolerances."""
    assert np.max(np.abs(rho - rho.conj().T)) <= herm_tol, "density matrix not Hermitian"
    assert abs(np.trace(rho).real - 1.0) <= trace_tol, "density matrix trace != 1"
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    assert evals.min() >= eig_tol, f"negative eigenvalue {evals.min():.3e}"
