"""Purcell-factor bridge between cavity quantities and model parameters.

F_P = 2 (hbar g)^2 / (hbar gamma_rad * hbar kappa) * kappa^2 / ((dE/hbar)^2 + kappa^2)

The on-resonance form inverts analytically in either direction, which the
sweep harness uses to walk F_P at fixed g (solving for kappa) or at fixed
kappa (solving for g).  The Lorentzian denominator uses the + sign; the
printed - variant would turn negative on resonance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRidge


def purcell_factor(hbar_g: float, hbar_kappa: float, hbar_gamma_rad: float,
                   delta_e: float = 0.0) -> float:
    """Purcell enhancement of an emitter at detuning delta_e from the mode.

    All arguments are energies in ueV.  At zero detuning this reduces to
    2 g^2/(gamma_rad kappa); 200 ueV coupling, 3 meV losses and a 2.5 ueV
    radiative rate give F_P = 10.67.
    """
    if hbar_kappa <= 0 or hbar_gamma_rad <= 0:
        raise ValueError("hbar_kappa and hbar_gamma_rad must be > 0")
    lorentz = hbar_kappa ** 2 / (delta_e ** 2 + hbar_kappa ** 2)
    return 2.0 * hbar_g ** 2 / (hbar_gamma_rad * hbar_kappa) * lorentz


def coupling_from_purcell(f_p: float, e_cavity: float, q_factor: float,
                          hbar_gamma_rad: float) -> float:
    """hbar g = sqrt(F_P E_c / 2Q) sqrt(hbar gamma_rad); exact inverse of
    the on-resonance purcell_factor with hbar kappa = E_c/Q."""
    if min(f_p, e_cavity, q_factor, hbar_gamma_rad) < 0:
        raise ValueError("all arguments must be >= 0")
    return float(np.sqrt(f_p * e_cavity / (2.0 * q_factor)) * np.sqrt(hbar_gamma_rad))


def kappa_for_purcell(f_p: float, hbar_g: float, hbar_gamma_rad: float) -> float:
    """Cavity loss rate realizing F_P at fixed coupling (on resonance)."""
    if f_p <= 0 or hbar_g <= 0 or hbar_gamma_rad <= 0:
        raise ValueError("all arguments must be > 0")
    return 2.0 * hbar_g ** 2 / (hbar_gamma_rad * f_p)


def g_for_purcell(f_p: float, hbar_kappa: float, hbar_gamma_rad: float) -> float:
    """Coupling realizing F_P at fixed losses (on resonance)."""
    if f_p < 0 or hbar_kappa <= 0 or hbar_gamma_rad <= 0:
        raise ValueError("rates must be > 0 and F_P >= 0")
    return float(np.sqrt(f_p * hbar_gamma_rad * hbar_kappa / 2.0))


@dataclass(frozen=True)
class PurcellPoint:
    """One self-consistent cavity working point."""

    f_p: float
    hbar_g: float
    hbar_kappa: float
    hbar_gamma_rad: float
    q_factor: float
    e_cavity: float
    delta_e: float = 0.0

    def check(self, rel_tol: float = 1e-10) -> None:
        """Verify the stored fields against the defining relations."""
        ref = purcell_factor(self.hbar_g, self.hbar_kappa, self.hbar_gamma_rad, self.delta_e)
        if abs(ref - self.f_p) > rel_tol * max(1.0, abs(self.f_p)):
            raise ValueError(f"inconsistent PurcellPoint: F_P {self.f_p} vs {ref}")
        q = self.e_cavity / self.hbar_kappa
        if abs(q - self.q_factor) > rel_tol * max(1.0, abs(self.q_factor)):
            raise ValueError(f"inconsistent PurcellPoint: Q {self.q_factor} vs {q}")

    @staticmethod
    def from_parameters(hbar_g: float, hbar_kappa: float, hbar_gamma_rad: float,
                        e_cavity: float, delta_e: float = 0.0) -> "PurcellPoint":
        return PurcellPoint(
            f_p=purcell_factor(hbar_g, hbar_kappa, hbar_gamma_rad, delta_e),
            hbar_g=hbar_g,
            hbar_kappa=hbar_kappa,
            hbar_gamma_rad=hbar_gamma_rad,
            q_factor=e_cavity / hbar_kappa,
            e_cavity=e_cavity,
            delta_e=delta_e,
        )


@dataclass(frozen=True)
class RidgeFit:
    """Least-squares line hbar_g = alpha * F_P + beta through row maxima."""

    alpha: float
    beta: float
    residual_rms: float
    points: tuple[tuple[float, float], ...]   # (F_P*, hbar_g) per row
    skipped_rows: tuple[float, ...] = ()      # hbar_g of boundary-degenerate rows


def _parabolic_peak(x: np.ndarray, y: np.ndarray, j: int) -> float:
    """Refine the argmax with the parabola through (j-1, j, j+1)."""
    x0, x1, x2 = x[j - 1], x[j], x[j + 1]
    y0, y1, y2 = y[j - 1], y[j], y[j + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    if denom == 0:
        return float(x1)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1)
    return float(-b / (2 * a))


def ridge_fit(f_p: np.ndarray, hbar_g: np.ndarray, value: np.ndarray,
              boundary: str = "error") -> RidgeFit:
    """Fit the optimum line of a (F_P, hbar_g) -> value surface.

    Inputs are flat columns of equal length sampling a rectangular grid.
    For every distinct hbar_g row the F_P argmax is located and refined
    with a three-point parabola; the (F_P*, hbar_g) pairs are fit by least
    squares.  A row whose maximum sits on the F_P boundary raises
    DegenerateRidge, or is dropped with boundary="skip".
    """
    f_p = np.asarray(f_p, dtype=float)
    hbar_g = np.asarray(hbar_g, dtype=float)
    value = np.asarray(value, dtype=float)
    if not (len(f_p) == len(hbar_g) == len(value)):
        raise ValueError("f_p, hbar_g and value must have equal length")
    if boundary not in ("error", "skip"):
        raise ValueError("boundary must be 'error' or 'skip'")

    rows = np.unique(hbar_g)
    if len(rows) < 4:
        raise ValueError("need at least 4 hbar_g rows for the ridge fit")
    points = []
    skipped = []
    for g in rows:
        sel = hbar_g == g
        order = np.argsort(f_p[sel])
        x = f_p[sel][order]
        y = value[sel][order]
        ok = np.isfinite(y)
        x, y = x[ok], y[ok]
        if len(x) < 3:
            raise ValueError(f"row hbar_g={g} has fewer than 3 usable samples")
        j = int(np.argmax(y))
        if j == 0 or j == len(x) - 1:
            if boundary == "skip":
                skipped.append(float(g))
                continue
            raise DegenerateRidge(
                f"row hbar_g={g} has its maximum on the F_P boundary (F_P={x[j]})")
        points.append((_parabolic_peak(x, y, j), float(g)))

    if len(points) < 2:
        raise DegenerateRidge("fewer than 2 interior row maxima; no line can be fit")
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    design = np.stack([xs, np.ones_like(xs)], axis=1)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return RidgeFit(alpha=float(coef[0]), beta=float(coef[1]), residual_rms=rms,
                    points=tuple(points), skipped_rows=tuple(skipped))
