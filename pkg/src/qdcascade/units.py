"""Unit conventions.

All energies are in micro-eV and all times in ps.  Rates are usually
quoted as energies (hbar*gamma); the conversion factor is the single
constant below.  hbar = 658.2119569 ueV ps matches the magnitudes quoted
throughout the cavity/quantum-dot literature without exponent underflow.
"""

HBAR_UEV_PS = 658.2119569


def rate_of(hbar_rate: float) -> float:
    """Angular rate (1/ps) for an energy-valued rate hbar*gamma (ueV).

    rate_of(2.5) is about 1/263 ps^-1, i.e. an exciton lifetime of ~263 ps.
    """
    if hbar_rate < 0:
        raise ValueError(f"hbar_rate must be >= 0, got {hbar_rate}")
    return hbar_rate / HBAR_UEV_PS


def energy_of(rate: float) -> float:
    """Inverse of :func:`rate_of`: energy (ueV) for an angular rate (1/ps)."""
    return rate * HBAR_UEV_PS
