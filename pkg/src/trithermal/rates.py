"""Bath spectra, thermal occupations and the transition rates of the dissipators.

Rates come in emission/absorption pairs tied by detailed balance:
down(w) = G(w) [n(w) + 1] and up(w) = G(w) n(w), with G the Ohmic spectral
density and n the Bose-Einstein occupation. The w -> 0 limit is finite
(both tend to gamma * T) and is handled by a short series expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import BathSpec, EigenSystem

#: below omega < SMALL_FREQUENCY_FACTOR * T the occupation uses its series form
SMALL_FREQUENCY_FACTOR = 1e-6


class FrequencyDomainError(ValueError):
    """A rate was requested at a frequency outside its domain."""


@dataclass(frozen=True)
class RatePair:
    """Emission (down) and absorption (up) rates at one transition frequency."""

    down: float
    up: float

    def scaled(self, factor: float) -> "RatePair":
        return RatePair(down=factor * self.down, up=factor * self.up)


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean occupation of a bath mode, 1 / (e^(w/T) - 1)."""
    if not temperature > 0:
        raise FrequencyDomainError("temperature must be positive")
    if not omega > 0:
        raise FrequencyDomainError("bose_occupation requires omega > 0")
    return 1.0 / math.expm1(omega / temperature)


def ohmic_spectral_density(omega: float, gamma: float, cutoff: float) -> float:
    """Ohmic spectral density gamma * w * exp(-w / cutoff)."""
    return gamma * omega * math.exp(-omega / cutoff)


def transition_rates(omega: float, bath: BathSpec) -> RatePair:
    """Emission/absorption rate pair of one bath at transition frequency omega.

    Valid for omega >= 0; the device only ever requests non-negative
    frequencies. down - up equals the spectral density exactly, at every
    frequency, including across the small-frequency switch.
    """
    if omega < 0:
        raise FrequencyDomainError("transition frequency must be non-negative")
    T = bath.temperature
    x = omega / T
    damping = bath.gamma * math.exp(-omega / bath.cutoff)
    if x <= SMALL_FREQUENCY_FACTOR:
        # G(w) n(w) = gamma T e^(-w/wc) * x / (e^x - 1); expand the last factor
        up = damping * T * (1.0 - 0.5 * x + x * x / 12.0)
    else:
        up = damping * omega / math.expm1(x)
    down = up + damping * omega
    return RatePair(down=down, up=up)


def dressed_rates(omega: float, bath: BathSpec,
                  eig: EigenSystem) -> tuple[RatePair, RatePair, RatePair]:
    """Bare rates weighted by the three eigenbasis overlap factors f1, f2, f3."""
    bare = transition_rates(omega, bath)
    return bare.scaled(eig.f1), bare.scaled(eig.f2), bare.scaled(eig.f3)
