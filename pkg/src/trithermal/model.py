"""Parameter records and the eigenbasis decomposition of the three-level system.

Everything here is immutable and validated on construction, so records can be
shared freely across sweep workers. Frequencies and temperatures are expressed
in units of the upper bare level spacing (omega_a), with hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

BATH_LABELS = ("h", "c", "w")

#: basis tags carried by density matrices and generators
EIGEN = "eigen"  # eigenbasis {|1>, |2>, |3>} of the coupled system
BARE = "bare"    # bare basis {|1>, |b>, |a>} used when g = 0


class ConfigError(ValueError):
    """A parameter record violates one of its invariants."""


class BasisError(ValueError):
    """A density matrix was supplied in the wrong basis."""


@dataclass(frozen=True)
class SystemParams:
    """Bare level spacings and the coupling between the two excited levels."""

    omega_a: float
    omega_b: float
    g: float = 0.0

    def __post_init__(self):
        if not self.omega_a > 0:
            raise ConfigError("omega_a must be positive")
        if not self.omega_b > 0:
            raise ConfigError("omega_b must be positive")
        if self.omega_b > self.omega_a:
            raise ConfigError("level ordering violated: omega_b > omega_a")
        if self.g < 0:
            raise ConfigError("inner coupling g must be non-negative")

    @property
    def delta(self) -> float:
        return self.omega_a - self.omega_b


@dataclass(frozen=True)
class EigenSystem:
    """Derived quantities of the diagonalized excited-state block.

    f2 and f3 are the squared overlaps of the excited eigenstates with the
    bare levels, f1 the interference weight; f2 + f3 = 1 and f1^2 = f2 * f3.
    """

    omega_2: float
    omega_3: float
    delta: float
    capital_omega: float
    phi: float
    f1: float
    f2: float
    f3: float


def diagonalize(system: SystemParams) -> EigenSystem:
    """Diagonalize the excited 2x2 block of the system Hamiltonian.

    The mixing angle uses a two-argument arctangent so the degenerate case
    delta = 0 lands on phi = pi/2 instead of dividing by zero.
    """
    delta = system.delta
    splitting = math.hypot(2.0 * system.g, delta)
    half_sum = 0.5 * (system.omega_a + system.omega_b)
    phi = math.atan2(2.0 * system.g, delta)
    c = math.cos(0.5 * phi)
    s = math.sin(0.5 * phi)
    return EigenSystem(
        omega_2=half_sum - 0.5 * splitting,
        omega_3=half_sum + 0.5 * splitting,
        delta=delta,
        capital_omega=splitting,
        phi=phi,
        f1=s * c,
        f2=c * c,
        f3=s * s,
    )


@dataclass(frozen=True)
class BathSpec:
    """One thermal terminal: Ohmic bath with exponential cutoff."""

    label: str
    temperature: float
    gamma: float
    cutoff: float

    def __post_init__(self):
        if self.label not in BATH_LABELS:
            raise ConfigError(f"unknown bath label {self.label!r}")
        if not self.temperature > 0:
            raise ConfigError(f"bath {self.label}: temperature must be positive")
        if self.gamma < 0:
            raise ConfigError(f"bath {self.label}: gamma must be non-negative")
        if not self.cutoff > 0:
            raise ConfigError(f"bath {self.label}: cutoff must be positive")


@dataclass(frozen=True)
class DeviceConfig:
    """Three-level system plus its three thermal terminals."""

    system: SystemParams
    baths: tuple[BathSpec, BathSpec, BathSpec]

    def __post_init__(self):
        object.__setattr__(self, "baths", tuple(self.baths))
        labels = [b.label for b in self.baths]
        for label in labels:
            if labels.count(label) > 1:
                raise ConfigError(f"duplicate bath label {label!r}")
        if sorted(labels) != sorted(BATH_LABELS):
            missing = set(BATH_LABELS) - set(labels)
            raise ConfigError(f"missing bath label(s): {sorted(missing)}")

    def bath(self, label: str) -> BathSpec:
        for b in self.baths:
            if b.label == label:
                return b
        raise ConfigError(f"unknown bath label {label!r}")

    def temperature(self, label: str) -> float:
        return self.bath(label).temperature

    def with_bath_temperature(self, label: str, temperature: float) -> "DeviceConfig":
        baths = tuple(
            replace(b, temperature=temperature) if b.label == label else b
            for b in self.baths
        )
        return replace(self, baths=baths)

    def with_coupling(self, g: float) -> "DeviceConfig":
        return replace(self, system=replace(self.system, g=g))


def validate(config: DeviceConfig) -> DeviceConfig:
    """Recheck every invariant of an assembled config and hand it back."""
    if not isinstance(config, DeviceConfig):
        raise ConfigError("expected a DeviceConfig")
    # frozen dataclasses validate on construction; rebuilding re-runs all checks
    DeviceConfig(system=config.system, baths=config.baths)
    return config


@dataclass(frozen=True)
class DensityMatrix:
    """3x3 state of the system, tagged with the basis it is written in."""

    matrix: np.ndarray
    basis: str

    def __post_init__(self):
        if self.basis not in (EIGEN, BARE):
            raise ConfigError(f"unknown basis tag {self.basis!r}")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (3, 3):
            raise ConfigError("density matrix must be 3x3")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, level: int, basis: str) -> "DensityMatrix":
        """Projector onto one of the levels 1, 2, 3 (or 1, b, a)."""
        if level not in (1, 2, 3):
            raise ConfigError("level must be 1, 2 or 3")
        m = np.zeros((3, 3), dtype=complex)
        m[level - 1, level - 1] = 1.0
        return cls(m, basis)

    @classmethod
    def from_populations(cls, populations, basis: str) -> "DensityMatrix":
        return cls(np.diag(np.asarray(populations, dtype=complex)), basis)

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    @property
    def excited_coherence(self) -> complex:
        """Off-diagonal element between the two excited levels."""
        return complex(self.matrix[1, 2])

    def hermitized(self) -> "DensityMatrix":
        return DensityMatrix(0.5 * (self.matrix + self.matrix.conj().T), self.basis)

    def check(self, herm_tol: float = 1e-12, trace_tol: float = 1e-12,
              eig_floor: float = -1e-8) -> "DensityMatrix":
        """Raise unless Hermitian, unit trace and numerically positive."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ConfigError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > trace_tol:
            raise ConfigError("density matrix trace differs from 1")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < eig_floor:
            raise ConfigError("density matrix has a negative eigenvalue")
        return self
