"""Liouvillian superoperators for the three-level device.

Two builders are provided: the partial-secular generator for arbitrary inner
coupling (eigenbasis), and the full-secular Lindblad generator for the
uncoupled device (bare basis). Both act on the column-stacked vectorization
of the 3x3 density matrix and keep the per-bath dissipator blocks around so
heat currents can be evaluated bath by bath.

Rate convention: the Lindblad superoperator carries the explicit factor 2,
L_X(rho) = 2 X rho X^dag - X^dag X rho - rho X^dag X, and the unitary block
is scaled by the same factor so the whole equation of motion shares one time
unit. Steady states are unaffected; absolute current magnitudes match the
factor-2 convention throughout.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .model import (
    BARE,
    BasisError,
    ConfigError,
    DensityMatrix,
    DeviceConfig,
    EigenSystem,
    diagonalize,
    validate,
)
from .rates import RatePair, transition_rates

PARTIAL_SECULAR = "partial_secular"
FULL_SECULAR = "full_secular"

# vectorization is column stacking: vec(rho)[i + 3*j] = rho[i, j]
_I11, _I22, _I33 = 0, 4, 8
_I12, _I13, _I23 = 3, 6, 7
_I21, _I31, _I32 = 1, 2, 5


def vectorize(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix, dtype=complex).reshape(9, order="F")


def unvectorize(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector, dtype=complex).reshape((3, 3), order="F")


@dataclass(frozen=True)
class Generator:
    """9x9 Liouvillian with its unitary and per-bath dissipator blocks."""

    matrix: np.ndarray
    unitary: np.ndarray
    dissipators: dict[str, np.ndarray]
    hamiltonian: np.ndarray
    basis: str
    mode: str
    config: DeviceConfig

    def __post_init__(self):
        for array in (self.matrix, self.unitary, self.hamiltonian,
                      *self.dissipators.values()):
            array.setflags(write=False)


def _unitary_block(energies) -> np.ndarray:
    """Coherent rotation of the vectorized state, -2i (E_i - E_j) per entry."""
    block = np.zeros((9, 9), dtype=complex)
    for i in range(3):
        for j in range(3):
            k = i + 3 * j
            block[k, k] = -2j * (energies[i] - energies[j])
    return block


def _coupled_bath_block(pair_2: RatePair, pair_3: RatePair,
                        cross_2: RatePair, cross_3: RatePair,
                        cross_sign: float) -> np.ndarray:
    """Dissipator of a bath driving both ground-excited transitions.

    pair_2 / pair_3 are the overlap-weighted rates on the 1<->2 and 1<->3
    channels at their own frequencies; cross_2 / cross_3 carry the
    interference weight f1 at omega_2 and omega_3. cross_sign is the sign of
    the product of the two channel amplitudes (-1 for the hot bath, +1 for
    the cold bath).
    """
    L = np.zeros((9, 9), dtype=complex)
    s = cross_sign

    # population rows
    L[_I11, _I11] = -2.0 * (pair_2.up + pair_3.up)
    L[_I11, _I22] = 2.0 * pair_2.down
    L[_I11, _I33] = 2.0 * pair_3.down
    L[_I11, _I23] = L[_I11, _I32] = s * (cross_3.down + cross_2.down)

    L[_I22, _I11] = 2.0 * pair_2.up
    L[_I22, _I22] = -2.0 * pair_2.down
    L[_I22, _I23] = L[_I22, _I32] = -s * cross_3.down

    L[_I33, _I11] = 2.0 * pair_3.up
    L[_I33, _I33] = -2.0 * pair_3.down
    L[_I33, _I23] = L[_I33, _I32] = -s * cross_2.down

    # excited-pair coherences couple back into the populations
    for k in (_I23, _I32):
        L[k, k] = -(pair_2.down + pair_3.down)
        L[k, _I11] = s * (cross_3.up + cross_2.up)
        L[k, _I22] = -s * cross_2.down
        L[k, _I33] = -s * cross_3.down

    # ground-excited coherences only decay: half the total outgoing
    # population rates of the two levels involved
    out_1 = 2.0 * (pair_2.up + pair_3.up)
    out_2 = 2.0 * pair_2.down
    out_3 = 2.0 * pair_3.down
    L[_I12, _I12] = L[_I21, _I21] = -0.5 * (out_1 + out_2)
    L[_I13, _I13] = L[_I31, _I31] = -0.5 * (out_1 + out_3)
    return L


def _work_bath_block(pair: RatePair) -> np.ndarray:
    """Dissipator of the work bath, acting inside the excited doublet."""
    L = np.zeros((9, 9), dtype=complex)
    L[_I22, _I22] = -2.0 * pair.up
    L[_I22, _I33] = 2.0 * pair.down
    L[_I33, _I22] = 2.0 * pair.up
    L[_I33, _I33] = -2.0 * pair.down
    L[_I23, _I23] = L[_I32, _I32] = -(pair.down + pair.up)
    L[_I12, _I12] = L[_I21, _I21] = -pair.up
    L[_I13, _I13] = L[_I31, _I31] = -pair.down
    return L


def build_partial_secular(config: DeviceConfig) -> Generator:
    """Partial-secular Redfield generator in the system eigenbasis.

    The hot bath couples to the ground-excited transitions with amplitudes
    (-sin(phi/2), cos(phi/2)) on the (1<->2, 1<->3) channels and the cold
    bath with (cos(phi/2), sin(phi/2)); the interference (cross) terms
    between the two channels are retained, which is what sustains the
    steady-state coherence between the excited levels.
    """
    validate(config)
    eig = diagonalize(config.system)
    bath_h = config.bath("h")
    bath_c = config.bath("c")
    bath_w = config.bath("w")

    h_at_2 = transition_rates(eig.omega_2, bath_h)
    h_at_3 = transition_rates(eig.omega_3, bath_h)
    c_at_2 = transition_rates(eig.omega_2, bath_c)
    c_at_3 = transition_rates(eig.omega_3, bath_c)
    w_pair = transition_rates(eig.capital_omega, bath_w)

    blocks = {
        "h": _coupled_bath_block(
            pair_2=h_at_2.scaled(eig.f3), pair_3=h_at_3.scaled(eig.f2),
            cross_2=h_at_2.scaled(eig.f1), cross_3=h_at_3.scaled(eig.f1),
            cross_sign=-1.0,
        ),
        "c": _coupled_bath_block(
            pair_2=c_at_2.scaled(eig.f2), pair_3=c_at_3.scaled(eig.f3),
            cross_2=c_at_2.scaled(eig.f1), cross_3=c_at_3.scaled(eig.f1),
            cross_sign=+1.0,
        ),
        "w": _work_bath_block(w_pair),
    }
    hamiltonian = np.diag([0.0, eig.omega_2, eig.omega_3]).astype(complex)
    unitary = _unitary_block((0.0, eig.omega_2, eig.omega_3))
    matrix = unitary + blocks["h"] + blocks["c"] + blocks["w"]
    return Generator(matrix=matrix, unitary=unitary, dissipators=blocks,
                     hamiltonian=hamiltonian, basis="eigen",
                     mode=PARTIAL_SECULAR, config=config)


def _lindblad_superop(jump: np.ndarray) -> np.ndarray:
    """Superoperator of 2 X rho X^dag - X^dag X rho - rho X^dag X."""
    xdx = jump.conj().T @ jump
    eye = np.eye(3)
    return (2.0 * np.kron(jump.conj(), jump)
            - np.kron(eye, xdx) - np.kron(xdx.T, eye))


def _ketbra(i: int, j: int) -> np.ndarray:
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


def build_full_secular(config: DeviceConfig) -> Generator:
    """Full-secular Lindblad generator of the uncoupled device (bare basis).

    Three independent two-level dissipators: hot bath on {|1>, |a>} at
    omega_a, cold bath on {|1>, |b>} at omega_b, work bath on {|b>, |a>} at
    delta. Populations decouple completely from the coherences.
    """
    validate(config)
    if config.system.g != 0.0:
        raise ConfigError("full secular generator requires g=0")
    omega_a = config.system.omega_a
    omega_b = config.system.omega_b
    delta = config.system.delta

    # bare basis order: |1>, |b>, |a>
    rate_h = transition_rates(omega_a, config.bath("h"))
    rate_c = transition_rates(omega_b, config.bath("c"))
    rate_w = transition_rates(delta, config.bath("w"))
    blocks = {
        "h": (rate_h.down * _lindblad_superop(_ketbra(0, 2))
              + rate_h.up * _lindblad_superop(_ketbra(2, 0))),
        "c": (rate_c.down * _lindblad_superop(_ketbra(0, 1))
              + rate_c.up * _lindblad_superop(_ketbra(1, 0))),
        "w": (rate_w.down * _lindblad_superop(_ketbra(1, 2))
              + rate_w.up * _lindblad_superop(_ketbra(2, 1))),
    }
    hamiltonian = np.diag([0.0, omega_b, omega_a]).astype(complex)
    unitary = _unitary_block((0.0, omega_b, omega_a))
    matrix = unitary + blocks["h"] + blocks["c"] + blocks["w"]
    return Generator(matrix=matrix, unitary=unitary, dissipators=blocks,
                     hamiltonian=hamiltonian, basis=BARE,
                     mode=FULL_SECULAR, config=config)


def dissipator_apply(generator: Generator, bath_label: str,
                     rho: DensityMatrix) -> np.ndarray:
    """Apply one bath's dissipator block to a state, returning a 3x3 matrix."""
    if rho.basis != generator.basis:
        raise BasisError(
            f"state is in the {rho.basis!r} basis but the generator "
            f"expects {generator.basis!r}")
    block = generator.dissipators[bath_label]
    return unvectorize(block @ vectorize(rho.matrix))


def dump_csv(generator: Generator, stream=None) -> str:
    """Write the 9x9 generator as re/im column pairs, row-major.

    Intended for diffing generators across implementations; returns the CSV
    text and optionally writes it to an open text stream.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"{part}{j}" for j in range(9) for part in ("re", "im")])
    for row in generator.matrix:
        writer.writerow([f"{part:.17g}"
                         for entry in row for part in (entry.real, entry.imag)])
    text = buffer.getvalue()
    if stream is not None:
        stream.write(text)
    return text
