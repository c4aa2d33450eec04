"""Qubit vocabulary: states on a great circle, modulation, measurement, cloning.

The great circle is the Bloch equator, so a circle state is
``(|0> + exp(i phi)|1>) / sqrt(2)`` and a rotation by ``theta`` along the
circle is ``diag(1, exp(i theta))``. Any other great circle is unitarily
equivalent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import VERIFY_TOL, as_vector, herm_eig, partial_trace, projector

TWO_PI = 2.0 * math.pi
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class CircleState:
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def vector(self) -> np.ndarray:
        return state_from_angle(self.phi)


@dataclass(frozen=True)
class Modulation:
    bit: int
    theta: float = math.pi

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")

    @property
    def unitary(self) -> np.ndarray:
        return modulation_unitary(self.bit, self.theta)


class MeasurementOutcome(NamedTuple):
    index: int
    post_state: np.ndarray


def state_from_angle(phi: float) -> np.ndarray:
    return np.array([1.0, np.exp(1j * phi)], dtype=complex) / math.sqrt(2.0)


def modulation_unitary(bit: int, theta: float = math.pi) -> np.ndarray:
    if bit == 0:
        return I2.copy()
    if bit == 1:
        return np.diag([1.0, np.exp(1j * theta)]).astype(complex)
    raise ValueError(f"bit must be 0 or 1, got {bit!r}")


def modulate(s: CircleState | np.ndarray, m: Modulation) -> np.ndarray:
    v = s.vector if isinstance(s, CircleState) else as_vector(s)
    return m.unitary @ v


def overlap(a, b) -> float:
    """``|<a|b>|``, the global-phase-free comparison of two states."""
    return float(abs(np.vdot(a, b)))


def lambda_plus(theta: float) -> float:
    """Positive eigenvalue of ``sigma_0 - sigma_1`` for circle states ``theta`` apart."""
    return abs(math.sin(theta / 2.0))


def difference_operator(phi: float, theta: float = math.pi) -> np.ndarray:
    psi = state_from_angle(phi)
    return projector(psi) - projector(modulation_unitary(1, theta) @ psi)


def discrimination_basis(phi: float, theta: float = math.pi) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors ``(|lambda_+>, |lambda_->)`` of ``sigma_0 - sigma_1``.

    The positive eigenvector sits on the circle a quarter turn behind the
    midpoint of the two modulated states; at ``theta = pi`` it is the
    unmodulated state itself.
    """
    plus = phi + theta / 2.0 - math.pi / 2.0
    return state_from_angle(plus), state_from_angle(plus + math.pi)


def basis_projectors(*vectors) -> list[np.ndarray]:
    return [projector(v) for v in vectors]


def check_projectors(projectors: Sequence[np.ndarray], dim: int) -> None:
    total = np.zeros((dim, dim), dtype=complex)
    for p in projectors:
        if p.shape != (dim, dim):
            raise ValueError("projector dimension does not match state")
        if np.max(np.abs(p - p.conj().T)) > VERIFY_TOL or np.max(np.abs(p @ p - p)) > VERIFY_TOL:
            raise ValueError("measurement operator is not an orthogonal projector")
        total += p
    if np.max(np.abs(total - np.eye(dim))) > VERIFY_TOL:
        raise ValueError("projectors do not sum to the identity")


def born_probabilities(state, projectors: Sequence[np.ndarray], validate: bool = True) -> np.ndarray:
    state = as_vector(state)
    if validate:
        check_projectors(projectors, state.size)
    probs = np.array([np.vdot(state, p @ state).real for p in projectors])
    return np.clip(probs, 0.0, None)


def measure_projective(
    state, projectors: Sequence[np.ndarray], rng: np.random.Generator, validate: bool = True
) -> MeasurementOutcome:
    """Sample outcome ``k`` with Born probability ``<state|P_k|state>``.

    ``validate=False`` skips the completeness check for callers that built
    the projectors from an orthonormal basis themselves.
    """
    state = as_vector(state)
    probs = born_probabilities(state, projectors, validate)
    u = rng.random() * probs.sum()
    k = min(int(np.searchsorted(np.cumsum(probs), u, side="right")), len(probs) - 1)
    while probs[k] == 0.0:  # u landed on a zero-width bin edge
        k -= 1
    post = projectors[k] @ state
    return MeasurementOutcome(k, post / np.linalg.norm(post))


def measure_density(rho, projectors: Sequence[np.ndarray], rng: np.random.Generator, validate: bool = True) -> int:
    """Sample a projective measurement on a mixed state; returns the outcome index."""
    if validate:
        check_projectors(projectors, rho.shape[0])
    probs = np.clip([np.trace(p @ rho).real for p in projectors], 0.0, None)
    u = rng.random() * probs.sum()
    k = min(int(np.searchsorted(np.cumsum(probs), u, side="right")), len(probs) - 1)
    while probs[k] == 0.0:
        k -= 1
    return k


class Cloner:
    """A symmetric 1 -> 2 qubit cloner given as an isometry.

    ``isometry`` maps the input qubit into three qubits ordered
    (copy 1, copy 2, machine ancilla).
    """

    name = "cloner"
    isometry: np.ndarray

    def __call__(self, state) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return clone_one_to_two(state, self)

    def analytic_fidelity(self) -> float:
        raise NotImplementedError


class PhaseCovariantCloner(Cloner):
    """Economical phase-covariant cloner for equatorial inputs.

    ``|0> -> |00>`` and ``|1> -> (|01> + |10>)/sqrt(2)``; the ancilla stays
    in ``|0>``. Each copy of an equatorial input has fidelity
    ``1/2 + 1/sqrt(8)``.
    """

    name = "phase_covariant"

    def __init__(self):
        iso = np.zeros((8, 2), dtype=complex)
        iso[0b000, 0] = 1.0
        iso[0b010, 1] = iso[0b100, 1] = 1.0 / math.sqrt(2.0)
        self.isometry = iso

    def analytic_fidelity(self) -> float:
        return 0.5 + 1.0 / math.sqrt(8.0)


class UniversalCloner(Cloner):
    """Buzek-Hillery universal cloner, fidelity 5/6 for every input."""

    name = "universal"

    def __init__(self):
        a, b = math.sqrt(2.0 / 3.0), math.sqrt(1.0 / 6.0)
        iso = np.zeros((8, 2), dtype=complex)
        iso[0b000, 0] = a
        iso[0b011, 0] = iso[0b101, 0] = b
        iso[0b111, 1] = a
        iso[0b010, 1] = iso[0b100, 1] = b
        self.isometry = iso

    def analytic_fidelity(self) -> float:
        return 5.0 / 6.0


CLONERS = {c.name: c for c in (PhaseCovariantCloner, UniversalCloner)}


def clone_one_to_two(state, cloner: Cloner | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run a 1 -> 2 cloner on a single-qubit state.

    Returns ``(copy1, copy2, joint)``: the two reduced single-qubit density
    operators and the joint three-qubit pure state.
    """
    state = as_vector(state)
    if state.size != 2:
        raise ValueError(f"cloner input must be a single qubit, got dim {state.size}")
    cloner = cloner or PhaseCovariantCloner()
    joint = cloner.isometry @ state
    rho = np.outer(joint, joint.conj())
    copy1 = partial_trace(rho, [2, 2, 2], [0])
    copy2 = partial_trace(rho, [2, 2, 2], [1])
    return copy1, copy2, joint


def eigen_lambda_plus(theta: float, phi: float = 0.0) -> float:
    """``lambda_plus`` recomputed by diagonalising the 2x2 difference operator."""
    return float(herm_eig(difference_operator(phi, theta))[0][0])
