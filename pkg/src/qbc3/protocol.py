"""Honest-party state machine for the decoy-state commitment protocol.

Babe sends ``m`` anonymous qubits drawn uniformly from the circle. Adam
modulates every one of them with ``U_b``, hides them at a uniformly random
ordered set of positions among ``n`` slots and fills the rest with uniform
circle decoys. To open he announces ``b`` and the placement; Babe projects
each named qubit onto the state she expects.

Qubit positions are 0-based list indices throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubit import TWO_PI, Modulation, measure_projective, modulate, projector, state_from_angle


class Phase(enum.Enum):
    PREPARED = "PREPARED"
    COMMITTED = "COMMITTED"
    OPENED = "OPENED"
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"


class PhaseError(RuntimeError):
    """An operation was attempted out of protocol order."""


@dataclass
class BabePreparation:
    angles: np.ndarray
    states: list[np.ndarray]

    @property
    def m(self) -> int:
        return len(self.angles)


@dataclass
class CommitmentMessage:
    qubits: list[np.ndarray]

    @property
    def n(self) -> int:
        return len(self.qubits)


@dataclass
class AdamSecret:
    bit: int
    placement: tuple[int, ...]
    decoy_angles: np.ndarray
    theta: float = math.pi


@dataclass(frozen=True)
class OpeningMessage:
    bit: int
    placement: tuple[int, ...]


@dataclass
class Verdict:
    accepted: bool | None
    probability: float
    protocol_violation: bool = False


def babe_prepare(m: int, rng: np.random.Generator) -> BabePreparation:
    if m < 1:
        raise ValueError("Babe must send at least one qubit")
    angles = rng.uniform(0.0, TWO_PI, size=m)
    return BabePreparation(angles=angles, states=[state_from_angle(a) for a in angles])


def random_placement(n: int, m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform injective map from ``range(m)`` into ``range(n)``; all ``(n)_m`` equally likely."""
    return tuple(int(i) for i in rng.permutation(n)[:m])


def adam_commit(
    states: Sequence[np.ndarray],
    bit: int,
    n: int,
    rng: np.random.Generator,
    theta: float = math.pi,
) -> tuple[CommitmentMessage, AdamSecret]:
    m = len(states)
    if m < 1:
        raise ValueError("nothing to commit: Babe sent no qubits")
    if n < m:
        raise ValueError(f"n={n} slots cannot hold m={m} signal qubits")
    mod = Modulation(bit, theta)
    placement = random_placement(n, m, rng)
    decoy_angles = rng.uniform(0.0, TWO_PI, size=n - m)
    qubits: list[np.ndarray | None] = [None] * n
    for j, i in enumerate(placement):
        qubits[i] = modulate(states[j], mod)
    decoys = iter(decoy_angles)
    for i in range(n):
        if qubits[i] is None:
            qubits[i] = state_from_angle(next(decoys))
    return CommitmentMessage(qubits), AdamSecret(bit, placement, decoy_angles, theta)


def adam_open(secret: AdamSecret) -> OpeningMessage:
    return OpeningMessage(secret.bit, tuple(secret.placement))


def placement_is_valid(placement: Sequence[int], n: int, m: int) -> bool:
    return (
        len(placement) == m
        and len(set(placement)) == m
        and all(isinstance(i, (int, np.integer)) and 0 <= i < n for i in placement)
    )


def babe_verify(
    prep: BabePreparation,
    msg: CommitmentMessage,
    opening: OpeningMessage,
    theta: float = math.pi,
    rng: np.random.Generator | None = None,
) -> Verdict:
    """Test every named qubit against ``U_b |psi^j>``.

    With ``rng`` the projections are sampled and ``accepted`` is set; without
    it only the exact acceptance probability is returned.
    """
    if opening.bit not in (0, 1) or not placement_is_valid(opening.placement, msg.n, prep.m):
        return Verdict(accepted=False if rng is not None else None, probability=0.0, protocol_violation=True)
    mod = Modulation(opening.bit, theta)
    prob = 1.0
    accepted = True
    for j, i in enumerate(opening.placement):
        target = modulate(prep.states[j], mod)
        p = projector(target)
        q = msg.qubits[i]
        prob *= float(np.clip(np.vdot(q, p @ q).real, 0.0, 1.0))
        if rng is not None and accepted:
            outcome = measure_projective(q, [p, np.eye(2) - p], rng, validate=False)
            accepted = outcome.index == 0
    return Verdict(accepted=accepted if rng is not None else None, probability=prob)


@dataclass
class CommitmentSession:
    """One protocol run, enforcing the phase order.

    ``PREPARED -> COMMITTED -> OPENED -> ACCEPTED | REJECTED``.
    """

    m: int
    n: int
    theta: float = math.pi
    seed: int | None = None
    phase: Phase | None = None
    prep: BabePreparation | None = None
    message: CommitmentMessage | None = None
    secret: AdamSecret | None = None
    opening: OpeningMessage | None = None
    verdict: Verdict | None = None
    history: list[Phase] = field(default_factory=list)

    def _require(self, phase: Phase | None, action: str) -> None:
        if self.phase is not phase:
            raise PhaseError(f"cannot {action} in phase {self.phase.value if self.phase else 'NEW'}")

    def _advance(self, phase: Phase) -> None:
        self.phase = phase
        self.history.append(phase)

    def prepare(self, rng: np.random.Generator) -> BabePreparation:
        self._require(None, "prepare")
        self.prep = babe_prepare(self.m, rng)
        self._advance(Phase.PREPARED)
        return self.prep

    def commit(self, bit: int, rng: np.random.Generator) -> CommitmentMessage:
        self._require(Phase.PREPARED, "commit")
        self.message, self.secret = adam_commit(self.prep.states, bit, self.n, rng, self.theta)
        self._advance(Phase.COMMITTED)
        return self.message

    def open(self, opening: OpeningMessage | None = None) -> OpeningMessage:
        """Record Adam's opening; honest by default, or a supplied (possibly dishonest) one."""
        self._require(Phase.COMMITTED, "open")
        self.opening = adam_open(self.secret) if opening is None else opening
        self._advance(Phase.OPENED)
        return self.opening

    def verify(self, rng: np.random.Generator | None = None) -> Verdict:
        self._require(Phase.OPENED, "verify")
        self.verdict = babe_verify(self.prep, self.message, self.opening, self.theta, rng)
        # analytic mode only accepts when acceptance is certain
        ok = self.verdict.accepted if rng is not None else self.verdict.probability >= 1.0 - 1e-12
        self._advance(Phase.ACCEPTED if ok and not self.verdict.protocol_violation else Phase.REJECTED)
        return self.verdict

    def transcript(self, reveal_secrets: bool = False) -> dict:
        out = {
            "m": self.m,
            "n": self.n,
            "theta": self.theta,
            "seed": self.seed,
            "phase": self.phase.value if self.phase else None,
            "placement": list(self.opening.placement) if self.opening else None,
            "bit": self.opening.bit if self.opening else None,
            "acceptance": None,
        }
        if self.verdict is not None:
            out["acceptance"] = self.verdict.accepted if self.verdict.accepted is not None else self.verdict.probability
            if self.verdict.protocol_violation:
                out["protocol_violation"] = True
        if reveal_secrets:
            out["babe_angles"] = [float(a) for a in self.prep.angles] if self.prep else None
            out["decoy_angles"] = [float(a) for a in self.secret.decoy_angles] if self.secret else None
        return out


def run_honest(m: int, n: int, bit: int, rng: np.random.Generator, theta: float = math.pi, sample: bool = True) -> CommitmentSession:
    session = CommitmentSession(m, n, theta)
    session.prepare(rng)
    session.commit(bit, rng)
    session.open()
    session.verify(rng if sample else None)
    return session
