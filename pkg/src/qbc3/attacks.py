"""Cheating strategies for both parties, plus the purification attack on naive schemes.

Babe's attacks try to learn the committed bit before opening; Adam's try to
open the bit he did not commit to. For Adam the committed bit is fixed to 0
and the dishonest opening claims 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bounds
from .linalg import (
    MAX_DIM,
    RegisterTooLargeError,
    as_vector,
    fidelity,
    kron_all,
    partial_trace,
    projector,
    schmidt,
    trace_norm,
)
from .montecarlo import run_trials, wilson_interval
from .protocol import (
    BabePreparation,
    CommitmentMessage,
    OpeningMessage,
    adam_commit,
    babe_prepare,
    babe_verify,
    random_placement,
)
from .qubit import (
    CLONERS,
    I2,
    Cloner,
    basis_projectors,
    check_projectors,
    discrimination_basis,
    lambda_plus,
    measure_density,
    measure_projective,
    modulation_unitary,
    state_from_angle,
)

BABE_STRATEGIES = ("guess", "majority", "helstrom", "entangled")
ADAM_STRATEGIES = ("relabel", "clone")


@dataclass
class AttackReport:
    strategy: str
    parameters: dict
    empirical_success: float
    wilson95: tuple[float, float]
    analytic_reference: float | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.wilson95
        if not lo <= self.empirical_success <= hi:
            raise ValueError("empirical success lies outside its interval")

    def to_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "parameters": self.parameters,
            "empiricalSuccess": self.empirical_success,
            "wilsonInterval95": list(self.wilson95),
            "analyticReference": self.analytic_reference,
        }
        if self.extras:
            out["extras"] = self.extras
        return out


def _report(strategy, params, outcomes, analytic=None, extras=None) -> AttackReport:
    wins = int(sum(bool(o) for o in outcomes))
    trials = len(outcomes)
    return AttackReport(
        strategy=strategy,
        parameters=params,
        empirical_success=wins / trials,
        wilson95=wilson_interval(wins, trials),
        analytic_reference=analytic,
        extras=extras or {},
    )


# -- dense density operators seen by Babe ---------------------------------


def embed(op: np.ndarray, positions: Sequence[int], n: int, fill: np.ndarray | None = None) -> np.ndarray:
    """Place a ``k``-qubit operator on ``positions`` of an ``n``-qubit register.

    Qubit ``j`` of ``op`` lands on ``positions[j]``; every other qubit gets
    ``fill`` (default ``I/2``).
    """
    k = len(positions)
    if 2**n > MAX_DIM:
        raise RegisterTooLargeError(f"register too large: {n} qubits")
    fill = I2 / 2 if fill is None else fill
    rest = [i for i in range(n) if i not in positions]
    full = kron_all(op, *([fill] * len(rest))) if rest else op
    order = list(positions) + rest  # source axis a holds qubit order[a]
    src = [order.index(q) for q in range(n)]
    t = full.reshape([2] * (2 * n)).transpose(src + [n + s for s in src])
    return t.reshape(2**n, 2**n)


def placement_mixture(op: np.ndarray, n: int, symmetric: bool = False) -> np.ndarray:
    """Average of ``embed(op, J, n)`` over all ``(n)_m`` ordered placements ``J``.

    ``symmetric=True`` declares ``op`` invariant under qubit permutations, in
    which case unordered placements suffice.
    """
    m = int(round(math.log2(op.shape[0])))
    placements = itertools.combinations(range(n), m) if symmetric else itertools.permutations(range(n), m)
    total = None
    count = 0
    for pos in placements:
        term = embed(op, pos, n)
        total = term if total is None else total + term
        count += 1
    return total / count


def modulated_signal(bit: int, m: int, theta: float = math.pi, phi: float = 0.0) -> np.ndarray:
    """``sigma_b`` on each of ``m`` qubits when Babe sends one circle state ``m`` times."""
    s = modulation_unitary(bit, theta) @ state_from_angle(phi)
    return kron_all(*([projector(s)] * m))


def babe_density(n: int, m: int, bit: int, theta: float = math.pi, phi: float = 0.0) -> np.ndarray:
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    return placement_mixture(modulated_signal(bit, m, theta, phi), n, symmetric=True)


def helstrom_success(rho0: np.ndarray, rho1: np.ndarray) -> float:
    """Optimal equal-prior discrimination probability ``1/2 + ||rho0 - rho1||_1 / 4``."""
    return 0.5 + 0.25 * trace_norm(rho0 - rho1, tol=1e-10)


def babe_helstrom_exact(n: int, m: int = 1, theta: float = math.pi, phi: float = 0.0) -> float:
    return helstrom_success(babe_density(n, m, 0, theta, phi), babe_density(n, m, 1, theta, phi))


# -- Monte Carlo attacks by Babe ------------------------------------------


def _trial_guess(rng: np.random.Generator, n: int, theta: float) -> bool:
    prep = babe_prepare(1, rng)
    bit = int(rng.integers(2))
    msg, _ = adam_commit(prep.states, bit, n, rng, theta)
    pos = int(rng.integers(n))
    basis = basis_projectors(*discrimination_basis(prep.angles[0], theta))
    return measure_projective(msg.qubits[pos], basis, rng).index == bit


def babe_guess_position(n: int, theta: float = math.pi, trials: int = 100_000, seed: int = 0, workers=None) -> AttackReport:
    """Guess where the single signal sits and measure only that qubit."""
    if n < 1:
        raise ValueError("n must be positive")
    outcomes = run_trials(_trial_guess, trials, seed, (n, theta), workers)
    analytic = 0.5 + lambda_plus(theta) / (2 * n)
    params = dict(m=1, n=n, theta=theta, trials=trials, seed=seed)
    return _report("guess", params, outcomes, analytic, {"guess_baseline": bounds.guess_baseline(n)})


def _trial_majority(rng: np.random.Generator, n: int, m: int, theta: float) -> bool:
    phi = float(rng.uniform(0.0, 2 * math.pi))
    state = state_from_angle(phi)
    prep = BabePreparation(angles=np.full(m, phi), states=[state] * m)
    bit = int(rng.integers(2))
    msg, _ = adam_commit(prep.states, bit, n, rng, theta)
    basis = basis_projectors(*discrimination_basis(phi, theta))
    check_projectors(basis, 2)
    plus = sum(measure_projective(q, basis, rng, validate=False).index == 0 for q in msg.qubits)
    return (0 if plus > n - plus else 1) == bit


def majority_success_exact(n: int, m: int, theta: float = math.pi) -> float:
    """Majority-vote success for any ``theta`` by convolving the two binomials."""
    p = 0.5 * (1.0 + lambda_plus(theta))
    signal = [math.comb(m, k) * p**k * (1 - p) ** (m - k) for k in range(m + 1)]
    decoy = [math.comb(n - m, k) / 2 ** (n - m) for k in range(n - m + 1)]
    return sum(a * b for i, a in enumerate(signal) for j, b in enumerate(decoy) if 2 * (i + j) > n)


def babe_majority_vote(n: int, m: int, theta: float = math.pi, trials: int = 100_000, seed: int = 0, workers=None) -> AttackReport:
    """Send ``m`` copies of one circle state, measure all ``n`` qubits, majority-vote."""
    if n % 2 == 0:
        raise ValueError("majority vote needs odd n (ties are undefined)")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    outcomes = run_trials(_trial_majority, trials, seed, (n, m, theta), workers)
    extras = {}
    if (n - m) % 2 == 0 and m < n:
        extras["closed_form_gap"] = bounds.majority_gap(n, m)
    params = dict(m=m, n=n, theta=theta, trials=trials, seed=seed)
    return _report("majority", params, outcomes, majority_success_exact(n, m, theta), extras)


def babe_helstrom_report(n: int, m: int = 1, theta: float = math.pi) -> AttackReport:
    value = babe_helstrom_exact(n, m, theta)
    ref = 0.5 + bounds.helstrom_gap_m1(n, lambda_plus(theta)) if m == 1 and n % 2 else None
    params = dict(m=m, n=n, theta=theta, trials=0, seed=None)
    return AttackReport("helstrom", params, value, (value, value), ref)


# -- Babe's entanglement ---------------------------------------------------


def entangled_pair(bit: int, theta: float = math.pi, weights: Sequence[float] = (0.5, 0.5)) -> np.ndarray:
    """Babe keeps qubit 0 and sends qubit 1, which Adam modulates with ``U_b``."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (2,) or abs(w.sum() - 1.0) > 1e-10 or np.any(w < 0):
        raise ValueError("weights must be two probabilities")
    chi = math.sqrt(w[0]) * np.kron([1, 0], [1, 0]) + math.sqrt(w[1]) * np.kron([0, 1], [0, 1])
    chi = np.kron(I2, modulation_unitary(bit, theta)) @ chi.astype(complex)
    return projector(chi)


def entangled_density(n: int, m: int, bit: int, theta: float = math.pi, weights=(0.5, 0.5)) -> np.ndarray:
    """Joint state of Babe's ``m`` kept qubits (first) and the ``n``-qubit commitment."""
    if 2 ** (n + m) > MAX_DIM:
        raise RegisterTooLargeError(f"register too large: {n + m} qubits")
    op = kron_all(*([entangled_pair(bit, theta, weights)] * m))
    total = None
    count = 0
    for pos in itertools.permutations(range(n), m):
        targets = [q for j in range(m) for q in (j, m + pos[j])]
        term = embed(op, targets, n + m)
        total = term if total is None else total + term
        count += 1
    return total / count


def babe_entangled_attack(
    n: int,
    m: int = 1,
    theta: float = math.pi,
    guessed_positions: Sequence[int] | None = None,
    weights: Sequence[float] = (0.5, 0.5),
) -> AttackReport:
    """Exact Helstrom value when Babe's inputs are halves of entangled pairs.

    Without ``guessed_positions`` the optimum is over joint measurements on
    her kept qubits and the whole commitment. With them she only measures
    her kept qubits together with the guessed slots.
    """
    rho0 = entangled_density(n, m, 0, theta, weights)
    rho1 = entangled_density(n, m, 1, theta, weights)
    if guessed_positions is not None:
        guessed = list(guessed_positions)
        if len(guessed) != m or len(set(guessed)) != m or not all(0 <= g < n for g in guessed):
            raise ValueError("guessed_positions must be m distinct slots")
        keep = list(range(m)) + [m + g for g in guessed]
        dims = [2] * (n + m)
        rho0, rho1 = partial_trace(rho0, dims, keep), partial_trace(rho1, dims, keep)
    value = helstrom_success(rho0, rho1)
    unentangled = babe_helstrom_exact(n, m, theta)
    params = dict(m=m, n=n, theta=theta, trials=0, seed=None, weights=list(map(float, weights)))
    if guessed_positions is not None:
        params["guessed_positions"] = list(guessed_positions)
    extras = {
        "mode": "guessed" if guessed_positions is not None else "joint",
        "unentangled_optimum": unentangled,
        "gap_vs_unentangled": value - unentangled,
        "miss_probability": bounds.hypergeom_miss(n, m),
    }
    return AttackReport("entangled", params, value, (value, value), unentangled, extras)


# -- Adam's attacks --------------------------------------------------------


def _relabel_opening(placement: Sequence[int], n: int, m: int, rng: np.random.Generator) -> OpeningMessage:
    signal = set(placement)
    decoys = [i for i in range(n) if i not in signal]
    rng.shuffle(decoys)
    # prefer decoys; only if there are too few fall back to (certainly failing) signal slots
    named = decoys[:m]
    if len(named) < m:
        spare = [i for i in placement]
        rng.shuffle(spare)
        named += spare[: m - len(named)]
    return OpeningMessage(1, tuple(int(i) for i in named))


def _trial_relabel(rng: np.random.Generator, n: int, m: int, theta: float) -> bool:
    prep = babe_prepare(m, rng)
    msg, secret = adam_commit(prep.states, 0, n, rng, theta)
    opening = _relabel_opening(secret.placement, n, m, rng)
    return bool(babe_verify(prep, msg, opening, theta, rng).accepted)


def adam_relabel_attack(n: int, m: int = 1, theta: float = math.pi, trials: int = 100_000, seed: int = 0, workers=None) -> AttackReport:
    """Commit to 0 honestly, then claim 1 by pointing at decoy slots."""
    if n <= m:
        raise ValueError("relabel attack needs decoys (n > m)")
    outcomes = run_trials(_trial_relabel, trials, seed, (n, m, theta), workers)
    analytic = 0.5**m if n >= 2 * m else None
    params = dict(m=m, n=n, theta=theta, trials=trials, seed=seed)
    return _report("relabel", params, outcomes, analytic)


_CLONER_CACHE: dict[str, Cloner] = {}


def _cloner(name: str) -> Cloner:
    if name not in _CLONER_CACHE:
        _CLONER_CACHE[name] = CLONERS[name]()
    return _CLONER_CACHE[name]


def _trial_clone(rng: np.random.Generator, n: int, m: int, theta: float, cloner_name: str, open_bit: int) -> tuple[int, bool]:
    """Returns (accepted single-qubit tests, whole opening accepted)."""
    cloner = _cloner(cloner_name)
    prep = babe_prepare(m, rng)
    u0, u1 = modulation_unitary(0, theta), modulation_unitary(1, theta)
    slots = random_placement(n, 2 * m, rng)
    decoy_angles = rng.uniform(0.0, 2 * math.pi, size=n - 2 * m)
    qubits: list[np.ndarray | None] = [None] * n
    for j, state in enumerate(prep.states):
        c1, c2, _ = cloner(state)
        qubits[slots[2 * j]] = u0 @ c1 @ u0.conj().T
        qubits[slots[2 * j + 1]] = u1 @ c2 @ u1.conj().T
    decoys = iter(decoy_angles)
    for i in range(n):
        if qubits[i] is None:
            qubits[i] = projector(state_from_angle(next(decoys)))
    named = [slots[2 * j + open_bit] for j in range(m)]
    u = u1 if open_bit else u0
    passed = 0
    for j, i in enumerate(named):
        target = u @ prep.states[j]
        p = projector(target)
        passed += measure_density(qubits[i], [p, np.eye(2) - p], rng, validate=False) == 0
    return passed, passed == m


def clone_acceptance_exact(cloner: Cloner, theta: float = math.pi, bit: int = 1) -> float:
    """Per-qubit acceptance of a cloned-and-modulated copy, averaged over the circle.

    Modulation commutes with the test, so this is the cloner's copy fidelity;
    the 16-point average is exact for a phase-covariant machine and checks it.
    """
    u = modulation_unitary(bit, theta)
    vals = []
    for phi in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
        psi = state_from_angle(phi)
        c1, c2, _ = cloner(psi)
        copy = c2 if bit else c1
        t = u @ psi
        vals.append(np.vdot(t, u @ copy @ u.conj().T @ t).real)
    return float(np.mean(vals))


def adam_clone_attack(
    n: int,
    m: int = 1,
    theta: float = math.pi,
    trials: int = 100_000,
    seed: int = 0,
    cloner: str = "phase_covariant",
    open_bit: int = 1,
    workers=None,
) -> AttackReport:
    """Clone each signal, modulate one copy each way, name whichever copy suits."""
    if n < 2 * m:
        raise ValueError(f"clone attack needs 2m={2 * m} slots, n={n}")
    if cloner not in CLONERS:
        raise ValueError(f"unknown cloner {cloner!r}; choose from {sorted(CLONERS)}")
    results = run_trials(_trial_clone, trials, seed, (n, m, theta, cloner, open_bit), workers)
    per_qubit_hits = sum(r[0] for r in results)
    per_qubit_trials = trials * m
    p_clone = clone_acceptance_exact(CLONERS[cloner](), theta, open_bit)
    params = dict(m=m, n=n, theta=theta, trials=trials, seed=seed, cloner=cloner, open_bit=open_bit)
    extras = {
        "per_qubit_empirical": per_qubit_hits / per_qubit_trials,
        "per_qubit_wilson95": list(wilson_interval(per_qubit_hits, per_qubit_trials)),
        "per_qubit_analytic": p_clone,
        "cloner_fidelity": CLONERS[cloner]().analytic_fidelity(),
    }
    return _report("clone", params, [r[1] for r in results], bounds.adam_decay(p_clone, m), extras)


# -- purification attack on naive protocols --------------------------------


@dataclass
class NaiveProtocolSpec:
    """Two openly known ensembles ``[(p_i, |phi_i>), ...]`` for bits 0 and 1."""

    ensemble0: list
    ensemble1: list

    def __post_init__(self):
        self.ensemble0 = [(float(p), as_vector(v)) for p, v in self.ensemble0]
        self.ensemble1 = [(float(p), as_vector(v)) for p, v in self.ensemble1]
        dims = {v.size for _, v in self.ensemble0 + self.ensemble1}
        if len(dims) != 1:
            raise ValueError("all ensemble states must live in one space")
        for ens in (self.ensemble0, self.ensemble1):
            if not ens:
                raise ValueError("empty ensemble")
            if abs(sum(p for p, _ in ens) - 1.0) > 1e-10 or any(p < 0 for p, _ in ens):
                raise ValueError("ensemble probabilities must be non-negative and sum to 1")
            if any(abs(np.linalg.norm(v) - 1.0) > 1e-10 for _, v in ens):
                raise ValueError("ensemble states must be unit vectors")

    @property
    def dim_b(self) -> int:
        return self.ensemble0[0][1].size

    @property
    def dim_a(self) -> int:
        return max(len(self.ensemble0), len(self.ensemble1))

    def density(self, bit: int) -> np.ndarray:
        ens = self.ensemble1 if bit else self.ensemble0
        return sum(p * projector(v) for p, v in ens)


@dataclass
class Purification:
    vector: np.ndarray
    dim_a: int
    dim_b: int
    states: list  # ensemble states, indexed like the ancilla basis

    @property
    def ancilla_basis(self) -> np.ndarray:
        return np.eye(self.dim_a, dtype=complex)

    @property
    def matrix(self) -> np.ndarray:
        return self.vector.reshape(self.dim_a, self.dim_b)

    def reduced_b(self) -> np.ndarray:
        return partial_trace(projector(self.vector), [self.dim_a, self.dim_b], [1])


@dataclass
class CheatUnitary:
    matrix: np.ndarray

    def __post_init__(self):
        d = self.matrix.shape[0]
        if np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(d))) > 1e-9:
            raise ValueError("cheat operation is not unitary")

    def apply(self, p: Purification) -> np.ndarray:
        return np.kron(self.matrix, np.eye(p.dim_b)) @ p.vector


def _purify(ensemble, dim_a: int) -> Purification:
    dim_b = ensemble[0][1].size
    vec = np.zeros(dim_a * dim_b, dtype=complex)
    for i, (p, v) in enumerate(ensemble):
        vec[i * dim_b : (i + 1) * dim_b] += math.sqrt(p) * v
    return Purification(vec, dim_a, dim_b, [v for _, v in ensemble])


def epr_build_purifications(spec: NaiveProtocolSpec) -> tuple[Purification, Purification]:
    """``|Phi_b> = sum_i sqrt(p_i) |e_i>|phi_i>`` with a shared standard-basis ancilla."""
    return _purify(spec.ensemble0, spec.dim_a), _purify(spec.ensemble1, spec.dim_a)


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary ``U`` maximising ``Re tr(U m)``."""
    w, _, vh = np.linalg.svd(m)
    return vh.conj().T @ w.conj().T


def _complete_basis(cols: np.ndarray) -> np.ndarray:
    d, k = cols.shape
    if k == d:
        return cols
    # orthonormal complement from the SVD null space of the given columns
    _, _, vh = np.linalg.svd(cols.conj().T)
    return np.hstack([cols, vh[k:].conj().T])


def _schmidt_blocks(coeffs: np.ndarray, tol: float = 1e-8) -> list[list[int]]:
    blocks: list[list[int]] = []
    for k, c in enumerate(coeffs):
        if blocks and abs(coeffs[blocks[-1][0]] - c) <= tol:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return blocks


def _schmidt_cheat(phi0: Purification, phi1: Purification) -> np.ndarray:
    """Send the Schmidt vectors of ``|Phi_0>`` on A onto those of ``|Phi_1>``.

    Inside each block of equal Schmidt coefficients the map is the polar
    factor of the block's cross-overlap matrix.
    """
    s0 = schmidt(phi0.vector, phi0.dim_a, phi0.dim_b)
    s1 = schmidt(phi1.vector, phi1.dim_a, phi1.dim_b)
    r = s0.coefficients.size
    # G[k', k] = sqrt(mu_k' lambda_k) <phi'_k'|phi_k>
    g = np.outer(s1.coefficients, s0.coefficients) * (s1.right.conj().T @ s0.right)
    c = np.eye(phi0.dim_a, dtype=complex)
    for block in _schmidt_blocks(s0.coefficients):
        idx = np.ix_(block, block)
        # U e_k = sum_k' C[k', k] e'_k'; overlap is tr(C^T G) on the block
        c[idx] = _polar_unitary(g[idx]).T
    e0 = _complete_basis(s0.left[:, :r])
    e1 = _complete_basis(s1.left[:, :r])
    return e1 @ c @ e0.conj().T


def epr_cheat_unitary(phi0: Purification, phi1: Purification, method: str = "uhlmann") -> tuple[CheatUnitary, float]:
    """Adam's switching operation on A and the overlap ``|<Phi_1|(U x I)|Phi_0>|`` it reaches.

    ``uhlmann`` takes the polar factor of the full cross-overlap and reaches
    the fidelity of the reduced states. ``schmidt`` aligns Schmidt vectors
    block by block, which is exact when the reduced states coincide.
    """
    if (phi0.dim_a, phi0.dim_b) != (phi1.dim_a, phi1.dim_b):
        raise ValueError("purifications live in different spaces")
    if method == "uhlmann":
        u = _polar_unitary(phi0.matrix @ phi1.matrix.conj().T)
    elif method == "schmidt":
        u = _schmidt_cheat(phi0, phi1)
    else:
        raise ValueError(f"unknown method {method!r}")
    cheat = CheatUnitary(u)
    return cheat, float(abs(np.vdot(phi1.vector, cheat.apply(phi0))))


def opening_success(state: np.ndarray, target: Purification) -> float:
    """Adam measures A in ``{e'_i}``, announces ``i``; Babe projects B onto ``|phi'_i>``."""
    x = state.reshape(target.dim_a, target.dim_b)
    total = 0.0
    for i, v in enumerate(target.states):
        total += abs(np.vdot(v, x[i])) ** 2
    return float(total)


def epr_demo_naive(spec: NaiveProtocolSpec, method: str = "uhlmann") -> dict:
    """Concealment for Babe versus switching power for Adam on one naive scheme."""
    phi0, phi1 = epr_build_purifications(spec)
    rho0, rho1 = spec.density(0), spec.density(1)
    cheat, achieved = epr_cheat_unitary(phi0, phi1, method)
    return {
        "babe_helstrom": helstrom_success(rho0, rho1),
        "fidelity": fidelity(rho0, rho1),
        "achieved_overlap": achieved,
        "adam_opening_success": opening_success(cheat.apply(phi0), phi1),
        "method": method,
    }


def bb84_spec(epsilon: float = 0.0) -> NaiveProtocolSpec:
    """Computational vs diagonal basis, with the diagonal priors skewed by ``epsilon``."""
    s = 1 / math.sqrt(2)
    return NaiveProtocolSpec(
        [(0.5, [1, 0]), (0.5, [0, 1])],
        [(0.5 + epsilon, [s, s]), (0.5 - epsilon, [s, -s])],
    )
