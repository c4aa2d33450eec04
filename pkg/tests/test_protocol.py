import collections
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qbc3.bounds import ordered_placements
from qbc3.linalg import projector
from qbc3.protocol import (
    AdamSecret,
    CommitmentSession,
    OpeningMessage,
    Phase,
    PhaseError,
    adam_commit,
    adam_open,
    babe_prepare,
    babe_verify,
    run_honest,
)
from qbc3.qubit import Modulation, modulate, overlap, state_from_angle


class TestBabePrepare:
    def test_single(self, rng):
        prep = babe_prepare(1, rng)
        assert prep.m == 1 and np.linalg.norm(prep.states[0]) == pytest.approx(1)

    def test_states_match_angles(self, rng):
        prep = babe_prepare(5, rng)
        for a, s in zip(prep.angles, prep.states):
            np.testing.assert_array_equal(s, state_from_angle(a))

    def test_rejects_zero(self, rng):
        with pytest.raises(ValueError):
            babe_prepare(0, rng)

    def test_angles_uniform(self, rng):
        angles = np.concatenate([babe_prepare(3, rng).angles for _ in range(100_000)])
        assert stats.kstest(angles, stats.uniform(0, 2 * math.pi).cdf).pvalue > 0.01
        # the three angles of one preparation are uncorrelated
        a = angles.reshape(-1, 3)
        assert abs(np.corrcoef(a[:, 0], a[:, 1])[0, 1]) < 0.01


class TestAdamCommit:
    def test_no_decoys(self, rng):
        prep = babe_prepare(1, rng)
        msg, secret = adam_commit(prep.states, 1, 1, rng)
        assert secret.placement == (0,) and len(secret.decoy_angles) == 0
        np.testing.assert_allclose(msg.qubits[0], modulate(prep.states[0], Modulation(1)))

    def test_construction_identity(self, rng):
        prep = babe_prepare(3, rng)
        for bit in (0, 1):
            msg, secret = adam_commit(prep.states, bit, 8, rng)
            assert msg.n == 8
            for j, i in enumerate(secret.placement):
                assert np.max(np.abs(msg.qubits[i] - modulate(prep.states[j], Modulation(bit)))) <= 1e-12

    def test_rejects_short_sequence(self, rng):
        with pytest.raises(ValueError):
            adam_commit(babe_prepare(3, rng).states, 0, 2, rng)

    def test_placement_uniform(self, rng):
        states = babe_prepare(2, rng).states
        counts = collections.Counter(adam_commit(states, 0, 5, rng)[1].placement for _ in range(100_000))
        assert len(counts) == ordered_placements(5, 2) == 20
        assert stats.chisquare(list(counts.values())).pvalue > 0.01


class TestOpenVerify:
    def test_honest_open_copies_secret(self):
        secret = AdamSecret(0, (3,), np.array([0.1, 0.2, 0.3, 0.4]))
        assert adam_open(secret) == OpeningMessage(0, (3,))
        other = AdamSecret(0, (3,), np.array([1.0, 2.0, 3.0, 4.0]))
        assert adam_open(other) == adam_open(secret)

    def test_honest_accepts(self, rng):
        for seed in range(20):
            s = run_honest(3, 7, seed % 2, np.random.default_rng(seed), sample=False)
            assert s.verdict.probability == pytest.approx(1.0, abs=1e-12)
            assert s.phase is Phase.ACCEPTED

    def test_wrong_bit_rejected(self, rng):
        prep = babe_prepare(1, rng)
        msg, secret = adam_commit(prep.states, 0, 1, rng)
        v = babe_verify(prep, msg, OpeningMessage(1, secret.placement))
        assert v.probability == pytest.approx(0.0, abs=1e-12)

    def test_decoy_named_as_signal_averages_half(self):
        n = 20_000
        probs = []
        for seed in range(n):
            r = np.random.default_rng(seed)
            prep = babe_prepare(1, r)
            msg, secret = adam_commit(prep.states, 0, 2, r)
            decoy = 1 - secret.placement[0]
            probs.append(babe_verify(prep, msg, OpeningMessage(1, (decoy,))).probability)
        # exact per-run value is cos^2 of half the angle gap, uniform gap averages 1/2
        sd = math.sqrt(1 / 8)  # std of cos^2(U/2) for uniform U is sqrt(1/8)
        assert abs(np.mean(probs) - 0.5) <= 4 * sd / math.sqrt(n)

    @pytest.mark.parametrize("placement", [(0, 0), (0, 9), (0,), (-1, 2)])
    def test_malformed_placement(self, rng, placement):
        s = CommitmentSession(2, 4)
        s.prepare(rng)
        s.commit(0, rng)
        s.open(OpeningMessage(0, placement))
        v = s.verify(rng)
        assert v.protocol_violation and not v.accepted
        assert s.phase is Phase.REJECTED

    def test_sampled_completeness_sweep(self):
        for m in range(1, 5):
            for n in range(m, 12):
                for seed in range(100):
                    s = run_honest(m, n, seed % 2, np.random.default_rng(seed))
                    assert s.verdict.accepted and s.verdict.probability == pytest.approx(1, abs=1e-12)

    def test_bit_flip_never_accepted(self):
        rng = np.random.default_rng(99)
        accepted = 0
        for _ in range(100_000):
            prep = babe_prepare(1, rng)
            msg, secret = adam_commit(prep.states, 0, 3, rng)
            accepted += babe_verify(prep, msg, OpeningMessage(1, secret.placement), rng=rng).accepted
        assert accepted == 0

    def test_random_circle_state_against_fixed_projector(self):
        rng = np.random.default_rng(5)
        target = projector(state_from_angle(0.7))
        n = 100_000
        hits = 0
        for _ in range(n):
            q = state_from_angle(rng.uniform(0, 2 * math.pi))
            hits += rng.random() < np.vdot(q, target @ q).real
        assert abs(hits / n - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_theta_kept_as_parameter(self, rng):
        s = run_honest(2, 4, 1, rng, theta=math.pi / 3, sample=False)
        assert s.verdict.probability == pytest.approx(1.0, abs=1e-12)
        q = s.message.qubits[s.secret.placement[0]]
        assert overlap(q, state_from_angle(s.prep.angles[0] + math.pi / 3)) == pytest.approx(1.0)


class TestPhaseMachine:
    ACTIONS = ["prepare", "commit", "open", "verify"]

    def _do(self, s, action, rng):
        if action == "prepare":
            s.prepare(rng)
        elif action == "commit":
            s.commit(0, rng)
        elif action == "open":
            s.open()
        else:
            s.verify(rng)

    def test_forward_order(self, rng):
        s = CommitmentSession(1, 3)
        for a in self.ACTIONS:
            self._do(s, a, rng)
        assert s.history == [Phase.PREPARED, Phase.COMMITTED, Phase.OPENED, Phase.ACCEPTED]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from(ACTIONS), min_size=1, max_size=6))
    def test_only_legal_transitions_succeed(self, actions):
        rng = np.random.default_rng(0)
        s = CommitmentSession(1, 3)
        expected_next = 0
        for a in actions:
            if expected_next < 4 and a == self.ACTIONS[expected_next]:
                self._do(s, a, rng)
                expected_next += 1
            else:
                with pytest.raises(PhaseError):
                    self._do(s, a, rng)
        assert len(s.history) == expected_next


class TestTranscript:
    def test_fields_and_secrets(self, rng):
        s = run_honest(2, 5, 1, rng)
        s.seed = 17
        public = s.transcript()
        assert set(public) == {"m", "n", "theta", "seed", "phase", "placement", "bit", "acceptance"}
        assert public["phase"] == "ACCEPTED" and public["acceptance"] is True
        secret = s.transcript(reveal_secrets=True)
        assert len(secret["babe_angles"]) == 2 and len(secret["decoy_angles"]) == 3
        json.dumps(secret)
