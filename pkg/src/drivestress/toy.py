"""A tiny two-objective chain for verifying the learners end to end.

Eight positions in a row, each holding a payout that grows toward the
far end with shrinking increments. One objective is the payout
collected, the other charges -0.1 per step taken, so every preference
weight has a different best stopping point: impatient weights collect
immediately, payout-hungry ones walk the whole chain, and the middle
ground stops part way. The optimal policy for any weight is computable
by backward induction, which makes this a ground-truth check that
weight-conditioned learning actually tracks the preference.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError

TREASURES = (0.30, 0.48, 0.62, 0.73, 0.82, 0.89, 0.95, 1.0)
STEP_COST = -0.1

ADVANCE = 0
COLLECT = 1


class TreasureChain:
    """Environment protocol: reset() -> state, step(a) -> (s, r, done, info)."""

    n_actions = 2
    n_objectives = 2
    state_dim = len(TREASURES)
    max_steps = len(TREASURES)

    def __init__(self, seed: int = 0):
        # deterministic chain; the seed is accepted for protocol parity
        self._pos = 0
        self._done = True

    def _state(self) -> np.ndarray:
        s = np.zeros(self.state_dim)
        s[self._pos] = 1.0
        return s

    def reset(self) -> np.ndarray:
        self._pos = 0
        self._done = False
        return self._state()

    def step(self, action: int):
        if self._done:
            raise ContractError("episode is over; call reset()")
        action = int(action)
        if action not in (ADVANCE, COLLECT):
            raise ContractError(f"action index out of range: {action!r}")
        at_end = self._pos == len(TREASURES) - 1
        if action == COLLECT or at_end:
            reward = np.array([TREASURES[self._pos], STEP_COST])
            self._done = True
        else:
            reward = np.array([0.0, STEP_COST])
            self._pos += 1
        return self._state(), reward, self._done, {}


def rollout_return(env: TreasureChain, policy, rng: np.random.Generator) -> np.ndarray:
    """Undiscounted vector return of one greedy episode."""
    state = env.reset()
    total = np.zeros(env.n_objectives)
    done = False
    while not done:
        state, reward, done, _ = env.step(policy(state, rng))
        total += reward
    return total
