"""Prioritized replay over vector-reward transitions.

Sampling probability follows priority^alpha. New transitions enter at
the current maximum priority so each is seen at least once; after a
gradient step the sampled rows are re-prioritized with the max norm of
their vector TD error plus a small floor. Importance weights are
(N P)^-beta, normalized by the largest weight any stored transition
could have, so they never exceed 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: np.ndarray
    next_state: np.ndarray
    terminal: bool


class PrioritizedReplay:
    """Fixed-capacity ring buffer with proportional prioritization."""

    def __init__(self, capacity: int, alpha: float = 0.6, eps: float = 1e-3):
        if capacity <= 0:
            raise ConfigError(f"replay capacity must be positive, got {capacity!r}")
        if alpha < 0.0 or eps < 0.0:
            raise ConfigError("replay alpha and eps must be non-negative")
        self.capacity = int(capacity)
        self.alpha = float(alpha)
        self.eps = float(eps)
        self._data: list = [None] * self.capacity
        self._prio = np.zeros(self.capacity)
        self._size = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self._size

    @property
    def priorities(self) -> np.ndarray:
        """Raw (un-exponentiated) priorities of the stored transitions."""
        return self._prio[: self._size].copy()

    def push(self, transition: Transition):
        p = float(self._prio[: self._size].max()) if self._size else 1.0
        self._data[self._cursor] = transition
        self._prio[self._cursor] = p
        self._cursor = (self._cursor + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, beta: float, rng: np.random.Generator):
        """(indices, transitions, importance weights); with replacement.

        The indices are storage slots: they stay valid for an immediate
        update_priorities call, before any further push wraps the ring.
        """
        if self._size == 0:
            raise ContractError("cannot sample from an empty replay buffer")
        if batch_size <= 0:
            raise ContractError(f"batch size must be positive, got {batch_size!r}")
        scaled = self._prio[: self._size] ** self.alpha
        probs = scaled / scaled.sum()
        idx = rng.choice(self._size, size=batch_size, p=probs, replace=True)
        iw = (self._size * probs[idx]) ** (-beta)
        iw /= (self._size * probs.min()) ** (-beta)
        return idx, [self._data[i] for i in idx], iw

    def update_priorities(self, indices, td_errors):
        for i, td in zip(indices, td_errors):
            self._prio[int(i)] = float(np.max(np.abs(np.asarray(td, dtype=float)))) + self.eps
