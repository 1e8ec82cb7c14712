"""
Server-side challenge store.

This is the only mutable state of the authentication service. A challenge
moves fresh -> consumed exactly once; the transition happens under a lock so
concurrent requests carrying the same value cannot both succeed. Issuing a
challenge first evicts every entry older than one TTL, so the store holds at
most the challenges issued within the last TTL.
"""
import logging
import secrets
import string
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, Optional

from config.constants import PHR_CHALLENGE_LENGTH, PHR_CHALLENGE_TTL_SECONDS
from phr_harness.errors import ChallengeExpired, ChallengeReplayed, ChallengeUnknown

logger = logging.getLogger(__name__)

CHALLENGE_ALPHABET = string.ascii_letters + string.digits


class ChallengeState(str, Enum):
    FRESH = "fresh"
    CONSUMED = "consumed"
    EXPIRED = "expired"


@dataclass(frozen=True)
class Challenge:
    value: str
    issued_at: float
    state: ChallengeState = ChallengeState.FRESH


def new_challenge_value(length: int = PHR_CHALLENGE_LENGTH) -> str:
    return "".join(secrets.choice(CHALLENGE_ALPHABET) for _ in range(length))


class ChallengeStore:
    def __init__(
        self,
        ttl_seconds: float = PHR_CHALLENGE_TTL_SECONDS,
        clock: Callable[[], float] = time.time,
        length: int = PHR_CHALLENGE_LENGTH,
    ):
        if ttl_seconds <= 0:
            raise ValueError("challenge TTL must be positive")
        self.ttl_seconds = ttl_seconds
        self.length = length
        self._clock = clock
        self._lock = threading.Lock()
        self._challenges: Dict[str, Challenge] = {}

    def _current(self, challenge: Challenge) -> Challenge:
        if challenge.state is ChallengeState.FRESH and self._clock() - challenge.issued_at > self.ttl_seconds:
            return replace(challenge, state=ChallengeState.EXPIRED)
        return challenge

    def _evict_stale_locked(self) -> int:
        """Drop every challenge issued more than one TTL ago, whatever its state."""
        cutoff = self._clock() - self.ttl_seconds
        stale = [v for v, c in self._challenges.items() if c.issued_at < cutoff]
        for value in stale:
            del self._challenges[value]
        return len(stale)

    def issue(self) -> Challenge:
        with self._lock:
            evicted = self._evict_stale_locked()
            if evicted:
                logger.debug(f"Evicted {evicted} stale challenges")
            value = new_challenge_value(self.length)
            while value in self._challenges:
                value = new_challenge_value(self.length)
            challenge = Challenge(value, self._clock())
            self._challenges[value] = challenge
        logger.debug(f"Issued challenge {value}")
        return challenge

    def lookup(self, value: str) -> Optional[Challenge]:
        with self._lock:
            challenge = self._challenges.get(value)
            return self._current(challenge) if challenge else None

    def state_of(self, value: str) -> Optional[ChallengeState]:
        challenge = self.lookup(value)
        return challenge.state if challenge else None

    def consume(self, value: str) -> Challenge:
        """
        Atomically mark a fresh challenge consumed.

        Raises:
            ChallengeUnknown, ChallengeExpired, ChallengeReplayed
        """
        with self._lock:
            stored = self._challenges.get(value)
            if stored is None:
                raise ChallengeUnknown(f"challenge {value!r} is not known")
            current = self._current(stored)
            if current.state is ChallengeState.CONSUMED:
                raise ChallengeReplayed(f"challenge {value!r} was already used")
            if current.state is ChallengeState.EXPIRED:
                self._challenges[value] = current
                raise ChallengeExpired(f"challenge {value!r} expired")
            consumed = replace(current, state=ChallengeState.CONSUMED)
            self._challenges[value] = consumed
            return consumed

    def purge(self) -> int:
        """Forget expired and consumed challenges; returns how many were dropped."""
        with self._lock:
            stale = [v for v, c in self._challenges.items() if self._current(c).state is not ChallengeState.FRESH]
            for value in stale:
                del self._challenges[value]
        return len(stale)

    def __len__(self) -> int:
        with self._lock:
            return len(self._challenges)
