"""Two-objective seed scheduling for the generation loop.

Seeds carry a pair of scores to minimize: consensus among the systems
under test, and negated drift of the expected transcript from the benign
one. A seed beats another only by strictly improving both. The pool
keeps non-dominated seeds up to a cap and evicts from the most crowded
patch of objective space when full.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from random import Random
from typing import Sequence

from .errors import EmptyInputError, InvalidChainError, WrongPoolError
from .mutation import MutationChain, chain_from_json, chain_to_json

log = logging.getLogger(__name__)

POOL_CAP = 64
CROWDING_RADIUS = 0.01

SENTINEL_ID = "benign"


@dataclass(frozen=True)
class ScoredSeed:
    seed_id: str
    benign_ref: str
    chain: MutationChain
    f1: float
    f2: float

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f1, self.f2)


def dominates(a: ScoredSeed, b: ScoredSeed) -> bool:
    """True when `a` is strictly better than `b` on both objectives."""
    if a.benign_ref != b.benign_ref:
        raise WrongPoolError(
            f"cannot compare seeds from {a.benign_ref!r} and {b.benign_ref!r}"
        )
    return a.f1 < b.f1 and a.f2 < b.f2


def pareto_frontier(seeds: Sequence[ScoredSeed]) -> list[ScoredSeed]:
    """Non-dominated subset, original order preserved."""
    if not seeds:
        raise EmptyInputError("no seeds to rank")
    out = []
    for i, s in enumerate(seeds):
        if not any(dominates(t, s) for j, t in enumerate(seeds) if j != i):
            out.append(s)
    return out


class SeedPool:
    """Bounded pool of candidate seeds for one benign recording.

    The benign recording itself is the sentinel seed: an empty chain
    whose objectives no mutant can strictly beat on both axes, so it is
    never evicted and the pool never runs dry.
    """

    def __init__(self, benign_ref: str, cap: int = POOL_CAP):
        if cap < 1:
            raise EmptyInputError(f"pool cap must be positive, got {cap}")
        self._benign_ref = benign_ref
        self._cap = cap
        self._seeds: list[ScoredSeed] = []
        self._insertion_seq: dict[str, int] = {}
        self._next_seq = 0

    @classmethod
    def create(cls, benign_ref: str, sentinel_f1: float, cap: int = POOL_CAP) -> "SeedPool":
        pool = cls(benign_ref, cap)
        sentinel = ScoredSeed(
            seed_id=SENTINEL_ID,
            benign_ref=benign_ref,
            chain=MutationChain(benign_ref=benign_ref),
            f1=sentinel_f1,
            f2=-1.0,
        )
        pool._admit(sentinel)
        return pool

    @property
    def benign_ref(self) -> str:
        return self._benign_ref

    @property
    def seeds(self) -> tuple[ScoredSeed, ...]:
        return tuple(self._seeds)

    def __len__(self) -> int:
        return len(self._seeds)

    def __contains__(self, seed_id: str) -> bool:
        return any(s.seed_id == seed_id for s in self._seeds)

    def _admit(self, seed: ScoredSeed) -> None:
        self._seeds.append(seed)
        self._insertion_seq[seed.seed_id] = self._next_seq
        self._next_seq += 1

    def update(self, candidate: ScoredSeed) -> bool:
        """Offer a scored seed; True if it joined the pool."""
        if candidate.benign_ref != self._benign_ref:
            raise WrongPoolError(
                f"seed for {candidate.benign_ref!r} offered to pool {self._benign_ref!r}"
            )
        if candidate.seed_id in self:
            return False
        if any(dominates(held, candidate) for held in self._seeds):
            log.debug("%s: rejected dominated seed %s", self._benign_ref, candidate.seed_id)
            return False
        beaten = [s for s in self._seeds if dominates(candidate, s)]
        for s in beaten:
            log.debug("%s: dropped %s, dominated by %s", self._benign_ref, s.seed_id, candidate.seed_id)
        self._seeds = [s for s in self._seeds if not dominates(candidate, s)]
        self._admit(candidate)
        if len(self._seeds) > self._cap:
            self._evict_one()
        return candidate.seed_id in self

    def _evict_one(self) -> None:
        # Crowd size: neighbors within a small L-inf box around each seed.
        counts = []
        for s in self._seeds:
            c = sum(
                1
                for t in self._seeds
                if max(abs(s.f1 - t.f1), abs(s.f2 - t.f2)) <= CROWDING_RADIUS
            )
            counts.append(c)
        victim_idx = None
        victim_key = None
        for i, s in enumerate(self._seeds):
            if s.seed_id == SENTINEL_ID:
                continue
            key = (counts[i], self._insertion_seq[s.seed_id])
            if victim_key is None or key > victim_key:
                victim_key = key
                victim_idx = i
        if victim_idx is None:
            # Cap 1 pool holding only the sentinel; nothing to evict.
            return
        evicted = self._seeds.pop(victim_idx)
        del self._insertion_seq[evicted.seed_id]
        log.debug("%s: evicted %s from a crowded patch", self._benign_ref, evicted.seed_id)

    def select(self, rng: Random) -> ScoredSeed:
        if not self._seeds:
            raise EmptyInputError(f"pool for {self._benign_ref!r} is empty")
        return self._seeds[rng.randrange(len(self._seeds))]

    # ------------------------------------------------------------ interchange

    def to_json(self) -> dict:
        return {
            "benign_ref": self._benign_ref,
            "cap": self._cap,
            "members": [
                {
                    "id": s.seed_id,
                    "f1": s.f1,
                    "f2": s.f2,
                    "chain": chain_to_json(s.chain),
                }
                for s in self._seeds
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SeedPool":
        try:
            pool = cls(str(doc["benign_ref"]), int(doc["cap"]))
            for item in doc["members"]:
                chain, _ = chain_from_json(item["chain"])
                pool._admit(
                    ScoredSeed(
                        seed_id=str(item["id"]),
                        benign_ref=pool._benign_ref,
                        chain=chain,
                        f1=float(item["f1"]),
                        f2=float(item["f2"]),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidChainError(f"malformed pool document: {exc}") from exc
        return pool

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SeedPool":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
