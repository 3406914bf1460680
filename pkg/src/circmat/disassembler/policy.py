"""Goal-conditioned tabular value store and its on-disk format.

The table maps (state index, goal index) pairs to action values. Greedy
selection breaks ties toward the lowest action index, so behavior is
deterministic and an untouched table always proposes action 0. Files start
with the magic bytes ``CIROQ1`` followed by a version byte and a
zlib-compressed JSON payload whose entries are sorted, so identical tables
serialize to identical bytes.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .env import N_ACTIONS

POLICY_MAGIC = b"CIROQ1"
POLICY_VERSION = 1


class PolicyFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.7
    discount: float = 0.98
    eps_start: float = 1.0
    eps_end: float = 0.0
    # Fraction of the step budget over which exploration decays linearly.
    eps_decay_fraction: float = 0.8


@dataclass
class TabularPolicy:
    task: str
    grid: tuple[int, int]
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    q: dict[tuple[int, int], list[float]] = field(default_factory=dict)
    # Collision memory: (goal id, gripper cell id, action) triples observed
    # to collide. Coarser than the value table (cell instead of full state),
    # so one observed crash rules the move out for every part arrangement.
    collision_mask: set[tuple[int, int, int]] = field(default_factory=set)

    def row(self, state_idx: int, goal_idx: int) -> list[float]:
        key = (state_idx, goal_idx)
        values = self.q.get(key)
        if values is None:
            values = [0.0] * N_ACTIONS
            self.q[key] = values
        return values

    def value(self, state_idx: int, goal_idx: int) -> float:
        values = self.q.get((state_idx, goal_idx))
        return max(values) if values is not None else 0.0

    def allowed_actions(self, goal_idx: int, cell_id: int) -> list[int]:
        """Actions not known to collide from a cell under a goal; never empty."""
        if not self.collision_mask:
            return list(range(N_ACTIONS))
        allowed = [
            a for a in range(N_ACTIONS) if (goal_idx, cell_id, a) not in self.collision_mask
        ]
        return allowed or list(range(N_ACTIONS))

    def remember_collision(self, goal_idx: int, cell_id: int, action: int) -> None:
        self.collision_mask.add((goal_idx, cell_id, action))

    def greedy(self, state_idx: int, goal_idx: int, allowed: list[int] | None = None) -> int:
        actions = allowed if allowed is not None else range(N_ACTIONS)
        values = self.q.get((state_idx, goal_idx))
        if values is None:
            return next(iter(actions))
        best = -1
        for a in actions:
            if best < 0 or values[a] > values[best]:
                best = a
        return best

    def action(self, env, state) -> int:
        """Greedy action for an environment state under that env's goal."""
        goal_idx = env.goal_index()
        allowed = self.allowed_actions(goal_idx, env.cell_id(state.gripper))
        return self.greedy(env.obs_index(state), goal_idx, allowed)

    # -- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        payload = {
            "task": self.task,
            "grid": list(self.grid),
            "n_actions": N_ACTIONS,
            "hyperparams": {
                "learning_rate": self.hyperparams.learning_rate,
                "discount": self.hyperparams.discount,
                "eps_start": self.hyperparams.eps_start,
                "eps_end": self.hyperparams.eps_end,
                "eps_decay_fraction": self.hyperparams.eps_decay_fraction,
            },
            "entries": [
                [key[0], key[1], self.q[key]] for key in sorted(self.q)
            ],
            "collision_mask": [list(pair) for pair in sorted(self.collision_mask)],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return POLICY_MAGIC + bytes([POLICY_VERSION]) + zlib.compress(blob, level=6)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TabularPolicy":
        if data[: len(POLICY_MAGIC)] != POLICY_MAGIC:
            raise PolicyFormatError("not a policy file (bad magic header)")
        version = data[len(POLICY_MAGIC)]
        if version != POLICY_VERSION:
            raise PolicyFormatError(f"unsupported policy version {version}")
        payload = json.loads(zlib.decompress(data[len(POLICY_MAGIC) + 1 :]))
        if payload.get("n_actions") != N_ACTIONS:
            raise PolicyFormatError("policy was built for a different action set")
        hp = payload["hyperparams"]
        policy = cls(
            task=payload["task"],
            grid=tuple(payload["grid"]),
            hyperparams=Hyperparams(
                learning_rate=hp["learning_rate"],
                discount=hp["discount"],
                eps_start=hp["eps_start"],
                eps_end=hp["eps_end"],
                eps_decay_fraction=hp["eps_decay_fraction"],
            ),
        )
        for state_idx, goal_idx, values in payload["entries"]:
            policy.q[(state_idx, goal_idx)] = [float(v) for v in values]
        for cell_id, action in payload.get("collision_mask", []):
            policy.collision_mask.add((cell_id, action))
        return policy

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "TabularPolicy":
        return cls.from_bytes(Path(path).read_bytes())
