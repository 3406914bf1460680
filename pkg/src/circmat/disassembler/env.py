"""Deterministic grid environment for the disassembly tasks.

Parts sit in per-cell stacks; a gripper moves one cell at a time, picks the
top part of its cell and places the held part on top of its cell. Goals are
target cells for specific parts. The cased task adds static chassis cells:
moving the gripper onto one is a collision that ends the episode with a
penalty. Rewards are -1 per step until every goal part rests on its target,
0 on the completing transition and -10 on a collision, so an untrained run
scores roughly minus the episode cap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .tasks import TWO_PARTS_ONE_TARGET, TaskSpec

# Actions, in tie-break priority order.
MOVE_N, MOVE_S, MOVE_E, MOVE_W, PICK, PLACE = range(6)
N_ACTIONS = 6
_DELTAS = {MOVE_N: (0, 1), MOVE_S: (0, -1), MOVE_E: (1, 0), MOVE_W: (-1, 0)}

STEP_REWARD = -1.0
COLLISION_REWARD = -10.0
SUCCESS_REWARD = 0.0


class InvalidAction(ValueError):
    pass


class GridTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class EnvState:
    """Full workspace state. Heights order parts within a cell stack from 0
    upward; a held part has height -1 and tracks the gripper cell."""

    positions: tuple[tuple[int, int], ...]
    heights: tuple[int, ...]
    gripper: tuple[int, int]
    held: int  # part id or -1
    collided: bool = False

    def key(self) -> tuple:
        return (self.positions, self.heights, self.gripper, self.held, self.collided)

    def stack_at(self, cell: tuple[int, int]) -> list[int]:
        """Part ids stacked on a cell, bottom first."""
        parts = [
            (h, pid)
            for pid, (pos, h) in enumerate(zip(self.positions, self.heights))
            if pos == cell and h >= 0
        ]
        return [pid for _, pid in sorted(parts)]

    def done_flags(self, goals: tuple[tuple[int, tuple[int, int]], ...]) -> tuple[bool, ...]:
        return tuple(
            self.positions[pid] == cell and self.held != pid for pid, cell in goals
        )


class DisassemblyEnv:
    """One task instance; layouts are re-sampled on every reset from the
    generator seeded at construction, so a fixed seed fixes the whole
    episode sequence."""

    def __init__(self, spec: TaskSpec, seed: int = 0):
        self.spec = spec
        self.n_parts = len(spec.parts)
        self.width, self.height = spec.grid
        self.n_cells = self.width * self.height
        if self.width < 1 or self.height < 1:
            raise GridTooSmall("grid must have positive extent")
        self.base = (self.width // 2, self.height // 2)
        self.chassis_cells = self._chassis_cells() if spec.has_chassis else frozenset()
        self._free_cells = sorted(
            (x, y)
            for x in range(self.width)
            for y in range(self.height)
            if (x, y) != self.base and (x, y) not in self.chassis_cells
        )
        # The cased workspace leaves only its outer rim for drop-off targets;
        # constrain those to the corners so the target set stays learnable.
        if spec.has_chassis:
            corners = [(0, 0), (self.width - 1, 0), (0, self.height - 1), (self.width - 1, self.height - 1)]
            self._goal_cells_pool = [c for c in corners if c in set(self._free_cells)]
        else:
            self._goal_cells_pool = self._free_cells
        self._goal_slots = self._goal_part_slots()
        distinct_goal_cells = len(set(slot for slot, _ in self._goal_slots))
        if len(self._goal_cells_pool) < distinct_goal_cells:
            raise GridTooSmall(
                f"{self.n_cells} cells cannot host the stack plus "
                f"{distinct_goal_cells} goal cells"
            )
        self._rng = random.Random(seed)
        self._state: EnvState | None = None
        self._steps = 0
        self._finished = True
        self.goals: tuple[tuple[int, tuple[int, int]], ...] = ()

    # -- layout ---------------------------------------------------------

    def _chassis_cells(self) -> frozenset[tuple[int, int]]:
        bx, by = self.width // 2, self.height // 2
        ring = [
            (bx + dx, by + dy)
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if (dx, dy) != (0, 0)
        ]
        if any(not (0 <= x < self.width and 0 <= y < self.height) for x, y in ring):
            raise GridTooSmall("chassis ring does not fit the grid")
        opening = (bx, by - 1)
        if self.spec.chassis_opening:
            ring.remove(opening)
        return frozenset(ring)

    def _goal_part_slots(self) -> tuple[tuple[int, int], ...]:
        """(goal slot, part id) pairs; parts sharing a slot share a cell."""
        if self.n_parts == 2:
            if self.spec.kind == TWO_PARTS_ONE_TARGET:
                return ((0, 0),)
            return ((0, 0), (1, 1))
        # Four-part tasks: both obstacles to one slot, buried part to another.
        return ((0, 0), (0, 1), (1, 2))

    @property
    def goal_parts(self) -> tuple[int, ...]:
        return tuple(pid for _, pid in self._goal_slots)

    @property
    def n_goal_cells(self) -> int:
        return len(set(slot for slot, _ in self._goal_slots))

    @property
    def max_episode_length(self) -> int:
        return self.spec.max_episode_length

    def reset(self) -> EnvState:
        """Sample a fresh layout: stack at the center, random goal cells and
        gripper start outside the chassis."""
        goal_cells = self._rng.sample(self._goal_cells_pool, self.n_goal_cells)
        gripper = self._rng.choice(self._free_cells)
        self.goals = tuple((pid, goal_cells[slot]) for slot, pid in self._goal_slots)

        # Stack at the base cell with part 0 on top, matching the task
        # descriptions (obstacles above the buried part above the base part).
        positions = tuple(self.base for _ in range(self.n_parts))
        heights = tuple(self.n_parts - 1 - pid for pid in range(self.n_parts))
        self._state = EnvState(
            positions=positions, heights=heights, gripper=gripper, held=-1
        )
        self._steps = 0
        self._finished = False
        return self._state

    # -- dynamics -------------------------------------------------------

    def is_success(self, state: EnvState) -> bool:
        return all(
            state.positions[pid] == cell and state.held != pid
            for pid, cell in self.goals
        )

    def transition(self, state: EnvState, action: int) -> tuple[EnvState, float, bool, bool]:
        """Pure one-step dynamics: (next state, reward, terminated, collision).

        Already-satisfied states are absorbing successes. Off-grid moves and
        impossible pick/place actions are costly no-ops.
        """
        if not isinstance(action, int) or isinstance(action, bool) or not (0 <= action < N_ACTIONS):
            raise InvalidAction(f"action must be an integer in [0, {N_ACTIONS}), got {action!r}")
        if self.is_success(state):
            return state, SUCCESS_REWARD, True, False

        if action in _DELTAS:
            dx, dy = _DELTAS[action]
            nx, ny = state.gripper[0] + dx, state.gripper[1] + dy
            if not (0 <= nx < self.width and 0 <= ny < self.height):
                next_state = state
            else:
                cell = (nx, ny)
                positions = state.positions
                if state.held >= 0:
                    positions = tuple(
                        cell if pid == state.held else pos
                        for pid, pos in enumerate(positions)
                    )
                collided = cell in self.chassis_cells
                next_state = replace(
                    state, positions=positions, gripper=cell, collided=collided
                )
                if collided:
                    return next_state, COLLISION_REWARD, False, True
        elif action == PICK:
            stack = state.stack_at(state.gripper)
            if state.held == -1 and stack:
                top = stack[-1]
                heights = tuple(
                    -1 if pid == top else h for pid, h in enumerate(state.heights)
                )
                next_state = replace(state, heights=heights, held=top)
            else:
                next_state = state
        else:  # PLACE
            if state.held >= 0:
                level = len(state.stack_at(state.gripper))
                heights = tuple(
                    level if pid == state.held else h
                    for pid, h in enumerate(state.heights)
                )
                next_state = replace(state, heights=heights, held=-1)
            else:
                next_state = state

        if self.is_success(next_state):
            return next_state, SUCCESS_REWARD, True, False
        return next_state, STEP_REWARD, False, False

    def step(self, action: int) -> tuple[EnvState, float, bool, bool]:
        """Stateful wrapper over transition() that counts steps and applies
        the episode-length cap: returns (state, reward, terminated, truncated)."""
        if self._finished or self._state is None:
            raise RuntimeError("episode is over; call reset() first")
        next_state, reward, terminated, collision = self.transition(self._state, action)
        self._steps += 1
        truncated = collision or (not terminated and self._steps >= self.max_episode_length)
        self._state = next_state
        self._finished = terminated or truncated
        return next_state, reward, terminated, truncated

    @property
    def state(self) -> EnvState:
        if self._state is None:
            raise RuntimeError("call reset() first")
        return self._state

    @property
    def steps_taken(self) -> int:
        return self._steps

    # -- tabular encodings ----------------------------------------------

    def cell_id(self, cell: tuple[int, int]) -> int:
        return cell[1] * self.width + cell[0]

    def obs_index(self, state: EnvState) -> int:
        """Mixed-radix packing of the full state into one integer key."""
        idx = 0
        for pos in state.positions:
            idx = idx * self.n_cells + self.cell_id(pos)
        for h in state.heights:
            idx = idx * (self.n_parts + 1) + (h + 1)
        idx = idx * self.n_cells + self.cell_id(state.gripper)
        idx = idx * (self.n_parts + 1) + (state.held + 1)
        return idx * 2 + (1 if state.collided else 0)

    def goal_index(self) -> int:
        return self._cells_index(tuple(cell for _, cell in self.goals))

    def achieved_index(self, state: EnvState) -> int:
        """Index of the goal the state actually realises (for relabeling)."""
        return self._cells_index(tuple(state.positions[pid] for pid in self.goal_parts))

    def _cells_index(self, cells: tuple[tuple[int, int], ...]) -> int:
        idx = 0
        for cell in cells:
            idx = idx * self.n_cells + self.cell_id(cell)
        return idx

    def success_under_goal(self, state: EnvState, goal_idx: int) -> bool:
        """Whether the state satisfies an arbitrary (possibly relabeled) goal."""
        if self.achieved_index(state) != goal_idx:
            return False
        return all(state.held != pid for pid in self.goal_parts)
