"""Exact shortest-plan search over the deterministic task dynamics.

Plans are found with A* under an admissible, goal-aware lower bound (each
misplaced part still needs its pick, its carry distance and its place; an
empty gripper still needs to reach the nearest misplaced part). Re-expansion
on a better path cost keeps the search exact even where the bound loses
consistency, so reported plan lengths are true shortest episode lengths.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import count

from .env import N_ACTIONS, DisassemblyEnv, EnvState

MAX_EXPANSIONS = 1_000_000


class StateSpaceTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class PlanResult:
    """Shortest action sequence to a success state, or unreachable."""

    actions: tuple[int, ...] | None
    expansions: int

    @property
    def reachable(self) -> bool:
        return self.actions is not None

    @property
    def length(self) -> int | None:
        return len(self.actions) if self.actions is not None else None


def _manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _lower_bound(env: DisassemblyEnv, state: EnvState) -> int:
    misplaced = [
        (pid, cell)
        for pid, cell in env.goals
        if not (state.positions[pid] == cell and state.held != pid)
    ]
    if not misplaced:
        return 0
    bound = 0
    for pid, cell in misplaced:
        bound += _manhattan(state.positions[pid], cell)
        bound += 1 if state.held == pid else 2
    if state.held == -1:
        bound += min(_manhattan(state.gripper, state.positions[pid]) for pid, _ in misplaced)
    elif all(state.held != pid for pid, _ in misplaced):
        # Holding a part nobody asked for: set it down, then reach a goal part.
        bound += 1 + min(
            _manhattan(state.gripper, state.positions[pid]) for pid, _ in misplaced
        )
    return bound


def shortest_plan(
    env: DisassemblyEnv, state: EnvState, max_expansions: int = MAX_EXPANSIONS
) -> PlanResult:
    """A* from one state to any success state of the env's current goals."""
    start_key = state.key()
    if env.is_success(state):
        return PlanResult(actions=(), expansions=0)

    tick = count()
    g_best: dict[tuple, int] = {start_key: 0}
    parent: dict[tuple, tuple[tuple, int]] = {}
    frontier: list[tuple[int, int, int, EnvState]] = [
        (_lower_bound(env, state), next(tick), 0, state)
    ]
    expansions = 0

    while frontier:
        _, _, g, current = heapq.heappop(frontier)
        key = current.key()
        if g > g_best.get(key, g):
            continue
        if env.is_success(current):
            actions: list[int] = []
            walk = key
            while walk != start_key:
                walk, action = parent[walk]
                actions.append(action)
            actions.reverse()
            return PlanResult(actions=tuple(actions), expansions=expansions)
        expansions += 1
        if expansions > max_expansions:
            raise StateSpaceTooLarge(
                f"search exceeded {max_expansions} expansions on task {env.spec.kind}"
            )
        for action in range(N_ACTIONS):
            nxt, _, _, collision = env.transition(current, action)
            if collision:
                continue
            nkey = nxt.key()
            if nkey == key:
                continue
            ng = g + 1
            if ng < g_best.get(nkey, ng + 1):
                g_best[nkey] = ng
                parent[nkey] = (key, action)
                heapq.heappush(frontier, (ng + _lower_bound(env, nxt), next(tick), ng, nxt))

    return PlanResult(actions=None, expansions=expansions)


class OraclePolicy:
    """Policy that follows exact shortest plans.

    Plans are computed lazily per encountered (state, goal) and cached along
    the planned path, so following a plan costs one search per episode.
    Unreachable layouts fall back to action 0, which simply fails the
    episode.
    """

    def __init__(self, max_expansions: int = MAX_EXPANSIONS):
        self.max_expansions = max_expansions
        self._cache: dict[tuple, int] = {}
        self.unreachable_layouts = 0

    def action(self, env: DisassemblyEnv, state: EnvState) -> int:
        goal_key = tuple(env.goals)
        key = (state.key(), goal_key)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        plan = shortest_plan(env, state, self.max_expansions)
        if not plan.reachable:
            self.unreachable_layouts += 1
            self._cache[key] = 0
            return 0
        walk = state
        for action in plan.actions:
            self._cache[(walk.key(), goal_key)] = action
            walk, _, _, _ = env.transition(walk, action)
        return self._cache[key]


def plan_oracle(
    env: DisassemblyEnv, max_expansions: int = MAX_EXPANSIONS
) -> tuple[OraclePolicy, int | None]:
    """Oracle policy plus the shortest episode length from the env's current
    state (None when no plan exists, e.g. a sealed chassis)."""
    result = shortest_plan(env, env.state, max_expansions)
    return OraclePolicy(max_expansions), result.length
