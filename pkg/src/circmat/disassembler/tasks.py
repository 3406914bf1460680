"""Task catalog for the desk-scale disassembly surrogate.

Four tasks of increasing combinatorial difficulty on a small discrete
workspace: the continuous manipulation problems are abstracted into grid
puzzles that preserve stacking precedence, obstacle relocation and the
collision-truncation constraint of the cased variant. Part masses per task
keep the same material totals as the batch scenarios they feed.
"""

from __future__ import annotations

from dataclasses import dataclass

BETA1 = "beta1"
BETA2 = "beta2"

TWO_PARTS_ONE_TARGET = "two_parts_one_target"
TWO_PARTS_TWO_TARGETS = "two_parts_two_targets"
FOUR_PARTS_TWO_TARGETS_TWO_OBSTACLES = "four_parts_two_targets_two_obstacles"
FOUR_PARTS_CHASSIS = "four_parts_chassis"

ALL_TASKS = (
    TWO_PARTS_ONE_TARGET,
    TWO_PARTS_TWO_TARGETS,
    FOUR_PARTS_TWO_TARGETS_TWO_OBSTACLES,
    FOUR_PARTS_CHASSIS,
)


@dataclass(frozen=True)
class Part:
    """A rigid 1 kg body made of one of the two batch materials."""

    name: str
    material: str
    mass_kg: float = 1.0


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    parts: tuple[Part, ...]
    grid: tuple[int, int] = (5, 5)
    max_episode_length: int = 50
    # Static cased structure (cased task only): mass of the surrounding
    # frame and whether its ring keeps an access opening.
    chassis_mass_kg: float = 0.0
    chassis_opening: bool = True

    @property
    def has_chassis(self) -> bool:
        return self.chassis_mass_kg > 0.0

    def material_masses(self) -> dict[str, float]:
        """Total kg per material including the chassis frame."""
        masses = {BETA1: 0.0, BETA2: 0.0}
        for part in self.parts:
            masses[part.material] += part.mass_kg
        if self.has_chassis:
            masses[BETA1] += self.chassis_mass_kg
        return masses


def default_task(kind: str, grid: tuple[int, int] = (5, 5)) -> TaskSpec:
    """Default layout for one of the four named tasks."""
    if kind == TWO_PARTS_ONE_TARGET:
        return TaskSpec(
            kind=kind,
            parts=(Part("top", BETA2), Part("base", BETA1)),
            grid=grid,
            max_episode_length=50,
        )
    if kind == TWO_PARTS_TWO_TARGETS:
        return TaskSpec(
            kind=kind,
            parts=(Part("top", BETA2), Part("base", BETA1)),
            grid=grid,
            max_episode_length=100,
        )
    if kind == FOUR_PARTS_TWO_TARGETS_TWO_OBSTACLES:
        return TaskSpec(
            kind=kind,
            parts=(
                Part("obstacle_a", BETA1),
                Part("obstacle_b", BETA1),
                Part("buried", BETA2),
                Part("base", BETA2),
            ),
            grid=grid,
            max_episode_length=100,
        )
    if kind == FOUR_PARTS_CHASSIS:
        return TaskSpec(
            kind=kind,
            parts=(
                Part("obstacle_a", BETA1),
                Part("obstacle_b", BETA1),
                Part("buried", BETA2),
                Part("base", BETA2),
            ),
            grid=grid,
            max_episode_length=150,
            chassis_mass_kg=3.0,
        )
    raise ValueError(f"unknown task {kind!r}; choose from {ALL_TASKS}")
