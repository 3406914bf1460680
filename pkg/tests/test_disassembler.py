from dataclasses import replace

import pytest

from circmat.disassembler import (
    DisassemblyEnv,
    GridTooSmall,
    InvalidAction,
    TabularPolicy,
    default_task,
    eval_env,
    evaluate,
    run_evaluation,
    train,
)
from circmat.disassembler.env import (
    COLLISION_REWARD,
    MOVE_E,
    MOVE_N,
    PICK,
    PLACE,
    STEP_REWARD,
    SUCCESS_REWARD,
)
from circmat.disassembler.policy import PolicyFormatError
from circmat.disassembler.tasks import ALL_TASKS
from circmat.disassembler.training import FAILURE_STORAGE_S, SECONDS_PER_STEP


class TestTaskCatalog:
    def test_material_masses_match_batch_scenarios(self):
        expected = {
            "two_parts_one_target": (1.0, 1.0),
            "two_parts_two_targets": (1.0, 1.0),
            "four_parts_two_targets_two_obstacles": (2.0, 2.0),
            "four_parts_chassis": (5.0, 2.0),
        }
        for kind, (m1, m2) in expected.items():
            masses = default_task(kind).material_masses()
            assert masses["beta1"] == m1
            assert masses["beta2"] == m2

    def test_episode_caps(self):
        caps = [default_task(k).max_episode_length for k in ALL_TASKS]
        assert caps == [50, 100, 100, 150]

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            default_task("juggling")


class TestEnvironment:
    def test_two_parts_one_target_layout(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        state = env.reset()
        # Both parts stacked on one cell, one goal cell.
        assert state.positions[0] == state.positions[1]
        assert len(env.goals) == 1
        assert state.held == -1

    def test_chassis_layout(self):
        env = DisassemblyEnv(default_task("four_parts_chassis"), seed=0)
        state = env.reset()
        assert len(state.positions) == 4
        assert env.n_goal_cells == 2
        assert env.chassis_cells
        assert state.gripper not in env.chassis_cells
        for _, cell in env.goals:
            assert cell not in env.chassis_cells

    def test_grid_too_small(self):
        with pytest.raises(GridTooSmall):
            DisassemblyEnv(replace(default_task("two_parts_one_target"), grid=(1, 1)), seed=0)

    def test_invalid_action(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        state = env.reset()
        with pytest.raises(InvalidAction):
            env.transition(state, 7)
        with pytest.raises(InvalidAction):
            env.transition(state, -1)

    def test_step_reward_is_minus_one_until_goal(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        state = env.reset()
        _, reward, terminated, _ = env.transition(state, MOVE_N)
        assert reward == STEP_REWARD
        assert not terminated

    def test_collision_penalty_and_truncation(self):
        env = DisassemblyEnv(default_task("four_parts_chassis"), seed=0)
        env.reset()
        # Walk into the nearest chassis cell.
        state = env.state
        target = None
        for action, delta in ((MOVE_N, (0, 1)), (MOVE_E, (1, 0))):
            cell = (state.gripper[0] + delta[0], state.gripper[1] + delta[1])
            if cell in env.chassis_cells:
                target = action
                break
        assert target is not None, "fixture layout should start adjacent to the case"
        next_state, reward, terminated, truncated = env.step(target)
        assert reward == COLLISION_REWARD
        assert truncated and not terminated
        assert next_state.collided

    def test_satisfied_state_is_absorbing(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        state = env.reset()
        goal_part, goal_cell = env.goals[0]
        # Construct the satisfied state directly.
        positions = tuple(
            goal_cell if pid == goal_part else pos for pid, pos in enumerate(state.positions)
        )
        satisfied = replace(state, positions=positions)
        _, reward, terminated, _ = env.transition(satisfied, MOVE_N)
        assert terminated
        assert reward == SUCCESS_REWARD

    def test_pick_takes_top_of_stack_only(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        state = env.reset()
        # Teleport the gripper onto the stack for the check.
        state = replace(state, gripper=state.positions[0])
        picked, _, _, _ = env.transition(state, PICK)
        top = state.stack_at(state.positions[0])[-1]
        assert picked.held == top
        # The part below is not reachable while the top is back on it.
        placed, _, _, _ = env.transition(picked, PLACE)
        assert placed.stack_at(state.positions[0])[-1] == top

    def test_episode_cap_truncates(self):
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=0)
        env.reset()
        truncated = False
        for _ in range(env.max_episode_length):
            _, _, terminated, truncated = env.step(MOVE_N)
            assert not terminated
        assert truncated

    def test_fixed_seed_fixes_layout_sequence(self):
        layouts_a = []
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=9)
        for _ in range(10):
            state = env.reset()
            layouts_a.append((state.gripper, env.goals))
        env = DisassemblyEnv(default_task("two_parts_one_target"), seed=9)
        layouts_b = []
        for _ in range(10):
            state = env.reset()
            layouts_b.append((state.gripper, env.goals))
        assert layouts_a == layouts_b
        assert len(set(layouts_a)) > 1


class TestTraining:
    def test_zero_steps_leaves_reward_unchanged(self):
        policy, stats = train(default_task("two_parts_one_target"), steps=0, seed=0)
        assert stats.r_end == stats.r_start
        assert stats.zeta == 0.0
        assert not policy.q

    def test_untrained_reward_is_minus_cap(self):
        _, stats = train(default_task("two_parts_one_target"), steps=0, seed=0)
        assert stats.r_start == -50.0

    def test_zeta_identity(self):
        _, stats = train(default_task("two_parts_one_target"), steps=5_000, seed=1)
        assert stats.zeta == stats.r_end - stats.r_start

    def test_determinism_bit_identical(self):
        spec = default_task("two_parts_one_target")
        p1, s1 = train(spec, steps=10_000, seed=4)
        p2, s2 = train(spec, steps=10_000, seed=4)
        assert p1.to_bytes() == p2.to_bytes()
        assert s1 == s2

    def test_seeds_differ(self):
        spec = default_task("two_parts_one_target")
        p1, _ = train(spec, steps=10_000, seed=0)
        p2, _ = train(spec, steps=10_000, seed=1)
        assert p1.to_bytes() != p2.to_bytes()

    def test_learning_progress_on_easiest_task(self):
        policy, stats = train(default_task("two_parts_one_target"), steps=60_000, seed=0)
        assert stats.zeta > 0
        outcome = evaluate(policy, eval_env(default_task("two_parts_one_target")))
        assert outcome.s > 0

    def test_log_rows_cover_budget(self):
        _, stats = train(default_task("two_parts_one_target"), steps=5_000, seed=2)
        assert stats.log
        steps_at_end, episodes, lengths, returns = zip(*stats.log)
        assert all(a < b for a, b in zip(steps_at_end, steps_at_end[1:]))
        assert list(episodes) == list(range(1, len(episodes) + 1))
        assert all(1 <= n <= 50 for n in lengths)


class _UniformRandomPolicy:
    def __init__(self, seed: int = 0):
        import random

        self._rng = random.Random(seed)

    def action(self, env, state) -> int:
        return self._rng.randrange(6)


class TestEvaluation:
    def test_failure_fallback(self):
        policy = TabularPolicy(task="two_parts_one_target", grid=(5, 5))
        outcome = evaluate(policy, eval_env(default_task("two_parts_one_target")))
        assert outcome.s == 0.0
        assert outcome.T_d == FAILURE_STORAGE_S

    def test_random_policy_fails_cased_task(self):
        outcome = evaluate(_UniformRandomPolicy(0), eval_env(default_task("four_parts_chassis")))
        assert outcome.s == 0.0
        assert outcome.T_d == FAILURE_STORAGE_S

    def test_duration_uses_forty_millisecond_steps(self):
        # A policy averaging 10 steps per success yields T_d = 0.4 s.
        from circmat.disassembler.training import outcome_from_episodes

        episodes = [(-9.0, 10, True)] * 100
        outcome = outcome_from_episodes(episodes)
        assert outcome.T_d == pytest.approx(10 * SECONDS_PER_STEP)
        assert outcome.s == 100.0

    def test_mixed_episode_accounting(self):
        from circmat.disassembler.training import outcome_from_episodes

        episodes = [(-9.0, 10, True)] * 30 + [(-50.0, 50, False)] * 70
        outcome = outcome_from_episodes(episodes)
        assert outcome.s == 30.0
        assert outcome.T_d == pytest.approx(0.4)

    def test_evaluation_is_reproducible(self):
        spec = default_task("two_parts_one_target")
        policy, _ = train(spec, steps=20_000, seed=0)
        a = run_evaluation(policy, eval_env(spec), 30)
        b = run_evaluation(policy, eval_env(spec), 30)
        assert a == b


class TestPolicySerialization:
    def test_round_trip_preserves_bytes(self):
        policy, _ = train(default_task("two_parts_one_target"), steps=5_000, seed=3)
        blob = policy.to_bytes()
        assert blob.startswith(b"CIROQ1")
        restored = TabularPolicy.from_bytes(blob)
        assert restored.to_bytes() == blob
        assert restored.task == policy.task

    def test_bad_magic_rejected(self):
        with pytest.raises(PolicyFormatError):
            TabularPolicy.from_bytes(b"NOTMAGIC" + b"\x00" * 10)

    def test_save_load(self, tmp_path):
        policy, _ = train(default_task("two_parts_one_target"), steps=2_000, seed=0)
        path = tmp_path / "p.policy"
        policy.save(path)
        assert TabularPolicy.load(path).to_bytes() == policy.to_bytes()
