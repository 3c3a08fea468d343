"""Community simulator and benchmark harness."""

from ._ocs import (  # noqa: F401
    Simulator,
    WorldMap,
    eval_assistant,
    eval_commute,
    eval_influence,
    generate_commute_episode,
    generate_task,
    ingest,
    mcts_plan,
    rl_reward,
    run_episode,
    simulate_reward,
    synth_scene,
    validate_schedule,
)

__all__ = [
    "Simulator",
    "WorldMap",
    "eval_assistant",
    "eval_commute",
    "eval_influence",
    "generate_commute_episode",
    "generate_task",
    "ingest",
    "mcts_plan",
    "rl_reward",
    "run_episode",
    "simulate_reward",
    "synth_scene",
    "validate_schedule",
]
