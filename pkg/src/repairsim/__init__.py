"""Desk-scale two-robot trash-collection simulator with operator-assisted
recovery, plus the nonparametric evaluation pipeline for comparing Teleop,
REPAIR, and Auto operation modes."""

from .actions import CollisionEvent, SkillCommand, SkillResult, check_collision, execute_skill
from .logs import TrialLog, diff_logs
from .orchestrator import (
    BackendSpec,
    OperatorSpec,
    TrialConfig,
    replay_trial,
    run_batch,
    run_trial,
    task_progress,
    teleop_optimal_script,
)
from .planner import (
    PlanningContext,
    PromptBundle,
    RuleBasedBackend,
    ExternalServiceBackend,
    SubtaskSequence,
    assemble_decomposition_prompt,
    decompose_and_allocate,
    next_action,
    apply_feedback,
)
from .protocol import HelpBroker, HelpRequest, OperatorAction, ScriptedPolicy, run_scripted_operator
from .stats import (
    ScoreMatrix,
    TestResult,
    friedman_test,
    holm_correction,
    kendalls_w,
    rank_biserial,
    summarize_progress,
    wilcoxon_signed_rank,
)
from .world import (
    ProgressCounts,
    ScenarioConfig,
    WorldState,
    collected_count,
    init_world,
    load_scenario,
    load_scenario_file,
    reset_to_initial,
)

__version__ = "0.1.0"
