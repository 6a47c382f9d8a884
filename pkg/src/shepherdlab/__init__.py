"""Simulation and automatic design of shepherd robots that steer reactive sheep."""

from .campaign import CampaignConfig, Observation, assess, run_campaign
from .controllers import Idle, load_controller, save_controller
from .core import (
    ArenaSpec,
    ColorSignal,
    FloorColor,
    FloorRegion,
    Pose,
    RngStream,
    RobotBody,
    RobotKind,
    arena_regular_octagon,
    floor_color_at,
    point_in_arena,
)
from .estimators import EvoCMYDesigner, PistacchioDesigner, RandomWalkDesigner
from .missions import (
    Mission,
    ObjectiveSense,
    ScenarioSpec,
    SheepVariant,
    build_scenario,
    f1_centroid_spread,
    f2_sheep_outside,
)
from .nn import NnGenome, encode_inputs, forward, mutate_genome
from .optim import Budget, Evaluator, charge, evolve, iterated_race
from .pfsm import PfsmConfig, RandomWalk, SheepController, mutate_pfsm, sample_pfsm
from .rm3 import Actuation, SensorReadings, clamp_actuation
from .sim import EpisodeResult, WorldState, init_episode, run_episode, step
from .stats import RankSummary, friedman_eliminate, friedman_rank_summary

__version__ = "0.1.0"

__all__ = [
    "Actuation", "ArenaSpec", "Budget", "CampaignConfig", "ColorSignal", "EpisodeResult",
    "Evaluator", "EvoCMYDesigner", "FloorColor", "FloorRegion", "Idle", "Mission", "NnGenome",
    "ObjectiveSense", "Observation", "PfsmConfig", "PistacchioDesigner", "Pose", "RandomWalk",
    "RandomWalkDesigner", "RankSummary", "RngStream", "RobotBody", "RobotKind", "ScenarioSpec",
    "SensorReadings", "SheepController", "SheepVariant", "WorldState", "arena_regular_octagon",
    "assess", "build_scenario", "charge", "clamp_actuation", "encode_inputs", "evolve",
    "f1_centroid_spread", "f2_sheep_outside", "floor_color_at", "forward", "friedman_eliminate",
    "friedman_rank_summary", "init_episode", "iterated_race", "load_controller", "mutate_genome",
    "mutate_pfsm", "point_in_arena", "run_campaign", "run_episode", "sample_pfsm",
    "save_controller", "step",
]
