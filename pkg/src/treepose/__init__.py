"""Video pose estimation by exact inference over tree-structured hypothesis graphs."""

from .assembly import PoseSequence, assemble_pose
from .body import AbstractPart, CoupledHypothesis, PartHypothesis, RealPart, compose_coupled
from .errors import ConfigError, DataError, ParseError, StructureError, TreePoseError
from .evaluation import EvaluationReport, emit_report, evaluate
from .graph import HypothesisGraph, RelationalGraph, Selection, solve_top_k, solve_tree
from .io import HypothesisFile, ingest
from .limbs import LimbPair, ReferencePose, align_limbs, refine_limbs
from .pipeline import PipelineConfig, run_pipeline
from .scoring import ScoringParams
from .synth import synth_scenario
from .tracklets import Tracklet, coupled_part_tracklets, single_part_tracklets

__all__ = [
    "AbstractPart",
    "ConfigError",
    "CoupledHypothesis",
    "DataError",
    "EvaluationReport",
    "HypothesisFile",
    "HypothesisGraph",
    "LimbPair",
    "ParseError",
    "PartHypothesis",
    "PipelineConfig",
    "PoseSequence",
    "RealPart",
    "ReferencePose",
    "RelationalGraph",
    "ScoringParams",
    "Selection",
    "StructureError",
    "Tracklet",
    "TreePoseError",
    "align_limbs",
    "assemble_pose",
    "compose_coupled",
    "coupled_part_tracklets",
    "emit_report",
    "evaluate",
    "ingest",
    "refine_limbs",
    "run_pipeline",
    "single_part_tracklets",
    "solve_top_k",
    "solve_tree",
    "synth_scenario",
]
