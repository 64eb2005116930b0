import sys

from loguru import logger

from spectral_metric.cli import main
from spectral_metric.errors import (
    ArgumentError,
    CapacityError,
    ContractError,
    ConvergenceError,
    SchemaError,
    SpectralMetricError,
)
from spectral_metric.schema import StateSpec, TripleSpec
from spectral_metric.settings import TOL, SolverOptions, ToolkitConfig
from spectral_metric.solver import Method, SolverResult, connes_distance, oracle_distance, verify_optimal
from spectral_metric.states import BlochVector, DensityMatrix, density_from_bloch, trace_distance
from spectral_metric.triple import IsometryFlag, Representation, SpectralTriple
from spectral_metric.verify import SuiteRegistry, SuiteReport, run_suite

logger.remove()
logger.add(sys.stderr, level="WARNING")
logger.add("logs/logfile.log", level="DEBUG")


__all__ = [
    "main",
    "ArgumentError",
    "CapacityError",
    "ContractError",
    "ConvergenceError",
    "SchemaError",
    "SpectralMetricError",
    "StateSpec",
    "TripleSpec",
    "TOL",
    "SolverOptions",
    "ToolkitConfig",
    "Method",
    "SolverResult",
    "connes_distance",
    "oracle_distance",
    "verify_optimal",
    "BlochVector",
    "DensityMatrix",
    "density_from_bloch",
    "trace_distance",
    "IsometryFlag",
    "Representation",
    "SpectralTriple",
    "SuiteRegistry",
    "SuiteReport",
    "run_suite",
]
