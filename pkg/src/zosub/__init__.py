"""Two time-scale zeroth-order projected stochastic subgradient method."""
from .geometry import ConstraintSet, GapResult, stationarity_gap
from .optimizer import IterateTrace, RunConfig, TwoTimescaleState, run, run_many
from .problems import NoiseModel, ObjectiveProblem, builtin_catalog, make_problem
from .schedules import StepSchedule
from .smoothing import SmoothingParams

__version__ = "0.1.0"
