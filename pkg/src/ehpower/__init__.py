"""Learning-aided power control for energy-harvesting devices with outdated state.

Subpackages/modules:

- ``core``: problem and algorithm constants, shared errors and records
- ``projection``: capped-simplex projection and its grid oracle
- ``utility``: log-rate utility, gradients, water-filling
- ``environment``: seeded energy/channel processes and the battery
- ``controller``: the virtual-queue learning controller and two baselines
- ``oracle``: expected-utility upper bound and hindsight best fixed power
- ``harness``: configs, replicated runs, CSV/SVG output, figure suite
"""

from .controller import (GradientBaseline, GreedyBaseline, LearningController, alg1_init,
                         alg1_observe_and_step, baseline1_step, baseline2_step,
                         enforce_availability)
from .core import (AlgorithmParams, EnergyAvailabilityError, InvariantViolation, ParameterError,
                   ProblemParams, SlotRecord, SystemState, derive_algorithm_params, derive_params)
from .environment import BatteryState, Environment, battery_step
from .harness.config import ExperimentConfig, load_bundled
from .harness.runner import run_experiment
from .oracle import OracleProblem, best_fixed_hindsight, solve_upper_bound
from .projection import project_capped_simplex, project_nonpositive_shift, qp_oracle
from .utility import LogUtility, log_utility_gradient, log_utility_value, water_filling

__version__ = "0.1.0"
