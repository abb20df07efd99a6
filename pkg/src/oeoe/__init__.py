"""Oracle-efficient online estimation: simulation library and CLI.

The package simulates a protocol in which an online learner may interact with
the data stream only through the outputs of a black-box offline estimation
oracle, plus the downstream machinery that turns such learners into decision
makers.  Everything that can be checked exactly is computed exactly:
randomization distributions carry explicit finite support and expectations are
never sampled.
"""

from .errors import (ConfigError, ConvergenceFailure, DegenerateLikelihoodError,
                     OeoeError, OracleViolationError, RealizabilityError,
                     UnsupportedInstanceError)
from .instances import (Instance, OutcomeKernel, binary_instance, cde_instance,
                        full_cube_instance, indicator_instance, instance_from_json,
                        instance_to_json, random_binary_instance, ratio_bound,
                        sample_outcome, square_instance, threshold_instance)
from .losses import (KL, SQUARE, SQUARED_HELLINGER, ZERO_ONE, LossFn, eval_loss,
                     hellinger_subadditivity_check, potential_lemma_holds)
from .transcript import ExperimentLog, Mixture, offline_error, online_error
from .oracles import (BlockDelayOracle, ConsistentBinaryOracle, CustomTableOracle,
                      ErmSquareOracle, MleOracle, ShiftedProperOracle,
                      UnseenCovariateOracle, project_to_proper,
                      verify_offline_guarantee)
from .learners import (DelayedReductionLearner, ExpWeights, IdentityLearner,
                       VersionSpaceLearner, eta_for_factor, tune_delay)
from .cde import (MixtureDensityBase, OeoeCdeStack, replay_count, run_cde_stack,
                  tune_stack_delay)
from .dmso import (CbClass, DecisionLog, cb_lower_bound_instance, dec_value,
                   igw_distribution, regret, run_e2d)
from .mdp import (TabularMdp, coverability, coverability_conversion_check,
                  layerwise_divergence, occupancy_measure)
from .protocol import run_protocol
from .rng import spawn_seed, substream

__version__ = "0.1.0"
