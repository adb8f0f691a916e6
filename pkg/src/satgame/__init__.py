"""Satisfaction games: correspondence-defined games, equilibrium verification,
repeated-play learning (PSEL, SRA, RM, RMRL) and a Monte Carlo harness."""

from .equilibrium import (GseVerdict, JointPmf, PureEquilibria, RegretReport,
                          conditional_regret, enumerate_pure_equilibria, hannan_regret,
                          is_correlated_equilibrium, is_hannan_equilibrium, is_mixed_gse,
                          is_pure_gse, is_pure_se, prob_satisfaction, stochastic_pure_gse)
from .errors import (ConfigError, DegenerateProbabilityError, EnumerationSizeError,
                     InvalidArgumentError, ParseError, SatGameError, UndefinedConditionalError,
                     UnsupportedGameError)
from .game import (FunctionGame, SatisfactionGame, find_clipping_actions, natural_utility,
                   satisfied_partition, satisfying_set)
from .learners import (LearnerConfig, PlayHistory, RegretState, detect_convergence,
                       empirical_distribution, play, psel_step, rm_step, rm_update_regrets,
                       rmrl_step, rmrl_update_regrets, sra_step)

__version__ = "0.1.0"
