"""Short-range molecular dynamics with runtime algorithm selection.

The force backend (container, traversal, Newton-3 handling, data layout,
cell size) is picked per tuning phase by one of four strategies: full
search, predictive extrapolation, a fuzzy-rule expert, or a trained
random forest.
"""

from .configuration import (Configuration, configuration_index,
                            enumerate_configurations, parse_configuration)
from .containers import ForceCalculator, Timings, Workforce, compute_forces
from .dataset import (generate_training_dataset, load_training_csv,
                      train_forest_from_csv)
from .experiments import (EXPERIMENTS, comparison_table, experiment_spec,
                          run_experiment, write_comparison_csv)
from .forces import lj_force_pair
from .forest import (Forest, RandomForestStrategy, load_forest, predict_votes,
                     save_forest, train_forest)
from .fuzzy import (ExpertStrategy, RuleBase, RuleFileError,
                    expert_candidates, infer_and_defuzzify, parse_rule_file)
from .integrator import (BlowUpError, apply_boundaries, apply_thermostat,
                         current_temperature, integrate_step)
from .livestats import FEATURE_NAMES, LiveStatistics, compute_live_stats
from .params import (PERIODIC, REFLECTIVE, SimulationParams,
                     ThermostatParams)
from .particles import AOS, SOA, ParticleSet, ParticleTypeInfo
from .rules import default_rule_base, default_rules_text
from .scenarios import (GeneratorSpec, ScenarioError, ScenarioSpec,
                        generate_scenario, load_scenario)
from .simulation import (SimulationReport, make_strategy, run_simulation,
                         simulate)
from .tuning import (FixedStrategy, FullSearchStrategy, PredictiveStrategy,
                     TuningController, evidence_cost, predict_cost,
                     run_tuning_phase)

__version__ = "0.1.0"

__all__ = [
    "AOS", "SOA", "PERIODIC", "REFLECTIVE", "EXPERIMENTS", "FEATURE_NAMES",
    "BlowUpError", "Configuration", "ExpertStrategy", "FixedStrategy",
    "ForceCalculator", "Forest", "FullSearchStrategy", "GeneratorSpec",
    "LiveStatistics", "ParticleSet", "ParticleTypeInfo",
    "PredictiveStrategy", "RandomForestStrategy", "RuleBase",
    "RuleFileError", "ScenarioError", "ScenarioSpec", "SimulationParams",
    "SimulationReport", "ThermostatParams", "Timings", "TuningController",
    "Workforce", "apply_boundaries", "apply_thermostat", "comparison_table",
    "compute_forces", "compute_live_stats", "configuration_index",
    "current_temperature", "default_rule_base", "default_rules_text",
    "enumerate_configurations", "evidence_cost", "experiment_spec",
    "expert_candidates", "generate_scenario", "generate_training_dataset",
    "infer_and_defuzzify", "integrate_step", "lj_force_pair", "load_forest",
    "load_scenario", "load_training_csv", "make_strategy",
    "parse_configuration", "parse_rule_file", "predict_cost",
    "predict_votes", "run_experiment", "run_simulation", "run_tuning_phase",
    "save_forest", "simulate", "train_forest", "train_forest_from_csv",
    "write_comparison_csv",
]
