"""Rashomon-set variable-importance analysis for tuned tree ensembles.

The package trains a space of tree-based classifiers (decision tree,
random forest, depth-wise and leaf-wise GBDT) via random search plus
Bayesian optimization, extracts the empirical Rashomon set at a loss
tolerance epsilon, computes group-wise permutation variable importance
for every member, and summarizes how much the members' importance
rankings disagree with the reference model (Kendall tau / VIOD).
"""

from .config import RunConfig, parse_config, validate_config
from .dataset import (
    EncodedMatrix,
    SplitPair,
    SynthSpec,
    TabularDataset,
    load_oulad,
    make_binary,
    one_hot_encode,
    stratified_split,
    synth_generate,
)
from .discrepancy import Ranking, ViodReport, kendall_tau, rank_variables, tau_distribution, viod
from .ensembles import (
    ForestParams,
    GbdtParams,
    TrainedModel,
    accuracy,
    fit_forest,
    fit_gbdt,
    predict,
)
from .errors import ConfigError, DataError, IngestError, PipelineStageError, StratificationError
from .importance import PviConfig, PviRecord, PviReport, permute_variable, pvi_for_model, pvi_over_set
from .pipeline import format_summary, report_from_dir, run_pipeline
from .rashomon import (
    RashomonSet,
    RashomonSummary,
    epsilon_sweep,
    extract_rashomon,
    rashomon_summary,
    select_reference,
)
from .search import (
    BayesSettings,
    Dimension,
    ModelSpace,
    ParamSpace,
    SearchConfig,
    Trial,
    bayes_minimize,
    bayes_opt,
    build_model_space,
    default_param_space,
    random_search,
)
from .trees import DecisionTree, TreeParams, best_split, fit_tree, impurity, predict_tree

__version__ = "0.1.0"

__all__ = [
    "BayesSettings",
    "ConfigError",
    "DataError",
    "DecisionTree",
    "Dimension",
    "EncodedMatrix",
    "ForestParams",
    "GbdtParams",
    "IngestError",
    "ModelSpace",
    "ParamSpace",
    "PipelineStageError",
    "PviConfig",
    "PviRecord",
    "PviReport",
    "Ranking",
    "RashomonSet",
    "RashomonSummary",
    "RunConfig",
    "SearchConfig",
    "SplitPair",
    "StratificationError",
    "SynthSpec",
    "TabularDataset",
    "TrainedModel",
    "TreeParams",
    "Trial",
    "ViodReport",
    "accuracy",
    "bayes_minimize",
    "bayes_opt",
    "best_split",
    "build_model_space",
    "default_param_space",
    "epsilon_sweep",
    "extract_rashomon",
    "fit_forest",
    "fit_gbdt",
    "fit_tree",
    "impurity",
    "kendall_tau",
    "load_oulad",
    "make_binary",
    "one_hot_encode",
    "parse_config",
    "permute_variable",
    "predict",
    "predict_tree",
    "pvi_for_model",
    "pvi_over_set",
    "random_search",
    "rank_variables",
    "rashomon_summary",
    "format_summary",
    "report_from_dir",
    "run_pipeline",
    "select_reference",
    "stratified_split",
    "synth_generate",
    "tau_distribution",
    "validate_config",
    "viod",
]
