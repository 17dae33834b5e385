"""treeq: tabular TD(lambda) over online-learned partition-tree
abstractions of continuous states and parameterized actions.

The library couples a state partition tree (whose leaves each carry one
parameter tree per action) with a tabular learner. Training alternates a
learning phase over the current abstraction with a refinement phase that
splits the state or parameter regions whose learning signals disperse the
most, either uniformly or along learned classifier boundaries."""

from .clustering import ClusterResult, adaptive_cluster, agglomerate
from .config import ExperimentConfig, default_config, named_config
from .core import (
    CONTINUOUS,
    DISCRETE,
    ActionSchema,
    Environment,
    GroundedAction,
    StepResult,
    VariableSpec,
)
from .errors import (
    DegenerateModel,
    DimensionMismatch,
    EpisodeFinished,
    InsufficientData,
    MalformedInput,
    MalformedLayout,
    MalformedTree,
    OutOfDomainAction,
    SingleClass,
    TreeqError,
    UnsplittableLeaf,
)
from .harness import (
    MetricsRow,
    RunResult,
    SuiteResult,
    evaluate_greedy,
    run_experiment,
    run_suite,
)
from .learner import (
    AbstractAction,
    AbstractTransition,
    ConcreteTransition,
    TraceBuffers,
    epsilon_greedy,
    execute_abstract,
    leaf_actions,
    max_q,
    td_error,
    td_lambda_update,
    value_estimate,
)
from .refinement import (
    BetaSchedule,
    HeterogeneityTable,
    RefineParams,
    RefinementPlan,
    compute_heterogeneity,
    migrate_q,
    migrate_q_param,
    refine_step,
    select_targets,
    similarity_scores,
)
from .svm import SvmClassifier, svm_predict, svm_train
from .trees import ParamTree, StateTree

__version__ = "0.1.0"
