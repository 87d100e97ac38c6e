"""Deductive ontology query engine with cost-based join ordering."""

from .model import (
    ArgDomain,
    Atom,
    BUILTIN_SCHEMA,
    DobError,
    NonGroundFactError,
    PredicateKind,
    PredicateSchema,
    Query,
    Rule,
    SchemaError,
    Term,
    UnsafeRuleError,
    builtin_iob_program,
)
from .store import OntologyBase, assert_fact, match_eob
from .parsing import (
    OwlDocument,
    ParseError,
    SourceLocation,
    parse_atom,
    parse_dob,
    parse_owl,
    parse_query,
    render_dob,
    translate_documents,
    translate_owl,
)
from .engine import (
    Counters,
    EngineLimitError,
    EvaluationResult,
    MemoTable,
    bottom_up_oracle,
    solve,
    solve_sequence,
)
from .stats import (
    BindingPattern,
    EobStats,
    IobStats,
    SamplingConfig,
    SamplingRun,
    StatisticsCatalog,
    adaptive_sample,
    alpha,
    build_catalog,
    build_exact_catalog,
    compute_eob_stats,
    domain_size,
    estimate_iob_stats,
    load_catalog,
    save_catalog,
)
from .costmodel import (
    Estimate,
    JoinMethod,
    JoinStrategy,
    default_strategies,
    join_estimate,
    plan_estimate,
    predicate_estimate,
    reduction_factor,
)
from .optimizer import (
    Plan,
    SubPlan,
    dominates,
    exhaustive_orderings,
    explain_plan,
    optimize,
)
from .executor import (
    ExecutionReport,
    execute,
    execute_all_strategies,
    uniform_plan,
)
from .synth import QueryShape, SynthConfig, generate_synthetic
from .bench import (
    ExperimentReport,
    compare_strategy_sets,
    pearson,
    run_correlation,
    run_ratio,
)

__version__ = "0.1.0"
