"""Inference of temporal-logic specifications from demonstrations."""

from .automata import AutomatonBudgetError, Dra, accepts_lasso, compile, step, to_dot
from .ltl import (
    And,
    Always,
    Eventually,
    FalseBool,
    Formula,
    Implies,
    LassoWord,
    LtlSyntaxError,
    Next,
    Not,
    Or,
    Prop,
    TrueBool,
    Until,
    complexity,
    eval_lasso,
    parse,
    render,
)
from .mdp import (
    Mdp,
    StationaryPolicy,
    Trajectory,
    dump_mdp,
    dump_trajectories,
    load_mdp,
    load_trajectories,
    make_mdp,
    sample_trajectory,
    uniform_random_policy,
    validate_trajectory,
)
from .objective import (
    ConvergenceError,
    Interpretation,
    ProductPolicy,
    ViolationTable,
    evaluate_policy_violation,
    min_violation_values,
    obj_action_based,
    obj_state_based,
    product_uniform_policy,
    rabin_state_sequence,
)
from .product import (
    EndComponent,
    ProductMdp,
    StateClassification,
    build_product,
    classify_states,
    compute_amecs,
    maximal_end_components,
)
from .domains import cleaningworld, generate_demos, plan_demonstrator, slimchance
from .search import (
    FormulaScorer,
    SearchConfig,
    SearchReport,
    crossover,
    init_population,
    mutate,
    nondominated_sort,
    run_nsga2,
    write_report_csv,
)
