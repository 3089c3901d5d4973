//! Branch-and-price with pricing problems stated as declarative dynamic
//! programs and solved by generic state-space search.

pub mod expr;
pub mod model;
pub mod search;
pub mod simplex;
pub mod colgen;
pub mod bnp;
pub mod problems;

pub use bnp::{
    solve_branch_and_price, solve_branch_and_price_observed, BnpConfig, BnpError, BnpEvent, BnpProblem,
    BnpResult, BnpStatus, Branch, BranchingDecision, Incumbent,
};
pub use colgen::{run_column_generation, ColgenConfig, ColgenError, ColgenResult, Column, Master, PricingAdapter};
pub use expr::{Set, MAX_UNIVERSE};
pub use model::{Model, ModelBuilder, ModelError, Resource, State, Transition, TransitionRef};
pub use problems::{Family, InstanceError, ProblemKind, SolutionView};
pub use search::{SearchLimits, SearchOptions, SearchResult, SearchStats, SearchStatus, Solver};
pub use simplex::{LinearProgram, Sense};
