//! Constraint-family builders on top of the staged resampling engine:
//! uniform infinite CNFs, forbidden-substring avoidance on the line, and
//! forbidden-pattern avoidance on the grid.

pub mod clause;
pub mod error;
pub mod params;
pub mod pow2;
pub mod grid;
pub mod substring;
pub mod uniform;
pub mod words;

pub use clause::{trim_clauses, Clause};
pub use error::AppError;
pub use params::{
    check_varsize_condition, clause_size_inequality_holds, derive_trim_chain, max_length_touching,
    min_clause_size, trim_count, trimmed_size, weight_inflation, CnfFamilyParams, TrimChain,
    VarsizeReport, WeightTable,
};
pub use pow2::{dyadic_ceil_pow2_neg, dyadic_floor_pow2_neg, Pow2};
pub use grid::{
    avoid_patterns_2d, builtin_pattern_set, grid_cnf, parse_pattern_set_2d, spiral_point,
    spiral_rank, zigzag, zigzag_rank, AvoidOutcome2D, ExplicitPatterns, GridFamily, Pattern2D,
    PatternSet2D, ZeroRects,
};
pub use substring::{avoid_substrings, substring_cnf, AvoidOutcome, SubstringFamily};
pub use uniform::{uniform_cnf_instance, UniformCnf};
pub use words::{
    builtin_word_set, parse_word_set, ExplicitWords, PeriodicWords, WordSet, ZeroRuns,
};
