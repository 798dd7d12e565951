//! Colored graphs, admissibility, constrained tuple sums, the inclusion–exclusion
//! form of `Ψ¬`, and the Beck gain experiment.

mod beck;
mod colored;
mod inclusion;
mod tuples;

pub use beck::{
    beck_gain_experiment, grid_coincidence_norms, pair_norms_walsh, BeckEngine, BeckGainConfig, BeckGainReport,
    BeckRow, PairFamily, least_squares_slope, grid_pair_sum, walsh_signs,
};
pub use colored::{enumerate_admissible, validate_admissible, AdmissibleGraph, ColoredGraph, MAX_ENUMERATED_VERTICES};
pub use inclusion::{assemble_psi_neg, inclusion_exclusion_psi_neg, inclusion_exclusion_terms, InExTerm};
pub use tuples::{coincidence_sum, TupleSet, DEFAULT_TUPLE_BUDGET};
