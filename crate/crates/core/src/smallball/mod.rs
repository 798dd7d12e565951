//! Coefficient fields, r-functions, the Riesz product and its decomposition,
//! duality certificates, inequality verifiers, moment profiles and the smooth variant.

mod certificate;
mod coeffs;
mod moment;
mod params;
mod rfunc;
mod riesz;
mod signs;
mod smooth;

pub use certificate::{
    duality_certificate, exhaustive_min_ratio, hyperbolic_sum, hyperbolic_sum_int, hyperbolic_sup, pairing_with_int,
    verify_all, verify_inequality, DualityCertificate, InequalityForm, InequalityRecord,
};
pub use coeffs::CoefficientField;
pub use moment::{block_moment_table, block_sum_compact, moment_profile, moment_profile_int, MomentRow};
pub use params::{derived_q, dyadic_approximation, make_blocks, BlockMode, RieszParams};
pub use rfunc::{
    accumulate_rfunction, add_int_into, block_sum, block_sum_int, multiply_rfunction, rfunction, rfunction_int,
    shapes_resolution,
};
pub use riesz::{decompose, psi_stats, riesz_product, Decomposition, PsiStats, RieszEngine};
pub use signs::{AllPlus, RandomSigns, SignMap, SignSource};
pub use smooth::{profile_constant, smooth_certificate, smooth_pairing, smooth_rfunction, smooth_sum, SmoothCertificate};
