//! Point sets, the discrepancy function, its Haar coefficients, Roth's `L²` bound and
//! the `L∞` certificate built from the Riesz product.

mod certificate;
mod dfunc;
mod points;

pub use certificate::{
    discrepancy_certificate, l1_of_combination, pairing_with_discrepancy, sampled_sup, DiscrepancyCertificate,
    SampledSup, RHO_BITS,
};
pub use dfunc::{counting_factor, d_eval, haar_coeff_d, layer_coefficients, linear_factor, roth_l2_lower, scale_for, RothBound};
pub use points::{generate, radical_inverse, PointKind, PointSet};
