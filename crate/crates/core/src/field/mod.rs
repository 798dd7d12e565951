//! Piecewise-constant functions on anisotropic dyadic grids, their Haar
//! spectra, and tensor piecewise-linear functions.

mod grid;
mod io;
mod spectrum;
mod tensor_pl;

pub use grid::{cell_multi_index, cellwise_from_ints, GridFunction, Op};
pub use spectrum::{HaarSpectrum, IntHaarSums, SpectrumKey};
pub use tensor_pl::{PiecewiseLinear, TensorPLFunction};

pub(crate) use grid::check_capacity;
pub(crate) use spectrum::{spectrum_index, synthesize_int};
pub(crate) use tensor_pl::merge_sorted;
