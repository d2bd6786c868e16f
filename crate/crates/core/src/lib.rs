//! Wavelet renormalization of pointwise products.
//!
//! The crate splits a product `fg` of two finite wavelet expansions into the
//! four paraproducts `Pi_1..Pi_4`, evaluates them on dyadic grids, and ships
//! the wavelet-side norms (Hardy sequence norm, Carleson, Lipschitz,
//! BMO-type, grand maximal) and spectral tools (Riesz transforms, Helmholtz
//! projection) needed to check the boundedness statements numerically.

pub mod coeff;
pub mod cube;
pub mod divcurl;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod mra;
pub mod numeric;
pub mod paraproduct;
pub mod random;
pub mod rng;
pub mod spaces;
pub mod wavelet;

pub use coeff::CoeffField;
pub use cube::{DyadicCube, Lambda, TensorIndex};
pub use error::{Error, Result};
pub use paraproduct::{pi, renormalize, ParaproductResult, Route};
pub use random::{random_field, FieldSpec};
pub use mra::{analyze, project, synthesize, synthesize_on, tensor_sample, Space};
pub use grid::{GridBox, GridFunction};
pub use wavelet::{
    cascade_sample, daubechies_system, haar_system, moment_integral, FilterBank, WaveletSystem,
};
