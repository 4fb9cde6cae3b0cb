//! Numerical solver for the planar Beltrami equation `f_zbar = mu f_z` with
//! measurable dilatation, including the degenerate regime where `|mu| -> 1`
//! and only an exponential integrability bound on the distortion
//! `K = (1 + |mu|) / (1 - |mu|)` is available.
//!
//! The building blocks:
//!
//! * [`field`]: uniform cell-centered grids over the square `[-L, L]^2`,
//!   complex and real sample fields, region masks, and binary file formats.
//! * [`transforms`]: FFT-backed Beurling and Cauchy transforms as periodic
//!   Fourier multipliers, plus spectral derivatives.
//! * [`coefficients`]: radial coefficient families (power stretches, the
//!   borderline `gp` family, logarithmic `alpha` profiles), truncation,
//!   distortion fields and exponential integrals.
//! * [`neumann`]: the Neumann series `omega = sum (mu S)^n mu`, principal
//!   solutions, holomorphic-parameter runs and contour extraction of
//!   individual series terms.
//! * [`factorization`]: pointwise hyperbolic splitting of a dilatation into
//!   a bounded part and a residual, with exact budget identities.
//! * [`estimators`]: quantitative checks of modulus-of-continuity, inverse
//!   energy, area distortion, rearrangement and Sobolev-Orlicz regularity.
//! * [`elliptic`]: the correspondence between Beltrami data and symmetric
//!   uniformly elliptic matrices `A` via conjugate `A`-harmonic pairs.
//!
//! Scalar reductions are carried out with a fixed blocking scheme so repeated
//! runs of the same configuration produce bit-identical output regardless of
//! thread count.

pub mod coefficients;
pub mod elliptic;
pub mod error;
pub mod estimators;
pub mod factorization;
pub mod field;
pub mod io;
pub mod neumann;
pub mod quad;
pub mod report;
pub mod transforms;

mod util;

pub use error::{Error, Result};
pub use field::{ComplexField, Grid, RealField, RegionMask};
pub use transforms::SpectralPlan;

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
