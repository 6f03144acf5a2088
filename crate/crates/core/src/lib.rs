//! Exact q-binomial, q-multinomial, Heine and multiple Heine distributions,
//! the deformed standardized Stieltjes-Wigert approximations to them, and a
//! harness that measures how well those approximations hold.
//!
//! Modules, bottom up:
//!
//! - [`qcalc`]: q-numbers, q-factorials, Gaussian coefficients, q-Pochhammer
//!   products, the q-exponential and the q-Stirling formula, all in log domain.
//! - [`dist`]: probability functions, deformed-variable moments, sampling.
//! - [`swapprox`]: the Stieltjes-Wigert density and lattice approximations.
//! - [`analysis`]: error sweeps and studies producing serializable reports.
//!
//! ```
//! use qlimit_core::{QContext, QMultinomial, Outcome};
//!
//! let ctx = QContext::new(0.6).unwrap();
//! let m = QMultinomial::new(4, &[0.5, 0.8], ctx).unwrap();
//! let p = m.pmf(&Outcome::from([2, 1])).unwrap();
//! assert!(p > 0.0 && p < 1.0);
//! ```

pub mod analysis;
pub mod dist;
pub mod error;
pub mod qcalc;
pub mod swapprox;

pub use dist::{
    conditional_moments, heine_deformed_moments, marginal_moments, sample, Heine, MomentPair,
    MultipleHeine, Outcome, QBinomial, QMultinomial,
};
pub use error::{Error, Result};
pub use qcalc::{LogValue, QContext};
pub use swapprox::{StandardizationFrame, StieltjesWigert};
