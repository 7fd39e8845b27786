//! Numerical core: multi-coset sub-Nyquist measurement, unsupervised
//! neural spectrum recovery, radio-map simulation, neural Tucker
//! completion, and the shared metrics suite.

pub mod drmt;
pub mod error;
pub mod metrics;
pub mod ncs;
pub mod nn;
pub mod ntd;
pub mod rem;
pub mod rng;
pub mod signal;
pub mod somp;
pub mod tensor;

pub use error::{CoreError, Result};
