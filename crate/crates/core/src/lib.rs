//! Heavy-tailed ("spiky") measurement matrices on which basis pursuit fails
//! to recover even 1-sparse vectors, while l0 minimization still identifies
//! them.
//!
//! * [`ensemble`]: scalar laws, exact moments, the parameter planner and
//!   seeded matrix sampling.
//! * [`simplex`]: the dense two-phase simplex behind every certificate.
//! * [`recovery`]: basis pursuit, uniqueness certification and l0 support
//!   enumeration.
//! * [`certify`]: failure certificates, null space verdicts, closed-form
//!   event probabilities, the inradius check and the compatibility constant.
//! * [`experiments`]: the seeded Monte Carlo harness and CSV sweeps.
//!
//! The guide in `book/` walks through each piece; its code blocks are
//! compiled as doctests of this crate.

pub mod certify;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod recovery;
pub mod rng;
pub mod simplex;
pub mod textio;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/ensemble.md")]
    mod ensemble {}
    #[doc = include_str!("../../../book/src/simplex.md")]
    mod simplex {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    mod recovery {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/compatibility.md")]
    mod compatibility {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
