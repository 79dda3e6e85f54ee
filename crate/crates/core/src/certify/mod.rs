//! Verdicts and certificates about exact reconstruction, the closed-form
//! probabilities of the spiky construction, the inradius check, and the
//! compatibility constant.

mod certificate;
mod compat;
mod nsp;
mod probability;
mod width;

pub use certificate::{er_failure_certificate, FailureCertificate};
pub use compat::{compatibility_constant, compatibility_objective, CompatibilityValue, MAX_FW_ITERATIONS};
pub use nsp::{er_check_nsp, NspVerdict, STRICT_MARGIN_TOL};
pub use probability::{
    all_rows_spike_probability_exact, all_rows_spike_probability_product,
    clean_column_probability, single_spike_probability, spike_event_probability,
};
pub use width::{support_value, width_bound_check, WidthCheck, DEFAULT_WIDTH_DIRECTIONS};
