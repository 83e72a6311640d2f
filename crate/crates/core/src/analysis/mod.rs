//! Convergence certificates: the potential function, closed-form bounds,
//! span checks and sampled constant estimates.

mod bounds;
mod certificate;
mod estimate;
mod potential;
mod span;

pub use bounds::{bound_eag_c, bound_eag_v, bound_feg, bound_fega, bound_sfeg, sfeg_noise_term};
pub use certificate::{
    bound_series, certify, within_bound, CertStatus, CertificateRecord, CertificateReport, PassFlags,
};
pub use estimate::{estimate_comonotonicity, estimate_lipschitz, PairSampler};
pub use potential::{
    b_coefficient, check_schedule_admissible, evaluate_potential, first_potential_increase,
    potential_coefficients, LipschitzSeq, PotentialLedger, CERT_TOL, IDENTITY_TOL,
};
pub use span::{check_span, span_residual};
