//! Counterexample engine: for a concrete identification function `V` with
//! `k`-dimensional reports, builds two mixtures `p` and `p'` with a common
//! root `r` of `E V(r, Y)` whose modes lie in different component balls.
//!
//! Pipeline: a height schedule puts the mode of `p` at the first
//! component; the `k × t` moment matrix of the remaining components has a
//! kernel direction `h'` when `t > k`; moving the heights along `h'` by a
//! suitable step `α` leaves `E V(r, Y)` unchanged but moves the mode.

mod battery;
mod certificate;
mod checks;
mod construction;
mod schedule;

pub use battery::{battery, BatteryEntry};
pub use certificate::{
    certify, certify_with, find_identification_root, modal_displacement, schedule_for,
    CertifyOptions, CounterexampleCertificate, ModalDisplacement, Reverification,
    CERTIFICATION_TOL, REVERIFY_TOL,
};
pub use checks::{
    claims_check, corollary_check, lemma1_witness, two_bump_density, ClaimEntry, ClaimsReport,
    Lemma1Outcome, WITNESS_TOL,
};
pub use construction::{
    alpha_select, alpha_select_bump, alpha_select_gaussian, build_moment_matrix,
    nullspace_vector, AlphaSelection, CaseTag, KernelVector, MomentMatrix, KERNEL_TOL,
    MAX_ALPHA_ATTEMPTS,
};
pub use schedule::{bump_height_schedule, gaussian_scenario, Geometry, HeightSchedule};
