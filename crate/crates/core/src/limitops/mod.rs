//! Limit operators: partial limits of coefficients, enumeration of limit
//! operator families, closed-form essential spectra, and the general union.

pub mod family;
pub mod formulas;
pub mod general;
pub mod partial;

pub use family::{enumerate_limit_ops, verify_member, ConnectedEnvelope, LimitOperatorFamily, Member, MemberCheck};
pub use formulas::{
    ess_spectrum_semiperiodic, ess_spectrum_so, ess_spectrum_two_valued, ess_spectrum_two_valued_so,
    ess_spectrum_waveguide, profile_operator, DiscreteSearch, WaveguideSpectrum,
};
pub use general::{ess_spectrum_general, member_spectrum, GeneralSpectrum, LimitOptions, MemberSpectrum};
pub use partial::{partial_limit_along, GeneratingSequence, PartialLimitReport};

/// Default number of sequence terms inspected by partial-limit checks.
pub const DEFAULT_J_MAX: u64 = 200;
/// Default agreement tolerance for partial-limit checks.
pub const DEFAULT_LIMIT_TOL: f64 = 1e-9;
/// Default half-width of the partial-limit probe window.
pub const DEFAULT_WINDOW_RADIUS: i64 = 8;
